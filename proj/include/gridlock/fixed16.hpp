#pragma once
// 16-bit fixed-point emulation for the loop. Signals live in a signed Q format
// with `frac_bits` fractional bits; every arithmetic result is rounded back to
// that format and saturated (never wrapped). Coefficients are stored as 16-bit
// mantissas with their own binary point so small constants such as w0*Ts keep
// full precision. The phase and frequency accumulators are 32 bits wide.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace gridlock::fixed {

struct Context {
  int frac_bits = 14;
  long long saturations = 0;

  std::string q_name() const { return "Q" + std::to_string(16 - frac_bits) + "." + std::to_string(frac_bits); }
};

inline std::int64_t round_shift(std::int64_t v, int shift) {
  if (shift <= 0) return v * (std::int64_t{1} << -shift);
  return (v + (std::int64_t{1} << (shift - 1))) >> shift;
}

inline std::int16_t saturate16(std::int64_t v, Context& ctx) {
  if (v > INT16_MAX) {
    ++ctx.saturations;
    return INT16_MAX;
  }
  if (v < INT16_MIN) {
    ++ctx.saturations;
    return INT16_MIN;
  }
  return static_cast<std::int16_t>(v);
}

inline std::int32_t saturate32(std::int64_t v, Context& ctx) {
  if (v > INT32_MAX) {
    ++ctx.saturations;
    return INT32_MAX;
  }
  if (v < INT32_MIN) {
    ++ctx.saturations;
    return INT32_MIN;
  }
  return static_cast<std::int32_t>(v);
}

// Signal sample in the context's Q format.
class Q16 {
 public:
  Q16() = default;
  Q16(std::int16_t raw, Context* ctx) : raw_(raw), ctx_(ctx) {}

  static Q16 from_double(double v, Context& ctx) {
    return {saturate16(std::llround(std::ldexp(v, ctx.frac_bits)), ctx), &ctx};
  }

  double to_double() const { return std::ldexp(static_cast<double>(raw_), -ctx_->frac_bits); }
  std::int16_t raw() const { return raw_; }
  Context* context() const { return ctx_; }

  friend Q16 operator+(Q16 a, Q16 b) {
    return {saturate16(std::int64_t{a.raw_} + b.raw_, *a.ctx_), a.ctx_};
  }
  friend Q16 operator-(Q16 a, Q16 b) {
    return {saturate16(std::int64_t{a.raw_} - b.raw_, *a.ctx_), a.ctx_};
  }
  friend Q16 operator*(Q16 a, Q16 b) {
    const std::int64_t p = std::int64_t{a.raw_} * b.raw_;
    return {saturate16(round_shift(p, a.ctx_->frac_bits), *a.ctx_), a.ctx_};
  }

 private:
  std::int16_t raw_ = 0;
  Context* ctx_ = nullptr;
};

// value = raw * 2^-shift, with shift chosen so |raw| uses the full 15 bits.
class Coef16 {
 public:
  Coef16() = default;

  static Coef16 from_double(double v) {
    Coef16 c;
    if (v == 0.0) return c;
    int shift = 15 - static_cast<int>(std::ceil(std::log2(std::abs(v)) + 1e-12));
    while (std::llround(std::ldexp(std::abs(v), shift)) > INT16_MAX) --shift;
    c.raw_ = static_cast<std::int16_t>(std::llround(std::ldexp(v, shift)));
    c.shift_ = shift;
    return c;
  }

  double to_double() const { return std::ldexp(static_cast<double>(raw_), -shift_); }
  std::int16_t raw() const { return raw_; }
  int shift() const { return shift_; }

  // Coefficient times signal, result in the signal format.
  friend Q16 operator*(Coef16 c, Q16 s) {
    const std::int64_t p = std::int64_t{c.raw_} * s.raw();
    return {saturate16(round_shift(p, c.shift_), *s.context()), s.context()};
  }

 private:
  std::int16_t raw_ = 0;
  int shift_ = 0;
};

// Angle accumulator: radians with kAngleFrac fractional bits in 32 bits.
inline constexpr int kAngleFrac = 28;

inline std::int32_t angle_from_double(double rad) {
  return static_cast<std::int32_t>(std::llround(std::ldexp(rad, kAngleFrac)));
}
inline double angle_to_double(std::int32_t q) { return std::ldexp(static_cast<double>(q), -kAngleFrac); }

// Coefficient times signal, result in the angle format (32-bit accumulate).
inline std::int32_t mul_to_angle(Coef16 c, Q16 s, Context& ctx) {
  const std::int64_t p = std::int64_t{c.raw()} * s.raw();
  return saturate32(round_shift(p, c.shift() + ctx.frac_bits - kAngleFrac), ctx);
}

// Sine table over one turn (power-of-two size) with linear interpolation.
class TrigTable {
 public:
  TrigTable(std::size_t size, Context& ctx);

  struct Pair {
    Q16 sin;
    Q16 cos;
  };
  Pair lookup(std::int32_t angle) const;
  std::size_t size() const { return table_.size(); }

 private:
  Q16 interp(std::uint32_t turn) const;

  std::vector<std::int16_t> table_;
  int index_bits_ = 10;
  Context* ctx_;
};

}  // namespace gridlock::fixed
