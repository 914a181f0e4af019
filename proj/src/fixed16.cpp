#include "gridlock/fixed16.hpp"

#include <bit>
#include <numbers>

#include "gridlock/error.hpp"

namespace gridlock::fixed {

TrigTable::TrigTable(std::size_t size, Context& ctx) : ctx_(&ctx) {
  if (size < 16 || !std::has_single_bit(size)) {
    throw Error(ErrorCode::InvalidArgument, "trig table size must be a power of two >= 16");
  }
  index_bits_ = std::countr_zero(size);
  table_.resize(size);
  for (std::size_t i = 0; i < size; ++i) {
    const double v = std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(size));
    table_[i] = Q16::from_double(v, ctx).raw();
  }
}

Q16 TrigTable::interp(std::uint32_t turn) const {
  const int frac_bits = 32 - index_bits_;
  const std::uint32_t idx = turn >> frac_bits;
  const std::uint32_t next = (idx + 1) & static_cast<std::uint32_t>(table_.size() - 1);
  const std::int64_t frac = turn & ((std::uint32_t{1} << frac_bits) - 1);
  const std::int64_t a = table_[idx];
  const std::int64_t b = table_[next];
  return {saturate16(a + round_shift((b - a) * frac, frac_bits), *ctx_), ctx_};
}

TrigTable::Pair TrigTable::lookup(std::int32_t angle) const {
  // Turn fraction in 32 bits: angle / (2 pi) * 2^32.
  static const std::int64_t kTurnScale = std::llround(std::ldexp(1.0 / (2.0 * std::numbers::pi), 32));
  const auto turn = static_cast<std::uint32_t>(round_shift(std::int64_t{angle} * kTurnScale, kAngleFrac));
  return {interp(turn), interp(turn + (std::uint32_t{1} << 30))};
}

}  // namespace gridlock::fixed
