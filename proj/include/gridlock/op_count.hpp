#pragma once
// A double wrapper that tallies arithmetic, used to audit the per-sample cost
// of the filter and loop updates (multiplications and additions; negation,
// comparisons and trigonometric lookups are free).

namespace gridlock {

struct OpCount {
  int mults = 0;
  int adds = 0;
  friend bool operator==(const OpCount&, const OpCount&) = default;
};

class Counted {
 public:
  Counted() = default;
  Counted(double v) : v_(v) {}  // NOLINT(google-explicit-constructor)

  double value() const { return v_; }

  static OpCount& tally() {
    thread_local OpCount t;
    return t;
  }
  static void reset() { tally() = {}; }

  friend Counted operator+(Counted a, Counted b) {
    ++tally().adds;
    return a.v_ + b.v_;
  }
  friend Counted operator-(Counted a, Counted b) {
    ++tally().adds;
    return a.v_ - b.v_;
  }
  friend Counted operator*(Counted a, Counted b) {
    ++tally().mults;
    return a.v_ * b.v_;
  }
  Counted operator-() const { return -v_; }
  friend bool operator<(Counted a, Counted b) { return a.v_ < b.v_; }
  friend bool operator>=(Counted a, Counted b) { return a.v_ >= b.v_; }

 private:
  double v_ = 0.0;
};

}  // namespace gridlock
