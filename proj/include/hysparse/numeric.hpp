#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace hysparse {

// Neumaier-compensated running sum. Used for the cumulative edge weight and
// the sum of sampling probabilities, where plain accumulation over 1e5 terms
// would eat into the 1e-10 relative tolerances downstream.
class KahanSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  double value() const { return sum_ + comp_; }

  void reset() { sum_ = comp_ = 0.0; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Shortest-ish round-trippable decimal form. %.17g always round-trips for
// IEEE doubles; stable output matters for replay byte-identity.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace hysparse
