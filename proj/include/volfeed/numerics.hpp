#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace volfeed {

// Kahan-Babuska (Neumaier) compensated accumulator. Long sums of small
// returns lose digits under plain addition; the compensation term keeps the
// error independent of the series length.
struct NeumaierSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }

  double value() const { return sum + comp; }
};

inline double compensated_mean(std::span<const double> xs) {
  NeumaierSum s;
  for (double x : xs) s.add(x);
  return xs.empty() ? 0.0 : s.value() / static_cast<double>(xs.size());
}

}  // namespace volfeed
