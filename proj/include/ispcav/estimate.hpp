#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "ispcav/errors.hpp"

namespace ispcav {

/// Monte Carlo summary: mean, standard error (sample sd / sqrt(n)), count.
struct EnsembleEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t num_samples = 0;
};

/// Mean and standard error of a sample. Deviations are taken from the first
/// value, so a constant sample reports that value exactly with zero error.
inline EnsembleEstimate summarize(std::span<const double> xs) {
  if (xs.empty()) throw ParameterError("summarize: empty sample");
  const double x0 = xs.front();
  double s1 = 0.0, s2 = 0.0;
  for (double x : xs) {
    const double d = x - x0;
    s1 += d;
    s2 += d * d;
  }
  const auto n = static_cast<double>(xs.size());
  EnsembleEstimate out;
  out.num_samples = xs.size();
  out.mean = x0 + s1 / n;
  if (xs.size() > 1) {
    const double var = std::max(0.0, (s2 - s1 * s1 / n) / (n - 1.0));
    out.std_error = std::sqrt(var / n);
  }
  return out;
}

/// Combined standard error of a difference of independent estimates.
inline double combined_error(const EnsembleEstimate& a, const EnsembleEstimate& b) {
  return std::hypot(a.std_error, b.std_error);
}

}  // namespace ispcav
