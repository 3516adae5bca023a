#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ispcav/errors.hpp"

namespace ispcav {

/// Equal-weight population on [0, 1], kept sorted ascending. Immutable.
class EmpiricalMeasure {
public:
  explicit EmpiricalMeasure(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw ParameterError("empirical measure needs at least one atom");
    for (double v : values_) {
      if (!(v >= 0.0 && v <= 1.0)) throw ParameterError("empirical measure atoms must lie in [0, 1]");
    }
    std::sort(values_.begin(), values_.end());
  }

  static EmpiricalMeasure point_mass(double x, std::size_t size = 1) {
    return EmpiricalMeasure(std::vector<double>(size, x));
  }

  /// Atoms (k + 1/2) / size for k < size.
  static EmpiricalMeasure uniform_grid(std::size_t size) {
    if (size == 0) throw ParameterError("grid size must be positive");
    std::vector<double> v(size);
    for (std::size_t k = 0; k < size; ++k) v[k] = (static_cast<double>(k) + 0.5) / static_cast<double>(size);
    return EmpiricalMeasure(std::move(v));
  }

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }

  double mean() const noexcept {
    double s = 0.0;
    for (double v : values_) s += v;
    return s / static_cast<double>(values_.size());
  }

  friend bool operator==(const EmpiricalMeasure&, const EmpiricalMeasure&) = default;

private:
  std::vector<double> values_;
};

namespace detail {

/// W1 as the integral of |F - G| over the merged breakpoints. Exact for any
/// pair of empirical measures on the line.
inline double wasserstein1_cdf(std::span<const double> a, std::span<const double> b) {
  const double wa = 1.0 / static_cast<double>(a.size());
  const double wb = 1.0 / static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double fa = 0.0, fb = 0.0, total = 0.0;
  double x = std::min(a.front(), b.front());
  while (i < a.size() || j < b.size()) {
    const double next = j == b.size() || (i < a.size() && a[i] <= b[j]) ? a[i] : b[j];
    total += std::abs(fa - fb) * (next - x);
    x = next;
    while (i < a.size() && a[i] == x) {
      ++i;
      fa = static_cast<double>(i) * wa;
    }
    while (j < b.size() && b[j] == x) {
      ++j;
      fb = static_cast<double>(j) * wb;
    }
  }
  return total;
}

inline double wasserstein1_sorted(std::span<const double> a, std::span<const double> b) {
  double total = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) total += std::abs(a[k] - b[k]);
  return total / static_cast<double>(a.size());
}

}  // namespace detail

/// Monge-Kantorovich (Wasserstein-1) distance between empirical measures.
/// Equal sizes use the sorted (quantile) coupling; unequal sizes integrate
/// the CDF difference.
inline double wasserstein1(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  if (mu.size() == nu.size()) return detail::wasserstein1_sorted(mu.values(), nu.values());
  return detail::wasserstein1_cdf(mu.values(), nu.values());
}

// Checkpoint format: one value per line, 17 significant digits, sorted.

inline std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline void write_measure(std::ostream& os, const EmpiricalMeasure& m) {
  for (double v : m.values()) os << format_double(v) << '\n';
}

inline EmpiricalMeasure read_measure(std::istream& is) {
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    double v = 0.0;
    const auto res = std::from_chars(line.data(), line.data() + line.size(), v);
    if (res.ec != std::errc{} || res.ptr != line.data() + line.size()) {
      throw ParameterError("measure file: bad value on line " + std::to_string(lineno));
    }
    values.push_back(v);
  }
  return EmpiricalMeasure(std::move(values));
}

inline void save_measure(const std::string& path, const EmpiricalMeasure& m) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_measure(os, m);
  if (!os) throw IoError("write failed: " + path);
}

inline EmpiricalMeasure load_measure(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  return read_measure(is);
}

}  // namespace ispcav
