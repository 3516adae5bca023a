#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ispcav/errors.hpp"
#include "ispcav/math.hpp"
#include "ispcav/rng.hpp"

namespace ispcav {

/// K-level Derrida-Ruelle cascade parameters: 0 < m_1 < ... < m_K < 1 and
/// `truncation` atoms kept per node.
struct CascadeSpec {
  std::vector<double> m;
  std::size_t truncation = 64;
  /// Constant c in the level intensity c * t^{-m-1} dt. It rescales every
  /// point of a level by the same factor and cancels on normalization.
  double intensity_scale = 1.0;

  std::size_t levels() const noexcept { return m.size(); }

  void validate() const {
    if (m.empty()) throw ParameterError("m: cascade needs at least one level");
    for (std::size_t l = 0; l < m.size(); ++l) {
      if (!(m[l] > 0.0 && m[l] < 1.0)) throw ParameterError("m: every entry must lie in (0, 1)");
      if (l > 0 && !(m[l] > m[l - 1])) throw ParameterError("m: entries must be strictly increasing");
    }
    if (truncation < 2) throw ParameterError("truncation: need at least 2 atoms per node");
    if (!(intensity_scale > 0.0)) throw ParameterError("intensity_scale must be positive");
    double leaves = 1.0;
    for (std::size_t l = 0; l < m.size(); ++l) leaves *= static_cast<double>(truncation);
    if (leaves > 1e7) throw ParameterError("truncation^K exceeds 1e7 leaves");
  }

  std::size_t num_leaves() const noexcept {
    std::size_t n = 1;
    for (std::size_t l = 0; l < m.size(); ++l) n *= truncation;
    return n;
  }
};

/// K-deep multi-index (each entry < truncation).
using MultiIndex = std::vector<std::size_t>;

/// Flat leaf position of a multi-index, first level most significant.
inline std::size_t flat_index(const MultiIndex& delta, std::size_t truncation) {
  std::size_t k = 0;
  for (auto i : delta) k = k * truncation + i;
  return k;
}

inline MultiIndex multi_index(std::size_t flat, std::size_t levels, std::size_t truncation) {
  MultiIndex delta(levels);
  for (std::size_t l = levels; l-- > 0;) {
    delta[l] = flat % truncation;
    flat /= truncation;
  }
  return delta;
}

/// Normalized cascade weights v_delta over the truncated M^K grid, stored by
/// flat index.
struct CascadeSample {
  std::size_t levels = 0;
  std::size_t truncation = 0;
  std::vector<double> weights;
  std::vector<double> log_weights;

  double weight(const MultiIndex& delta) const { return weights.at(flat_index(delta, truncation)); }
};

/// One realization of the truncated cascade. Each node at level l carries
/// the `truncation` largest points of a Poisson process with intensity
/// c t^{-m_l - 1} dt, generated as (c / (m_l Gamma_j))^{1/m_l} with Gamma_j
/// the partial sums of standard exponentials (so they come out in decreasing
/// order). Leaf weights multiply along the path and are normalized in log
/// space.
inline CascadeSample sample_cascade(const CascadeSpec& spec, RngStream& rng) {
  spec.validate();
  const std::size_t M = spec.truncation;
  const std::size_t K = spec.levels();
  CascadeSample out;
  out.levels = K;
  out.truncation = M;
  out.log_weights.assign(1, 0.0);
  for (std::size_t l = 0; l < K; ++l) {
    const double ml = spec.m[l];
    const double log_c = std::log(spec.intensity_scale / ml);
    std::vector<double> next;
    next.reserve(out.log_weights.size() * M);
    for (double parent : out.log_weights) {
      double gamma_sum = 0.0;
      for (std::size_t j = 0; j < M; ++j) {
        gamma_sum += rng.exponential();
        next.push_back(parent + (log_c - std::log(gamma_sum)) / ml);
      }
    }
    out.log_weights = std::move(next);
  }
  const double norm = log_sum_exp(out.log_weights);
  out.weights.resize(out.log_weights.size());
  for (std::size_t k = 0; k < out.log_weights.size(); ++k) {
    out.log_weights[k] -= norm;
    out.weights[k] = std::exp(out.log_weights[k]);
  }
  return out;
}

}  // namespace ispcav
