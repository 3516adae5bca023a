#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ispcav/estimate.hpp"
#include "ispcav/graph.hpp"
#include "ispcav/mis.hpp"
#include "ispcav/model.hpp"
#include "ispcav/parallel.hpp"
#include "ispcav/rng.hpp"

namespace ispcav {

// Estimators over the graph disorder. Graph k is generated from
// rng.substream(k), so every estimate is a pure function of (params, seed)
// regardless of the worker count.

namespace detail {
template <typename PerGraph>
EnsembleEstimate over_graphs(std::size_t n, double gamma, std::size_t num_graphs, const RngStream& rng,
                             unsigned workers, PerGraph&& per_graph) {
  if (n == 0) throw ParameterError("n must be positive");
  if (num_graphs == 0) throw ParameterError("num_graphs must be positive");
  if (!(gamma >= 0.0)) throw ParameterError("gamma must be >= 0");
  if (gamma > static_cast<double>(n)) {
    throw ParameterError("gamma = " + std::to_string(gamma) + " exceeds n = " + std::to_string(n));
  }
  const auto values = parallel_map<double>(
      num_graphs, [&](std::size_t k) { return per_graph(generate_graph(n, gamma, rng.substream(k))); }, workers);
  return summarize(values);
}
}  // namespace detail

/// Monte Carlo estimate of ISP_N(gamma) = E[max_sigma H_N(sigma) / N].
inline EnsembleEstimate mean_isp_density(std::size_t n, double gamma, std::size_t num_graphs, const RngStream& rng,
                                         unsigned workers = 0) {
  const auto nd = static_cast<double>(n);
  return detail::over_graphs(n, gamma, num_graphs, rng, workers, [nd](const Graph& g) {
    return static_cast<double>(max_independent_set(g).size) / nd;
  });
}

inline EnsembleEstimate mean_isp_density(std::size_t n, double gamma, std::size_t num_graphs, std::uint64_t seed,
                                         unsigned workers = 0) {
  return mean_isp_density(n, gamma, num_graphs, RngStream(seed), workers);
}

/// Monte Carlo estimate of f_N = E[(1/N) log Z_N].
inline EnsembleEstimate mean_free_energy(std::size_t n, const ModelParams& p, std::size_t num_graphs,
                                         const RngStream& rng, unsigned workers = 0) {
  p.validate_for(n);
  const auto nd = static_cast<double>(n);
  return detail::over_graphs(n, p.gamma, num_graphs, rng, workers,
                             [&p, nd](const Graph& g) { return exact_log_partition(g, p) / nd; });
}

inline EnsembleEstimate mean_free_energy(std::size_t n, const ModelParams& p, std::size_t num_graphs,
                                         std::uint64_t seed, unsigned workers = 0) {
  return mean_free_energy(n, p, num_graphs, RngStream(seed), workers);
}

/// Estimate of E<sigma_1 sigma_2>. The ensemble is exchangeable, so each
/// graph contributes the average of <sigma_i sigma_j> over all pairs i < j.
inline EnsembleEstimate mean_pair_correlation(std::size_t n, const ModelParams& p, std::size_t num_graphs,
                                              const RngStream& rng, unsigned workers = 0) {
  if (n < 2) throw ParameterError("pair correlation needs n >= 2");
  p.validate_for(n);
  return detail::over_graphs(n, p.gamma, num_graphs, rng, workers, [&p, n](const Graph& g) {
    const auto two_point = exact_two_point(g, p);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) sum += two_point[i * n + j];
    }
    return sum / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
  });
}

}  // namespace ispcav
