#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "ispcav/errors.hpp"
#include "ispcav/estimate.hpp"
#include "ispcav/kv.hpp"
#include "ispcav/math.hpp"
#include "ispcav/measure.hpp"
#include "ispcav/model.hpp"
#include "ispcav/parallel.hpp"
#include "ispcav/rng.hpp"
#include "ispcav/sampling.hpp"

namespace ispcav {

/// C(beta, gamma) = 7 (gamma + gamma^3) (e^{2 beta} - 1) exp(gamma (e^{2 beta} - 1)).
/// The T-operator is a certified contraction where C < 1.
inline double contraction_constant(double beta, double gamma) {
  const double e2 = std::expm1(2.0 * beta);
  return 7.0 * (gamma + gamma * gamma * gamma) * e2 * std::exp(gamma * e2);
}

namespace detail {
inline double require_region(double beta, double gamma, const char* who) {
  const double c = contraction_constant(beta, gamma);
  if (!(c < 1.0)) {
    throw OutsideRegionError(std::string(who) + ": C(beta, gamma) = " + std::to_string(c) +
                             " >= 1 at beta = " + std::to_string(beta) + ", gamma = " + std::to_string(gamma));
  }
  return c;
}
}  // namespace detail

/// min{(1 - C(beta, gamma))^{-1}, (1 - C(beta, gamma'))^{-1}}: the Lipschitz
/// constant of gamma -> nu_star(gamma) in W1.
inline double continuity_constant(double beta, double gamma, double gamma_prime) {
  const double c1 = detail::require_region(beta, gamma, "continuity_constant");
  const double c2 = detail::require_region(beta, gamma_prime, "continuity_constant");
  return std::min(1.0 / (1.0 - c1), 1.0 / (1.0 - c2));
}

struct CavityConstants {
  double b = 0.0;
  double b_star = 0.0;
};

/// B = gamma / (1 - C), B* = (gamma^2 e^{2 beta} C / 2) / (1 - C).
inline CavityConstants cavity_constants(double beta, double gamma) {
  const double c = detail::require_region(beta, gamma, "cavity_constants");
  return {gamma / (1.0 - c), 0.5 * gamma * gamma * std::exp(2.0 * beta) * c / (1.0 - c)};
}

/// One draw from T(nu): (1 + e^{-h} prod_{i<=r} (1 - (1 - e^{-beta}) X_i)^{-1})^{-1}
/// with r ~ Poisson(gamma) and X_i uniform over the atoms of nu.
inline double cavity_field_draw(const EmpiricalMeasure& nu, const ModelParams& p, RngStream& rng) {
  const double a = p.penalty();
  const auto r = sample_poisson(p.gamma, rng);
  double log_prod = 0.0;
  for (std::uint64_t i = 0; i < r; ++i) log_prod += std::log1p(-a * nu[rng.uniform_index(nu.size())]);
  return logistic(p.h + log_prod);
}

/// Population-dynamics image of nu under the T-operator. Atom k draws from
/// rng.substream(k); applying this to two populations of equal size with the
/// same stream reuses every r and every atom index, i.e. the quantile
/// coupling of the inputs.
inline EmpiricalMeasure apply_T(const EmpiricalMeasure& nu, const ModelParams& p, std::size_t pop_size,
                                const RngStream& rng, unsigned workers = 0) {
  p.validate();
  if (pop_size == 0) throw ParameterError("pop_size must be positive");
  auto values = parallel_map<double>(
      pop_size,
      [&](std::size_t k) {
        auto s = rng.substream(k);
        return cavity_field_draw(nu, p, s);
      },
      workers);
  return EmpiricalMeasure(std::move(values));
}

enum class InitialPopulation { uniform_grid, all_zero, all_one };

struct FixpointReport {
  std::size_t iterations = 0;
  double final_step_distance = 0.0;
  double contraction_constant = 0.0;
  bool converged = false;
  std::size_t population_size = 0;
  /// C(beta, gamma) < 1; outside, the result is not covered by the
  /// contraction argument.
  bool certified = false;
};

struct Fixpoint {
  EmpiricalMeasure population;
  FixpointReport report;
};

/// Iterates nu <- T(nu) from the chosen initial population until the W1 step
/// between successive populations is <= tol or max_iter is hit. Iteration t
/// uses rng.substream(t). Non-convergence is reported, not thrown.
inline Fixpoint solve_fixpoint(const ModelParams& p, std::size_t pop_size, double tol, std::size_t max_iter,
                               const RngStream& rng, InitialPopulation init = InitialPopulation::uniform_grid,
                               unsigned workers = 0) {
  p.validate();
  if (pop_size == 0) throw ParameterError("pop_size must be positive");
  if (!(tol > 0.0)) throw ParameterError("tol must be positive");
  if (max_iter == 0) throw ParameterError("max_iter must be positive");

  EmpiricalMeasure current = [&] {
    switch (init) {
      case InitialPopulation::all_zero: return EmpiricalMeasure::point_mass(0.0, pop_size);
      case InitialPopulation::all_one: return EmpiricalMeasure::point_mass(1.0, pop_size);
      default: return EmpiricalMeasure::uniform_grid(pop_size);
    }
  }();

  FixpointReport report;
  report.population_size = pop_size;
  report.contraction_constant = contraction_constant(p.beta, p.gamma);
  report.certified = report.contraction_constant < 1.0;

  // With beta = 0 or gamma = 0 the operator ignores its argument, so its first
  // image is already the fixpoint.
  if (p.beta == 0.0 || p.gamma == 0.0) {
    report.iterations = 1;
    report.final_step_distance = 0.0;
    report.converged = true;
    return {apply_T(current, p, pop_size, rng.substream(1), workers), report};
  }

  for (std::size_t t = 1; t <= max_iter; ++t) {
    EmpiricalMeasure next = apply_T(current, p, pop_size, rng.substream(t), workers);
    report.iterations = t;
    report.final_step_distance = wasserstein1(current, next);
    current = std::move(next);
    if (report.final_step_distance <= tol) {
      report.converged = true;
      break;
    }
  }
  return {std::move(current), report};
}

/// W1(T mu, T nu) / W1(mu, nu) under common randomness, or nothing when the
/// inputs are closer than 1e-6.
inline std::optional<double> coupled_contraction_ratio(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                                                       const ModelParams& p, const RngStream& rng,
                                                       unsigned workers = 0) {
  if (mu.size() != nu.size()) throw ParameterError("coupled_contraction_ratio: populations must have equal size");
  const double before = wasserstein1(mu, nu);
  if (before < 1e-6) return std::nullopt;
  const auto tmu = apply_T(mu, p, mu.size(), rng, workers);
  const auto tnu = apply_T(nu, p, nu.size(), rng, workers);
  return wasserstein1(tmu, tnu) / before;
}

namespace detail {
/// Population of i.i.d. draws u^c with a random exponent c in [e^{-1.5}, e^{1.5}].
inline EmpiricalMeasure random_population(std::size_t size, RngStream rng) {
  const double c = std::exp(3.0 * rng.uniform() - 1.5);
  std::vector<double> v(size);
  for (auto& x : v) x = std::pow(rng.uniform(), c);
  return EmpiricalMeasure(std::move(v));
}
}  // namespace detail

/// Max over num_pairs random population pairs of the coupled contraction
/// ratio; pairs closer than 1e-6 are skipped (0 if all are skipped).
inline double empirical_contraction_check(const ModelParams& p, std::size_t num_pairs, std::size_t pop_size,
                                          const RngStream& rng, unsigned workers = 0) {
  p.validate();
  double worst = 0.0;
  for (std::size_t k = 0; k < num_pairs; ++k) {
    const auto pair = rng.substream(k);
    const auto mu = detail::random_population(pop_size, pair.substream(0));
    const auto nu = detail::random_population(pop_size, pair.substream(1));
    if (auto ratio = coupled_contraction_ratio(mu, nu, p, pair.substream(2), workers)) worst = std::max(worst, *ratio);
  }
  return worst;
}

enum class SignConvention { minus_b };

/// Replica-symmetric free energy f = A - B with
///   A = E log(1 + e^h prod_{i<=r} (1 - X_i (1 - e^{-beta})))
///   B = (gamma / 2) E log(1 - (1 - e^{-beta}) X_1 X_2).
/// B is non-positive, so subtracting it raises f above A.
struct RsFreeEnergy {
  EnsembleEstimate total;
  EnsembleEstimate term_a;
  EnsembleEstimate term_b;
  SignConvention sign_convention = SignConvention::minus_b;
};

inline RsFreeEnergy rs_free_energy(const EmpiricalMeasure& nu_star, const ModelParams& p, std::size_t num_samples,
                                   const RngStream& rng, unsigned workers = 0) {
  p.validate();
  if (num_samples == 0) throw ParameterError("num_samples must be positive");
  const double a = p.penalty();
  struct Sample {
    double a_term = 0.0, b_term = 0.0;
  };
  const auto samples = parallel_map<Sample>(
      num_samples,
      [&](std::size_t k) {
        auto s = rng.substream(k);
        const auto r = sample_poisson(p.gamma, s);
        double log_prod = 0.0;
        for (std::uint64_t i = 0; i < r; ++i) log_prod += std::log1p(-a * nu_star[s.uniform_index(nu_star.size())]);
        const double x1 = nu_star[s.uniform_index(nu_star.size())];
        const double x2 = nu_star[s.uniform_index(nu_star.size())];
        return Sample{softplus(p.h + log_prod), 0.5 * p.gamma * std::log1p(-a * x1 * x2)};
      },
      workers);
  std::vector<double> as(num_samples), bs(num_samples), ts(num_samples);
  for (std::size_t k = 0; k < num_samples; ++k) {
    as[k] = samples[k].a_term;
    bs[k] = samples[k].b_term;
    ts[k] = samples[k].a_term - samples[k].b_term;
  }
  RsFreeEnergy out;
  out.term_a = summarize(as);
  out.term_b = summarize(bs);
  out.total = summarize(ts);
  out.total.mean = out.term_a.mean - out.term_b.mean;
  return out;
}

struct IspCell {
  double beta = 0.0;
  double h = 0.0;
  EnsembleEstimate free_energy;
  double f_over_h = 0.0;
  double f_over_h_error = 0.0;
  double contraction_constant = 0.0;
  bool converged = false;
  /// C(beta, gamma) >= 1: outside the certified replica-symmetric region.
  bool extrapolated = false;
};

struct IspSchedule {
  std::size_t pop_size = 100000;
  std::size_t num_samples = 100000;
  double tol = 2e-3;
  std::size_t max_iter = 200;
};

/// f(beta, h, gamma) / h over the (beta, h) grid, the finite-temperature
/// proxy for the independence ratio. Every cell reuses the same streams, so
/// neighbouring cells are compared under common random numbers.
inline std::vector<IspCell> rs_isp_density(double gamma, const std::vector<double>& betas,
                                           const std::vector<double>& hs, const IspSchedule& schedule,
                                           const RngStream& rng, unsigned workers = 0) {
  auto increasing = [](const std::vector<double>& v) {
    for (std::size_t k = 1; k < v.size(); ++k) {
      if (!(v[k] > v[k - 1])) return false;
    }
    return !v.empty();
  };
  if (!increasing(betas)) throw ParameterError("beta schedule must be non-empty and strictly increasing");
  if (!increasing(hs)) throw ParameterError("h schedule must be non-empty and strictly increasing");
  if (!(hs.front() > 0.0)) throw ParameterError("h schedule must be positive");

  std::vector<IspCell> cells;
  for (double beta : betas) {
    for (double h : hs) {
      const ModelParams p{beta, h, gamma};
      p.validate();
      const auto fix = solve_fixpoint(p, schedule.pop_size, schedule.tol, schedule.max_iter, rng.substream(0),
                                      InitialPopulation::uniform_grid, workers);
      const auto f = rs_free_energy(fix.population, p, schedule.num_samples, rng.substream(1), workers);
      IspCell cell;
      cell.beta = beta;
      cell.h = h;
      cell.free_energy = f.total;
      cell.f_over_h = f.total.mean / h;
      cell.f_over_h_error = f.total.std_error / h;
      cell.contraction_constant = fix.report.contraction_constant;
      cell.converged = fix.report.converged;
      cell.extrapolated = !fix.report.certified;
      cells.push_back(cell);
    }
  }
  return cells;
}

// Fixpoint checkpoints: the population in the measure text format plus a
// `key = value` sidecar with the parameters and solver state.

struct FixpointMetadata {
  ModelParams params;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  std::size_t pop_size = 0;
  double tol = 0.0;
  bool converged = false;
  double final_step_distance = 0.0;
};

inline void save_fixpoint(const std::string& population_path, const std::string& metadata_path,
                          const EmpiricalMeasure& population, const FixpointMetadata& meta) {
  save_measure(population_path, population);
  KeyValues kv{{"beta", format_double(meta.params.beta)},
               {"h", format_double(meta.params.h)},
               {"gamma", format_double(meta.params.gamma)},
               {"iterations", std::to_string(meta.iterations)},
               {"seed", std::to_string(meta.seed)},
               {"pop_size", std::to_string(meta.pop_size)},
               {"tol", format_double(meta.tol)},
               {"converged", meta.converged ? "true" : "false"},
               {"final_step_distance", format_double(meta.final_step_distance)}};
  std::ofstream os(metadata_path);
  if (!os) throw IoError("cannot open " + metadata_path + " for writing");
  write_key_values(os, kv);
  if (!os) throw IoError("write failed: " + metadata_path);
}

inline FixpointMetadata load_fixpoint_metadata(const std::string& metadata_path) {
  const auto kv = load_key_values(metadata_path);
  auto get = [&](const char* key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw ParameterError(std::string("fixpoint metadata: missing key '") + key + "'");
    return it->second;
  };
  FixpointMetadata meta;
  meta.params = {std::stod(get("beta")), std::stod(get("h")), std::stod(get("gamma"))};
  meta.iterations = std::stoull(get("iterations"));
  meta.seed = std::stoull(get("seed"));
  meta.pop_size = std::stoull(get("pop_size"));
  meta.tol = std::stod(get("tol"));
  meta.converged = get("converged") == "true";
  meta.final_step_distance = std::stod(get("final_step_distance"));
  return meta;
}

}  // namespace ispcav
