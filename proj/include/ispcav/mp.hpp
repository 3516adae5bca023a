#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ispcav/cascade.hpp"
#include "ispcav/directing.hpp"
#include "ispcav/ensemble.hpp"
#include "ispcav/estimate.hpp"
#include "ispcav/math.hpp"
#include "ispcav/model.hpp"
#include "ispcav/parallel.hpp"
#include "ispcav/rng.hpp"
#include "ispcav/sampling.hpp"

namespace ispcav {

/// Monte Carlo estimate of the Mezard-Parisi functional,
///   MP = E log sum_delta v_delta (1 + e^h prod_{j<=r} <e^{-beta eps}>_{X^delta_j})
///      - (gamma/2) E log sum_delta v_delta <e^{-beta eps_1 eps_2}>_{(X^delta_1, X^delta_2)},
/// with value.mean == term_phi0.mean - term_edge.mean.
struct MpEstimate {
  EnsembleEstimate value;
  EnsembleEstimate term_phi0;
  EnsembleEstimate term_edge;
  std::string structure_id;
};

/// <e^{-beta eps}>_x = 1 - x (1 - e^{-beta}), in [e^{-beta}, 1] for x in [0, 1].
inline double spin_average(double x, double beta) { return 1.0 + x * std::expm1(-beta); }

/// <e^{-beta eps_1 eps_2}>_{(x, y)} = 1 - x y (1 - e^{-beta}).
inline double pair_average(double x, double y, double beta) { return 1.0 + x * y * std::expm1(-beta); }

/// Per-replica logarithms: phi0 = log sum_delta v_delta (1 + e^h prod_j ...)
/// and edge = log sum_delta v_delta <e^{-beta eps_1 eps_2}>. The edge entry is
/// not yet multiplied by gamma / 2.
struct MpReplicaTerms {
  double phi0 = 0.0;
  double edge = 0.0;
};

/// `field` holds r realizations over the cascade's leaf grid, `pair` holds 2.
inline MpReplicaTerms mp_replica_terms(const CascadeSample& v, const MagnetizationDraws& field,
                                       const MagnetizationDraws& pair, const ModelParams& p) {
  const std::size_t leaves = v.weights.size();
  if (field.num_indices != leaves || pair.num_indices != leaves || pair.count != 2) {
    throw ParameterError("mp_replica_terms: magnetizations must cover the cascade grid");
  }
  const double a = p.penalty();
  std::vector<double> phi(leaves), edge(leaves);
  for (std::size_t k = 0; k < leaves; ++k) {
    double log_prod = 0.0;
    for (std::size_t j = 0; j < field.count; ++j) log_prod += std::log1p(-a * field.at(j, k));
    phi[k] = v.log_weights[k] + softplus(p.h + log_prod);
    edge[k] = v.log_weights[k] + std::log1p(-a * pair.at(0, k) * pair.at(1, k));
  }
  return {log_sum_exp(phi), log_sum_exp(edge)};
}

/// Text identifier of an MP structure, echoed into result records.
inline std::string describe_structure(const CascadeSpec& cascade, const DirectingSpec& directing) {
  std::ostringstream os;
  os << "K=" << cascade.levels() << ";m=";
  for (std::size_t l = 0; l < cascade.m.size(); ++l) os << (l ? "," : "") << format_double(cascade.m[l]);
  os << ";M=" << cascade.truncation << ";";
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto fold = [&h](double x) { h = detail::mix64(h ^ std::bit_cast<std::uint64_t>(x)); };
  std::function<void(const DirectingNode&)> walk = [&](const DirectingNode& node) {
    if (node.is_leaf()) {
      for (double x : node.leaf->values()) fold(x);
      return;
    }
    for (std::size_t k = 0; k < node.children.size(); ++k) {
      fold(node.weights[k]);
      walk(node.children[k]);
    }
  };
  if (const auto* chain = std::get_if<DegenerateChain>(&directing.variant)) {
    for (double x : chain->base.values()) fold(x);
    os << "directing=degenerate";
  } else {
    walk(std::get<FiniteTree>(directing.variant).root);
    os << "directing=tree";
  }
  os << ";hash=" << std::hex << h;
  return os.str();
}

/// Replica o draws its cascade, r ~ Poisson(gamma) and magnetizations from
/// rng.substream(o).
inline MpEstimate mp_functional(const CascadeSpec& cascade, const DirectingSpec& directing, const ModelParams& p,
                                std::size_t num_outer, const RngStream& rng, unsigned workers = 0) {
  p.validate();
  cascade.validate();
  directing.validate(cascade.levels());
  if (num_outer == 0) throw ParameterError("num_outer must be positive");
  const std::size_t K = cascade.levels(), M = cascade.truncation;

  const auto terms = parallel_map<MpReplicaTerms>(
      num_outer,
      [&](std::size_t o) {
        const auto s = rng.substream(o);
        auto cascade_stream = s.substream(0);
        auto r_stream = s.substream(1);
        const auto v = sample_cascade(cascade, cascade_stream);
        const auto r = sample_poisson(p.gamma, r_stream);
        const auto field = sample_grid_magnetizations(directing, K, M, r, s.substream(2));
        const auto pair = sample_grid_magnetizations(directing, K, M, 2, s.substream(3));
        return mp_replica_terms(v, field, pair, p);
      },
      workers);

  std::vector<double> phi(num_outer), edge(num_outer), value(num_outer);
  for (std::size_t o = 0; o < num_outer; ++o) {
    phi[o] = terms[o].phi0;
    edge[o] = 0.5 * p.gamma * terms[o].edge;
    value[o] = phi[o] - edge[o];
  }
  MpEstimate out;
  out.term_phi0 = summarize(phi);
  out.term_edge = summarize(edge);
  out.value = summarize(value);
  out.value.mean = out.term_phi0.mean - out.term_edge.mean;
  out.structure_id = describe_structure(cascade, directing);
  return out;
}

/// Signed rest-term estimate R = f_N - MP, with the two independent errors
/// combined in quadrature. num_samples reports the smaller sample count.
inline EnsembleEstimate interpolation_residual(std::size_t n, const CascadeSpec& cascade,
                                               const DirectingSpec& directing, const ModelParams& p,
                                               std::size_t num_graphs, std::size_t num_outer, const RngStream& rng,
                                               unsigned workers = 0) {
  const auto f = mean_free_energy(n, p, num_graphs, rng.substream(0), workers);
  const auto mp = mp_functional(cascade, directing, p, num_outer, rng.substream(1), workers);
  EnsembleEstimate out;
  out.mean = f.mean - mp.value.mean;
  out.std_error = combined_error(f, mp.value);
  out.num_samples = std::min(num_graphs, num_outer);
  return out;
}

}  // namespace ispcav
