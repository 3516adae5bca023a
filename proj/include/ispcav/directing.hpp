#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ispcav/cascade.hpp"
#include "ispcav/errors.hpp"
#include "ispcav/measure.hpp"
#include "ispcav/rng.hpp"

namespace ispcav {

/// Node of a finitely supported directing measure. A leaf is a measure on
/// [0, 1]; an inner node is a discrete law over its children (a random pick
/// of one child, not the mixture of them).
struct DirectingNode {
  std::optional<EmpiricalMeasure> leaf;
  std::vector<double> weights;
  std::vector<DirectingNode> children;

  static DirectingNode make_leaf(EmpiricalMeasure m) {
    DirectingNode node;
    node.leaf = std::move(m);
    return node;
  }
  static DirectingNode make_choice(std::vector<double> w, std::vector<DirectingNode> c) {
    DirectingNode node;
    node.weights = std::move(w);
    node.children = std::move(c);
    return node;
  }

  bool is_leaf() const noexcept { return leaf.has_value(); }

  /// Child index for a uniform draw u in [0, 1).
  std::size_t pick(double u) const {
    double cdf = 0.0;
    for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
      cdf += weights[k];
      if (u < cdf) return k;
    }
    return weights.size() - 1;
  }
};

/// zeta = law of delta_{delta_{... delta_Y}} with Y ~ base: the randomness is
/// drawn once at the root, so within one realization every X^delta equals the
/// same Y. This is the replica-symmetric structure.
struct DegenerateChain {
  EmpiricalMeasure base;
};

/// A K-level directing measure given as a finite tree with K levels of
/// random choices above the leaf measures.
struct FiniteTree {
  DirectingNode root;
};

struct DirectingSpec {
  std::variant<DegenerateChain, FiniteTree> variant;

  static DirectingSpec degenerate(EmpiricalMeasure base) { return {DegenerateChain{std::move(base)}}; }
  static DirectingSpec tree(DirectingNode root) { return {FiniteTree{std::move(root)}}; }

  bool is_degenerate() const noexcept { return std::holds_alternative<DegenerateChain>(variant); }

  /// Checks weights and that every leaf sits exactly `levels` choices deep.
  void validate(std::size_t levels) const {
    if (is_degenerate()) return;
    check_node(std::get<FiniteTree>(variant).root, levels);
  }

private:
  static void check_node(const DirectingNode& node, std::size_t depth) {
    if (depth == 0) {
      if (!node.is_leaf()) throw ParameterError("directing tree: expected a leaf measure at depth K");
      return;
    }
    if (node.is_leaf()) throw ParameterError("directing tree: leaf measure above depth K");
    if (node.weights.empty() || node.weights.size() != node.children.size()) {
      throw ParameterError("directing tree: each inner node needs one positive weight per child");
    }
    double sum = 0.0;
    for (double w : node.weights) {
      if (!(w > 0.0)) throw ParameterError("directing tree: weights must be positive");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ParameterError("directing tree: weights must sum to 1");
    for (const auto& c : node.children) check_node(c, depth - 1);
  }
};

/// Quenched magnetizations X^delta_j: `count` independent realizations (j)
/// for each requested multi-index.
struct MagnetizationDraws {
  std::size_t count = 0;
  std::size_t num_indices = 0;
  std::vector<double> values;  // values[j * num_indices + idx]

  double at(std::size_t j, std::size_t idx) const { return values[j * num_indices + idx]; }
};

namespace detail {

/// Stream for a tree position: realization stream -> level -> prefix entries.
/// Keying by the prefix makes a draw independent of which other indices are
/// requested.
inline RngStream prefix_stream(const RngStream& realization, const MultiIndex& delta, std::size_t length) {
  RngStream s = realization.substream(length);
  for (std::size_t l = 0; l < length; ++l) s = s.substream(delta[l]);
  return s;
}

inline double sample_tree_magnetization(const DirectingNode& root, const MultiIndex& delta, const RngStream& realization,
                                        std::map<MultiIndex, const DirectingNode*>& cache) {
  const std::size_t K = delta.size();
  // eta_empty ~ zeta, then eta_{i^l} ~ eta_{i^{l-1}} for l = 1..K-1.
  const DirectingNode* node = nullptr;
  MultiIndex prefix;
  for (std::size_t l = 0; l < K; ++l) {
    if (l > 0) prefix.push_back(delta[l - 1]);
    auto it = cache.find(prefix);
    if (it != cache.end()) {
      node = it->second;
      continue;
    }
    const DirectingNode& parent = l == 0 ? root : *node;
    auto s = prefix_stream(realization, delta, l);
    node = &parent.children[parent.pick(s.uniform())];
    cache.emplace(prefix, node);
  }
  // X^delta ~ the leaf measure chosen for delta's (K-1)-prefix.
  auto s = prefix_stream(realization, delta, K);
  const auto& leaf = *node->leaf;
  return leaf[s.uniform_index(leaf.size())];
}

}  // namespace detail

/// Hierarchical sampling of the quenched magnetizations driven by `spec`.
/// Indices sharing a prefix of length l share the level-<=l ancestors; values
/// under a common leaf measure are conditionally i.i.d. Realization j uses
/// rng.substream(j).
inline MagnetizationDraws sample_magnetizations(const DirectingSpec& spec, const std::vector<MultiIndex>& indices,
                                                std::size_t count, const RngStream& rng) {
  MagnetizationDraws out;
  out.count = count;
  out.num_indices = indices.size();
  out.values.resize(count * indices.size());
  if (indices.empty()) return out;
  const std::size_t K = indices.front().size();
  for (const auto& d : indices) {
    if (d.size() != K || K == 0) throw ParameterError("sample_magnetizations: indices must share one depth K >= 1");
  }
  spec.validate(K);

  for (std::size_t j = 0; j < count; ++j) {
    const RngStream realization = rng.substream(j);
    if (const auto* chain = std::get_if<DegenerateChain>(&spec.variant)) {
      auto s = realization.substream(0);
      const double y = chain->base[s.uniform_index(chain->base.size())];
      for (std::size_t idx = 0; idx < indices.size(); ++idx) out.values[j * indices.size() + idx] = y;
      continue;
    }
    const auto& root = std::get<FiniteTree>(spec.variant).root;
    std::map<MultiIndex, const DirectingNode*> cache;
    for (std::size_t idx = 0; idx < indices.size(); ++idx) {
      out.values[j * indices.size() + idx] = detail::sample_tree_magnetization(root, indices[idx], realization, cache);
    }
  }
  return out;
}

/// Magnetizations for the whole truncated M^K grid (flat order). Produces the
/// same values as sample_magnetizations(spec, full_grid(K, M), count, rng),
/// walking the tree level by level instead of index by index.
inline MagnetizationDraws sample_grid_magnetizations(const DirectingSpec& spec, std::size_t levels,
                                                     std::size_t truncation, std::size_t count, const RngStream& rng) {
  if (levels == 0) throw ParameterError("sample_grid_magnetizations: K must be >= 1");
  spec.validate(levels);
  std::size_t leaves = 1;
  for (std::size_t l = 0; l < levels; ++l) leaves *= truncation;
  MagnetizationDraws out;
  out.count = count;
  out.num_indices = leaves;
  out.values.resize(count * leaves);
  for (std::size_t j = 0; j < count; ++j) {
    const RngStream realization = rng.substream(j);
    double* row = out.values.data() + j * leaves;
    if (const auto* chain = std::get_if<DegenerateChain>(&spec.variant)) {
      auto s = realization.substream(0);
      std::fill(row, row + leaves, chain->base[s.uniform_index(chain->base.size())]);
      continue;
    }
    const auto& root = std::get<FiniteTree>(spec.variant).root;
    // nodes[p]: tree node chosen for the length-l prefix with flat index p.
    std::vector<const DirectingNode*> nodes;
    {
      auto s = realization.substream(0);
      nodes.push_back(&root.children[root.pick(s.uniform())]);
    }
    for (std::size_t l = 1; l < levels; ++l) {
      std::vector<const DirectingNode*> next;
      std::vector<RngStream> streams(1, realization.substream(l));
      for (std::size_t depth = 0; depth < l; ++depth) {
        std::vector<RngStream> deeper;
        deeper.reserve(streams.size() * truncation);
        for (const auto& st : streams) {
          for (std::size_t i = 0; i < truncation; ++i) deeper.push_back(st.substream(i));
        }
        streams = std::move(deeper);
      }
      next.reserve(streams.size());
      for (std::size_t q = 0; q < streams.size(); ++q) {
        const DirectingNode& parent = *nodes[q / truncation];
        auto s = streams[q];
        next.push_back(&parent.children[parent.pick(s.uniform())]);
      }
      nodes = std::move(next);
    }
    std::vector<RngStream> streams(1, realization.substream(levels));
    for (std::size_t depth = 0; depth < levels; ++depth) {
      std::vector<RngStream> deeper;
      deeper.reserve(streams.size() * truncation);
      for (const auto& st : streams) {
        for (std::size_t i = 0; i < truncation; ++i) deeper.push_back(st.substream(i));
      }
      streams = std::move(deeper);
    }
    for (std::size_t k = 0; k < leaves; ++k) {
      const auto& leaf = *nodes[k / truncation]->leaf;
      row[k] = leaf[streams[k].uniform_index(leaf.size())];
    }
  }
  return out;
}

/// Every multi-index of the truncated M^K grid in flat order.
inline std::vector<MultiIndex> full_grid(std::size_t levels, std::size_t truncation) {
  std::size_t total = 1;
  for (std::size_t l = 0; l < levels; ++l) total *= truncation;
  std::vector<MultiIndex> out;
  out.reserve(total);
  for (std::size_t k = 0; k < total; ++k) out.push_back(multi_index(k, levels, truncation));
  return out;
}

}  // namespace ispcav
