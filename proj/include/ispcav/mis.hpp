#pragma once

#include <cstddef>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "ispcav/graph.hpp"
#include "ispcav/model.hpp"

namespace ispcav {

struct MisResult {
  std::size_t size = 0;
  SpinConfig witness;
};

namespace detail {

/// Exact maximum independent set by branch and bound: branch on a
/// maximum-degree vertex, bound by a greedy clique cover (a greedy colouring
/// of the complement graph).
class MisSearch {
public:
  using Set = boost::dynamic_bitset<>;

  explicit MisSearch(const Graph& g) : n_(g.num_vertices()) {
    adj_.assign(n_, Set(n_));
    for (const auto& [i, j] : g.edges()) {
      adj_[i].set(j);
      adj_[j].set(i);
    }
  }

  Set all() const {
    Set s(n_);
    s.set();
    return s;
  }
  const Set& neighbors(std::size_t v) const { return adj_[v]; }

  /// Independence number of the subgraph induced by `allowed`.
  std::size_t maximum(const Set& allowed) {
    best_ = 0;
    target_ = 0;
    search(allowed, 0);
    return best_;
  }

  /// Whether the subgraph induced by `allowed` has an independent set of
  /// size >= need.
  bool reaches(const Set& allowed, std::size_t need) {
    if (need == 0) return true;
    best_ = 0;
    target_ = need;
    search(allowed, 0);
    return best_ >= need;
  }

private:
  std::size_t clique_cover_bound(const Set& p) const {
    // candidates[k]: vertices adjacent to every member of clique k
    std::vector<Set> candidates;
    for (auto v = p.find_first(); v != Set::npos; v = p.find_next(v)) {
      bool placed = false;
      for (auto& c : candidates) {
        if (c.test(v)) {
          c &= adj_[v];
          placed = true;
          break;
        }
      }
      if (!placed) candidates.push_back(adj_[v] & p);
    }
    return candidates.size();
  }

  void search(Set p, std::size_t taken) {
    if (target_ != 0 && best_ >= target_) return;
    // Vertices of degree <= 1 within p belong to some maximum set.
    bool reduced = true;
    while (reduced) {
      reduced = false;
      for (auto v = p.find_first(); v != Set::npos; v = p.find_next(v)) {
        if ((adj_[v] & p).count() <= 1) {
          p -= adj_[v];
          p.reset(v);
          ++taken;
          reduced = true;
        }
      }
    }
    if (p.none()) {
      if (taken > best_) best_ = taken;
      return;
    }
    const std::size_t bound = taken + clique_cover_bound(p);
    if (bound <= best_ || (target_ != 0 && bound < target_)) return;

    std::size_t pivot = p.find_first(), pivot_degree = 0;
    for (auto v = p.find_first(); v != Set::npos; v = p.find_next(v)) {
      const std::size_t d = (adj_[v] & p).count();
      if (d > pivot_degree) {
        pivot = v;
        pivot_degree = d;
      }
    }
    Set with = p - adj_[pivot];
    with.reset(pivot);
    search(with, taken + 1);
    p.reset(pivot);
    search(p, taken);
  }

  std::size_t n_;
  std::vector<Set> adj_;
  std::size_t best_ = 0;
  std::size_t target_ = 0;
};

}  // namespace detail

/// Maximum independent set with the lexicographically smallest witness among
/// all maximum ones: vertices are fixed in index order, preferring sigma_v = 0
/// whenever the remaining graph can still reach the optimum.
inline MisResult max_independent_set(const Graph& g) {
  const std::size_t n = g.num_vertices();
  detail::MisSearch search(g);
  MisResult out;
  out.witness = SpinConfig::zeros(n);
  if (n == 0) return out;

  auto allowed = search.all();
  out.size = search.maximum(allowed);
  std::size_t need = out.size;
  for (std::size_t v = 0; v < n && need > 0; ++v) {
    if (!allowed.test(v)) continue;
    auto without = allowed;
    without.reset(v);
    if (search.reaches(without, need)) {
      allowed = std::move(without);
    } else {
      out.witness.bits[v] = 1;
      allowed -= search.neighbors(v);
      allowed.reset(v);
      --need;
    }
  }
  return out;
}

}  // namespace ispcav
