#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ispcav/errors.hpp"
#include "ispcav/rng.hpp"

namespace ispcav {

using Vertex = std::uint32_t;
using Edge = std::pair<Vertex, Vertex>;

/// Simple undirected graph on vertices 0..n-1. Edges are stored as (i, j)
/// with i < j in ascending lexicographic order.
class Graph {
public:
  Graph() = default;

  explicit Graph(std::size_t n, std::vector<Edge> edges = {}) : n_(n), edges_(std::move(edges)) {
    for (auto& [i, j] : edges_) {
      if (i == j) throw ParameterError("graph: self-loop at vertex " + std::to_string(i));
      if (i > j) std::swap(i, j);
      if (j >= n_) {
        throw ParameterError("graph: edge (" + std::to_string(i) + ", " + std::to_string(j) +
                             ") out of range for n = " + std::to_string(n_));
      }
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) {
      throw ParameterError("graph: duplicate edge");
    }
    adjacency_.assign(n_, {});
    for (const auto& [i, j] : edges_) {
      adjacency_[i].push_back(j);
      adjacency_[j].push_back(i);
    }
    for (auto& list : adjacency_) std::sort(list.begin(), list.end());
  }

  std::size_t num_vertices() const noexcept { return n_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<Vertex>& neighbors(Vertex v) const { return adjacency_.at(v); }
  std::size_t degree(Vertex v) const { return adjacency_.at(v).size(); }

  bool adjacent(Vertex i, Vertex j) const {
    const auto& list = adjacency_.at(i);
    return std::binary_search(list.begin(), list.end(), j);
  }

  /// Connected components, each sorted ascending, ordered by smallest vertex.
  std::vector<std::vector<Vertex>> components() const {
    std::vector<std::vector<Vertex>> out;
    std::vector<char> seen(n_, 0);
    std::vector<Vertex> stack;
    for (Vertex root = 0; root < n_; ++root) {
      if (seen[root]) continue;
      std::vector<Vertex> comp;
      stack.push_back(root);
      seen[root] = 1;
      while (!stack.empty()) {
        const Vertex v = stack.back();
        stack.pop_back();
        comp.push_back(v);
        for (Vertex w : adjacency_[v]) {
          if (!seen[w]) {
            seen[w] = 1;
            stack.push_back(w);
          }
        }
      }
      std::sort(comp.begin(), comp.end());
      out.push_back(std::move(comp));
    }
    return out;
  }

  /// The graph with vertex v removed; vertices above v shift down by one.
  Graph without_vertex(Vertex v) const {
    if (v >= n_) throw ParameterError("without_vertex: vertex out of range");
    std::vector<Edge> kept;
    kept.reserve(edges_.size());
    auto relabel = [v](Vertex x) { return x > v ? x - 1 : x; };
    for (const auto& [i, j] : edges_) {
      if (i == v || j == v) continue;
      kept.emplace_back(relabel(i), relabel(j));
    }
    return Graph(n_ - 1, std::move(kept));
  }

  /// Disjoint union: the vertices of `other` are appended after this graph's.
  Graph disjoint_union(const Graph& other) const {
    std::vector<Edge> all = edges_;
    const auto shift = static_cast<Vertex>(n_);
    for (const auto& [i, j] : other.edges()) all.emplace_back(i + shift, j + shift);
    return Graph(n_ + other.num_vertices(), std::move(all));
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<Vertex>> adjacency_;
};

/// Erdos-Renyi graph: each of the n(n-1)/2 pairs is kept independently with
/// probability gamma / n.
inline Graph generate_graph(std::size_t n, double gamma, RngStream rng) {
  if (!(gamma >= 0.0)) throw ParameterError("gamma must be >= 0");
  if (gamma > static_cast<double>(n)) {
    throw ParameterError("gamma = " + std::to_string(gamma) + " exceeds n = " + std::to_string(n) +
                         " (edge probability gamma/n > 1)");
  }
  std::vector<Edge> edges;
  if (n == 0 || gamma == 0.0) return Graph(n, std::move(edges));
  const double p = gamma / static_cast<double>(n);
  for (Vertex i = 0; i < n; ++i) {
    for (Vertex j = i + 1; j < n; ++j) {
      if (rng.uniform() < p) edges.emplace_back(i, j);
    }
  }
  return Graph(n, std::move(edges));
}

inline Graph generate_graph(std::size_t n, double gamma, std::uint64_t seed) {
  return generate_graph(n, gamma, RngStream(seed));
}

// Edge-list text format: "n m" followed by m lines "i j", zero-based, i < j,
// ascending.

inline void write_edge_list(std::ostream& os, const Graph& g) {
  os << g.num_vertices() << ' ' << g.num_edges() << '\n';
  for (const auto& [i, j] : g.edges()) os << i << ' ' << j << '\n';
}

inline Graph read_edge_list(std::istream& is) {
  std::size_t n = 0, m = 0;
  if (!(is >> n >> m)) throw ParameterError("edge list: missing 'n m' header");
  std::vector<Edge> edges;
  edges.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    long long i = 0, j = 0;
    if (!(is >> i >> j)) {
      throw ParameterError("edge list: expected " + std::to_string(m) + " edges, got " + std::to_string(k));
    }
    if (i < 0 || j < 0 || i >= j) {
      throw ParameterError("edge list: line " + std::to_string(k + 2) + " must satisfy 0 <= i < j");
    }
    edges.emplace_back(static_cast<Vertex>(i), static_cast<Vertex>(j));
  }
  std::string trailing;
  if (is >> trailing) throw ParameterError("edge list: trailing content after " + std::to_string(m) + " edges");
  return Graph(n, std::move(edges));
}

inline void save_edge_list(const std::string& path, const Graph& g) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_edge_list(os, g);
  if (!os) throw IoError("write failed: " + path);
}

inline Graph load_edge_list(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  return read_edge_list(is);
}

}  // namespace ispcav
