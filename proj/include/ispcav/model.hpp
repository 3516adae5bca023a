#pragma once

#include <bit>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ispcav/errors.hpp"
#include "ispcav/graph.hpp"
#include "ispcav/math.hpp"

namespace ispcav {

/// (beta, h, gamma): inverse temperature, magnetic field, dilution.
struct ModelParams {
  double beta = 0.0;
  double h = 0.0;
  double gamma = 0.0;

  void validate() const {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ParameterError("beta must be finite and >= 0");
    if (!std::isfinite(h)) throw ParameterError("h must be finite");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ParameterError("gamma must be finite and >= 0");
  }

  void validate_for(std::size_t n) const {
    validate();
    if (gamma > static_cast<double>(n)) {
      throw ParameterError("gamma = " + std::to_string(gamma) + " exceeds n = " + std::to_string(n));
    }
  }

  /// 1 - e^{-beta}: the weight lost by an occupied neighbour.
  double penalty() const noexcept { return -std::expm1(-beta); }
};

/// Occupation vector sigma in {0,1}^n.
struct SpinConfig {
  std::vector<std::uint8_t> bits;

  SpinConfig() = default;
  explicit SpinConfig(std::vector<std::uint8_t> b) : bits(std::move(b)) {
    for (auto v : bits) {
      if (v > 1) throw ParameterError("spin values must be 0 or 1");
    }
  }
  static SpinConfig zeros(std::size_t n) { return SpinConfig(std::vector<std::uint8_t>(n, 0)); }

  std::size_t size() const noexcept { return bits.size(); }
  std::size_t occupied() const noexcept {
    std::size_t k = 0;
    for (auto v : bits) k += v;
    return k;
  }
  friend auto operator<=>(const SpinConfig&, const SpinConfig&) = default;
};

namespace detail {
inline void check_length(const Graph& g, const SpinConfig& s) {
  if (s.size() != g.num_vertices()) {
    throw ParameterError("spin configuration has length " + std::to_string(s.size()) + ", graph has n = " +
                         std::to_string(g.num_vertices()));
  }
}
}  // namespace detail

/// h * sum_i sigma_i - beta * sum_{(i,j) in E} sigma_i sigma_j
inline double soft_energy(const Graph& g, const ModelParams& p, const SpinConfig& s) {
  detail::check_length(g, s);
  long long occupied = 0, violated = 0;
  for (auto v : s.bits) occupied += v;
  for (const auto& [i, j] : g.edges()) violated += s.bits[i] & s.bits[j];
  return p.h * static_cast<double>(occupied) - p.beta * static_cast<double>(violated);
}

/// Value of the hard-core objective: the occupation count, or the infeasible
/// sentinel (-infinity) when some edge has both endpoints occupied. The
/// sentinel orders strictly below every count.
class HardCoreValue {
public:
  static HardCoreValue infeasible() { return HardCoreValue(); }
  static HardCoreValue of(std::size_t count) { return HardCoreValue(count); }

  bool is_infeasible() const noexcept { return !count_.has_value(); }
  std::size_t count() const {
    if (!count_) throw ParameterError("hard-core value is -infinity");
    return *count_;
  }

  friend bool operator==(const HardCoreValue&, const HardCoreValue&) = default;
  friend std::strong_ordering operator<=>(const HardCoreValue& a, const HardCoreValue& b) {
    if (a.is_infeasible() || b.is_infeasible()) {
      return static_cast<int>(!a.is_infeasible()) <=> static_cast<int>(!b.is_infeasible());
    }
    return *a.count_ <=> *b.count_;
  }

private:
  HardCoreValue() = default;
  explicit HardCoreValue(std::size_t c) : count_(c) {}
  std::optional<std::size_t> count_;
};

inline HardCoreValue hard_core_value(const Graph& g, const SpinConfig& s) {
  detail::check_length(g, s);
  for (const auto& [i, j] : g.edges()) {
    if (s.bits[i] && s.bits[j]) return HardCoreValue::infeasible();
  }
  return HardCoreValue::of(s.occupied());
}

/// Largest connected component the exact solvers will enumerate.
inline constexpr std::size_t kMaxExactComponent = 30;

namespace detail {

/// A connected component re-indexed to 0..size-1 with bitmask adjacency.
struct LocalComponent {
  std::vector<Vertex> vertices;
  std::vector<std::uint32_t> adj;
};

inline std::vector<LocalComponent> exact_components(const Graph& g) {
  std::vector<LocalComponent> out;
  std::vector<std::uint32_t> local(g.num_vertices(), 0);
  for (auto& comp : g.components()) {
    if (comp.size() > kMaxExactComponent) {
      throw ResourceLimitError("connected component of size " + std::to_string(comp.size()) +
                                   " exceeds the exact-enumeration limit of " + std::to_string(kMaxExactComponent),
                               comp.size());
    }
    LocalComponent lc;
    for (std::uint32_t k = 0; k < comp.size(); ++k) local[comp[k]] = k;
    lc.adj.assign(comp.size(), 0);
    for (std::uint32_t k = 0; k < comp.size(); ++k) {
      for (Vertex w : g.neighbors(comp[k])) lc.adj[k] |= 1u << local[w];
    }
    lc.vertices = std::move(comp);
    out.push_back(std::move(lc));
  }
  return out;
}

/// Visits every configuration x (bitmask over the component) together with
/// its energy sum_{i in x} field_i - beta * |edges inside x|, in Gray-code
/// order. Occupation counts per distinct field value and the violated-edge
/// count are kept as integers so energies do not drift.
template <typename Visit>
void for_each_configuration(const LocalComponent& c, std::span<const double> fields, double beta, Visit&& visit) {
  const std::size_t size = c.vertices.size();
  std::vector<double> levels;
  std::vector<std::uint8_t> level_of(size);
  for (std::size_t k = 0; k < size; ++k) {
    const double f = fields[c.vertices[k]];
    std::size_t idx = 0;
    while (idx < levels.size() && levels[idx] != f) ++idx;
    if (idx == levels.size()) levels.push_back(f);
    level_of[k] = static_cast<std::uint8_t>(idx);
  }
  std::vector<long long> counts(levels.size(), 0);
  long long violated = 0;
  auto energy = [&] {
    double e = 0.0;
    for (std::size_t l = 0; l < levels.size(); ++l) e += levels[l] * static_cast<double>(counts[l]);
    return e - beta * static_cast<double>(violated);
  };

  std::uint32_t x = 0;
  visit(x, 0.0);
  const std::uint64_t total = std::uint64_t{1} << size;
  for (std::uint64_t step = 1; step < total; ++step) {
    const int bit = std::countr_zero(step);
    const std::uint32_t mask = 1u << bit;
    const int touching = std::popcount(c.adj[bit] & x);
    if (x & mask) {
      x ^= mask;
      --counts[level_of[bit]];
      violated -= touching;
    } else {
      x |= mask;
      ++counts[level_of[bit]];
      violated += touching;
    }
    visit(x, energy());
  }
}

inline double component_log_partition(const LocalComponent& c, std::span<const double> fields, double beta) {
  if (c.vertices.size() == 1) return softplus(fields[c.vertices.front()]);
  LogSumExp acc;
  for_each_configuration(c, fields, beta, [&](std::uint32_t, double e) { acc.add(e); });
  return acc.value();
}

inline double component_max_energy(const LocalComponent& c, std::span<const double> fields, double beta) {
  double m = 0.0;
  for_each_configuration(c, fields, beta, [&](std::uint32_t, double e) { m = std::max(m, e); });
  return m;
}

}  // namespace detail

/// log Z for site-dependent fields: sum_sigma exp(sum_i fields_i sigma_i -
/// beta * sum_{(i,j) in E} sigma_i sigma_j). Factorizes over connected
/// components.
inline double exact_log_partition(const Graph& g, double beta, std::span<const double> fields) {
  if (fields.size() != g.num_vertices()) throw ParameterError("fields: length must equal n");
  double total = 0.0;
  for (const auto& comp : detail::exact_components(g)) total += detail::component_log_partition(comp, fields, beta);
  return total;
}

/// log Z_N(beta, h, gamma) for the given graph.
inline double exact_log_partition(const Graph& g, const ModelParams& p) {
  p.validate();
  const auto components = detail::exact_components(g);
  if (p.beta == 0.0 || g.num_edges() == 0) return static_cast<double>(g.num_vertices()) * softplus(p.h);
  const std::vector<double> fields(g.num_vertices(), p.h);
  double total = 0.0;
  for (const auto& comp : components) total += detail::component_log_partition(comp, fields, p.beta);
  return total;
}

/// Gibbs magnetizations <sigma_i> for every vertex.
inline std::vector<double> exact_marginals(const Graph& g, const ModelParams& p) {
  p.validate();
  const auto components = detail::exact_components(g);
  std::vector<double> out(g.num_vertices(), logistic(p.h));
  if (p.beta == 0.0) return out;
  const std::vector<double> fields(g.num_vertices(), p.h);
  for (const auto& comp : components) {
    const std::size_t size = comp.vertices.size();
    if (size == 1) continue;
    const double shift = detail::component_max_energy(comp, fields, p.beta);
    double z = 0.0;
    std::vector<double> acc(size, 0.0);
    detail::for_each_configuration(comp, fields, p.beta, [&](std::uint32_t x, double e) {
      const double w = std::exp(e - shift);
      z += w;
      for (std::uint32_t bits = x; bits; bits &= bits - 1) acc[std::countr_zero(bits)] += w;
    });
    for (std::size_t k = 0; k < size; ++k) out[comp.vertices[k]] = acc[k] / z;
  }
  return out;
}

/// Matrix of <sigma_i sigma_j>, row-major n x n; the diagonal holds the
/// magnetizations. Vertices in different components are independent.
inline std::vector<double> exact_two_point(const Graph& g, const ModelParams& p) {
  const std::size_t n = g.num_vertices();
  const auto mag = exact_marginals(g, p);
  std::vector<double> out(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = i == j ? mag[i] : mag[i] * mag[j];
  }
  if (p.beta == 0.0) return out;
  const std::vector<double> fields(n, p.h);
  for (const auto& comp : detail::exact_components(g)) {
    const std::size_t size = comp.vertices.size();
    if (size == 1) continue;
    const double shift = detail::component_max_energy(comp, fields, p.beta);
    double z = 0.0;
    std::vector<double> acc(size * size, 0.0);
    std::vector<std::uint32_t> on;
    detail::for_each_configuration(comp, fields, p.beta, [&](std::uint32_t x, double e) {
      const double w = std::exp(e - shift);
      z += w;
      on.clear();
      for (std::uint32_t bits = x; bits; bits &= bits - 1) on.push_back(static_cast<std::uint32_t>(std::countr_zero(bits)));
      for (std::size_t a = 0; a < on.size(); ++a) {
        for (std::size_t b = a + 1; b < on.size(); ++b) acc[on[a] * size + on[b]] += w;
      }
    });
    for (std::size_t a = 0; a < size; ++a) {
      for (std::size_t b = a + 1; b < size; ++b) {
        const double v = acc[a * size + b] / z;
        const auto i = comp.vertices[a], j = comp.vertices[b];
        out[i * n + j] = v;
        out[j * n + i] = v;
      }
    }
  }
  return out;
}

/// |<sigma_v> - (1 + <exp(h - beta sum_{i~v} sigma_i)>_minus^{-1})^{-1}| where
/// <.>_minus is the Gibbs average on the graph with v deleted. The two sides
/// agree exactly, so the residual measures rounding only.
inline double cavity_identity_residual(const Graph& g, const ModelParams& p, Vertex vertex) {
  p.validate();
  if (vertex >= g.num_vertices()) throw ParameterError("vertex out of range");
  const double lhs = exact_marginals(g, p)[vertex];

  const Graph minus = g.without_vertex(vertex);
  std::vector<double> base(minus.num_vertices(), p.h);
  std::vector<double> tilted = base;
  for (Vertex w : g.neighbors(vertex)) tilted[w > vertex ? w - 1 : w] -= p.beta;
  // <exp(-beta sum_{i~v} sigma_i)>_minus = Z(tilted) / Z(base)
  const double log_ratio = exact_log_partition(minus, p.beta, tilted) - exact_log_partition(minus, p.beta, base);
  const double rhs = logistic(p.h + log_ratio);
  return std::abs(lhs - rhs);
}

}  // namespace ispcav
