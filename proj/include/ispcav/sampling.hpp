#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "ispcav/errors.hpp"
#include "ispcav/estimate.hpp"
#include "ispcav/rng.hpp"

namespace ispcav {

/// Poisson(lambda) draw: sequential inversion for lambda <= 10, Hormann's
/// transformed rejection (PTRS) above.
inline std::uint64_t sample_poisson(double lambda, RngStream& rng) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("poisson: lambda must be finite and >= 0");
  if (lambda == 0.0) return 0;
  if (lambda <= 10.0) {
    const double u = rng.uniform();
    double pk = std::exp(-lambda);
    double cdf = pk;
    std::uint64_t k = 0;
    while (u > cdf) {
      ++k;
      pk *= lambda / static_cast<double>(k);
      cdf += pk;
      if (pk < 1e-300 && cdf >= 1.0 - 1e-15) break;
    }
    return k;
  }
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -lambda + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

struct TotalVariation {
  double exact_tv = 0.0;
  double bound = 0.0;  // n p^2
};

/// Total variation between Binomial(n, p) and Poisson(np), summed exactly
/// over the pmfs, next to the classical bound n p^2.
inline TotalVariation tv_poisson_binomial(std::uint64_t n, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("tv_poisson_binomial: p must lie in [0, 1]");
  const double nd = static_cast<double>(n);
  TotalVariation out;
  out.bound = nd * p * p;
  const double lambda = nd * p;
  if (n == 0 || p == 0.0) return out;
  const boost::math::binomial_distribution<double> binom(nd, p);
  const boost::math::poisson_distribution<double> pois(lambda);
  double sum = 0.0;
  for (std::uint64_t k = 0; k <= n; ++k) {
    const double kd = static_cast<double>(k);
    sum += std::abs(boost::math::pdf(binom, kd) - boost::math::pdf(pois, kd));
  }
  // Poisson mass above n, where the binomial has none: P(X > n) = P(n+1, lambda).
  sum += boost::math::gamma_p(nd + 1.0, lambda);
  out.exact_tv = 0.5 * sum;
  return out;
}

struct MomentCheck {
  EnsembleEstimate mc;  // E[S^3 e^{beta S}]
  double bound = 0.0;   // (a^3 e^{3b} + 3 a^2 e^{2b} + a e^b) exp((e^b - 1) a), a = np
};

/// Monte Carlo estimate of E[S^3 exp(beta S)] for S ~ Binomial(n, p) with the
/// closed-form upper bound in alpha = np.
inline MomentCheck binomial_exp_moment_check(std::uint64_t n, double p, double beta, std::size_t num_samples,
                                             RngStream& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("binomial_exp_moment_check: p must lie in [0, 1]");
  if (!(beta >= 0.0)) throw ParameterError("binomial_exp_moment_check: beta must be >= 0");
  if (num_samples == 0) throw ParameterError("binomial_exp_moment_check: num_samples must be positive");
  std::vector<double> draws(num_samples);
  for (auto& d : draws) {
    std::uint64_t s = 0;
    for (std::uint64_t i = 0; i < n; ++i) s += rng.bernoulli(p);
    const double sd = static_cast<double>(s);
    d = sd * sd * sd * std::exp(beta * sd);
  }
  const double alpha = static_cast<double>(n) * p;
  const double eb = std::exp(beta);
  MomentCheck out;
  out.mc = summarize(draws);
  out.bound = (alpha * alpha * alpha * eb * eb * eb + 3.0 * alpha * alpha * eb * eb + alpha * eb) *
              std::exp((eb - 1.0) * alpha);
  return out;
}

}  // namespace ispcav
