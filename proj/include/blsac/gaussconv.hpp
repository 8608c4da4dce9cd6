#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "blsac/numerics.hpp"
#include "blsac/rng.hpp"

namespace blsac {

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long n = 0;
};

// Monte Carlo estimate of E[q(mu + sigma * eps)], eps standard normal: the
// value a Gaussian policy centered at mu effectively sees. q_fn must be
// 2-periodic; the argument is wrapped into [-1, 1) before evaluation.
// Deterministic for a fixed seed.
template <typename F>
McEstimate mc_expected_q(F&& q_fn, double mu, double sigma, long n_samples, std::uint64_t seed) {
  if (n_samples < 100) throw std::invalid_argument("mc_expected_q: need at least 100 samples");
  if (!(sigma >= 0.0)) throw std::invalid_argument("mc_expected_q: sigma must be >= 0");
  Rng rng(seed);
  double mean = 0.0, m2 = 0.0;  // Welford
  for (long i = 0; i < n_samples; ++i) {
    const double v = q_fn(wrap_action(mu + sigma * rng.normal()));
    const double delta = v - mean;
    mean += delta / (i + 1);
    m2 += delta * (v - mean);
  }
  const double var = m2 / (n_samples - 1);
  return McEstimate{mean, std::sqrt(var / n_samples), n_samples};
}

// Same expectation by deterministic quadrature: circular convolution of the
// grid samples with the wrapped Gaussian kernel, evaluated at mu. The kernel
// mass is renormalized over the grid so constants pass through exactly.
// q_grid holds samples on the canonical uniform grid a_j = -1 + 2j/M.
inline double conv_expected_q(const Eigen::VectorXd& q_grid, double mu, double sigma) {
  const int m = static_cast<int>(q_grid.size());
  if (m < 2) throw std::invalid_argument("conv_expected_q: need at least two grid points");
  if (!(sigma > 0.0)) throw std::invalid_argument("conv_expected_q: sigma must be > 0");
  const double spacing = 2.0 / m;
  if (sigma < 4.0 * spacing)
    throw std::invalid_argument("conv_expected_q: kernel under-resolved (need sigma >= 4 grid spacings)");
  double mass = 0.0, acc = 0.0;
  for (int j = 0; j < m; ++j) {
    const double w = wrapped_gaussian_pdf(-1.0 + spacing * j - mu, sigma);
    mass += w;
    acc += w * q_grid(j);
  }
  return acc / mass;
}

// Transfer of the Gaussian kernel at angular frequency w (action units):
// exp(-w^2 sigma^2 / 2). This is the low-pass gain the policy applies to each
// frequency component of the value function; at the matched cutoff
// w = pi / (2 sigma) it equals exp(-pi^2 / 8) ~ 0.2913 for every sigma.
inline double gaussian_kernel_gain(double sigma, double w) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_kernel_gain: sigma must be > 0");
  return std::exp(-0.5 * w * w * sigma * sigma);
}

}  // namespace blsac
