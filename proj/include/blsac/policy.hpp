#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "blsac/mdp.hpp"
#include "blsac/numerics.hpp"

namespace blsac {

// x log x with the 0 log 0 := 0 convention.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// Discrete stochastic policy over the action grid.
//
// entropy_terms caches, per state, the temperature-scaled negative entropy
//   omega(s) = temperature * sum_a pi(a|s) log pi(a|s)   (<= 0),
// which is the quantity subtracted from the next-state value inside the soft
// Bellman backup. At temperature 0 it vanishes and the plain Bellman operator
// is recovered. Policies are immutable after construction; build them through
// the factory so the cache is always consistent.
struct SoftPolicy {
  Eigen::MatrixXd probs;          // n_states x n_actions, rows are distributions
  double temperature = 0.0;       // alpha >= 0
  Eigen::VectorXd entropy_terms;  // omega(s), cached

  int n_states() const { return static_cast<int>(probs.rows()); }
  int n_actions() const { return static_cast<int>(probs.cols()); }
};

inline SoftPolicy make_soft_policy(Eigen::MatrixXd probs, double temperature) {
  if (temperature < 0.0) throw std::invalid_argument("make_soft_policy: temperature must be >= 0");
  const Eigen::Index s = probs.rows(), m = probs.cols();
  if (s < 1 || m < 1) throw std::invalid_argument("make_soft_policy: empty policy");
  Eigen::VectorXd omega(s);
  for (Eigen::Index i = 0; i < s; ++i) {
    double row_sum = 0.0, plogp = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double p = probs(i, j);
      if (p < 0.0) throw std::invalid_argument("make_soft_policy: negative probability");
      row_sum += p;
      plogp += xlogx(p);
    }
    if (std::abs(row_sum - 1.0) > 1e-12)
      throw std::invalid_argument("make_soft_policy: policy row does not sum to 1");
    omega(i) = temperature * plogp;
  }
  return SoftPolicy{std::move(probs), temperature, std::move(omega)};
}

inline SoftPolicy uniform_policy(int n_states, int n_actions, double temperature = 0.0) {
  return make_soft_policy(
      Eigen::MatrixXd::Constant(n_states, n_actions, 1.0 / n_actions), temperature);
}

// Repeat a per-state vector across the action axis, producing a state-action
// vector in state-major order.
inline Eigen::VectorXd expand_per_state(const Eigen::VectorXd& per_state, int n_actions) {
  Eigen::VectorXd out(per_state.size() * n_actions);
  for (Eigen::Index s = 0; s < per_state.size(); ++s)
    out.segment(s * n_actions, n_actions).setConstant(per_state(s));
  return out;
}

// Boltzmann (softmax) policy: pi(a|s) proportional to exp(q(s,a)/alpha),
// computed with max subtraction for overflow safety. alpha = 0 gives the
// deterministic limit: a greedy policy with uniform tie breaking over the
// argmax set, which keeps the limit continuous.
inline SoftPolicy boltzmann_policy(const QVector& q, double temperature, const DiscreteMdp& mdp) {
  if (temperature < 0.0) throw std::invalid_argument("boltzmann_policy: temperature must be >= 0");
  if (!is_valid_q(mdp, q)) throw std::invalid_argument("boltzmann_policy: q has wrong shape");
  const int s_count = mdp.n_states, m = mdp.n_actions();
  Eigen::MatrixXd probs(s_count, m);
  for (int s = 0; s < s_count; ++s) {
    const auto row = q.segment(static_cast<Eigen::Index>(s) * m, m);
    const double top = row.maxCoeff();
    if (temperature == 0.0) {
      const double tie_tol = 1e-12 * std::max(1.0, std::abs(top));
      int ties = 0;
      for (int a = 0; a < m; ++a) ties += (row(a) >= top - tie_tol) ? 1 : 0;
      for (int a = 0; a < m; ++a) probs(s, a) = (row(a) >= top - tie_tol) ? 1.0 / ties : 0.0;
    } else {
      double z = 0.0;
      for (int a = 0; a < m; ++a) {
        probs(s, a) = std::exp((row(a) - top) / temperature);
        z += probs(s, a);
      }
      probs.row(s) /= z;
    }
  }
  return make_soft_policy(std::move(probs), temperature);
}

// Plain (unscaled) policy entropy per state: xi(s) = -sum_a pi log pi.
// Always lies in [0, log n_actions].
inline Eigen::VectorXd policy_entropy(const SoftPolicy& policy) {
  Eigen::VectorXd xi(policy.n_states());
  for (int s = 0; s < policy.n_states(); ++s) {
    double plogp = 0.0;
    for (int a = 0; a < policy.n_actions(); ++a) plogp += xlogx(policy.probs(s, a));
    xi(s) = -plogp;
  }
  return xi;
}

// Gaussian policy discretized on the periodic action grid. The density wraps
// around the grid rather than being truncated, which preserves the exact
// orthogonality of the Fourier columns under a uniform policy limit.
struct GaussianGridPolicy {
  Eigen::VectorXd mean;  // per state, action units
  Eigen::VectorXd std;   // per state, > 0
  SoftPolicy policy;
  bool aliasing_risk = false;  // some std fell below the grid spacing
};

inline GaussianGridPolicy gaussian_grid_policy(const Eigen::VectorXd& mean,
                                               const Eigen::VectorXd& std_dev,
                                               const DiscreteMdp& mdp,
                                               double temperature = 1.0) {
  if (mean.size() != mdp.n_states || std_dev.size() != mdp.n_states)
    throw std::invalid_argument("gaussian_grid_policy: need one mean/std per state");
  const int m = mdp.n_actions();
  bool aliasing = false;
  Eigen::MatrixXd probs(mdp.n_states, m);
  for (int s = 0; s < mdp.n_states; ++s) {
    const double sigma = std_dev(s);
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_grid_policy: std must be > 0");
    if (sigma < mdp.grid_spacing()) aliasing = true;
    for (int a = 0; a < m; ++a)
      probs(s, a) = wrapped_gaussian_pdf(mdp.action_grid(a) - mean(s), sigma);
    probs.row(s) /= probs.row(s).sum();
  }
  return GaussianGridPolicy{mean, std_dev, make_soft_policy(std::move(probs), temperature),
                            aliasing};
}

inline GaussianGridPolicy gaussian_grid_policy(double mean, double std_dev, const DiscreteMdp& mdp,
                                               double temperature = 1.0) {
  return gaussian_grid_policy(Eigen::VectorXd::Constant(mdp.n_states, mean),
                              Eigen::VectorXd::Constant(mdp.n_states, std_dev), mdp, temperature);
}

// Circular standard deviation of a policy row on the periodic action domain,
// in action units. Used to drive adaptive filter design.
inline double policy_circular_std(const SoftPolicy& policy, int state) {
  double c = 0.0, s = 0.0;
  for (int a = 0; a < policy.n_actions(); ++a) {
    const double angle = kPi * (-1.0 + 2.0 * a / policy.n_actions());
    c += policy.probs(state, a) * std::cos(angle);
    s += policy.probs(state, a) * std::sin(angle);
  }
  const double r = std::min(1.0, std::hypot(c, s));
  if (r <= 0.0) return 1.0;  // fully spread row: report the domain half-width scale
  return std::sqrt(-2.0 * std::log(r)) / kPi;
}

}  // namespace blsac
