#pragma once

// Independent oracle implementations used to compute and freeze expected
// values. Each one re-derives its quantity through a different route than the
// library path it is used to check.

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <numeric>
#include <vector>

#include "blsac/mdp.hpp"
#include "blsac/policy.hpp"
#include "blsac/rng.hpp"

namespace oracles {

// Soft value iteration: repeated application of
// q <- r + gamma P (q - omega) until the sup-norm change drops below tol.
inline Eigen::VectorXd value_iteration_soft_q(const blsac::DiscreteMdp& mdp,
                                              const blsac::SoftPolicy& policy,
                                              const Eigen::MatrixXd& p_pi, double tol = 1e-12,
                                              int max_iter = 1000000) {
  const Eigen::VectorXd omega = blsac::expand_per_state(policy.entropy_terms, mdp.n_actions());
  Eigen::VectorXd q = Eigen::VectorXd::Zero(mdp.size());
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd next = mdp.rewards + mdp.gamma * (p_pi * (q - omega));
    const double change = (next - q).lpNorm<Eigen::Infinity>();
    q.swap(next);
    if (change < tol) break;
  }
  return q;
}

// Brute-force chain simulation of the state-action process: next state from
// the MDP row, next action from the policy row. Returns the empirical
// visitation distribution.
inline Eigen::VectorXd mc_chain_density(const blsac::DiscreteMdp& mdp,
                                        const blsac::SoftPolicy& policy, long steps,
                                        std::uint64_t seed) {
  blsac::Rng rng(seed);
  const int m = mdp.n_actions();
  const auto draw = [&](const auto& weights, int count) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (int i = 0; i < count; ++i) {
      acc += weights(i);
      if (u < acc) return i;
    }
    return count - 1;
  };
  int s = 0, a = 0;
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(mdp.size());
  for (long t = 0; t < steps; ++t) {
    const int next_s = draw(mdp.transitions.row(blsac::sa_index(s, a, m)), mdp.n_states);
    const int next_a = draw(policy.probs.row(next_s), m);
    s = next_s;
    a = next_a;
    counts(blsac::sa_index(s, a, m)) += 1.0;
  }
  return counts / counts.sum();
}

// Monte Carlo rollout estimate of the expected discounted return from a start
// distribution over states. Horizon is truncated where gamma^t is negligible.
struct McReturn {
  double mean = 0.0;
  double std_error = 0.0;
};

inline McReturn mc_return(const blsac::DiscreteMdp& mdp, const blsac::SoftPolicy& policy,
                          const Eigen::VectorXd& start, long episodes, int horizon,
                          std::uint64_t seed) {
  blsac::Rng rng(seed);
  const int m = mdp.n_actions();
  const auto draw = [&](const auto& weights, int count) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (int i = 0; i < count; ++i) {
      acc += weights(i);
      if (u < acc) return i;
    }
    return count - 1;
  };
  double sum = 0.0, sum_sq = 0.0;
  for (long e = 0; e < episodes; ++e) {
    int s = draw(start, mdp.n_states);
    int a = draw(policy.probs.row(s), m);
    double ret = 0.0, discount = 1.0;
    for (int t = 0; t < horizon; ++t) {
      ret += discount * mdp.rewards(blsac::sa_index(s, a, m));
      discount *= mdp.gamma;
      s = draw(mdp.transitions.row(blsac::sa_index(s, a, m)), mdp.n_states);
      a = draw(policy.probs.row(s), m);
    }
    sum += ret;
    sum_sq += ret * ret;
  }
  const double mean = sum / episodes;
  const double var = std::max(0.0, (sum_sq - episodes * mean * mean) / (episodes - 1));
  return McReturn{mean, std::sqrt(var / episodes)};
}

// Residual of the projected equation assembled directly from the raw pieces:
//   phi^T diag(d) (r + gamma P (target - omega_sa) - phi omega)
// where target is phi omega (classic) or only its low-block part
// (bandlimited). Deliberately avoids the library's coupling matrices.
inline Eigen::VectorXd dense_projected_residual(const Eigen::MatrixXd& phi, Eigen::Index low_size,
                                                const Eigen::VectorXd& density,
                                                const Eigen::MatrixXd& p_pi,
                                                const Eigen::VectorXd& rewards,
                                                const Eigen::VectorXd& omega_sa, double gamma,
                                                const Eigen::VectorXd& omega, bool bandlimited) {
  const Eigen::VectorXd q = phi * omega;
  Eigen::VectorXd target = q;
  if (bandlimited)
    target = phi.leftCols(low_size) * omega.head(low_size);
  const Eigen::VectorXd bellman = rewards + gamma * (p_pi * (target - omega_sa));
  return phi.transpose() * (density.asDiagonal() * (bellman - q));
}

// Newton iteration with a forward-difference Jacobian (exact for affine
// maps up to roundoff).
inline Eigen::VectorXd newton_solve(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                    Eigen::Index dim, int iterations = 3) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
  for (int it = 0; it < iterations; ++it) {
    const Eigen::VectorXd fx = f(x);
    Eigen::MatrixXd jac(fx.size(), dim);
    const double h = 1.0;
    for (Eigen::Index j = 0; j < dim; ++j) {
      Eigen::VectorXd xp = x;
      xp(j) += h;
      jac.col(j) = (f(xp) - fx) / h;
    }
    x -= jac.fullPivLu().solve(fx);
  }
  return x;
}

// Naive discrete Fourier transform, O(M^2).
inline std::vector<std::complex<double>> dft(const Eigen::VectorXd& x) {
  const Eigen::Index m = x.size();
  std::vector<std::complex<double>> out(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (Eigen::Index j = 0; j < m; ++j) {
      const double angle = -2.0 * blsac::kPi * k * j / m;
      acc += x(j) * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[k] = acc;
  }
  return out;
}

inline std::vector<std::complex<double>> idft(const std::vector<std::complex<double>>& x) {
  const std::size_t m = x.size();
  std::vector<std::complex<double>> out(m);
  for (std::size_t j = 0; j < m; ++j) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      const double angle = 2.0 * blsac::kPi * k * j / m;
      acc += x[k] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[j] = acc / static_cast<double>(m);
  }
  return out;
}

inline double spearman_rank_correlation(std::vector<double> x, std::vector<double> y) {
  const auto ranks = [](std::vector<double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size(); ++i) r[order[i]] = static_cast<double>(i);
    return r;
  };
  const std::vector<double> rx = ranks(std::move(x)), ry = ranks(std::move(y));
  const double n = static_cast<double>(rx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace oracles
