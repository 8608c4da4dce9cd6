#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <functional>
#include <stdexcept>
#include <vector>

#include "blsac/filter.hpp"
#include "blsac/fixedpoint.hpp"
#include "blsac/fourier.hpp"
#include "blsac/soft_dynamics.hpp"

namespace blsac {

// Low-pass operation on a grid state-action vector. An empty function means
// the identity (classic evaluation).
using GridFilterFn = std::function<QVector(const QVector&)>;

inline GridFilterFn ideal_lowpass(const FourierFeatures& features) {
  return [&features](const QVector& q) { return project_low(q, features); };
}

inline GridFilterFn sinc_lowpass(const SincFilter& filter, const DiscreteMdp& mdp) {
  return [filter, &mdp](const QVector& q) { return apply_grid(q, filter, mdp); };
}

// One application of the soft Bellman operator with an optional bandlimiting
// filter on the bootstrapped value:
//   target = r + gamma P_pi (h(q) - omega).
inline QVector soft_bellman_target(const QVector& q, const DiscreteMdp& mdp,
                                   const SoftPolicy& policy, const GridFilterFn& filter = {}) {
  if (!is_valid_q(mdp, q)) throw std::invalid_argument("soft_bellman_target: q has wrong shape");
  const Eigen::MatrixXd p_pi = build_transition_matrix(mdp, policy);
  const Eigen::VectorXd omega = expand_per_state(policy.entropy_terms, mdp.n_actions());
  const QVector filtered = filter ? filter(q) : q;
  return mdp.rewards + mdp.gamma * (p_pi * (filtered - omega));
}

// Iterative policy evaluation in feature space: repeatedly nudge the
// coefficients along the projected Bellman error of the (optionally filtered)
// target. The limit matches the corresponding closed-form solution. The
// target is refreshed from the current coefficients every iteration.
struct TdIterationResult {
  Eigen::VectorXd omega;                 // final coefficients
  std::vector<double> residual_trace;    // projected-error inf-norm per iteration
  std::vector<Eigen::VectorXd> snapshots;  // thinned coefficient trace, ends at omega
  int snapshot_stride = 1;
  int iterations = 0;
  double step_size = 0.0;
  bool diverged = false;
};

// Default step size: a conservative fraction of the inverse largest
// eigenvalue of the density-weighted feature Gram matrix.
inline double default_step_size(const FourierFeatures& features, const Eigen::VectorXd& density) {
  const Eigen::MatrixXd gram =
      features.phi.transpose() * (density.asDiagonal() * features.phi);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (gram + gram.transpose()));
  const double top = eig.eigenvalues().maxCoeff();
  if (!(top > 0.0)) throw std::runtime_error("default_step_size: degenerate feature Gram matrix");
  return 0.25 / top;
}

inline TdIterationResult projected_td_iteration(const DiscreteMdp& mdp, const SoftPolicy& policy,
                                                const FourierFeatures& features,
                                                const GridFilterFn& target_filter, double step_size,
                                                int iterations, double eps_mix = 1e-3,
                                                const Eigen::VectorXd& omega_start = {}) {
  const Eigen::MatrixXd p_pi = build_transition_matrix(mdp, policy);
  const Eigen::VectorXd density = visitation_density(p_pi, eps_mix);
  const Eigen::VectorXd omega_sa = expand_per_state(policy.entropy_terms, mdp.n_actions());
  const Eigen::MatrixXd weighted_phi_t = (density.asDiagonal() * features.phi).transpose();

  TdIterationResult result;
  result.step_size = step_size > 0.0 ? step_size : default_step_size(features, density);
  result.snapshot_stride = std::max(1, iterations / 1000);
  Eigen::VectorXd omega = omega_start.size() == features.phi.cols()
                              ? omega_start
                              : Eigen::VectorXd::Zero(features.phi.cols());
  const double drive_scale =
      mdp.rewards.lpNorm<Eigen::Infinity>() + mdp.gamma * omega_sa.lpNorm<Eigen::Infinity>();
  const double divergence_bound = 1e6 * (1.0 + drive_scale / (1.0 - mdp.gamma));
  result.residual_trace.reserve(iterations);
  result.snapshots.push_back(omega);

  for (int t = 0; t < iterations; ++t) {
    const QVector q = features.phi * omega;
    const QVector filtered = target_filter ? target_filter(q) : q;
    const QVector bellman = mdp.rewards + mdp.gamma * (p_pi * (filtered - omega_sa));
    const Eigen::VectorXd grad = weighted_phi_t * (bellman - q);
    const double residual = grad.lpNorm<Eigen::Infinity>();
    result.residual_trace.push_back(residual);
    omega += result.step_size * grad;
    ++result.iterations;
    if (!omega.allFinite() || omega.lpNorm<Eigen::Infinity>() > divergence_bound) {
      result.diverged = true;
      break;
    }
    if (t % result.snapshot_stride == 0) result.snapshots.push_back(omega);
    if (residual * result.step_size <= 1e-15 * (1.0 + omega.lpNorm<Eigen::Infinity>())) break;
  }
  result.omega = omega;
  if (result.snapshots.empty() || result.snapshots.back() != omega) result.snapshots.push_back(omega);
  return result;
}

// Expected discounted return of a policy from a start distribution over
// states (entropy-free, the quantity an external evaluator would measure).
inline double expected_return(const DiscreteMdp& mdp, const SoftPolicy& policy,
                              const Eigen::VectorXd& start_distribution) {
  if (start_distribution.size() != mdp.n_states)
    throw std::invalid_argument("expected_return: start distribution has wrong length");
  const QVector q_plain = exact_plain_q(mdp, policy);
  double total = 0.0;
  for (int s = 0; s < mdp.n_states; ++s) {
    double v = 0.0;
    for (int a = 0; a < mdp.n_actions(); ++a)
      v += policy.probs(s, a) * q_plain(sa_index(s, a, mdp.n_actions()));
    total += start_distribution(s) * v;
  }
  return total;
}

inline double expected_return(const DiscreteMdp& mdp, const SoftPolicy& policy) {
  return expected_return(mdp, policy,
                         Eigen::VectorXd::Constant(mdp.n_states, 1.0 / mdp.n_states));
}

enum class EvalVariant { kClassic, kBandlimitedIdeal, kBandlimitedSinc, kLowRes };

struct SacOptions {
  int feature_count = 0;     // K; 0 means the complete basis (K = M)
  int low_count = 0;         // K_L; 0 means the widest split at half the columns
  int filter_half_width = 2;
  double step_size = 0.0;    // 0 means auto
  int eval_iterations = 4000;
  int outer_iterations = 20;
  double eps_mix = 1e-3;
  double sigma_floor = 0.0;  // 0 means one grid spacing
  Eigen::VectorXd start_distribution;  // empty means uniform over states
};

struct SacIterate {
  double expected_return = 0.0;
  double eval_residual = 0.0;
  double mean_entropy = 0.0;
  double filter_sigma = 0.0;  // sinc variant only
  double step_size = 0.0;
};

struct SacResult {
  SoftPolicy policy;
  QVector q_values;     // converged approximation (full basis reconstruction)
  QVector critic_view;  // the value the improvement step actually sees
  std::vector<SacIterate> trace;
};

// Alternating soft policy iteration: evaluate the current policy with the
// chosen variant, then improve toward the Boltzmann policy of the evaluated
// critic. The improvement step reads the variant's effective critic: for the
// bandlimited variants that is the low-passed value, which is exactly what a
// sampling actor whose kernel suppresses the high band would experience.
// Evaluation warm-starts from the previous coefficients; the step size backs
// off geometrically when an evaluation diverges.
inline SacResult soft_policy_iteration(const DiscreteMdp& mdp, double temperature,
                                       EvalVariant variant, const SacOptions& options = {}) {
  if (!(temperature > 0.0))
    throw std::invalid_argument("soft_policy_iteration: temperature must be > 0");
  const int m = mdp.n_actions();
  const int k = options.feature_count > 0 ? options.feature_count : m;
  const int k_low = options.low_count > 0 ? options.low_count : default_split(m, k);
  // The low-res variant runs on the truncated basis alone; the others carry
  // the full basis with a low/high split.
  const FourierFeatures features =
      variant == EvalVariant::kLowRes
          ? assemble_features(fourier_basis(m, k_low), mdp.n_states, k_low)
          : assemble_features(fourier_basis(m, k), mdp.n_states, k_low);

  const Eigen::VectorXd start = options.start_distribution.size() == mdp.n_states
                                    ? options.start_distribution
                                    : Eigen::VectorXd::Constant(mdp.n_states, 1.0 / mdp.n_states);
  const double sigma_floor = options.sigma_floor > 0.0 ? options.sigma_floor : mdp.grid_spacing();

  SacResult result;
  result.policy = uniform_policy(mdp.n_states, m, temperature);
  Eigen::VectorXd omega = Eigen::VectorXd::Zero(features.phi.cols());
  double step_size = options.step_size;

  for (int outer = 0; outer < options.outer_iterations; ++outer) {
    GridFilterFn filter;  // empty: classic / low-res
    double filter_sigma = 0.0;
    SincFilter sinc_filter;
    if (variant == EvalVariant::kBandlimitedIdeal) {
      filter = ideal_lowpass(features);
    } else if (variant == EvalVariant::kBandlimitedSinc) {
      double sigma_sum = 0.0;
      for (int s = 0; s < mdp.n_states; ++s) sigma_sum += policy_circular_std(result.policy, s);
      // widest shift is 2 sigma; cap so the stencil wraps at most half the grid
      filter_sigma = std::min(0.5, std::max(sigma_floor, sigma_sum / mdp.n_states));
      sinc_filter = design_filter(filter_sigma, options.filter_half_width);
      filter = sinc_lowpass(sinc_filter, mdp);
    }

    TdIterationResult eval;
    for (int attempt = 0; attempt < 8; ++attempt) {
      eval = projected_td_iteration(mdp, result.policy, features, filter, step_size,
                                    options.eval_iterations, options.eps_mix, omega);
      if (!eval.diverged) break;
      step_size = (step_size > 0.0 ? step_size : eval.step_size) * 0.5;  // geometric backoff
      omega.setZero();
    }
    if (eval.diverged)
      throw std::runtime_error("soft_policy_iteration: evaluation diverged even after step-size backoff");
    omega = eval.omega;

    result.q_values = features.phi * omega;
    result.critic_view = filter ? filter(result.q_values) : result.q_values;
    result.policy = boltzmann_policy(result.critic_view, temperature, mdp);

    SacIterate it;
    it.expected_return = expected_return(mdp, result.policy, start);
    it.eval_residual = eval.residual_trace.empty() ? 0.0 : eval.residual_trace.back();
    it.mean_entropy = policy_entropy(result.policy).mean();
    it.filter_sigma = filter_sigma;
    it.step_size = eval.step_size;
    result.trace.push_back(it);
  }
  return result;
}

// Geometric temperature ladder from hi down to lo (inclusive), for sweeps.
inline std::vector<double> temperature_ladder(double hi, double lo, int count) {
  if (!(hi > 0.0) || !(lo > 0.0) || count < 2 || !(hi > lo))
    throw std::invalid_argument("temperature_ladder: need hi > lo > 0 and count >= 2");
  std::vector<double> out(count);
  const double ratio = std::pow(lo / hi, 1.0 / (count - 1));
  double t = hi;
  for (int i = 0; i < count; ++i, t *= ratio) out[i] = t;
  out.back() = lo;
  return out;
}

}  // namespace blsac
