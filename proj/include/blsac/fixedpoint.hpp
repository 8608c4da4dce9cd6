#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

#include "blsac/fourier.hpp"
#include "blsac/soft_dynamics.hpp"

namespace blsac {

// Density-weighted feature couplings, in the [low | high] column order of the
// assembled feature matrix:
//   U     = gamma Phi^T N P Phi      (one-step feature cross-coupling)
//   V     = Phi^T N Phi              (density-weighted Gram matrix)
//   Delta = V - U
// gamma_lh = (Delta_LL)^{-1} (N^{1/2} Phi_L)^T (N^{1/2} Phi_H) is the operator
// through which high-frequency solution coefficients perturb low-frequency
// ones. It vanishes together with V_LH for uniform policies, where the
// density is flat across actions and the Gram blocks decouple exactly.
struct CouplingMatrices {
  Eigen::MatrixXd u, v, delta;
  Eigen::MatrixXd phi;       // carried along for reconstructions and residuals
  Eigen::MatrixXd gamma_lh;
  Eigen::Index low_size = 0;
  double delta_ll_condition = 0.0;
  double delta_min_symmetric_eig = 0.0;  // min eigenvalue of (Delta + Delta^T)/2

  Eigen::Index total() const { return delta.rows(); }
  Eigen::Index high_size() const { return total() - low_size; }

  Eigen::Block<const Eigen::MatrixXd> u_ll() const { return u.block(0, 0, low_size, low_size); }
  Eigen::Block<const Eigen::MatrixXd> u_lh() const { return u.block(0, low_size, low_size, high_size()); }
  Eigen::Block<const Eigen::MatrixXd> u_hl() const { return u.block(low_size, 0, high_size(), low_size); }
  Eigen::Block<const Eigen::MatrixXd> u_hh() const { return u.block(low_size, low_size, high_size(), high_size()); }
  Eigen::Block<const Eigen::MatrixXd> v_ll() const { return v.block(0, 0, low_size, low_size); }
  Eigen::Block<const Eigen::MatrixXd> v_lh() const { return v.block(0, low_size, low_size, high_size()); }
  Eigen::Block<const Eigen::MatrixXd> v_hl() const { return v.block(low_size, 0, high_size(), low_size); }
  Eigen::Block<const Eigen::MatrixXd> v_hh() const { return v.block(low_size, low_size, high_size(), high_size()); }
  Eigen::Block<const Eigen::MatrixXd> delta_ll() const { return delta.block(0, 0, low_size, low_size); }
  Eigen::Block<const Eigen::MatrixXd> delta_lh() const { return delta.block(0, low_size, low_size, high_size()); }
  Eigen::Block<const Eigen::MatrixXd> delta_hl() const { return delta.block(low_size, 0, high_size(), low_size); }
  Eigen::Block<const Eigen::MatrixXd> delta_hh() const { return delta.block(low_size, low_size, high_size(), high_size()); }
};

inline double condition_number(const Eigen::MatrixXd& m) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  const double smallest = s(s.size() - 1);
  if (smallest <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smallest;
}

namespace detail {

// Pivoted LU with one step of iterative refinement. The systems here are
// tiny but can reach conditioning around 1e5 at discounts near 1, where a
// plain solve leaves ~1e-9 absolute error on O(100) solutions; refinement
// buys back two to three digits.
inline Eigen::MatrixXd refined_solve(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu,
                                     const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd x = lu.solve(b);
  x += lu.solve(b - a * x);
  return x;
}

inline Eigen::MatrixXd refined_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return refined_solve(a.partialPivLu(), a, b);
}

}  // namespace detail

inline CouplingMatrices build_coupling(const FourierFeatures& features,
                                       const Eigen::VectorXd& density,
                                       const Eigen::MatrixXd& transition, double gamma) {
  if (density.size() != features.phi.rows() || transition.rows() != features.phi.rows() ||
      transition.cols() != features.phi.rows())
    throw std::invalid_argument("build_coupling: shape mismatch");
  CouplingMatrices c;
  c.phi = features.phi;
  c.low_size = features.low_size();
  const Eigen::MatrixXd weighted = density.asDiagonal() * features.phi;  // N Phi
  c.v.noalias() = features.phi.transpose() * weighted;
  c.u.noalias() = gamma * weighted.transpose() * (transition * features.phi);
  c.delta = c.v - c.u;

  c.delta_ll_condition = condition_number(c.delta_ll());
  if (c.delta_ll_condition > 1e14)
    throw std::runtime_error("build_coupling: low-frequency Delta block numerically singular, condition " +
                             std::to_string(c.delta_ll_condition));
  const Eigen::MatrixXd sym = 0.5 * (c.delta + c.delta.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  c.delta_min_symmetric_eig = eig.eigenvalues().minCoeff();

  const Eigen::VectorXd root = density.cwiseSqrt();
  const Eigen::MatrixXd low = root.asDiagonal() * features.phi_low();
  const Eigen::MatrixXd high = root.asDiagonal() * features.phi_high();
  c.gamma_lh = detail::refined_solve(c.delta_ll(), low.transpose() * high);
  return c;
}

// Feature-space coefficients of the soft reward: the density-weighted reward
// projection minus the discounted projection of the expected entropy term,
//   r_soft = Phi^T N r - gamma Phi^T N P omega,
// split into the low/high blocks.
struct SoftRewardCoefficients {
  Eigen::VectorXd low, high;
  Eigen::VectorXd stacked() const {
    Eigen::VectorXd out(low.size() + high.size());
    out << low, high;
    return out;
  }
};

inline SoftRewardCoefficients soft_reward_coefficients(const FourierFeatures& features,
                                                       const Eigen::VectorXd& density,
                                                       const Eigen::MatrixXd& transition,
                                                       const Eigen::VectorXd& rewards,
                                                       const Eigen::VectorXd& entropy_terms_sa,
                                                       double gamma) {
  if (rewards.size() != features.phi.rows() || entropy_terms_sa.size() != features.phi.rows())
    throw std::invalid_argument("soft_reward_coefficients: shape mismatch");
  const Eigen::VectorXd weighted = density.asDiagonal() * (rewards - gamma * (transition * entropy_terms_sa));
  const Eigen::VectorXd full = features.phi.transpose() * weighted;
  return SoftRewardCoefficients{full.head(features.low_size()), full.tail(features.high_size())};
}

enum class FixedPointVariant { kClassic, kBandlimited, kLowRes };

struct FixedPointSolution {
  FixedPointVariant variant = FixedPointVariant::kClassic;
  Eigen::VectorXd omega_low, omega_high;  // omega_high is empty for kLowRes
  QVector q_values;                       // reconstructed state-action values
  double residual_norm = 0.0;             // inf-norm of the defining projected equation
  SoftRewardCoefficients soft_rewards;

  Eigen::VectorXd omega() const {
    Eigen::VectorXd out(omega_low.size() + omega_high.size());
    out << omega_low, omega_high;
    return out;
  }
};

namespace detail {

inline double classic_residual(const CouplingMatrices& c, const Eigen::VectorXd& r,
                               const Eigen::VectorXd& omega) {
  return (r + (c.u - c.v) * omega).lpNorm<Eigen::Infinity>();
}

inline double bandlimited_residual(const CouplingMatrices& c, const Eigen::VectorXd& r,
                                   const Eigen::VectorXd& omega_low, const Eigen::VectorXd& omega) {
  return (r + c.u.leftCols(c.low_size) * omega_low - c.v * omega).lpNorm<Eigen::Infinity>();
}

}  // namespace detail

// Fixed point of the projected soft Bellman equation, solved monolithically:
// omega = Delta^{-1} r_soft.
inline FixedPointSolution solve_classic(const CouplingMatrices& c, const SoftRewardCoefficients& r) {
  FixedPointSolution sol;
  sol.variant = FixedPointVariant::kClassic;
  sol.soft_rewards = r;
  const Eigen::VectorXd stacked = r.stacked();
  const Eigen::VectorXd omega = detail::refined_solve(c.delta, stacked);
  sol.omega_low = omega.head(c.low_size);
  sol.omega_high = omega.tail(c.high_size());
  sol.q_values = c.phi * omega;
  sol.residual_norm = detail::classic_residual(c, stacked, omega);
  return sol;
}

// Same fixed point through the block elimination route: the high block by a
// Schur-complement solve, the low block by back substitution. Agreement with
// the monolithic solve is a consistency check on the block algebra.
inline FixedPointSolution solve_classic_blockform(const CouplingMatrices& c,
                                                  const SoftRewardCoefficients& r) {
  FixedPointSolution sol;
  sol.variant = FixedPointVariant::kClassic;
  sol.soft_rewards = r;
  const Eigen::MatrixXd ll = c.delta_ll();
  const Eigen::PartialPivLU<Eigen::MatrixXd> ll_lu(ll);
  if (c.high_size() == 0) {
    sol.omega_low = detail::refined_solve(ll_lu, ll, r.low);
    sol.omega_high.resize(0);
  } else {
    const Eigen::MatrixXd schur =
        c.delta_hh() - c.delta_hl() * detail::refined_solve(ll_lu, ll, c.delta_lh());
    const Eigen::VectorXd rhs = r.high - c.delta_hl() * detail::refined_solve(ll_lu, ll, r.low);
    sol.omega_high = detail::refined_solve(schur, rhs);
    sol.omega_low = detail::refined_solve(ll_lu, ll, r.low - c.delta_lh() * sol.omega_high);
  }
  const Eigen::VectorXd omega = sol.omega();
  sol.q_values = c.phi * omega;
  sol.residual_norm = detail::classic_residual(c, r.stacked(), omega);
  return sol;
}

// Fixed point when the regression target passes through an ideal low-pass
// filter: only the low-frequency block of the approximation feeds the
// next-state value, so the high-frequency coupling enters through V rather
// than Delta. Solved by Schur elimination of the high block.
inline FixedPointSolution solve_bandlimited(const CouplingMatrices& c,
                                            const SoftRewardCoefficients& r) {
  FixedPointSolution sol;
  sol.variant = FixedPointVariant::kBandlimited;
  sol.soft_rewards = r;
  const Eigen::MatrixXd ll = c.delta_ll();
  const Eigen::PartialPivLU<Eigen::MatrixXd> ll_lu(ll);
  if (c.high_size() == 0) {
    sol.omega_low = detail::refined_solve(ll_lu, ll, r.low);
    sol.omega_high.resize(0);
  } else {
    const Eigen::MatrixXd schur =
        c.v_hh() - c.delta_hl() * detail::refined_solve(ll_lu, ll, c.v_lh());
    const double cond = condition_number(schur);
    if (cond > 1e14)
      throw std::runtime_error("solve_bandlimited: high-block Schur complement singular, condition " +
                               std::to_string(cond));
    const Eigen::VectorXd rhs = r.high - c.delta_hl() * detail::refined_solve(ll_lu, ll, r.low);
    sol.omega_high = detail::refined_solve(schur, rhs);
    sol.omega_low = detail::refined_solve(ll_lu, ll, r.low - c.v_lh() * sol.omega_high);
  }
  const Eigen::VectorXd omega = sol.omega();
  sol.q_values = c.phi * omega;
  sol.residual_norm = detail::bandlimited_residual(c, r.stacked(), sol.omega_low, omega);
  return sol;
}

// Fixed point restricted to the low-frequency columns alone:
// omega = (Delta_LL)^{-1} r_soft_low.
inline FixedPointSolution solve_lowres(const CouplingMatrices& c, const SoftRewardCoefficients& r) {
  FixedPointSolution sol;
  sol.variant = FixedPointVariant::kLowRes;
  sol.soft_rewards = r;
  sol.omega_low = detail::refined_solve(c.delta_ll(), r.low);
  sol.omega_high.resize(0);
  sol.q_values = c.phi.leftCols(c.low_size) * sol.omega_low;
  sol.residual_norm = (r.low - c.delta_ll() * sol.omega_low).lpNorm<Eigen::Infinity>();
  return sol;
}

// The bandlimited low block decomposes as the low-resolution solution plus a
// coupling correction: omega_bl_low = omega_lowres - gamma_lh * omega_bl_high.
// Returns the inf-norm gap of that identity for a solved pair.
inline double decomposition_identity_error(const FixedPointSolution& bandlimited,
                                           const FixedPointSolution& lowres,
                                           const CouplingMatrices& c) {
  if (bandlimited.variant != FixedPointVariant::kBandlimited ||
      lowres.variant != FixedPointVariant::kLowRes)
    throw std::invalid_argument("decomposition_identity_error: pass a bandlimited and a lowres solution");
  Eigen::VectorXd reconstructed = lowres.omega_low;
  if (bandlimited.omega_high.size() > 0) reconstructed -= c.gamma_lh * bandlimited.omega_high;
  return (bandlimited.omega_low - reconstructed).lpNorm<Eigen::Infinity>();
}

// Shift of the fixed-point coefficients under a reward perturbation,
// computed by re-solving with the perturbed rewards and differencing. The
// closed-form expression for the low-block shift,
//   classic:      (Delta_LL)^{-1} (eps_low - Delta_LH * delta_omega_high)
//   bandlimited:  (Delta_LL)^{-1} (eps_low - V_LH * delta_omega_high)
//   low-res:      (Delta_LL)^{-1} eps_low
// is evaluated as a consistency check; closed_form_gap is its inf-norm
// disagreement with the re-solve difference.
struct NoiseShift {
  Eigen::VectorXd delta_low, delta_high;
  Eigen::VectorXd eps_low, eps_high;  // feature-space blocks of the reward noise
  double closed_form_gap = 0.0;
};

inline FixedPointSolution solve_variant(FixedPointVariant variant, const CouplingMatrices& c,
                                        const SoftRewardCoefficients& r) {
  switch (variant) {
    case FixedPointVariant::kClassic: return solve_classic(c, r);
    case FixedPointVariant::kBandlimited: return solve_bandlimited(c, r);
    case FixedPointVariant::kLowRes: return solve_lowres(c, r);
  }
  throw std::logic_error("solve_variant: unknown variant");
}

inline NoiseShift noise_shift(const DiscreteMdp& mdp, const SoftPolicy& policy,
                              const FourierFeatures& features, const Eigen::VectorXd& reward_noise,
                              FixedPointVariant variant, double eps_mix = 1e-3) {
  if (reward_noise.size() != mdp.size()) throw std::invalid_argument("noise_shift: noise has wrong shape");
  const Eigen::MatrixXd p_pi = build_transition_matrix(mdp, policy);
  const Eigen::VectorXd density = visitation_density(p_pi, eps_mix);
  const CouplingMatrices coupling = build_coupling(features, density, p_pi, mdp.gamma);
  const Eigen::VectorXd omega_sa = expand_per_state(policy.entropy_terms, mdp.n_actions());

  const auto base = soft_reward_coefficients(features, density, p_pi, mdp.rewards, omega_sa, mdp.gamma);
  const auto noisy = soft_reward_coefficients(features, density, p_pi,
                                              mdp.rewards + reward_noise, omega_sa, mdp.gamma);
  const FixedPointSolution sol_base = solve_variant(variant, coupling, base);
  const FixedPointSolution sol_noisy = solve_variant(variant, coupling, noisy);

  NoiseShift shift;
  shift.delta_low = sol_noisy.omega_low - sol_base.omega_low;
  shift.delta_high = sol_noisy.omega_high - sol_base.omega_high;
  const Eigen::VectorXd eps_proj = features.phi.transpose() * (density.asDiagonal() * reward_noise);
  shift.eps_low = eps_proj.head(features.low_size());
  shift.eps_high = eps_proj.tail(features.high_size());

  Eigen::VectorXd rhs = shift.eps_low;
  if (shift.delta_high.size() > 0) {
    if (variant == FixedPointVariant::kClassic)
      rhs -= coupling.delta_lh() * shift.delta_high;
    else if (variant == FixedPointVariant::kBandlimited)
      rhs -= coupling.v_lh() * shift.delta_high;
  }
  const Eigen::VectorXd closed_form = detail::refined_solve(coupling.delta_ll(), rhs);
  shift.closed_form_gap = (shift.delta_low - closed_form).lpNorm<Eigen::Infinity>();
  return shift;
}

// Magnitudes of the cross-frequency coupling blocks in both spectral and
// Frobenius norms. Whether the bandlimited coupling is smaller than the
// classic one (|V_LH| < |Delta_LH|) is instance-dependent: it is evaluated
// here per instance, never asserted globally.
struct AttenuationReport {
  double v_lh_spectral = 0.0, v_lh_frobenius = 0.0;
  double delta_lh_spectral = 0.0, delta_lh_frobenius = 0.0;
  double gamma_lh_spectral = 0.0, gamma_lh_frobenius = 0.0;
  bool v_smaller_spectral = false, v_smaller_frobenius = false;
};

inline double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

inline AttenuationReport attenuation_report(const CouplingMatrices& c) {
  AttenuationReport rep;
  const Eigen::MatrixXd v_lh = c.v_lh();
  const Eigen::MatrixXd d_lh = c.delta_lh();
  rep.v_lh_spectral = spectral_norm(v_lh);
  rep.v_lh_frobenius = v_lh.norm();
  rep.delta_lh_spectral = spectral_norm(d_lh);
  rep.delta_lh_frobenius = d_lh.norm();
  rep.gamma_lh_spectral = spectral_norm(c.gamma_lh);
  rep.gamma_lh_frobenius = c.gamma_lh.norm();
  rep.v_smaller_spectral = rep.v_lh_spectral < rep.delta_lh_spectral;
  rep.v_smaller_frobenius = rep.v_lh_frobenius < rep.delta_lh_frobenius;
  return rep;
}

}  // namespace blsac
