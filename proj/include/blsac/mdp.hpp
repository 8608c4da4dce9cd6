#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace blsac {

// State-action vectors and matrices use state-major ordering throughout the
// library: index(s, a) = s * n_actions + a, i.e. all actions of state 0, then
// all actions of state 1, and so on. Every matrix assembled anywhere in the
// repo follows this convention.
inline Eigen::Index sa_index(Eigen::Index state, Eigen::Index action, Eigen::Index n_actions) {
  return state * n_actions + action;
}

// A state-action value vector of length n_states * n_actions, state-major.
using QVector = Eigen::VectorXd;

// Uniform periodic action grid on [-1, 1): a_j = -1 + 2 j / M. The spacing is
// 2 / M and index arithmetic wraps, which is what makes the discrete Fourier
// basis in the action dimension exactly orthonormal.
inline Eigen::VectorXd uniform_action_grid(int n_actions) {
  if (n_actions < 1) throw std::invalid_argument("uniform_action_grid: need at least one action");
  Eigen::VectorXd grid(n_actions);
  for (int j = 0; j < n_actions; ++j) grid(j) = -1.0 + 2.0 * j / n_actions;
  return grid;
}

// Finite MDP with a discrete state space and a gridded 1-D action space.
//
//   action_grid   M strictly increasing action values inside [-1, 1]
//   rewards       length S*M, state-major
//   transitions   (S*M) x S matrix; row sa_index(s, a) holds p(.|s, a)
//   gamma         discount, strictly below 1
struct DiscreteMdp {
  int n_states = 0;
  Eigen::VectorXd action_grid;
  Eigen::VectorXd rewards;
  Eigen::MatrixXd transitions;
  double gamma = 0.0;

  int n_actions() const { return static_cast<int>(action_grid.size()); }
  Eigen::Index size() const { return static_cast<Eigen::Index>(n_states) * n_actions(); }
  double grid_spacing() const { return 2.0 / n_actions(); }

  void validate() const {
    if (n_states < 1) throw std::invalid_argument("DiscreteMdp: n_states must be positive");
    const int m = n_actions();
    if (m < 1) throw std::invalid_argument("DiscreteMdp: empty action grid");
    if (!(gamma >= 0.0 && gamma < 1.0))
      throw std::invalid_argument("DiscreteMdp: gamma must lie in [0, 1)");
    for (int j = 0; j < m; ++j) {
      if (action_grid(j) < -1.0 || action_grid(j) > 1.0)
        throw std::invalid_argument("DiscreteMdp: action grid endpoints must lie in [-1, 1]");
      if (j > 0 && !(action_grid(j) > action_grid(j - 1)))
        throw std::invalid_argument("DiscreteMdp: action grid must be strictly increasing");
    }
    if (rewards.size() != size()) throw std::invalid_argument("DiscreteMdp: reward vector has wrong length");
    if (transitions.rows() != size() || transitions.cols() != n_states)
      throw std::invalid_argument("DiscreteMdp: transition tensor has wrong shape");
    for (Eigen::Index r = 0; r < transitions.rows(); ++r) {
      double row_sum = 0.0;
      for (int k = 0; k < n_states; ++k) {
        const double p = transitions(r, k);
        if (p < 0.0) throw std::invalid_argument("DiscreteMdp: negative transition probability");
        row_sum += p;
      }
      if (std::abs(row_sum - 1.0) > 1e-12)
        throw std::invalid_argument("DiscreteMdp: transition slice does not sum to 1");
    }
    if (!rewards.allFinite()) throw std::invalid_argument("DiscreteMdp: rewards must be finite");
  }
};

inline bool is_valid_q(const DiscreteMdp& mdp, const QVector& q) {
  return q.size() == mdp.size() && q.allFinite();
}

// Stationary state-action distribution of a row-stochastic transition matrix,
// computed by left power iteration on the mixed chain
// (1 - eps_mix) P + eps_mix * uniform. A small eps_mix guarantees ergodicity
// on degenerate chains; pass 0 for irreducible aperiodic chains. The returned
// vector is the diagonal of the visitation density matrix: entries are
// positive (for eps_mix > 0) and sum to 1.
inline Eigen::VectorXd visitation_density(const Eigen::MatrixXd& transition,
                                          double eps_mix = 1e-3,
                                          int max_iterations = 500000,
                                          double tolerance = 1e-13) {
  const Eigen::Index n = transition.rows();
  if (transition.cols() != n) throw std::invalid_argument("visitation_density: matrix must be square");
  for (Eigen::Index r = 0; r < n; ++r) {
    if (std::abs(transition.row(r).sum() - 1.0) > 1e-9)
      throw std::invalid_argument("visitation_density: matrix is not row-stochastic");
  }
  const double uniform = 1.0 / static_cast<double>(n);
  Eigen::VectorXd d = Eigen::VectorXd::Constant(n, uniform);
  Eigen::VectorXd next(n);
  for (int it = 0; it < max_iterations; ++it) {
    next.noalias() = transition.transpose() * d;
    if (eps_mix > 0.0) next = (1.0 - eps_mix) * next + Eigen::VectorXd::Constant(n, eps_mix * uniform);
    next /= next.sum();
    const double change = (next - d).lpNorm<1>();
    d.swap(next);
    if (change <= tolerance) return d;
  }
  throw std::runtime_error("visitation_density: power iteration did not converge within " +
                           std::to_string(max_iterations) + " iterations");
}

}  // namespace blsac
