#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "blsac/mdp.hpp"
#include "blsac/policy.hpp"

namespace blsac {

// Policy-induced transition matrix over state-action pairs. Entry
// ((i,j),(k,l)) = p(s_k | s_i, a_j) * pi(a_l | s_k): the chain first draws the
// next state from the MDP, then the next action from the policy. Rows are
// stochastic for any valid inputs.
inline Eigen::MatrixXd build_transition_matrix(const DiscreteMdp& mdp, const SoftPolicy& policy) {
  if (policy.n_states() != mdp.n_states || policy.n_actions() != mdp.n_actions())
    throw std::invalid_argument("build_transition_matrix: policy shape does not match the mdp");
  const int s_count = mdp.n_states, m = mdp.n_actions();
  const Eigen::Index n = mdp.size();
  Eigen::MatrixXd p_pi(n, n);
  for (int i = 0; i < s_count; ++i) {
    for (int j = 0; j < m; ++j) {
      const Eigen::Index row = sa_index(i, j, m);
      for (int k = 0; k < s_count; ++k) {
        const double p_next = mdp.transitions(row, k);
        for (int l = 0; l < m; ++l)
          p_pi(row, sa_index(k, l, m)) = p_next * policy.probs(k, l);
      }
    }
  }
  return p_pi;
}

// Exact soft state-action values: the unique solution of
//   q = r + gamma P_pi (q - omega),
// with omega the per-state-action expansion of the policy's cached
// temperature-scaled negative entropy. Solved directly; I - gamma P_pi is
// invertible for gamma < 1.
inline QVector exact_soft_q(const DiscreteMdp& mdp, const SoftPolicy& policy) {
  const Eigen::MatrixXd p_pi = build_transition_matrix(mdp, policy);
  const Eigen::Index n = p_pi.rows();
  const Eigen::VectorXd omega = expand_per_state(policy.entropy_terms, mdp.n_actions());
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - mdp.gamma * p_pi;
  const Eigen::VectorXd b = mdp.rewards - mdp.gamma * (p_pi * omega);
  return a.partialPivLu().solve(b);
}

// Entropy-free counterpart: q = r + gamma P_pi q. This is the discounted
// return of the policy, used for reporting expected returns.
inline QVector exact_plain_q(const DiscreteMdp& mdp, const SoftPolicy& policy) {
  const Eigen::MatrixXd p_pi = build_transition_matrix(mdp, policy);
  const Eigen::Index n = p_pi.rows();
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - mdp.gamma * p_pi;
  return a.partialPivLu().solve(mdp.rewards);
}

}  // namespace blsac
