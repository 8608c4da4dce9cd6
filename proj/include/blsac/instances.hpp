#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "blsac/fourier.hpp"
#include "blsac/mdp.hpp"
#include "blsac/policy.hpp"
#include "blsac/rng.hpp"
#include "blsac/soft_dynamics.hpp"

namespace blsac {

// Seeded random MDP on the canonical uniform action grid. Transition rows are
// drawn with mass bounded away from zero so chains mix quickly; rewards are
// uniform in [-1, 1].
inline DiscreteMdp random_mdp(Rng& rng, int n_states, int n_actions, double gamma) {
  DiscreteMdp mdp;
  mdp.n_states = n_states;
  mdp.action_grid = uniform_action_grid(n_actions);
  mdp.gamma = gamma;
  mdp.rewards.resize(static_cast<Eigen::Index>(n_states) * n_actions);
  for (Eigen::Index i = 0; i < mdp.rewards.size(); ++i) mdp.rewards(i) = rng.uniform(-1.0, 1.0);
  mdp.transitions.resize(mdp.rewards.size(), n_states);
  for (Eigen::Index row = 0; row < mdp.transitions.rows(); ++row) {
    double mass = 0.0;
    for (int k = 0; k < n_states; ++k) {
      mdp.transitions(row, k) = rng.uniform(0.1, 1.0);
      mass += mdp.transitions(row, k);
    }
    mdp.transitions.row(row) /= mass;
  }
  mdp.validate();
  return mdp;
}

inline DiscreteMdp random_mdp(std::uint64_t seed, int n_states, int n_actions, double gamma) {
  Rng rng(seed);
  return random_mdp(rng, n_states, n_actions, gamma);
}

// Random policy with rows bounded away from zero, normalized.
inline SoftPolicy random_policy(Rng& rng, int n_states, int n_actions, double temperature) {
  Eigen::MatrixXd probs(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    double mass = 0.0;
    for (int a = 0; a < n_actions; ++a) {
      probs(s, a) = rng.uniform(0.05, 1.0);
      mass += probs(s, a);
    }
    probs.row(s) /= mass;
  }
  return make_soft_policy(std::move(probs), temperature);
}

// The Boltzmann policy of the exact soft values under a uniform reference
// policy: a reproducible, instance-adapted policy at any temperature.
inline SoftPolicy boltzmann_reference_policy(const DiscreteMdp& mdp, double temperature) {
  const SoftPolicy reference = uniform_policy(mdp.n_states, mdp.n_actions(), temperature);
  return boltzmann_policy(exact_soft_q(mdp, reference), temperature, mdp);
}

// Reward perturbation confined to the span of the high-frequency feature
// block, with independent standard normal coefficients scaled by amplitude.
inline Eigen::VectorXd random_high_frequency_noise(Rng& rng, const FourierFeatures& features,
                                                   double amplitude) {
  Eigen::VectorXd coefficients(features.high_size());
  for (Eigen::Index i = 0; i < coefficients.size(); ++i) coefficients(i) = amplitude * rng.normal();
  return features.phi_high() * coefficients;
}

}  // namespace blsac
