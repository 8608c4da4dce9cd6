#include <catch2/catch.hpp>

#include "blsac/instances.hpp"
#include "blsac/softpi.hpp"
#include "oracles.hpp"

using namespace blsac;

namespace {

// Single-state MDP over a periodic action grid with a prescribed reward
// shape; the one transition is the identity.
DiscreteMdp bandit(int n_actions, double gamma, const std::function<double(double)>& reward) {
  DiscreteMdp mdp;
  mdp.n_states = 1;
  mdp.action_grid = uniform_action_grid(n_actions);
  mdp.gamma = gamma;
  mdp.rewards.resize(n_actions);
  for (int a = 0; a < n_actions; ++a) mdp.rewards(a) = reward(mdp.action_grid(a));
  mdp.transitions = Eigen::MatrixXd::Ones(n_actions, 1);
  mdp.validate();
  return mdp;
}

int greedy_cell(const QVector& values) {
  Eigen::Index argmax;
  values.maxCoeff(&argmax);
  return static_cast<int>(argmax);
}

}  // namespace

TEST_CASE("bellman target at gamma zero returns the rewards for every filter") {
  Rng rng(111);
  const DiscreteMdp mdp = random_mdp(rng, 2, 8, 0.0);
  const SoftPolicy policy = random_policy(rng, 2, 8, 0.7);
  const FourierFeatures features = make_features(mdp, 8, 3);
  QVector q(16);
  for (int i = 0; i < 16; ++i) q(i) = rng.uniform(-1.0, 1.0);
  REQUIRE((soft_bellman_target(q, mdp, policy) - mdp.rewards).lpNorm<Eigen::Infinity>() < 1e-14);
  REQUIRE((soft_bellman_target(q, mdp, policy, ideal_lowpass(features)) - mdp.rewards)
              .lpNorm<Eigen::Infinity>() < 1e-14);
  const SincFilter f = design_filter(0.4, 2);
  REQUIRE((soft_bellman_target(q, mdp, policy, sinc_lowpass(f, mdp)) - mdp.rewards)
              .lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("bellman target with the ideal filter fixes low-band inputs") {
  Rng rng(112);
  const DiscreteMdp mdp = random_mdp(rng, 2, 8, 0.9);
  const SoftPolicy policy = random_policy(rng, 2, 8, 0.9);
  const FourierFeatures features = make_features(mdp, 8, 5);
  Eigen::VectorXd coeff(features.low_size());
  for (Eigen::Index i = 0; i < coeff.size(); ++i) coeff(i) = rng.uniform(-1.0, 1.0);
  const QVector q = features.phi_low() * coeff;
  const QVector classic = soft_bellman_target(q, mdp, policy);
  const QVector filtered = soft_bellman_target(q, mdp, policy, ideal_lowpass(features));
  REQUIRE((classic - filtered).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("bellman target matches the dense operator") {
  Rng rng(113);
  const DiscreteMdp mdp = random_mdp(rng, 3, 4, 0.93);
  const SoftPolicy policy = random_policy(rng, 3, 4, 1.2);
  QVector q(12);
  for (int i = 0; i < 12; ++i) q(i) = rng.uniform(-2.0, 2.0);
  const Eigen::MatrixXd p = build_transition_matrix(mdp, policy);
  const Eigen::VectorXd omega = expand_per_state(policy.entropy_terms, 4);
  const QVector dense = mdp.rewards + mdp.gamma * (p * (q - omega));
  REQUIRE((soft_bellman_target(q, mdp, policy) - dense).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("td iteration converges to the classic closed form") {
  Rng rng(114);
  const DiscreteMdp mdp = random_mdp(rng, 2, 8, 0.9);
  const SoftPolicy policy = random_policy(rng, 2, 8, 1.0);
  const FourierFeatures features = make_features(mdp, 8, 5);
  const Eigen::MatrixXd p = build_transition_matrix(mdp, policy);
  const Eigen::VectorXd d = visitation_density(p);
  const auto coupling = build_coupling(features, d, p, mdp.gamma);
  const auto rewards = soft_reward_coefficients(features, d, p, mdp.rewards,
                                                expand_per_state(policy.entropy_terms, 8), mdp.gamma);
  const FixedPointSolution target = solve_classic(coupling, rewards);
  const TdIterationResult td = projected_td_iteration(mdp, policy, features, {}, 0.0, 60000);
  REQUIRE_FALSE(td.diverged);
  REQUIRE((td.omega - target.omega()).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("td iteration converges to the bandlimited closed form") {
  Rng rng(115);
  const DiscreteMdp mdp = random_mdp(rng, 2, 8, 0.9);
  const SoftPolicy policy = random_policy(rng, 2, 8, 1.0);
  const FourierFeatures features = make_features(mdp, 8, 5);
  const Eigen::MatrixXd p = build_transition_matrix(mdp, policy);
  const Eigen::VectorXd d = visitation_density(p);
  const auto coupling = build_coupling(features, d, p, mdp.gamma);
  const auto rewards = soft_reward_coefficients(features, d, p, mdp.rewards,
                                                expand_per_state(policy.entropy_terms, 8), mdp.gamma);
  const FixedPointSolution target = solve_bandlimited(coupling, rewards);
  const TdIterationResult td =
      projected_td_iteration(mdp, policy, features, ideal_lowpass(features), 0.0, 60000);
  REQUIRE_FALSE(td.diverged);
  REQUIRE((td.omega - target.omega()).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("td iteration with the complete basis reproduces the exact soft values") {
  Rng rng(122);
  const DiscreteMdp mdp = random_mdp(rng, 2, 8, 0.9);
  const SoftPolicy policy = random_policy(rng, 2, 8, 0.8);
  const FourierFeatures features = make_features(mdp, 8, 5);
  const TdIterationResult td = projected_td_iteration(mdp, policy, features, {}, 0.0, 60000);
  REQUIRE_FALSE(td.diverged);
  const QVector exact = exact_soft_q(mdp, policy);
  REQUIRE((features.phi * td.omega - exact).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("td iteration stays at zero for zero rewards and zero entropy") {
  Rng rng(116);
  DiscreteMdp mdp = random_mdp(rng, 2, 8, 0.9);
  mdp.rewards.setZero();
  const SoftPolicy policy = random_policy(rng, 2, 8, 0.0);
  const FourierFeatures features = make_features(mdp, 8, 5);
  const TdIterationResult td = projected_td_iteration(mdp, policy, features, {}, 0.0, 200);
  REQUIRE(td.omega.lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("td iteration reports divergence under an oversized step") {
  Rng rng(117);
  const DiscreteMdp mdp = random_mdp(rng, 2, 8, 0.99);
  const SoftPolicy policy = random_policy(rng, 2, 8, 1.0);
  const FourierFeatures features = make_features(mdp, 8, 5);
  const TdIterationResult td = projected_td_iteration(mdp, policy, features, {}, 1e4, 50000);
  REQUIRE(td.diverged);
}

TEST_CASE("ideal-filter targets carry no high-frequency content at any iteration") {
  Rng rng(118);
  const DiscreteMdp mdp = random_mdp(rng, 2, 8, 0.9);
  const SoftPolicy policy = random_policy(rng, 2, 8, 0.8);
  const FourierFeatures features = make_features(mdp, 8, 5);
  const GridFilterFn filter = ideal_lowpass(features);
  const TdIterationResult td = projected_td_iteration(mdp, policy, features, filter, 0.0, 2000);
  for (const Eigen::VectorXd& omega : td.snapshots) {
    const QVector filtered = filter(features.phi * omega);
    REQUIRE(project_high(filtered, features).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("expected return at gamma zero is the mean immediate reward") {
  Rng rng(119);
  const DiscreteMdp mdp = random_mdp(rng, 3, 4, 0.0);
  const SoftPolicy policy = random_policy(rng, 3, 4, 1.0);
  Eigen::VectorXd start(3);
  start << 0.2, 0.5, 0.3;
  double direct = 0.0;
  for (int s = 0; s < 3; ++s)
    for (int a = 0; a < 4; ++a)
      direct += start(s) * policy.probs(s, a) * mdp.rewards(sa_index(s, a, 4));
  REQUIRE(expected_return(mdp, policy, start) == Approx(direct).margin(1e-13));
}

TEST_CASE("expected return of a constant-reward chain is the geometric sum") {
  DiscreteMdp mdp = bandit(4, 0.9, [](double) { return 1.0; });
  const SoftPolicy policy = uniform_policy(1, 4, 1.0);
  REQUIRE(expected_return(mdp, policy, Eigen::VectorXd::Ones(1)) == Approx(10.0).epsilon(1e-12));
}

TEST_CASE("expected return matches a Monte Carlo rollout oracle") {
  Rng rng(120);
  const DiscreteMdp mdp = random_mdp(rng, 3, 4, 0.8);
  const SoftPolicy policy = random_policy(rng, 3, 4, 1.0);
  const Eigen::VectorXd start = Eigen::VectorXd::Constant(3, 1.0 / 3);
  const double exact = expected_return(mdp, policy, start);
  const auto mc = oracles::mc_return(mdp, policy, start, 100000, 90, 424242);
  REQUIRE(std::abs(exact - mc.mean) < 3.0 * mc.std_error);
}

TEST_CASE("bandit with a smooth hill: every variant cools onto the peak") {
  const DiscreteMdp mdp = bandit(16, 0.5, [](double a) { return std::cos(kPi * a); });
  const int peak = greedy_cell(mdp.rewards);  // grid contains the exact peak a = 0
  for (const auto variant : {EvalVariant::kClassic, EvalVariant::kBandlimitedIdeal,
                             EvalVariant::kBandlimitedSinc}) {
    double previous_entropy = std::numeric_limits<double>::infinity();
    for (double alpha : {1.0, 0.3, 0.1}) {
      SacOptions options;
      options.low_count = 5;
      options.outer_iterations = 12;
      options.eval_iterations = 3000;
      const SacResult run = soft_policy_iteration(mdp, alpha, variant, options);
      const double entropy = policy_entropy(run.policy)(0);
      REQUIRE(entropy <= previous_entropy + 1e-9);
      previous_entropy = entropy;
      if (alpha == 0.1) {
        Eigen::Index greedy;
        run.policy.probs.row(0).maxCoeff(&greedy);
        REQUIRE(std::abs(static_cast<int>(greedy) - peak) <= 1);
      }
    }
  }
}

TEST_CASE("bandit with a narrow spike: bandlimiting tracks the broad hill") {
  const int m = 32;
  const int spike_cell = 24;  // action +0.5
  const double spike_height = 2.0;
  DiscreteMdp mdp = bandit(m, 0.3, [](double a) { return std::cos(kPi * (a + 0.25)); });
  mdp.rewards(spike_cell) += spike_height;
  const int hill_peak = 12;  // action -0.25
  REQUIRE(greedy_cell(mdp.rewards) == spike_cell);

  SacOptions options;
  options.low_count = 5;
  options.outer_iterations = 12;
  options.eval_iterations = 4000;

  const SacResult classic = soft_policy_iteration(mdp, 0.05, EvalVariant::kClassic, options);
  Eigen::Index classic_greedy;
  classic.policy.probs.row(0).maxCoeff(&classic_greedy);
  REQUIRE(static_cast<int>(classic_greedy) == spike_cell);

  const SacResult bl = soft_policy_iteration(mdp, 0.05, EvalVariant::kBandlimitedIdeal, options);
  Eigen::Index bl_greedy;
  bl.policy.probs.row(0).maxCoeff(&bl_greedy);

  // oracle: the spectral projection of the reward onto the low band
  const FourierFeatures features = make_features(mdp, m, 5);
  const int projected_peak = greedy_cell(project_low(mdp.rewards, features));
  REQUIRE(std::abs(static_cast<int>(bl_greedy) - projected_peak) <= 1);
  REQUIRE(static_cast<int>(bl_greedy) != spike_cell);
  REQUIRE(std::abs(static_cast<int>(bl_greedy) - hill_peak) <= 2);
}

TEST_CASE("huge temperature keeps the policy near uniform with the uniform return") {
  Rng rng(121);
  const DiscreteMdp mdp = random_mdp(rng, 2, 8, 0.9);
  SacOptions options;
  options.low_count = 5;
  options.outer_iterations = 6;
  options.eval_iterations = 3000;
  const SacResult run = soft_policy_iteration(mdp, 1e6, EvalVariant::kClassic, options);
  REQUIRE((run.policy.probs.array() - 1.0 / 8).abs().maxCoeff() < 1e-5);
  const double uniform_return = expected_return(mdp, uniform_policy(2, 8, 1.0));
  REQUIRE(run.trace.back().expected_return == Approx(uniform_return).margin(1e-4));
}

TEST_CASE("temperature ladder is geometric and hits both ends") {
  const auto ladder = temperature_ladder(100.0, 0.01, 5);
  REQUIRE(ladder.size() == 5);
  REQUIRE(ladder.front() == Approx(100.0));
  REQUIRE(ladder.back() == Approx(0.01));
  for (std::size_t i = 1; i < ladder.size(); ++i)
    REQUIRE(ladder[i] / ladder[i - 1] == Approx(ladder[1] / ladder[0]).epsilon(1e-12));
  REQUIRE_THROWS_AS(temperature_ladder(1.0, 2.0, 4), std::invalid_argument);
}
