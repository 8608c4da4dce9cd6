#include <catch2/catch.hpp>

#include "blsac/instances.hpp"
#include "blsac/numerics.hpp"
#include "blsac/policy.hpp"

using namespace blsac;

TEST_CASE("boltzmann policy: equal values give a uniform row") {
  Rng rng(31);
  const DiscreteMdp mdp = random_mdp(rng, 1, 6, 0.9);
  const QVector q = QVector::Constant(6, 3.7);
  const SoftPolicy policy = boltzmann_policy(q, 1.0, mdp);
  REQUIRE((policy.probs.array() - 1.0 / 6).abs().maxCoeff() < 1e-15);
}

TEST_CASE("boltzmann policy: direct softmax arithmetic") {
  Rng rng(32);
  const DiscreteMdp mdp = random_mdp(rng, 1, 2, 0.9);
  QVector q(2);
  q << 0.0, std::log(3.0);
  const SoftPolicy policy = boltzmann_policy(q, 1.0, mdp);
  REQUIRE(policy.probs(0, 0) == Approx(0.25).epsilon(1e-13));
  REQUIRE(policy.probs(0, 1) == Approx(0.75).epsilon(1e-13));
}

TEST_CASE("boltzmann policy approaches uniform at high temperature") {
  Rng rng(33);
  const DiscreteMdp mdp = random_mdp(rng, 2, 8, 0.9);
  QVector q(16);
  for (int i = 0; i < 16; ++i) q(i) = rng.uniform(-10.0, 10.0);
  const SoftPolicy policy = boltzmann_policy(q, 1e6, mdp);
  REQUIRE((policy.probs.array() - 1.0 / 8).abs().maxCoeff() < 1e-5);
}

TEST_CASE("boltzmann policy at zero temperature is greedy with uniform ties") {
  Rng rng(34);
  const DiscreteMdp mdp = random_mdp(rng, 1, 4, 0.9);
  QVector q(4);
  q << 1.0, 2.0, 2.0, 0.0;
  const SoftPolicy policy = boltzmann_policy(q, 0.0, mdp);
  REQUIRE(policy.probs(0, 0) == 0.0);
  REQUIRE(policy.probs(0, 1) == Approx(0.5));
  REQUIRE(policy.probs(0, 2) == Approx(0.5));
  REQUIRE(policy.probs(0, 3) == 0.0);
  REQUIRE(policy.temperature == 0.0);
}

TEST_CASE("boltzmann policy is invariant to per-state value shifts") {
  Rng rng(35);
  const DiscreteMdp mdp = random_mdp(rng, 3, 5, 0.9);
  QVector q(15);
  for (int i = 0; i < 15; ++i) q(i) = rng.uniform(-2.0, 2.0);
  QVector shifted = q;
  for (int s = 0; s < 3; ++s) shifted.segment(5 * s, 5).array() += rng.uniform(-40.0, 40.0);
  const SoftPolicy a = boltzmann_policy(q, 0.7, mdp);
  const SoftPolicy b = boltzmann_policy(shifted, 0.7, mdp);
  REQUIRE((a.probs - b.probs).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("policy entropy: uniform, deterministic, and a fixed Bernoulli row") {
  REQUIRE(policy_entropy(uniform_policy(2, 8))(0) == Approx(std::log(8.0)).epsilon(1e-14));
  Eigen::MatrixXd det(1, 3);
  det << 0, 1, 0;
  REQUIRE(policy_entropy(make_soft_policy(det, 1.0))(0) == 0.0);
  Eigen::MatrixXd bern(1, 2);
  bern << 0.25, 0.75;
  // -(0.25 log 0.25 + 0.75 log 0.75) = 0.5623...
  REQUIRE(policy_entropy(make_soft_policy(bern, 1.0))(0) == Approx(0.5623351446188083).epsilon(1e-12));
}

TEST_CASE("policy entropy stays within [0, log M]") {
  Rng rng(36);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 2 + rng.uniform_int(9);
    const SoftPolicy policy = random_policy(rng, 2, m, 1.0);
    const Eigen::VectorXd xi = policy_entropy(policy);
    REQUIRE(xi.minCoeff() >= 0.0);
    REQUIRE(xi.maxCoeff() <= std::log(static_cast<double>(m)) + 1e-12);
  }
}

TEST_CASE("entropy decreases along a cooling temperature ladder") {
  Rng rng(37);
  const DiscreteMdp mdp = random_mdp(rng, 2, 6, 0.9);
  QVector q(12);
  for (int i = 0; i < 12; ++i) q(i) = rng.uniform(-1.0, 1.0);
  double previous = std::numeric_limits<double>::infinity();
  for (double alpha = 64.0; alpha > 1e-3; alpha *= 0.25) {
    const double entropy = policy_entropy(boltzmann_policy(q, alpha, mdp)).sum();
    REQUIRE(entropy <= previous + 1e-12);
    previous = entropy;
  }
}

TEST_CASE("cached entropy terms equal the recomputed definition") {
  Rng rng(38);
  for (int trial = 0; trial < 20; ++trial) {
    const double alpha = rng.uniform(0.0, 3.0);
    const SoftPolicy policy = random_policy(rng, 3, 5, alpha);
    for (int s = 0; s < 3; ++s) {
      double plogp = 0.0;
      for (int a = 0; a < 5; ++a) plogp += xlogx(policy.probs(s, a));
      REQUIRE(policy.entropy_terms(s) == Approx(alpha * plogp).margin(1e-12));
    }
  }
}

TEST_CASE("gaussian grid policy: a very wide kernel is nearly uniform") {
  Rng rng(39);
  const DiscreteMdp mdp = random_mdp(rng, 1, 16, 0.9);
  const GaussianGridPolicy g = gaussian_grid_policy(0.3, 5.0, mdp);
  REQUIRE((g.policy.probs.array() - 1.0 / 16).abs().maxCoeff() < 1e-3);
  REQUIRE(std::abs(g.policy.probs.row(0).sum() - 1.0) < 1e-12);
}

TEST_CASE("gaussian grid policy peaks at the mean grid point") {
  Rng rng(40);
  const DiscreteMdp mdp = random_mdp(rng, 1, 16, 0.9);
  const double mu = mdp.action_grid(5);
  const GaussianGridPolicy g = gaussian_grid_policy(mu, 0.2, mdp);
  Eigen::Index argmax;
  g.policy.probs.row(0).maxCoeff(&argmax);
  REQUIRE(argmax == 5);
  REQUIRE_FALSE(g.aliasing_risk);
}

TEST_CASE("gaussian grid policy circular mean tracks mu") {
  // Quadrature oracle: the circular mean of the discretized row, compared
  // against the requested center.
  Rng rng(41);
  const DiscreteMdp mdp = random_mdp(rng, 1, 32, 0.9);
  const double mu = 0.25, sigma = 0.3;
  const GaussianGridPolicy g = gaussian_grid_policy(mu, sigma, mdp);
  double c = 0.0, s = 0.0;
  for (int a = 0; a < 32; ++a) {
    c += g.policy.probs(0, a) * std::cos(kPi * mdp.action_grid(a));
    s += g.policy.probs(0, a) * std::sin(kPi * mdp.action_grid(a));
  }
  const double circular_mean = std::atan2(s, c) / kPi;
  REQUIRE(std::abs(circular_mean - mu) < mdp.grid_spacing());
}

TEST_CASE("gaussian grid policy flags aliasing and rejects bad sigma") {
  Rng rng(42);
  const DiscreteMdp mdp = random_mdp(rng, 1, 8, 0.9);
  REQUIRE(gaussian_grid_policy(0.0, 0.1, mdp).aliasing_risk);  // spacing is 0.25
  REQUIRE_THROWS_AS(gaussian_grid_policy(0.0, 0.0, mdp), std::invalid_argument);
}

TEST_CASE("policy factory validates rows") {
  Eigen::MatrixXd bad(1, 2);
  bad << 0.6, 0.6;
  REQUIRE_THROWS_AS(make_soft_policy(bad, 1.0), std::invalid_argument);
  bad << -0.2, 1.2;
  REQUIRE_THROWS_AS(make_soft_policy(bad, 1.0), std::invalid_argument);
}
