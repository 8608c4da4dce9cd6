#include <catch2/catch.hpp>

#include "blsac/fourier.hpp"
#include "blsac/gaussconv.hpp"
#include "blsac/instances.hpp"

using namespace blsac;

namespace {

// Trigonometric polynomial with frequencies up to max_m, returned both as a
// callable on the continuum and as samples on the canonical grid.
struct BandlimitedFn {
  std::vector<double> a, b;  // cosine/sine amplitudes per frequency 1..max_m
  double a0 = 0.0;

  double operator()(double x) const {
    double v = a0;
    for (std::size_t m = 0; m < a.size(); ++m) {
      v += a[m] * std::cos(kPi * (m + 1) * x);
      v += b[m] * std::sin(kPi * (m + 1) * x);
    }
    return v;
  }

  Eigen::VectorXd sample(int grid_size) const {
    const Eigen::VectorXd grid = uniform_action_grid(grid_size);
    Eigen::VectorXd out(grid_size);
    for (int j = 0; j < grid_size; ++j) out(j) = (*this)(grid(j));
    return out;
  }
};

BandlimitedFn random_bandlimited(Rng& rng, int max_m) {
  BandlimitedFn f;
  f.a0 = rng.uniform(-1.0, 1.0);
  for (int m = 1; m <= max_m; ++m) {
    f.a.push_back(rng.uniform(-1.0, 1.0));
    f.b.push_back(rng.uniform(-1.0, 1.0));
  }
  return f;
}

}  // namespace

TEST_CASE("mc estimate of a constant is exact with zero error") {
  const auto est = mc_expected_q([](double) { return 4.2; }, 0.1, 0.3, 1000, 7);
  REQUIRE(est.mean == Approx(4.2).margin(1e-14));
  REQUIRE(est.std_error == Approx(0.0).margin(1e-14));
  REQUIRE(est.n == 1000);
}

TEST_CASE("mc estimate collapses to the center value as sigma vanishes") {
  const auto q = [](double x) { return std::cos(kPi * x); };
  const auto est = mc_expected_q(q, 0.37, 1e-9, 5000, 8);
  REQUIRE(est.mean == Approx(q(0.37)).margin(1e-6));
}

TEST_CASE("mc estimate of a cosine shows the analytic attenuation") {
  // E[cos(w(mu + sigma eps))] = cos(w mu) exp(-w^2 sigma^2 / 2); at the
  // matched cutoff w = pi/(2 sigma) the factor is exp(-pi^2/8).
  const double sigma = 0.5, w = kPi / (2.0 * sigma), mu = 0.3;
  const auto q = [&](double x) { return std::cos(w * x); };
  const auto est = mc_expected_q(q, mu, sigma, 200000, 9);
  const double expected = std::cos(w * mu) * std::exp(-kPi * kPi / 8.0);
  REQUIRE(std::abs(est.mean - expected) < 4.0 * est.std_error);
}

TEST_CASE("mc estimate enforces the sample floor") {
  REQUIRE_THROWS_AS(mc_expected_q([](double) { return 0.0; }, 0.0, 0.1, 99, 1),
                    std::invalid_argument);
}

TEST_CASE("quadrature conv of a constant is exact") {
  REQUIRE(conv_expected_q(Eigen::VectorXd::Constant(64, 2.2), 0.4, 0.3) ==
          Approx(2.2).margin(1e-14));
}

TEST_CASE("quadrature conv agrees with the mc oracle on bandlimited functions") {
  Rng rng(71);
  int outside = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const BandlimitedFn f = random_bandlimited(rng, 6);
    const double mu = rng.uniform(-1.0, 1.0);
    const double sigma = rng.uniform(0.15, 0.5);
    const auto mc = mc_expected_q(f, mu, sigma, 2000, derive_seed(1234, trial));
    const double conv = conv_expected_q(f.sample(64), mu, sigma);
    if (std::abs(mc.mean - conv) > 3.0 * mc.std_error) ++outside;
  }
  REQUIRE(outside <= 1);
}

TEST_CASE("quadrature conv strongly suppresses a frequency far above the cutoff") {
  const double sigma = 0.5;
  const double w = 4.0 * kPi / (2.0 * sigma);  // four times the cutoff
  Eigen::VectorXd q(64);
  const Eigen::VectorXd grid = uniform_action_grid(64);
  for (int j = 0; j < 64; ++j) q(j) = std::cos(w * grid(j));
  // analytic kernel transform: exp(-(2 pi)^2 / 2) ~ 2.68e-9
  REQUIRE(std::abs(conv_expected_q(q, 0.0, sigma)) < 3e-9);
}

TEST_CASE("quadrature conv rejects an under-resolved kernel") {
  REQUIRE_THROWS_AS(conv_expected_q(Eigen::VectorXd::Zero(16), 0.0, 0.2), std::invalid_argument);
}

TEST_CASE("gaussian kernel gain closed form") {
  REQUIRE(gaussian_kernel_gain(0.7, 0.0) == 1.0);
  for (double sigma : {0.2, 0.5, 1.0}) {
    const double at_cutoff = gaussian_kernel_gain(sigma, kPi / (2.0 * sigma));
    REQUIRE(at_cutoff == Approx(std::exp(-kPi * kPi / 8.0)).epsilon(1e-14));
    REQUIRE(at_cutoff == Approx(0.2912).margin(1e-4));  // independent of sigma
    const double at_twice = gaussian_kernel_gain(sigma, kPi / sigma);
    REQUIRE(at_twice == Approx(std::exp(-kPi * kPi / 2.0)).epsilon(1e-14));
    REQUIRE(at_twice == Approx(0.0072).margin(5e-5));
  }
}

TEST_CASE("removing the low band leaves at most the high-frequency gain budget") {
  // The gap between smoothing q and smoothing its low-pass projection is the
  // smoothed high band, bounded by the sum of per-column amplitude times
  // kernel gain at that column's frequency.
  Rng rng(72);
  const int m = 64;
  const FourierFeatures features = assemble_features(fourier_basis(m, m), 1, 9);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd q(m);
    for (int j = 0; j < m; ++j) q(j) = rng.uniform(-1.0, 1.0);
    const Eigen::VectorXd q_low = project_low(q, features);
    const double mu = rng.uniform(-1.0, 1.0), sigma = rng.uniform(0.2, 0.4);
    const double gap = std::abs(conv_expected_q(q, mu, sigma) - conv_expected_q(q_low, mu, sigma));
    const Eigen::VectorXd coeff = features.phi.transpose() * q;
    double budget = 0.0;
    for (int c = features.low_count; c < m; ++c) {
      const double column_peak = features.phi.col(c).cwiseAbs().maxCoeff();
      budget += std::abs(coeff(c)) * column_peak *
                gaussian_kernel_gain(sigma, kPi * features.col_freq[c]);
    }
    REQUIRE(gap <= budget + 1e-9);
  }
}
