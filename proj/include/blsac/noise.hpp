#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "blsac/rng.hpp"

namespace blsac {

// Mean-reverting noise,
//   dx = theta (0 - x) dt + sigma dW,
// discretized with Euler-Maruyama:
//   x <- x + theta (0 - x) dt + sigma sqrt(dt) xi,   xi ~ N(0, 1).
// Stationary variance sigma^2 / (2 theta). Each process owns its seeded
// stream, so identical seeds reproduce identical paths.
struct OuProcess {
  double theta = 0.15;
  double sigma = 0.2;
  double dt = 0.01;
  double state = 0.0;
  Rng rng;

  OuProcess(double theta_rate, double diffusion, double step, std::uint64_t seed, double x0 = 0.0)
      : theta(theta_rate), sigma(diffusion), dt(step), state(x0), rng(seed) {
    if (!(theta > 0.0) || !(dt > 0.0))
      throw std::invalid_argument("OuProcess: theta and dt must be > 0");
    if (sigma < 0.0) throw std::invalid_argument("OuProcess: sigma must be >= 0");
  }

  void advance() { state += theta * (0.0 - state) * dt + sigma * std::sqrt(dt) * rng.normal(); }

  double stationary_variance() const { return sigma * sigma / (2.0 * theta); }
};

inline OuProcess ou_step(OuProcess process) {
  process.advance();
  return process;
}

struct GridNoiseFieldParams {
  int dimensions = 1;
  int points_per_dim = 9;
  double theta = 0.15;
  double sigma = 0.2;
  double dt = 0.01;
  // Correlation between distinct grid cells, realized by mixing a shared
  // process into every cell: value = sqrt(1-rho) cell + sqrt(rho) shared.
  // 0 (the default) keeps all cells fully independent.
  double cell_correlation = 0.0;
};

// A lattice of mean-reverting processes over the hyperrectangular action
// space [-1, 1]^d, one process per grid point, all sharing parameters.
// Lookup takes the nearest grid point, so any two actions falling in the
// same cell see the identical disturbance while distinct cells evolve
// independently (spatial correlation by construction). All processes advance
// exactly one step at the beginning of each episode.
class GridNoiseField {
 public:
  GridNoiseField(const GridNoiseFieldParams& params, std::uint64_t seed)
      : params_(params), shared_(params.theta, params.sigma, params.dt, derive_seed(seed, 0)) {
    if (params.dimensions < 1) throw std::invalid_argument("GridNoiseField: need at least one dimension");
    if (params.points_per_dim < 2)
      throw std::invalid_argument("GridNoiseField: need at least two grid points per dimension");
    if (params.cell_correlation < 0.0 || params.cell_correlation > 1.0)
      throw std::invalid_argument("GridNoiseField: cell correlation must lie in [0, 1]");
    std::size_t count = 1;
    for (int d = 0; d < params.dimensions; ++d) count *= params.points_per_dim;
    cells_.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
      cells_.emplace_back(params.theta, params.sigma, params.dt, derive_seed(seed, i + 1));
  }

  void begin_episode() {
    for (auto& cell : cells_) cell.advance();
    shared_.advance();
    ++episode_;
  }

  std::size_t cell_index(const Eigen::VectorXd& action) const {
    if (action.size() != params_.dimensions)
      throw std::invalid_argument("GridNoiseField: action dimension mismatch");
    std::size_t index = 0;
    for (int d = 0; d < params_.dimensions; ++d) {
      const double a = action(d);
      if (a < -1.0 || a > 1.0)
        throw std::domain_error("GridNoiseField: action outside [-1, 1]");
      const int i = static_cast<int>(std::lround((a + 1.0) * 0.5 * (params_.points_per_dim - 1)));
      index = index * params_.points_per_dim + static_cast<std::size_t>(i);
    }
    return index;
  }

  double value_at(std::size_t cell) const {
    const double rho = params_.cell_correlation;
    return std::sqrt(1.0 - rho) * cells_[cell].state + std::sqrt(rho) * shared_.state;
  }

  long episode() const { return episode_; }
  const GridNoiseFieldParams& params() const { return params_; }
  double stationary_variance() const { return shared_.stationary_variance(); }

 private:
  GridNoiseFieldParams params_;
  std::vector<OuProcess> cells_;
  OuProcess shared_;
  long episode_ = 0;
};

// Disturbance seen when playing `action`: the nearest grid point's current
// value.
inline double sample_field(const GridNoiseField& field, const Eigen::VectorXd& action) {
  return field.value_at(field.cell_index(action));
}

// Cart-pole linearized around the upright equilibrium:
//   angular acceleration  = z1 * angle + z2 * control + z3 * disturbance
//   cart acceleration     = z4 * angle + z5 * control
// integrated with the explicit Euler rule at step dt. The disturbance models
// control-dependent imperfections (friction, gusts) acting on the pendulum
// mass. The quadratic reward alpha_r * angle^2 + beta_r * position^2 defaults
// to negative coefficients so it acts as a cost.
struct PendulumModel {
  double z1 = 0.0, z2 = 0.0, z3 = 0.0, z4 = 0.0, z5 = 0.0;
  double alpha_r = -1.0, beta_r = -1.0;
  double dt = 0.01;
};

struct PendulumState {
  double angle = 0.0;
  double angle_rate = 0.0;
  double position = 0.0;
  double position_rate = 0.0;
};

inline PendulumState pendulum_step(const PendulumState& state, double control, double disturbance,
                                   const PendulumModel& model) {
  if (!(model.dt > 0.0)) throw std::invalid_argument("pendulum_step: dt must be > 0");
  const double angle_acc = model.z1 * state.angle + model.z2 * control + model.z3 * disturbance;
  const double cart_acc = model.z4 * state.angle + model.z5 * control;
  PendulumState next;
  next.angle = state.angle + state.angle_rate * model.dt;
  next.angle_rate = state.angle_rate + angle_acc * model.dt;
  next.position = state.position + state.position_rate * model.dt;
  next.position_rate = state.position_rate + cart_acc * model.dt;
  return next;
}

inline double pendulum_reward(const PendulumState& state, const PendulumModel& model) {
  return model.alpha_r * state.angle * state.angle + model.beta_r * state.position * state.position;
}

struct CovarianceStudyOptions {
  // Control-application intervals swept for the scaling fit. Covariance of
  // the induced reward noise scales like interval^4.
  std::vector<double> intervals = {0.04, 0.02, 0.01, 0.005};
  int substeps = 8;              // Euler steps spanning each interval
  double initial_angle = 0.1;    // start away from equilibrium so the
                                 // deterministic angle factor is O(1)
  int burn_in_episodes = 256;    // field steps before measuring
  int episodes_between_samples = 8;  // field episodes between measured rollouts
  int batches = 100;             // batch-means blocks for the standard error
};

struct CovariancePoint {
  double interval = 0.0;
  double mc_cov = 0.0;         // sample covariance of the two observed rewards
  double mc_std_error = 0.0;   // batch-means standard error of mc_cov
  double predicted_cov = 0.0;  // (alpha_r z3 interval^2)^2 * eps_cov
  double eps_cov = 0.0;        // sample covariance of the two disturbances
};

struct CovarianceStudy {
  std::vector<CovariancePoint> points;
  double loglog_slope = 0.0;  // ln|mc_cov| against ln(interval)
};

namespace detail {

inline double pendulum_rollout_reward(const PendulumModel& model, double control,
                                      double disturbance, double interval, int substeps,
                                      double initial_angle) {
  PendulumModel m = model;
  m.dt = interval / substeps;
  PendulumState state;
  state.angle = initial_angle;
  for (int i = 0; i < substeps; ++i) state = pendulum_step(state, control, disturbance, m);
  return pendulum_reward(state, m);
}

}  // namespace detail

// Monte Carlo covariance of the noisy rewards observed at two controls u and
// u + du across episodes of correlated field noise, next to the quadratic
// small-interval prediction. Reported per interval of the ladder, along with
// the fitted log-log scaling exponent (the quadratic-in-time displacement
// squared gives slope 4). Episodes are spaced several field steps apart so a
// plain batch-means error bar is honest; the disturbance covariance entering
// the prediction is measured from the same draws.
inline CovarianceStudy reward_covariance_study(const PendulumModel& model, double control,
                                               double control_offset,
                                               const GridNoiseFieldParams& field_params,
                                               long episodes, std::uint64_t seed,
                                               const CovarianceStudyOptions& options = {}) {
  if (episodes < 10000)
    throw std::invalid_argument("reward_covariance_study: need at least 10^4 episodes");
  if (field_params.sigma <= 0.0)
    throw std::invalid_argument("reward_covariance_study: degenerate (zero-variance) field");
  CovarianceStudy study;
  Eigen::VectorXd u1(1), u2(1);
  u1 << control;
  u2 << control + control_offset;

  for (std::size_t p = 0; p < options.intervals.size(); ++p) {
    const double interval = options.intervals[p];
    GridNoiseField field(field_params, derive_seed(seed, 1000 + p));
    for (int i = 0; i < options.burn_in_episodes; ++i) field.begin_episode();

    std::vector<double> r1(episodes), r2(episodes), e1(episodes), e2(episodes);
    for (long ep = 0; ep < episodes; ++ep) {
      for (int i = 0; i < options.episodes_between_samples; ++i) field.begin_episode();
      e1[ep] = sample_field(field, u1);
      e2[ep] = sample_field(field, u2);
      r1[ep] = detail::pendulum_rollout_reward(model, u1(0), e1[ep], interval, options.substeps,
                                               options.initial_angle);
      r2[ep] = detail::pendulum_rollout_reward(model, u2(0), e2[ep], interval, options.substeps,
                                               options.initial_angle);
    }

    const auto mean = [](const std::vector<double>& x) {
      double s = 0.0;
      for (double v : x) s += v;
      return s / x.size();
    };
    const double m1 = mean(r1), m2 = mean(r2), me1 = mean(e1), me2 = mean(e2);
    std::vector<double> products(episodes);
    double eps_cov = 0.0;
    for (long ep = 0; ep < episodes; ++ep) {
      products[ep] = (r1[ep] - m1) * (r2[ep] - m2);
      eps_cov += (e1[ep] - me1) * (e2[ep] - me2);
    }
    eps_cov /= episodes - 1;

    CovariancePoint point;
    point.interval = interval;
    point.mc_cov = mean(products) * episodes / (episodes - 1);
    point.eps_cov = eps_cov;
    const double gain = model.alpha_r * model.z3 * interval * interval;
    point.predicted_cov = gain * gain * eps_cov;

    const int batches = std::min<long>(options.batches, episodes);
    const long per_batch = episodes / batches;
    std::vector<double> batch_means;
    batch_means.reserve(batches);
    for (int b = 0; b < batches; ++b) {
      double s = 0.0;
      for (long i = b * per_batch; i < (b + 1) * per_batch; ++i) s += products[i];
      batch_means.push_back(s / per_batch);
    }
    const double bm = mean(batch_means);
    double bvar = 0.0;
    for (double v : batch_means) bvar += (v - bm) * (v - bm);
    bvar /= batches - 1;
    point.mc_std_error = std::sqrt(bvar / batches);
    study.points.push_back(point);
  }

  // Least-squares slope over the points with positive covariance.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (const auto& point : study.points) {
    if (point.mc_cov <= 0.0) continue;
    const double x = std::log(point.interval), y = std::log(point.mc_cov);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  study.loglog_slope = n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx)
                              : std::numeric_limits<double>::quiet_NaN();
  return study;
}

}  // namespace blsac
