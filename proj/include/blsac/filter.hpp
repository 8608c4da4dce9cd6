#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "blsac/mdp.hpp"
#include "blsac/numerics.hpp"

namespace blsac {

enum class BoundaryMode { kPeriodic, kInverseLogistic };

// Truncated-sinc low-pass stencil matched to a policy standard deviation.
//
// The cutoff is w_cutoff = pi / (2 sigma): wider policies tolerate less
// spatial resolution in the value estimate, so the filter passband shrinks as
// exploration grows. Taps sit at fractional positions x_k = k / K with
//   weight(k) = sin(pi x_k) / (pi x_k)        (1 at the center tap)
//   shift(k)  = x_k * pi / w_cutoff = 2 sigma x_k   (action units)
// Weights are fixed, never trained. The endpoint taps k = +-K carry
// weight exactly 0 (sin(pi) = 0) and are kept only for stencil symmetry. The
// raw weights do not sum to 1; `normalization` rescales a one-dimensional
// pass to unit DC gain so that constants pass through unchanged.
struct SincFilter {
  int half_width = 0;          // K >= 1; stencil length is 2K + 1
  double sigma = 0.0;          // policy standard deviation the design targets
  double cutoff = 0.0;         // pi / (2 sigma), radians per action unit
  Eigen::VectorXd weights;     // alpha_k for k = -K..K, symmetric, alpha_0 = 1
  Eigen::VectorXd shifts;      // delta_k for k = -K..K, antisymmetric
  double normalization = 0.0;  // 1 / sum(weights)
  BoundaryMode boundary_mode = BoundaryMode::kPeriodic;

  int taps() const { return 2 * half_width + 1; }
  double weight(int k) const { return weights(k + half_width); }
  double shift(int k) const { return shifts(k + half_width); }
};

inline SincFilter design_filter(double sigma, int half_width,
                                BoundaryMode mode = BoundaryMode::kPeriodic) {
  if (!(sigma > 0.0)) throw std::invalid_argument("design_filter: sigma must be > 0");
  if (half_width < 1) throw std::invalid_argument("design_filter: half_width must be >= 1");
  SincFilter f;
  f.half_width = half_width;
  f.sigma = sigma;
  f.cutoff = kPi / (2.0 * sigma);
  f.boundary_mode = mode;
  f.weights.resize(f.taps());
  f.shifts.resize(f.taps());
  for (int k = -half_width; k <= half_width; ++k) {
    const double x = static_cast<double>(k) / half_width;
    f.weights(k + half_width) = sinc(x);
    f.shifts(k + half_width) = x * kPi / f.cutoff;
  }
  f.normalization = 1.0 / f.weights.sum();
  return f;
}

// Separable application to a sampled state-action value evaluator: sum the
// stencil independently along each action axis, then (by default) rescale by
// the total stencil mass so constants are preserved. With `normalized` off
// the raw separable sum is returned, in which the center sample is counted
// once per axis.
//
// Under kInverseLogistic boundary handling the tap shifts are applied to the
// inverse logistic transform of the coordinate, so every probed action stays
// strictly inside (-1, 1); kPeriodic wraps instead.
template <typename QEval>
double apply_sampled(QEval&& q_eval, int state, const Eigen::VectorXd& action,
                     const SincFilter& filter, bool normalized = true) {
  const Eigen::Index dims = action.size();
  if (dims < 1) throw std::invalid_argument("apply_sampled: empty action");
  double total = 0.0;
  Eigen::VectorXd probe = action;
  for (Eigen::Index i = 0; i < dims; ++i) {
    const double coord = action(i);
    double unbounded = 0.0;
    if (filter.boundary_mode == BoundaryMode::kInverseLogistic)
      unbounded = action_to_unbounded(coord);  // throws on the open-interval boundary
    for (int k = -filter.half_width; k <= filter.half_width; ++k) {
      const double delta = filter.shift(k);
      probe(i) = filter.boundary_mode == BoundaryMode::kInverseLogistic
                     ? unbounded_to_action(unbounded + delta)
                     : wrap_action(coord + delta);
      total += filter.weight(k) * q_eval(state, probe);
    }
    probe(i) = coord;
  }
  if (normalized) total *= filter.normalization / static_cast<double>(dims);
  return total;
}

// Stencil snapped to a periodic grid: tap shifts are rounded to the nearest
// whole grid offset and taps that land on the same offset merge. Weights come
// out normalized to unit sum.
struct GridStencil {
  std::vector<int> offsets;      // distinct grid offsets, ascending
  std::vector<double> weights;   // normalized; parallel to offsets
  double max_rounding_error = 0.0;  // worst |shift - offset * spacing| over taps
  int collisions = 0;            // nonzero-weight taps merged into another offset
};

inline GridStencil make_grid_stencil(const SincFilter& filter, int grid_size) {
  if (grid_size < 1) throw std::invalid_argument("make_grid_stencil: empty grid");
  const double spacing = 2.0 / grid_size;
  GridStencil st;
  std::vector<std::pair<int, double>> taps;  // offset -> raw weight
  for (int k = -filter.half_width; k <= filter.half_width; ++k) {
    const double delta = filter.shift(k);
    const int offset = static_cast<int>(std::lround(delta / spacing));
    if (std::abs(offset) > grid_size / 2)
      throw std::invalid_argument("make_grid_stencil: stencil wider than the grid");
    const double rounding = std::abs(delta - offset * spacing);
    st.max_rounding_error = std::max(st.max_rounding_error, rounding);
    bool merged = false;
    for (auto& [o, w] : taps) {
      if (o == offset) {
        if (filter.weight(k) != 0.0 && w != 0.0) ++st.collisions;
        w += filter.weight(k);
        merged = true;
        break;
      }
    }
    if (!merged) taps.emplace_back(offset, filter.weight(k));
  }
  std::sort(taps.begin(), taps.end());
  double mass = 0.0;
  for (const auto& [o, w] : taps) mass += w;
  for (const auto& [o, w] : taps) {
    st.offsets.push_back(o);
    st.weights.push_back(w / mass);
  }
  return st;
}

// Circular convolution of the snapped stencil with each state's action slice.
// Linear and shift-covariant on every slice; constants are preserved.
inline QVector apply_grid(const QVector& q, const SincFilter& filter, const DiscreteMdp& mdp) {
  if (!is_valid_q(mdp, q)) throw std::invalid_argument("apply_grid: q has wrong shape");
  const int m = mdp.n_actions();
  const GridStencil st = make_grid_stencil(filter, m);
  QVector out(q.size());
  for (int s = 0; s < mdp.n_states; ++s) {
    const Eigen::Index base = static_cast<Eigen::Index>(s) * m;
    for (int j = 0; j < m; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < st.offsets.size(); ++t) {
        const int idx = ((j + st.offsets[t]) % m + m) % m;
        acc += st.weights[t] * q(base + idx);
      }
      out(base + j) = acc;
    }
  }
  return out;
}

// Gain of the snapped stencil at each representable grid frequency
// w_m = pi * m, m = 0 .. floor(M/2), measured by discrete Fourier transform
// of the embedded stencil. The symmetric stencil makes the transfer real, so
// the gain is its magnitude; index 0 is the DC gain, exactly 1.
inline Eigen::VectorXd frequency_response(const SincFilter& filter, int grid_size) {
  const GridStencil st = make_grid_stencil(filter, grid_size);
  const int n_freq = grid_size / 2 + 1;
  Eigen::VectorXd gains(n_freq);
  for (int m = 0; m < n_freq; ++m) {
    double h = 0.0;
    for (std::size_t t = 0; t < st.offsets.size(); ++t)
      h += st.weights[t] * std::cos(2.0 * kPi * m * st.offsets[t] / grid_size);
    gains(m) = std::abs(h);
  }
  return gains;
}

// Transfer of the exact (un-snapped) stencil at an arbitrary angular
// frequency in action units; useful for truncation-error bounds when shifts
// land exactly on grid points.
inline double response_at(const SincFilter& filter, double w) {
  double h = 0.0;
  for (int k = -filter.half_width; k <= filter.half_width; ++k)
    h += filter.weight(k) * std::cos(w * filter.shift(k));
  return h * filter.normalization;
}

}  // namespace blsac
