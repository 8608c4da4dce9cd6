#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "blsac/mdp.hpp"
#include "blsac/numerics.hpp"

namespace blsac {

// Frequency index (number of whole oscillations across the periodic action
// domain) of each basis column, in column order:
// constant, cos_1, sin_1, cos_2, sin_2, ... and, for even grids, a final
// lone cosine at the Nyquist frequency. In action units the angular frequency
// of column with index m is w = pi * m.
inline std::vector<int> fourier_frequencies(int grid_size, int n_columns) {
  if (n_columns < 1 || n_columns > grid_size)
    throw std::invalid_argument("fourier_frequencies: need 1 <= columns <= grid size");
  std::vector<int> freq;
  freq.reserve(n_columns);
  freq.push_back(0);
  int m = 1;
  while (static_cast<int>(freq.size()) < n_columns) {
    freq.push_back(m);  // cosine
    if (static_cast<int>(freq.size()) < n_columns && !(grid_size % 2 == 0 && m == grid_size / 2))
      freq.push_back(m);  // sine (absent at Nyquist)
    ++m;
  }
  return freq;
}

// Real orthonormal Fourier basis on a uniform periodic grid of M points,
// restricted to the first K frequency-ordered columns. Columns:
//   1/sqrt(M),
//   sqrt(2/M) cos(2 pi m j / M), sqrt(2/M) sin(2 pi m j / M) for m = 1, 2, ...
// and for even M the Nyquist cosine (-1)^j / sqrt(M) as the final column.
inline Eigen::MatrixXd fourier_basis(int grid_size, int n_columns) {
  if (n_columns < 1) throw std::invalid_argument("fourier_basis: need at least one column");
  if (n_columns > grid_size) throw std::invalid_argument("fourier_basis: more columns than grid points");
  Eigen::MatrixXd basis(grid_size, n_columns);
  basis.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(grid_size)));
  int col = 1, m = 1;
  const double scale = std::sqrt(2.0 / grid_size);
  while (col < n_columns) {
    const bool nyquist = (grid_size % 2 == 0 && m == grid_size / 2);
    for (int j = 0; j < grid_size; ++j) {
      const double angle = 2.0 * kPi * m * j / grid_size;
      basis(j, col) = nyquist ? std::cos(angle) / std::sqrt(static_cast<double>(grid_size))
                              : scale * std::cos(angle);
    }
    ++col;
    if (col < n_columns && !nyquist) {
      for (int j = 0; j < grid_size; ++j)
        basis(j, col) = scale * std::sin(2.0 * kPi * m * j / grid_size);
      ++col;
    }
    ++m;
  }
  return basis;
}

// Block-diagonal feature matrix over states with an ordered low/high
// frequency split. Columns of the assembled Phi are grouped as
// [low block | high block]; within each block the per-state sub-blocks are
// stacked state-major, so a coefficient vector reads
// [omega_low(state 0), omega_low(state 1), ..., omega_high(state 0), ...].
struct FourierFeatures {
  Eigen::MatrixXd basis;       // M x K per-state basis, frequency ordered
  std::vector<int> col_freq;   // frequency index per basis column
  int n_states = 0;
  int low_count = 0;           // K_L: basis columns assigned to the low block

  Eigen::MatrixXd phi;         // (S*M) x (S*K), [low | high] column order

  int n_columns() const { return static_cast<int>(basis.cols()); }
  int high_count() const { return n_columns() - low_count; }
  Eigen::Index low_size() const { return static_cast<Eigen::Index>(n_states) * low_count; }
  Eigen::Index high_size() const { return static_cast<Eigen::Index>(n_states) * high_count(); }

  Eigen::Block<const Eigen::MatrixXd> phi_low() const {
    return phi.block(0, 0, phi.rows(), low_size());
  }
  Eigen::Block<const Eigen::MatrixXd> phi_high() const {
    return phi.block(0, low_size(), phi.rows(), high_size());
  }
  Eigen::Block<const Eigen::MatrixXd> basis_low() const {
    return basis.block(0, 0, basis.rows(), low_count);
  }
  Eigen::Block<const Eigen::MatrixXd> basis_high() const {
    return basis.block(0, low_count, basis.rows(), high_count());
  }
};

// Valid splits keep whole frequency classes together: the split may only fall
// where the column frequency changes (after the constant, after a complete
// cos/sin pair, or at the very end). In particular K_L is odd whenever
// 1 < K_L < K and no Nyquist column is involved.
inline bool is_valid_split(const std::vector<int>& col_freq, int low_count) {
  const int k = static_cast<int>(col_freq.size());
  if (low_count < 1 || low_count > k) return false;
  if (low_count == k) return true;
  return col_freq[low_count - 1] != col_freq[low_count];
}

inline FourierFeatures assemble_features(const Eigen::MatrixXd& basis, int n_states, int low_count) {
  if (n_states < 1) throw std::invalid_argument("assemble_features: n_states must be positive");
  const int m = static_cast<int>(basis.rows());
  const int k = static_cast<int>(basis.cols());
  const std::vector<int> freq = fourier_frequencies(m, k);
  if (!is_valid_split(freq, low_count))
    throw std::invalid_argument("assemble_features: split would cut a frequency class");
  FourierFeatures f;
  f.basis = basis;
  f.col_freq = freq;
  f.n_states = n_states;
  f.low_count = low_count;
  const int high = k - low_count;
  f.phi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_states) * m,
                                static_cast<Eigen::Index>(n_states) * k);
  for (int s = 0; s < n_states; ++s) {
    f.phi.block(static_cast<Eigen::Index>(s) * m, static_cast<Eigen::Index>(s) * low_count, m,
                low_count) = basis.leftCols(low_count);
    if (high > 0)
      f.phi.block(static_cast<Eigen::Index>(s) * m, f.low_size() + static_cast<Eigen::Index>(s) * high,
                  m, high) = basis.rightCols(high);
  }
  return f;
}

inline FourierFeatures make_features(const DiscreteMdp& mdp, int n_columns, int low_count) {
  return assemble_features(fourier_basis(mdp.n_actions(), n_columns), mdp.n_states, low_count);
}

// Exact spectral projector onto the span of the low-frequency block.
// Idempotent; annihilates pure high-frequency content.
inline QVector project_low(const QVector& q, const FourierFeatures& features) {
  if (q.size() != features.phi.rows()) throw std::invalid_argument("project_low: shape mismatch");
  return features.phi_low() * (features.phi_low().transpose() * q);
}

inline QVector project_high(const QVector& q, const FourierFeatures& features) {
  if (q.size() != features.phi.rows()) throw std::invalid_argument("project_high: shape mismatch");
  if (features.high_count() == 0) return QVector::Zero(q.size());
  return features.phi_high() * (features.phi_high().transpose() * q);
}

// Largest valid split whose low-block frequencies all lie strictly below the
// cutoff (w = pi * m per frequency index m). Returns at least 1: the constant
// column always survives.
inline int split_for_cutoff(int grid_size, int n_columns, double w_cutoff) {
  const std::vector<int> freq = fourier_frequencies(grid_size, n_columns);
  int best = 1;
  for (int split = 1; split <= n_columns; ++split) {
    if (!is_valid_split(freq, split)) continue;
    if (kPi * freq[split - 1] < w_cutoff) best = split;
  }
  return best;
}

// Widest valid split not exceeding half the columns; a convenient default for
// experiments that only need "some" low/high partition.
inline int default_split(int grid_size, int n_columns) {
  const std::vector<int> freq = fourier_frequencies(grid_size, n_columns);
  int best = 1;
  for (int split = 1; split <= std::max(1, n_columns / 2); ++split)
    if (is_valid_split(freq, split)) best = split;
  return best;
}

}  // namespace blsac
