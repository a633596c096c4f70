#pragma once

#include "hpanel/panel.hpp"

#include <Eigen/Dense>

#include <random>
#include <vector>

namespace testing_support {

using hpanel::Matrix;
using hpanel::PanelDataset;
using hpanel::Vector;

inline Matrix gaussian(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Matrix m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = z(rng);
  return m;
}

/// Random T x r matrix with (1/T) F'F = I.
inline Matrix random_scaled_orthonormal(int T, int r, std::mt19937_64& rng) {
  if (r == 0) return Matrix(T, 0);
  Eigen::HouseholderQR<Matrix> qr(gaussian(T, r, rng));
  Matrix Q = qr.householderQ() * Matrix::Identity(T, r);
  return std::sqrt(static_cast<double>(T)) * Q;
}

inline Matrix random_orthogonal(int n, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(gaussian(n, n, rng));
  return qr.householderQ() * Matrix::Identity(n, n);
}

/// Panel of i.i.d. normal cells with the given industry sizes.
inline PanelDataset random_panel(const std::vector<int>& sizes, int T, int dx, std::mt19937_64& rng) {
  PanelDataset d;
  d.T = T;
  d.dx = dx;
  for (int n : sizes) {
    auto& block = d.units.emplace_back();
    for (int j = 0; j < n; ++j) block.push_back({gaussian(T, 1, rng).col(0), gaussian(T, dx, rng)});
  }
  return d;
}

/// Explicit projector F (F'F)^{-1} F' by matrix inversion.
inline Matrix dense_projector(const Matrix& F) {
  if (F.cols() == 0) return Matrix::Zero(F.rows(), F.rows());
  return F * (F.transpose() * F).inverse() * F.transpose();
}

inline Matrix dense_annihilator(const Matrix& F) {
  return Matrix::Identity(F.rows(), F.rows()) - dense_projector(F);
}

/// Noiseless panel y = X beta + F_i Gamma with given per-industry factors.
inline PanelDataset factor_panel(const std::vector<int>& sizes, int T, const Vector& beta,
                                 const std::vector<Matrix>& factors, std::mt19937_64& rng) {
  PanelDataset d;
  d.T = T;
  d.dx = static_cast<int>(beta.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    auto& block = d.units.emplace_back();
    for (int j = 0; j < sizes[i]; ++j) {
      hpanel::UnitSeries u;
      u.X = gaussian(T, d.dx, rng);
      u.y = u.X * beta;
      if (factors[i].cols() > 0) u.y += factors[i] * gaussian(static_cast<int>(factors[i].cols()), 1, rng).col(0);
      block.push_back(std::move(u));
    }
  }
  return d;
}

/// Checks that the index sequence splits into consecutive blocks of length l0 (the last may be shorter).
inline bool blocks_are_contiguous(const std::vector<int>& idx, int l0) {
  for (std::size_t k = 0; k < idx.size(); ++k)
    if (k % static_cast<std::size_t>(l0) != 0 && idx[k] != idx[k - 1] + 1) return false;
  return true;
}

/// Panel whose outcome encodes (unit id, period): y_t = 1000 * unit + t.
inline PanelDataset tagged_panel(const std::vector<int>& sizes, int T) {
  PanelDataset d;
  d.T = T;
  d.dx = 1;
  int unit = 0;
  for (int n : sizes) {
    auto& block = d.units.emplace_back();
    for (int j = 0; j < n; ++j, ++unit) {
      hpanel::UnitSeries u;
      u.y = Vector::LinSpaced(T, 0.0, T - 1.0).array() + 1000.0 * unit;
      u.X = Matrix::Constant(T, 1, static_cast<double>(unit));
      block.push_back(std::move(u));
    }
  }
  return d;
}

}  // namespace testing_support
