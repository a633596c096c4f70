#include "helpers.hpp"

#include "hpanel/error.hpp"
#include "hpanel/numerics.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace hpanel;
using namespace testing_support;

namespace {

double char_poly(const Matrix& S, double lambda) {
  return (S - lambda * Matrix::Identity(S.rows(), S.cols())).determinant();
}

// Roots of det(S - lambda I) by a dense sign-change scan refined with bisection.
std::vector<double> char_poly_roots(const Matrix& S) {
  const double hi = S.trace() + 1.0;
  const int steps = 200000;
  std::vector<double> roots;
  double prev_x = -1e-3, prev_f = char_poly(S, prev_x);
  for (int s = 1; s <= steps; ++s) {
    const double x = -1e-3 + (hi + 1e-3) * s / steps;
    const double f = char_poly(S, x);
    if (f == 0.0 || (prev_f < 0) != (f < 0)) {
      double a = prev_x, b = x, fa = prev_f;
      for (int it = 0; it < 100; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = char_poly(S, m);
        if ((fa < 0) == (fm < 0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    prev_x = x;
    prev_f = f;
  }
  std::sort(roots.rbegin(), roots.rend());
  return roots;
}

}  // namespace

TEST_CASE("eigenpairs of the identity") {
  const auto e = sym_eig_top(Matrix::Identity(3, 3), 2);
  CHECK(e.values(0) == doctest::Approx(1.0));
  CHECK(e.values(1) == doctest::Approx(1.0));
  CHECK((e.vectors.transpose() * e.vectors - Matrix::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("eigenpairs of a diagonal matrix are axis vectors") {
  const Matrix S = Vector::LinSpaced(3, 3.0, 1.0).asDiagonal();
  const auto e = sym_eig_top(S, 2);
  CHECK(e.values(0) == doctest::Approx(3.0));
  CHECK(e.values(1) == doctest::Approx(2.0));
  CHECK(std::abs(e.vectors(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(e.vectors(1, 1)) == doctest::Approx(1.0));
  // largest-magnitude entry is positive
  CHECK(e.vectors(0, 0) > 0.0);
  CHECK(e.vectors(1, 1) > 0.0);
}

TEST_CASE("eigenvalues match characteristic polynomial roots on random PSD matrices") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix R = gaussian(4, 4, rng);
    const Matrix S = R * R.transpose() / 4.0;
    const auto roots = char_poly_roots(S);
    REQUIRE(roots.size() == 4);
    const auto e = sym_eig_top(S, 4);
    for (int k = 0; k < 4; ++k) CHECK(e.values(k) == doctest::Approx(roots[k]).epsilon(1e-8));
  }
}

TEST_CASE("eigenpair invariants: ordering, unit vectors, residual, trace") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix R = gaussian(7, 3, rng);
    const Matrix S = R * R.transpose() / 3.0;
    const auto e = sym_eig_top(S, 7);
    for (int k = 0; k + 1 < 7; ++k) CHECK(e.values(k) >= e.values(k + 1));
    for (int k = 0; k < 7; ++k) {
      CHECK(e.vectors.col(k).norm() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK((S * e.vectors.col(k) - e.values(k) * e.vectors.col(k)).norm() <= 1e-8 * S.norm());
      CHECK(e.values(k) >= -1e-10);
    }
    CHECK(std::abs(e.values.sum() - S.trace()) <= 1e-8 * S.norm());
    CHECK((sym_eigenvalues(S) - e.values).norm() < 1e-10);
  }
}

TEST_CASE("slightly asymmetric input is symmetrized") {
  Matrix S(2, 2);
  S << 2.0, 1.0 + 1e-12, 1.0, 2.0;
  const auto e = sym_eig_top(S, 1);
  CHECK(e.values(0) == doctest::Approx(3.0));
}

TEST_CASE("eigen errors") {
  CHECK_THROWS_AS((void)sym_eig_top(Matrix::Identity(3, 3), 4), NumericError);
  Matrix bad = Matrix::Identity(2, 2);
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS((void)sym_eig_top(bad, 1), NumericError);
  CHECK(sym_eig_top(Matrix::Identity(3, 3), 0).vectors.cols() == 0);
}

TEST_CASE("annihilator basics") {
  CHECK(annihilator(Matrix(4, 0)).isApprox(Matrix::Identity(4, 4)));

  Matrix F = Matrix::Zero(4, 1);
  F(0, 0) = 2.0;
  const Matrix M = annihilator(F);
  Matrix expected = Matrix::Identity(4, 4);
  expected(0, 0) = 0.0;
  CHECK((M - expected).norm() < 1e-14);
}

TEST_CASE("annihilator is idempotent with trace T - r") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix F = gaussian(6, 2, rng);
    const Matrix M = annihilator(F);
    CHECK((M * M - M).norm() < 1e-10);
    CHECK((M - M.transpose()).norm() < 1e-12);
    CHECK((M * F).norm() < 1e-10);
    CHECK(M.trace() == doctest::Approx(4.0).epsilon(1e-10));
    CHECK((M - dense_annihilator(F)).norm() < 1e-10);
    CHECK((projector(F) + M - Matrix::Identity(6, 6)).norm() < 1e-12);
  }
}

TEST_CASE("annihilator depends only on the column span") {
  std::mt19937_64 rng(13);
  const Matrix F = gaussian(6, 3, rng);
  const Vector scale = Vector::LinSpaced(3, 0.1, 50.0);
  CHECK((annihilator(F) - annihilator(F * scale.asDiagonal())).norm() < 1e-10);
}

TEST_CASE("rank-deficient factors are rejected") {
  Matrix F(4, 2);
  F.col(0) = Vector::Ones(4);
  F.col(1) = 2.0 * Vector::Ones(4);
  CHECK_THROWS_AS((void)annihilator(F), NumericError);
  CHECK_THROWS_AS((void)orthonormal_basis(F), NumericError);
}

TEST_CASE("SPD solves") {
  const Vector b = Vector::LinSpaced(3, 1.0, 3.0);
  CHECK((solve_spd(Matrix::Identity(3, 3), b) - b).norm() < 1e-15);

  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = 2.0;
  A(1, 1) = 4.0;
  Vector rhs(2);
  rhs << 2.0, 8.0;
  const Vector x = solve_spd(A, rhs);
  CHECK(x(0) == doctest::Approx(1.0));
  CHECK(x(1) == doctest::Approx(2.0));

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix R = gaussian(5, 5, rng);
    const Matrix S = R * R.transpose() + 0.1 * Matrix::Identity(5, 5);
    const Vector bb = gaussian(5, 1, rng).col(0);
    CHECK((S * solve_spd(S, bb) - bb).norm() < 1e-8 * bb.norm());
    const Matrix B = gaussian(5, 2, rng);
    CHECK((S * solve_spd(S, B) - B).norm() < 1e-8 * B.norm());
  }
}

TEST_CASE("singular and indefinite systems report the smallest eigenvalue") {
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = 1.0;
  try {
    (void)solve_spd(A, Vector(Vector::Ones(2)));
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("smallest eigenvalue") != std::string::npos);
  }
  A(1, 1) = -1.0;
  CHECK_THROWS_AS((void)solve_spd(A, Vector(Vector::Ones(2))), NumericError);
}

TEST_CASE("leading factors are scaled orthonormal") {
  std::mt19937_64 rng(14);
  const Matrix R = gaussian(8, 8, rng);
  const Matrix S = R * R.transpose();
  const Matrix F = leading_factors(S, 3);
  CHECK(F.rows() == 8);
  CHECK(F.cols() == 3);
  CHECK(is_scaled_orthonormal(F, 1e-10));
  CHECK_FALSE(is_scaled_orthonormal(2.0 * F, 1e-10));
  const Matrix Q = orthonormal_basis(gaussian(8, 3, rng));
  CHECK((Q.transpose() * Q - Matrix::Identity(3, 3)).norm() < 1e-12);
}
