#include "hpanel/numerics.hpp"

#include "hpanel/error.hpp"

#include <cmath>
#include <string>

namespace hpanel {

namespace {

void require_finite(const Matrix& S, const char* what) {
  if (!S.allFinite()) throw NumericError(std::string(what) + ": non-finite entries");
}

void fix_sign(Eigen::Ref<Vector> v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < 0.0) v = -v;
}

constexpr double kRankTol = 1e-12;

}  // namespace

EigPairs sym_eig_top(const Matrix& S, int k) {
  if (S.rows() != S.cols()) throw NumericError("sym_eig_top: matrix is not square");
  const auto n = static_cast<int>(S.rows());
  if (k < 0 || k > n)
    throw NumericError("sym_eig_top: requested " + std::to_string(k) + " eigenpairs of a " + std::to_string(n) +
                       "x" + std::to_string(n) + " matrix");
  require_finite(S, "sym_eig_top");

  EigPairs out;
  out.values.resize(k);
  out.vectors.resize(n, k);
  if (k == 0) return out;

  const Matrix sym = 0.5 * (S + S.transpose());
  const Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) throw NumericError("sym_eig_top: eigensolver failed");
  // Eigen returns ascending order.
  for (int c = 0; c < k; ++c) {
    const int src = n - 1 - c;
    out.values(c) = solver.eigenvalues()(src);
    out.vectors.col(c) = solver.eigenvectors().col(src);
    fix_sign(out.vectors.col(c));
  }
  return out;
}

Vector sym_eigenvalues(const Matrix& S) {
  if (S.rows() != S.cols()) throw NumericError("sym_eigenvalues: matrix is not square");
  require_finite(S, "sym_eigenvalues");
  const Matrix sym = 0.5 * (S + S.transpose());
  const Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericError("sym_eigenvalues: eigensolver failed");
  return solver.eigenvalues().reverse();
}

Matrix orthonormal_basis(const Matrix& F) {
  if (F.cols() == 0) return Matrix(F.rows(), 0);
  require_finite(F, "orthonormal_basis");
  const Eigen::JacobiSVD<Matrix> svd(F, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  if (F.cols() > F.rows() || sv(sv.size() - 1) <= kRankTol * sv(0))
    throw NumericError("rank-deficient factor matrix (" + std::to_string(F.rows()) + "x" +
                       std::to_string(F.cols()) + ")");
  return svd.matrixU();
}

Matrix projector(const Matrix& F) {
  const Matrix Q = orthonormal_basis(F);
  return Q * Q.transpose();
}

Matrix annihilator(const Matrix& F) {
  const auto T = F.rows();
  Matrix M = Matrix::Identity(T, T);
  if (F.cols() == 0) return M;
  M -= projector(F);
  return M;
}

Matrix solve_spd(const Matrix& A, const Matrix& b) {
  if (A.rows() != A.cols() || A.rows() != b.rows()) throw NumericError("solve_spd: dimension mismatch");
  require_finite(A, "solve_spd");
  require_finite(b, "solve_spd");
  const Matrix sym = 0.5 * (A + A.transpose());
  const Vector eig = sym_eigenvalues(sym);
  const double largest = eig(0);
  const double smallest = eig(eig.size() - 1);
  if (!(largest > 0.0) || !(smallest > kRankTol * largest))
    throw NumericError("singular or indefinite normal matrix (smallest eigenvalue " + std::to_string(smallest) +
                       ", largest " + std::to_string(largest) + ")");
  const Eigen::LLT<Matrix> llt(sym);
  if (llt.info() != Eigen::Success) throw NumericError("solve_spd: Cholesky factorization failed");
  return llt.solve(b);
}

Vector solve_spd(const Matrix& A, const Vector& b) {
  const Matrix x = solve_spd(A, Matrix(b));
  return x.col(0);
}

bool is_scaled_orthonormal(const Matrix& F, double tol) {
  if (F.cols() == 0) return true;
  const Matrix gram = F.transpose() * F / static_cast<double>(F.rows());
  return (gram - Matrix::Identity(F.cols(), F.cols())).cwiseAbs().maxCoeff() <= tol;
}

Matrix leading_factors(const Matrix& sigma, int k) {
  const auto pairs = sym_eig_top(sigma, k);
  return std::sqrt(static_cast<double>(sigma.rows())) * pairs.vectors;
}

}  // namespace hpanel
