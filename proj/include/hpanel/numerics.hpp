#pragma once

#include "hpanel/panel.hpp"

namespace hpanel {

/// Eigenpairs in descending eigenvalue order; column k of `vectors` pairs with values[k].
struct EigPairs {
  Vector values;
  Matrix vectors;
};

/**
 * Top-k eigenpairs of a symmetric matrix. The input is symmetrized as (S+S')/2.
 * Each eigenvector is signed so that its largest-magnitude entry is positive.
 */
[[nodiscard]] EigPairs sym_eig_top(const Matrix& S, int k);

/// All eigenvalues, descending.
[[nodiscard]] Vector sym_eigenvalues(const Matrix& S);

/// M = I - F (F'F)^{-1} F'. A matrix with zero columns gives the identity.
[[nodiscard]] Matrix annihilator(const Matrix& F);

/// P = F (F'F)^{-1} F'.
[[nodiscard]] Matrix projector(const Matrix& F);

/// Orthonormal basis (Q'Q = I) of the column span; throws NumericError on rank deficiency.
[[nodiscard]] Matrix orthonormal_basis(const Matrix& F);

/// Solves A x = b for symmetric positive-definite A.
[[nodiscard]] Matrix solve_spd(const Matrix& A, const Matrix& b);
[[nodiscard]] Vector solve_spd(const Matrix& A, const Vector& b);

/// True when (1/T) F'F equals the identity within `tol` (max-abs entry).
[[nodiscard]] bool is_scaled_orthonormal(const Matrix& F, double tol);

/// sqrt(T) times the top-k eigenvectors of a T x T covariance.
[[nodiscard]] Matrix leading_factors(const Matrix& sigma, int k);

}  // namespace hpanel
