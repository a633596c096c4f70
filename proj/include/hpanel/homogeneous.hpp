#pragma once

#include "hpanel/factor_select.hpp"
#include "hpanel/panel.hpp"

#include <optional>
#include <span>
#include <vector>

namespace hpanel {

/// Per-industry factor estimates for a fixed slope, with their eigenvalues.
struct FactorUpdate {
  std::vector<Matrix> factors;      // [i] T x r_i, (1/T) F'F = I
  std::vector<Vector> eigenvalues;  // [i] top r_i eigenvalues of Sigma_i, descending
};

/// Result of alternating minimization at fixed per-industry ranks.
struct AlternatingFit {
  Vector beta;
  std::vector<Matrix> factors;  // joint factors used in the final slope update
  std::vector<Vector> eigenvalues;
  std::vector<int> ranks;  // effective ranks after capping
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;

  /// Largest step-to-step increase of the objective (<= 0 for a monotone trace).
  [[nodiscard]] double max_objective_increase() const;
};

struct HomogeneousFit {
  Vector beta;
  FactorStructure factors;
  std::vector<Matrix> joint_factors;  // [i] T x (l^G + l_i^S)
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;

  SelectionResult selection;
  std::optional<VarianceShares> shares;  // empty when the residuals vanish
  AlternatingFit initial;  // stage-1 fit at the overfitting rank
};

/// Largest step-to-step increase along an objective trace (0 for fewer than two entries).
[[nodiscard]] double max_increase(std::span<const double> trace);

/// beta = (sum_ij X_ij' M_Fi X_ij)^{-1} sum_ij X_ij' M_Fi Y_ij.
[[nodiscard]] Vector beta_given_factors(const PanelDataset& data, std::span<const Matrix> factors);

/// F_i = sqrt(T) * top-r_i eigenvectors of Sigma_i = (1/(N_i T)) sum_j e_ij e_ij'.
[[nodiscard]] FactorUpdate factors_given_beta(const PanelDataset& data, const Vector& beta, std::span<const int> ranks);

/// min(r_i, N_i, T, d_max) per industry.
[[nodiscard]] std::vector<int> capped_ranks(const PanelDataset& data, std::span<const int> ranks, int d_max);

/// variance_shares, or empty when the residual energy is at rounding level (below 1e-24 of the outcome energy).
[[nodiscard]] std::optional<VarianceShares> shares_if_defined(const PanelDataset& data, std::span<const Vector> betas,
                                                             const FactorStructure& factors);

/// Overfitting rank used before the counts are known: min(d_max, N_i, T - 1).
[[nodiscard]] int initial_rank(int units, int T, int d_max);

/**
 * Alternates factors_given_beta and beta_given_factors until the sup-norm slope
 * change drops below tol_beta or max_iter is reached. Starts from pooled OLS
 * unless beta_init is given. Non-convergence is reported through the flag.
 */
[[nodiscard]] AlternatingFit fit_alternating(const PanelDataset& data, std::span<const int> ranks,
                                             const ModelConfig& config, const std::optional<Vector>& beta_init = {});

/**
 * Sequential pipeline: overfit at d_max, select (l^G, l^S) from the stage-one
 * residuals, refit at l^G + l_i^S, then split the fitted structure into the
 * global and industry-specific layers.
 */
[[nodiscard]] HomogeneousFit fit_full(const PanelDataset& data, const ModelConfig& config);

}  // namespace hpanel
