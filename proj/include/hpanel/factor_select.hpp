#pragma once

#include "hpanel/panel.hpp"

#include <span>
#include <vector>

namespace hpanel {

/// Selected factor counts plus the spectra they were read from.
struct SelectionResult {
  int global_count = 0;
  std::vector<int> specific_counts;
  Vector global_eigenvalues;                 // all eigenvalues of Sigma^G, descending
  std::vector<Vector> specific_eigenvalues;  // [i] all eigenvalues of Sigma_i^S, descending
  double omega = 0.0;
};

/// Fractions of total residual energy carried by each factor layer.
struct VarianceShares {
  double global_share = 0.0;
  std::vector<double> specific_share;
  double remainder = 1.0;
};

struct CountChoice {
  int count = 0;
  Vector eigenvalues;  // full descending spectrum
};

/// omega = 1 / log(max(total units, T)).
[[nodiscard]] double default_omega(int total_units, int T);
[[nodiscard]] double resolve_omega(const ModelConfig& config, const PanelDataset& data);

/**
 * Thresholded eigenvalue-ratio score for candidate count `l`, with eigenvalues[0]
 * holding the largest eigenvalue and a mock eigenvalue of 1 at position 0:
 *   score(l) = lambda_{l+1}/lambda_l  if lambda_l >= omega,  1 otherwise.
 */
[[nodiscard]] double ratio_score(const Vector& eigenvalues, int l, double omega);

/// argmin of ratio_score over l = 0..d_max; ties resolve to the smallest l.
[[nodiscard]] int select_count(const Vector& eigenvalues, int d_max, double omega);

/// Sigma^G = (1/(N T)) sum_ij e_ij e_ij' with e_ij = Y_ij - X_ij beta_i.
[[nodiscard]] Matrix sigma_global(const PanelDataset& data, std::span<const Vector> beta_per_industry);

/// Throws NumericError when d_max + 1 exceeds the dimension of the covariance.
[[nodiscard]] CountChoice select_global(const Matrix& sigma_g, int d_max, double omega);

[[nodiscard]] Matrix extract_global(const Matrix& sigma_g, int count);

/// Sigma_i^S = (1/(N_i T)) sum_j M_FG e_ij e_ij' M_FG.
[[nodiscard]] std::vector<Matrix> sigma_specific(const PanelDataset& data, std::span<const Vector> beta_per_industry,
                                                 const Matrix& global_factors);

/// Separable per-industry argmin of the summed ratio scores.
[[nodiscard]] std::vector<CountChoice> select_specific(std::span<const Matrix> sigmas, int d_max, double omega);

[[nodiscard]] Matrix extract_specific(const Matrix& sigma_s, int count);

struct Loadings {
  std::vector<Matrix> global;    // [i] N_i x l^G
  std::vector<Matrix> specific;  // [i] N_i x l_i^S
};

/// gamma_ij^G = F^G' e_ij / T and gamma_ij^S = F_i^S' M_FG e_ij / T.
[[nodiscard]] Loadings extract_loadings(const PanelDataset& data, std::span<const Vector> beta_per_industry,
                                        const Matrix& global_factors, std::span<const Matrix> specific_factors);

/**
 * Projection-energy decomposition of the residuals: the global share is the
 * energy of P_FG e, the industry-i share the energy of P_FSi M_FG e, each over
 * the total residual energy. Throws NumericError when the residuals vanish.
 */
[[nodiscard]] VarianceShares variance_shares(const PanelDataset& data, std::span<const Vector> beta_per_industry,
                                             const Matrix& global_factors, std::span<const Matrix> specific_factors);

struct Decomposition {
  SelectionResult selection;
  FactorStructure factors;
};

/// Two-step count selection followed by extraction of both layers and their loadings.
[[nodiscard]] Decomposition select_and_extract(const PanelDataset& data, std::span<const Vector> beta_per_industry,
                                               int d_max, double omega);

/// Extraction at known counts (no selection).
[[nodiscard]] FactorStructure extract_hierarchy(const PanelDataset& data, std::span<const Vector> beta_per_industry,
                                                int global_count, std::span<const int> specific_counts);

/// Largest candidate count the ratio rule can evaluate on a T-dimensional spectrum.
[[nodiscard]] int selectable_dmax(int d_max, int T);

}  // namespace hpanel
