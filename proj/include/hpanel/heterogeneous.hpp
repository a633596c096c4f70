#pragma once

#include "hpanel/homogeneous.hpp"

#include <optional>
#include <vector>

namespace hpanel {

struct HeterogeneousFit {
  std::vector<Vector> betas;  // [i] industry slope
  FactorStructure factors;
  SelectionResult selection;
  std::optional<VarianceShares> shares;
  std::vector<Matrix> joint_factors;                    // [i] final per-industry joint factors
  std::vector<std::vector<double>> per_industry_traces;  // final-stage objective traces
  std::vector<bool> converged;
  std::vector<AlternatingFit> initial;  // stage-1 per-industry fits
};

/// Single-industry sub-panel (L = 1) sharing T and d_x with the parent.
[[nodiscard]] PanelDataset industry_panel(const PanelDataset& data, int industry);

/// Least-squares interactive-effects fit of one industry; `industry_data` must have L = 1.
[[nodiscard]] AlternatingFit fit_industry(const PanelDataset& industry_data, int rank, const ModelConfig& config,
                                          const std::optional<Vector>& beta_init = {});

/**
 * Industry-by-industry slopes, then hierarchical selection and extraction on
 * the residuals Y_ij - X_ij beta_i, then a per-industry refit at l^G + l_i^S.
 */
[[nodiscard]] HeterogeneousFit fit_heterogeneous(const PanelDataset& data, const ModelConfig& config);

}  // namespace hpanel
