#include "hpanel/heterogeneous.hpp"

#include "hpanel/error.hpp"

#include <string>

namespace hpanel {

PanelDataset industry_panel(const PanelDataset& data, int industry) {
  if (industry < 0 || industry >= data.L()) throw ValidationError("industry index out of range");
  const auto ii = static_cast<std::size_t>(industry);
  PanelDataset out;
  out.T = data.T;
  out.dx = data.dx;
  out.units.push_back(data.units[ii]);
  if (ii < data.industry_labels.size()) out.industry_labels.push_back(data.industry_labels[ii]);
  if (ii < data.country_labels.size()) out.country_labels.push_back(data.country_labels[ii]);
  out.regressor_names = data.regressor_names;
  return out;
}

AlternatingFit fit_industry(const PanelDataset& industry_data, int rank, const ModelConfig& config,
                            const std::optional<Vector>& beta_init) {
  if (industry_data.L() != 1) throw ValidationError("fit_industry expects a single-industry panel");
  const int ranks[] = {rank};
  return fit_alternating(industry_data, ranks, config, beta_init);
}

HeterogeneousFit fit_heterogeneous(const PanelDataset& data, const ModelConfig& config) {
  check_config(config);
  require_valid(data);
  const double omega = resolve_omega(config, data);

  HeterogeneousFit out;
  std::vector<PanelDataset> parts;
  std::vector<Vector> stage1_betas;
  for (int i = 0; i < data.L(); ++i) {
    parts.push_back(industry_panel(data, i));
    try {
      out.initial.push_back(fit_industry(parts.back(), initial_rank(data.N(i), data.T, config.d_max), config));
    } catch (const NumericError& e) {
      throw NumericError("industry " + std::to_string(i) + ": " + e.what());
    }
    stage1_betas.push_back(out.initial.back().beta);
  }

  out.selection = select_and_extract(data, stage1_betas, selectable_dmax(config.d_max, data.T), omega).selection;

  for (int i = 0; i < data.L(); ++i) {
    const auto ii = static_cast<std::size_t>(i);
    const int rank = out.selection.global_count + out.selection.specific_counts[ii];
    AlternatingFit fit;
    try {
      fit = fit_industry(parts[ii], rank, config, stage1_betas[ii]);
    } catch (const NumericError& e) {
      throw NumericError("industry " + std::to_string(i) + ": " + e.what());
    }
    out.betas.push_back(fit.beta);
    out.joint_factors.push_back(std::move(fit.factors.front()));
    out.per_industry_traces.push_back(std::move(fit.objective_trace));
    out.converged.push_back(fit.converged);
  }

  out.factors = extract_hierarchy(data, out.betas, out.selection.global_count, out.selection.specific_counts);
  out.shares = shares_if_defined(data, out.betas, out.factors);
  return out;
}

}  // namespace hpanel
