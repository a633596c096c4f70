#include "hpanel/report.hpp"

#include "hpanel/csv_io.hpp"
#include "hpanel/error.hpp"

#include <json.hpp>

#include <cstdio>
#include <sstream>

namespace hpanel {

namespace {

using json = nlohmann::ordered_json;

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string percent(double share) { return fixed(100.0 * share, 2); }

std::string industry_name(const PanelDataset& data, std::size_t i) {
  if (i < data.industry_labels.size()) return data.industry_labels[i];
  return "industry_" + std::to_string(i + 1);
}

std::string regressor_name(const PanelDataset& data, std::size_t k) {
  if (k < data.regressor_names.size()) return data.regressor_names[k];
  return "x" + std::to_string(k + 1);
}

json meta_json(const RunInfo& info) {
  json meta;
  meta["version"] = std::string(kVersion);
  meta["command"] = info.command;
  meta["seed"] = info.seed;
  json config = json::object();
  for (const auto& [k, v] : info.config) config[k] = v;
  meta["config"] = config;
  return meta;
}

std::string csv_preamble(const RunInfo& info) {
  std::ostringstream os;
  os << "# hpanel " << kVersion << "\n# command=" << info.command << "\n# seed=" << info.seed << "\n";
  for (const auto& [k, v] : info.config) os << "# " << k << "=" << v << "\n";
  return os.str();
}

std::string markdown_preamble(const RunInfo& info, const std::string& title) {
  std::ostringstream os;
  os << "# " << title << "\n\n";
  os << "- version: " << kVersion << "\n- command: `" << info.command << "`\n- seed: " << info.seed << "\n";
  for (const auto& [k, v] : info.config) os << "- " << k << ": " << v << "\n";
  os << "\n";
  return os.str();
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

json matrix_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

json selection_json(const PanelDataset& data, const SelectionResult& sel, const std::optional<VarianceShares>& shares) {
  json out;
  out["omega"] = sel.omega;
  out["global_count"] = sel.global_count;
  out["global_share"] = shares ? json(shares->global_share) : json(nullptr);
  json industries = json::array();
  for (std::size_t i = 0; i < sel.specific_counts.size(); ++i) {
    json row;
    row["industry"] = industry_name(data, i);
    row["units"] = data.N(static_cast<int>(i));
    row["specific_count"] = sel.specific_counts[i];
    row["specific_share"] = shares ? json(shares->specific_share[i]) : json(nullptr);
    industries.push_back(row);
  }
  out["industries"] = industries;
  out["remainder_share"] = shares ? json(shares->remainder) : json(nullptr);
  out["global_eigenvalues"] = vector_json(sel.global_eigenvalues);
  return out;
}

// Factor-count / variance-share table shared by both fit reports.
void factor_table_markdown(std::ostringstream& os, const PanelDataset& data, const SelectionResult& sel,
                           const std::optional<VarianceShares>& shares) {
  os << "## Global and industry-specific factors\n\n";
  os << "omega = " << fixed(sel.omega, 6) << "\n\n";
  os << "| layer | No. of factors | % of Var(e) |\n|---|---:|---:|\n";
  os << "| Global | " << sel.global_count << " | " << (shares ? percent(shares->global_share) : "n/a") << " |\n";
  double sum = 0.0;
  for (std::size_t i = 0; i < sel.specific_counts.size(); ++i) {
    os << "| " << industry_name(data, i) << " | " << sel.specific_counts[i] << " | "
       << (shares ? percent(shares->specific_share[i]) : "n/a") << " |\n";
    if (shares) sum += shares->specific_share[i];
  }
  if (shares) {
    os << "| Sum of all industries |  | " << percent(sum) << " |\n";
    os << "| Idiosyncratic remainder |  | " << percent(shares->remainder) << " |\n";
  }
  os << "\n";
}

void factor_table_csv(std::ostringstream& os, const PanelDataset& data, const SelectionResult& sel,
                      const std::optional<VarianceShares>& shares) {
  auto share = [&](double v) { return shares ? format_number(v) : std::string("NA"); };
  os << "counts,global,," << sel.global_count << "\n";
  for (std::size_t i = 0; i < sel.specific_counts.size(); ++i)
    os << "counts," << industry_name(data, i) << ",," << sel.specific_counts[i] << "\n";
  os << "shares,global,," << share(shares ? shares->global_share : 0.0) << "\n";
  for (std::size_t i = 0; i < sel.specific_counts.size(); ++i)
    os << "shares," << industry_name(data, i) << ",," << share(shares ? shares->specific_share[i] : 0.0) << "\n";
  os << "shares,remainder,," << share(shares ? shares->remainder : 0.0) << "\n";
  os << "omega,,," << format_number(sel.omega) << "\n";
}

}  // namespace

ReportFormat parse_report_format(std::string_view name) {
  if (name == "csv") return ReportFormat::csv;
  if (name == "markdown" || name == "md" || name == "markdown-table") return ReportFormat::markdown;
  if (name == "json" || name == "json-report") return ReportFormat::json;
  throw ValidationError("unknown report format '" + std::string(name) + "' (expected csv, markdown or json)");
}

std::string render_mc_report(const McReport& report, ReportFormat format, const RunInfo& info, bool timing) {
  std::ostringstream os;
  switch (format) {
    case ReportFormat::json: {
      json root;
      root["meta"] = meta_json(info);
      root["base_seed"] = report.base_seed;
      root["reps"] = report.reps;
      json cells = json::array();
      for (const auto& c : report.cells) {
        json cell;
        cell["L"] = c.L;
        cell["T"] = c.T;
        cell["reps"] = c.reps;
        cell["failures"] = c.failures;
        cell["acc_lG"] = c.acc_lG;
        cell["acc_lS"] = c.acc_lS;
        cell["acc_lS_star"] = c.acc_lS_star;
        cell["rmse_beta"] = c.rmse_beta;
        cell["rmse_FG"] = c.rmse_FG;
        cell["rmse_FS"] = c.rmse_FS;
        cell["max_objective_increase"] = c.max_objective_increase;
        if (timing) cell["wall_seconds"] = c.wall_seconds;
        cells.push_back(cell);
      }
      root["cells"] = cells;
      os << root.dump(2) << "\n";
      break;
    }
    case ReportFormat::csv: {
      os << csv_preamble(info);
      os << "L,T,reps,failures,acc_lG,acc_lS,acc_lS_star,rmse_beta,rmse_FG,rmse_FS";
      if (timing) os << ",wall_seconds";
      os << "\n";
      for (const auto& c : report.cells) {
        os << c.L << "," << c.T << "," << c.reps << "," << c.failures << "," << format_number(c.acc_lG) << ","
           << format_number(c.acc_lS) << "," << format_number(c.acc_lS_star) << "," << format_number(c.rmse_beta)
           << "," << format_number(c.rmse_FG) << "," << format_number(c.rmse_FS);
        if (timing) os << "," << format_number(c.wall_seconds);
        os << "\n";
      }
      break;
    }
    case ReportFormat::markdown: {
      os << markdown_preamble(info, "Monte Carlo study");
      os << "| L | T | reps | failures | Acc_lG | Acc_lS | Acc*_lS | RMSE_beta | RMSE_FG | RMSE_FS |";
      if (timing) os << " seconds |";
      os << "\n|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|";
      if (timing) os << "---:|";
      os << "\n";
      for (const auto& c : report.cells) {
        os << "| " << c.L << " | " << c.T << " | " << c.reps << " | " << c.failures << " | " << fixed(c.acc_lG, 3)
           << " | " << fixed(c.acc_lS, 3) << " | " << fixed(c.acc_lS_star, 3) << " | " << fixed(c.rmse_beta, 3)
           << " | " << fixed(c.rmse_FG, 3) << " | " << fixed(c.rmse_FS, 3) << " |";
        if (timing) os << " " << fixed(c.wall_seconds, 1) << " |";
        os << "\n";
      }
      break;
    }
  }
  return os.str();
}

std::string render_fit_report(const PanelDataset& data, const HomogeneousFit& fit, ReportFormat format,
                              const RunInfo& info) {
  std::ostringstream os;
  switch (format) {
    case ReportFormat::json: {
      json root;
      root["meta"] = meta_json(info);
      root["mode"] = "homogeneous";
      json beta;
      for (std::size_t k = 0; k < static_cast<std::size_t>(data.dx); ++k)
        beta[regressor_name(data, k)] = fit.beta(static_cast<Eigen::Index>(k));
      root["beta"] = beta;
      root["iterations"] = fit.iterations;
      root["converged"] = fit.converged;
      root["factors"] = selection_json(data, fit.selection, fit.shares);
      os << root.dump(2) << "\n";
      break;
    }
    case ReportFormat::csv: {
      os << csv_preamble(info) << "section,industry,name,value\n";
      for (std::size_t k = 0; k < static_cast<std::size_t>(data.dx); ++k)
        os << "beta,," << regressor_name(data, k) << "," << format_number(fit.beta(static_cast<Eigen::Index>(k)))
           << "\n";
      factor_table_csv(os, data, fit.selection, fit.shares);
      break;
    }
    case ReportFormat::markdown: {
      os << markdown_preamble(info, "Homogeneous-slope fit");
      os << "## Coefficient estimates\n\n| variable | beta |\n|---|---:|\n";
      for (std::size_t k = 0; k < static_cast<std::size_t>(data.dx); ++k)
        os << "| " << regressor_name(data, k) << " | " << fixed(fit.beta(static_cast<Eigen::Index>(k)), 3) << " |\n";
      os << "\nconverged: " << (fit.converged ? "yes" : "no") << " after " << fit.iterations << " iterations\n\n";
      factor_table_markdown(os, data, fit.selection, fit.shares);
      break;
    }
  }
  return os.str();
}

std::string render_fit_report(const PanelDataset& data, const HeterogeneousFit& fit, ReportFormat format,
                              const RunInfo& info) {
  std::ostringstream os;
  const auto L = fit.betas.size();
  switch (format) {
    case ReportFormat::json: {
      json root;
      root["meta"] = meta_json(info);
      root["mode"] = "heterogeneous";
      json betas = json::array();
      for (std::size_t i = 0; i < L; ++i) {
        json row;
        row["industry"] = industry_name(data, i);
        for (std::size_t k = 0; k < static_cast<std::size_t>(data.dx); ++k)
          row[regressor_name(data, k)] = fit.betas[i](static_cast<Eigen::Index>(k));
        row["converged"] = static_cast<bool>(fit.converged[i]);
        betas.push_back(row);
      }
      root["betas"] = betas;
      root["factors"] = selection_json(data, fit.selection, fit.shares);
      os << root.dump(2) << "\n";
      break;
    }
    case ReportFormat::csv: {
      os << csv_preamble(info) << "section,industry,name,value\n";
      for (std::size_t i = 0; i < L; ++i)
        for (std::size_t k = 0; k < static_cast<std::size_t>(data.dx); ++k)
          os << "beta," << industry_name(data, i) << "," << regressor_name(data, k) << ","
             << format_number(fit.betas[i](static_cast<Eigen::Index>(k))) << "\n";
      factor_table_csv(os, data, fit.selection, fit.shares);
      break;
    }
    case ReportFormat::markdown: {
      os << markdown_preamble(info, "Heterogeneous-slope fit");
      os << "## Coefficient estimates by industry\n\n| industry | l^G + l_i^S |";
      for (std::size_t k = 0; k < static_cast<std::size_t>(data.dx); ++k) os << " " << regressor_name(data, k) << " |";
      os << "\n|---|---:|";
      for (int k = 0; k < data.dx; ++k) os << "---:|";
      os << "\n";
      for (std::size_t i = 0; i < L; ++i) {
        os << "| " << industry_name(data, i) << " | " << fit.selection.global_count + fit.selection.specific_counts[i]
           << " |";
        for (std::size_t k = 0; k < static_cast<std::size_t>(data.dx); ++k)
          os << " " << fixed(fit.betas[i](static_cast<Eigen::Index>(k)), 3) << " |";
        os << "\n";
      }
      os << "\n";
      factor_table_markdown(os, data, fit.selection, fit.shares);
      break;
    }
  }
  return os.str();
}

std::string render_bootstrap_report(const PanelDataset& data, const BootstrapResult& result, ReportFormat format,
                                    const RunInfo& info) {
  std::ostringstream os;
  const bool hetero = result.mode == EstimationMode::heterogeneous;
  auto slope_label = [&](std::size_t s) { return hetero ? industry_name(data, s) : std::string("pooled"); };
  const int ci_pct = static_cast<int>(std::lround(100.0 * (1.0 - result.level)));
  switch (format) {
    case ReportFormat::json: {
      json root;
      root["meta"] = meta_json(info);
      root["mode"] = hetero ? "heterogeneous" : "homogeneous";
      root["replications"] = result.requested;
      root["failures"] = result.failures;
      root["block_length"] = result.block_length;
      root["level"] = result.level;
      json rows = json::array();
      for (std::size_t s = 0; s < result.point.size(); ++s)
        for (std::size_t k = 0; k < static_cast<std::size_t>(data.dx); ++k) {
          const auto kk = static_cast<Eigen::Index>(k);
          json row;
          row["slope"] = slope_label(s);
          row["variable"] = regressor_name(data, k);
          row["beta"] = result.point[s](kk);
          row["lower"] = result.lower[s](kk);
          row["upper"] = result.upper[s](kk);
          rows.push_back(row);
        }
      root["intervals"] = rows;
      os << root.dump(2) << "\n";
      break;
    }
    case ReportFormat::csv: {
      os << csv_preamble(info);
      os << "# replications=" << result.requested << " failures=" << result.failures
         << " block_length=" << result.block_length << "\n";
      os << "slope,variable,beta,lower,upper\n";
      for (std::size_t s = 0; s < result.point.size(); ++s)
        for (std::size_t k = 0; k < static_cast<std::size_t>(data.dx); ++k) {
          const auto kk = static_cast<Eigen::Index>(k);
          os << slope_label(s) << "," << regressor_name(data, k) << "," << format_number(result.point[s](kk)) << ","
             << format_number(result.lower[s](kk)) << "," << format_number(result.upper[s](kk)) << "\n";
        }
      break;
    }
    case ReportFormat::markdown: {
      os << markdown_preamble(info, "Moving-block bootstrap confidence intervals");
      os << "| slope | variable | beta | " << ci_pct << "% CI |\n|---|---|---:|---|\n";
      for (std::size_t s = 0; s < result.point.size(); ++s)
        for (std::size_t k = 0; k < static_cast<std::size_t>(data.dx); ++k) {
          const auto kk = static_cast<Eigen::Index>(k);
          os << "| " << slope_label(s) << " | " << regressor_name(data, k) << " | " << fixed(result.point[s](kk), 3)
             << " | (" << fixed(result.lower[s](kk), 3) << ", " << fixed(result.upper[s](kk), 3) << ") |\n";
        }
      os << "\nCIs are calculated using moving block bootstrap (" << result.requested - result.failures << " of "
         << result.requested << " replicates, block length " << result.block_length << ").\n";
      break;
    }
  }
  return os.str();
}

std::string render_truth(const SimulatedPanel& sim, const DgpSpec& spec, const RunInfo& info) {
  json root;
  root["meta"] = meta_json(info);
  json design;
  design["L"] = spec.L;
  design["T"] = spec.T;
  design["global_count"] = spec.global_count;
  design["specific_choices"] = spec.specific_choices;
  design["beta0"] = vector_json(spec.beta0);
  design["seed"] = spec.seed;
  root["design"] = design;
  json truth;
  truth["beta0"] = vector_json(sim.truth.beta0);
  truth["sizes"] = sim.data.sizes();
  truth["global_count"] = sim.truth.global_count;
  truth["specific_counts"] = sim.truth.specific_counts;
  truth["global_factors"] = matrix_json(sim.truth.factors.global);
  json specific = json::array();
  for (const auto& f : sim.truth.factors.specific) specific.push_back(matrix_json(f));
  truth["specific_factors"] = specific;
  root["truth"] = truth;
  return root.dump(2) + "\n";
}

}  // namespace hpanel
