#include "cli.hpp"

#include "hpanel/bootstrap.hpp"
#include "hpanel/csv_io.hpp"
#include "hpanel/dgp.hpp"
#include "hpanel/error.hpp"
#include "hpanel/heterogeneous.hpp"
#include "hpanel/homogeneous.hpp"
#include "hpanel/montecarlo.hpp"
#include "hpanel/report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace hpanel::cli {

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& flag) {
  std::vector<int> out;
  for (const auto& item : split_list(text)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ValidationError("--" + flag + ": '" + item + "' is not an integer");
    }
  }
  if (out.empty()) throw ValidationError("--" + flag + " needs at least one value");
  return out;
}

Vector parse_vector(const std::string& text, const std::string& flag) {
  const auto items = split_list(text);
  Vector v(static_cast<Eigen::Index>(items.size()));
  for (std::size_t k = 0; k < items.size(); ++k) {
    try {
      v(static_cast<Eigen::Index>(k)) = std::stod(items[k]);
    } catch (const std::logic_error&) {
      throw ValidationError("--" + flag + ": '" + items[k] + "' is not a number");
    }
  }
  if (v.size() == 0) throw ValidationError("--" + flag + " needs at least one value");
  return v;
}

std::string join(const std::vector<int>& values) {
  std::string out;
  for (std::size_t k = 0; k < values.size(); ++k) out += (k ? "," : "") + std::to_string(values[k]);
  return out;
}

// Reads a flat JSON object and turns it into "--key value" tokens.
std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config file " + path + " is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw ValidationError("config file " + path + " must hold a flat JSON object");
  std::vector<std::string> tokens;
  for (const auto& [key, value] : doc.items()) {
    const std::string flag = "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) tokens.push_back(flag);
    } else if (value.is_string()) {
      tokens.push_back(flag);
      tokens.push_back(value.get<std::string>());
    } else if (value.is_number()) {
      tokens.push_back(flag);
      tokens.push_back(value.dump());
    } else if (value.is_array()) {
      std::string list;
      for (const auto& item : value) list += (list.empty() ? "" : ",") + (item.is_string() ? item.get<std::string>() : item.dump());
      tokens.push_back(flag);
      tokens.push_back(list);
    } else {
      throw ValidationError("config key '" + key + "' must be a string, number, boolean or list");
    }
  }
  return tokens;
}

// Places config-file tokens right after the subcommand so explicit flags, parsed later, win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> user;
  std::optional<std::string> path;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) {
      path = args[++k];
    } else if (args[k].rfind("--config=", 0) == 0) {
      path = args[k].substr(9);
    } else {
      user.push_back(args[k]);
    }
  }
  if (!path || user.empty()) return user;
  std::vector<std::string> out{user.front()};
  for (auto& t : config_tokens(*path)) out.push_back(std::move(t));
  out.insert(out.end(), user.begin() + 1, user.end());
  return out;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

struct ModelFlags {
  int dmax = 20;
  std::optional<double> omega;
  double tol = 1e-8;
  int max_iter = 1000;
  std::uint64_t seed = 1;

  void add_to(CLI::App* app) {
    app->add_option("--dmax", dmax, "Cap on candidate factor counts")->capture_default_str();
    app->add_option("--omega", omega, "Override the mock eigenvalue threshold");
    app->add_option("--tol", tol, "Convergence tolerance on the slope change")->capture_default_str();
    app->add_option("--max-iter", max_iter, "Iteration cap of the alternating fit")->capture_default_str();
    app->add_option("--seed", seed, "Random seed")->capture_default_str();
  }

  [[nodiscard]] ModelConfig config() const {
    ModelConfig c;
    c.d_max = dmax;
    c.omega_override = omega;
    c.tol_beta = tol;
    c.max_iter = max_iter;
    c.seed = seed;
    check_config(c);
    return c;
  }

  void echo(RunInfo& info) const {
    info.config.emplace_back("dmax", std::to_string(dmax));
    info.config.emplace_back("omega", omega ? format_number(*omega) : "default");
    info.config.emplace_back("tol", format_number(tol));
    info.config.emplace_back("max_iter", std::to_string(max_iter));
  }
};

struct InputFlags {
  std::string csv;
  std::string mode = "homogeneous";
  std::string outcome = "y";
  std::string regressors;
  std::string format = "markdown";
  std::string out;

  void add_to(CLI::App* app) {
    app->add_option("--csv", csv, "Long-format panel CSV")->required();
    app->add_option("--mode", mode, "homogeneous or heterogeneous slopes")->capture_default_str();
    app->add_option("--outcome", outcome, "Outcome column name")->capture_default_str();
    app->add_option("--regressors", regressors, "Comma-separated regressor columns (default: all others)");
    app->add_option("--format", format, "csv, markdown or json")->capture_default_str();
    app->add_option("--out", out, "Output file (default: stdout)");
  }

  [[nodiscard]] EstimationMode estimation_mode() const {
    if (mode == "homogeneous") return EstimationMode::homogeneous;
    if (mode == "heterogeneous") return EstimationMode::heterogeneous;
    throw ValidationError("--mode must be homogeneous or heterogeneous, got '" + mode + "'");
  }

  [[nodiscard]] PanelDataset load() const {
    ColumnMapping mapping;
    mapping.outcome = outcome;
    mapping.regressors = split_list(regressors);
    return load_csv(csv, mapping);
  }

  void echo(RunInfo& info) const {
    info.config.emplace_back("csv", csv);
    info.config.emplace_back("mode", mode);
    info.config.emplace_back("outcome", outcome);
    if (!regressors.empty()) info.config.emplace_back("regressors", regressors);
  }
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation: return 2;
    case ErrorKind::numeric: return 3;
    case ErrorKind::io: return 4;
  }
  return 1;
}

}  // namespace

int run(const std::vector<std::string>& raw_args) {
  CLI::App app{"Hierarchical factor panel estimation and simulation", "hpanel"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Draw a dataset from the simulation design");
  int sim_L = 20, sim_T = 20, sim_lG = 2;
  std::string sim_lS = "0,1,2,3,4", sim_beta = "1,1", sim_out, sim_truth;
  double sim_error_scale = 1.0, sim_loading_scale = 1.0;
  std::uint64_t sim_seed = 1;
  sim_cmd->add_option("--L", sim_L, "Number of industries")->capture_default_str();
  sim_cmd->add_option("--T", sim_T, "Number of periods")->capture_default_str();
  sim_cmd->add_option("--global-factors", sim_lG, "Number of global factors")->capture_default_str();
  sim_cmd->add_option("--specific-choices", sim_lS, "Candidate industry factor counts")->capture_default_str();
  sim_cmd->add_option("--beta", sim_beta, "True slope vector")->capture_default_str();
  sim_cmd->add_option("--error-scale", sim_error_scale, "Scale of the idiosyncratic errors")->capture_default_str();
  sim_cmd->add_option("--loading-scale", sim_loading_scale, "Scale of the factor loadings")->capture_default_str();
  sim_cmd->add_option("--seed", sim_seed, "Random seed")->capture_default_str();
  sim_cmd->add_option("--out", sim_out, "Dataset CSV path")->required();
  sim_cmd->add_option("--truth", sim_truth, "Ground-truth JSON path (default: <out>.truth.json)");

  // mc-study
  auto* mc_cmd = app.add_subcommand("mc-study", "Monte Carlo study over an (L, T) grid");
  std::string mc_L = "20", mc_T = "20", mc_format = "markdown", mc_out;
  int mc_reps = 1000, mc_threads = 1;
  bool mc_timing = false;
  ModelFlags mc_model;
  mc_cmd->add_option("--L", mc_L, "Comma-separated industry counts")->capture_default_str();
  mc_cmd->add_option("--T", mc_T, "Comma-separated period counts")->capture_default_str();
  mc_cmd->add_option("--reps", mc_reps, "Replications per cell")->capture_default_str();
  mc_cmd->add_option("--threads", mc_threads, "Worker threads")->capture_default_str();
  mc_cmd->add_option("--format", mc_format, "csv, markdown or json")->capture_default_str();
  mc_cmd->add_option("--out", mc_out, "Output file (default: stdout)");
  mc_cmd->add_flag("--timing", mc_timing, "Include wall-clock seconds per cell");
  mc_model.add_to(mc_cmd);

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Estimate slopes, factor counts and variance shares from a CSV");
  InputFlags fit_in;
  ModelFlags fit_model;
  fit_in.add_to(fit_cmd);
  fit_model.add_to(fit_cmd);

  // bootstrap-ci
  auto* boot_cmd = app.add_subcommand("bootstrap-ci", "Moving-block bootstrap confidence intervals for the slopes");
  InputFlags boot_in;
  ModelFlags boot_model;
  int boot_reps = 399;
  double boot_level = 0.05;
  std::optional<int> boot_block;
  boot_in.add_to(boot_cmd);
  boot_model.add_to(boot_cmd);
  boot_cmd->add_option("--bootstrap-reps", boot_reps, "Bootstrap replications")->capture_default_str();
  boot_cmd->add_option("--level", boot_level, "Significance level of the intervals")->capture_default_str();
  boot_cmd->add_option("--block-length", boot_block, "Block length (default floor(T^(1/3)))");

  for (auto* sub : {sim_cmd, mc_cmd, fit_cmd, boot_cmd})
    sub->add_option("--config", "Flat JSON file of option values; explicit flags take precedence");

  try {
    auto args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);

    if (*sim_cmd) {
      DgpSpec spec;
      spec.L = sim_L;
      spec.T = sim_T;
      spec.global_count = sim_lG;
      spec.specific_choices = parse_int_list(sim_lS, "specific-choices");
      spec.beta0 = parse_vector(sim_beta, "beta");
      spec.error_scale = sim_error_scale;
      spec.loading_scale = sim_loading_scale;
      spec.seed = sim_seed;
      const auto sim = generate(spec);
      RunInfo info{"simulate", sim_seed, {}};
      info.config = {{"L", std::to_string(sim_L)},
                     {"T", std::to_string(sim_T)},
                     {"global_factors", std::to_string(sim_lG)},
                     {"specific_choices", join(spec.specific_choices)},
                     {"beta", sim_beta},
                     {"error_scale", format_number(sim_error_scale)},
                     {"loading_scale", format_number(sim_loading_scale)}};
      save_csv(sim_out, sim.data);
      write_output(sim_truth.empty() ? sim_out + ".truth.json" : sim_truth, render_truth(sim, spec, info));
    } else if (*mc_cmd) {
      const auto Ls = parse_int_list(mc_L, "L");
      const auto Ts = parse_int_list(mc_T, "T");
      const auto format = parse_report_format(mc_format);
      DgpSpec spec;
      spec.seed = mc_model.seed;
      const auto report = run_grid(Ls, Ts, mc_reps, spec, mc_model.config(), mc_threads);
      RunInfo info{"mc-study", mc_model.seed, {}};
      info.config = {{"L", join(Ls)}, {"T", join(Ts)}, {"reps", std::to_string(mc_reps)}};
      mc_model.echo(info);
      for (const auto& cell : report.cells)
        if (cell.failures > 0)
          std::cerr << "warning: " << cell.failures << " failed replication(s) in cell (" << cell.L << ", " << cell.T
                    << ")\n";
      write_output(mc_out, render_mc_report(report, format, info, mc_timing));
    } else if (*fit_cmd) {
      const auto format = parse_report_format(fit_in.format);
      const auto mode = fit_in.estimation_mode();
      const auto data = fit_in.load();
      const auto config = fit_model.config();
      RunInfo info{"fit", fit_model.seed, {}};
      fit_in.echo(info);
      fit_model.echo(info);
      const std::string text = mode == EstimationMode::homogeneous
                                   ? render_fit_report(data, fit_full(data, config), format, info)
                                   : render_fit_report(data, fit_heterogeneous(data, config), format, info);
      write_output(fit_in.out, text);
    } else if (*boot_cmd) {
      const auto format = parse_report_format(boot_in.format);
      BootstrapOptions options;
      options.mode = boot_in.estimation_mode();
      options.replications = boot_reps;
      options.level = boot_level;
      options.block_length = boot_block;
      options.seed = boot_model.seed;
      const auto data = boot_in.load();
      const auto result = bootstrap_ci(data, boot_model.config(), options);
      RunInfo info{"bootstrap-ci", boot_model.seed, {}};
      boot_in.echo(info);
      boot_model.echo(info);
      info.config.emplace_back("bootstrap_reps", std::to_string(boot_reps));
      info.config.emplace_back("level", format_number(boot_level));
      info.config.emplace_back("block_length", std::to_string(result.block_length));
      write_output(boot_in.out, render_bootstrap_report(data, result, format, info));
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::bad_alloc&) {
    std::cerr << "error: out of memory\n";
    return 3;
  }
}

}  // namespace hpanel::cli
