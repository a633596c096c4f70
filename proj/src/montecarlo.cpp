#include "hpanel/montecarlo.hpp"

#include "hpanel/error.hpp"
#include "hpanel/homogeneous.hpp"
#include "hpanel/numerics.hpp"
#include "hpanel/seeding.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

namespace hpanel {

double projector_distance(const Matrix& A, const Matrix& B) {
  if (A.cols() > 0 && B.cols() > 0 && A.rows() != B.rows())
    throw ValidationError("projector_distance: row counts differ");
  const Matrix QA = orthonormal_basis(A);
  const Matrix QB = orthonormal_basis(B);
  // ||P_A - P_B||^2 = ||(I - P_B) QA||^2 + ||(I - P_A) QB||^2
  if (QA.cols() == 0) return std::sqrt(static_cast<double>(QB.cols()));
  if (QB.cols() == 0) return std::sqrt(static_cast<double>(QA.cols()));
  const Matrix cross = QA.transpose() * QB;
  const double sq = (QA - QB * cross.transpose()).squaredNorm() + (QB - QA * cross).squaredNorm();
  return std::sqrt(std::max(0.0, sq));
}

std::uint64_t replication_seed(std::uint64_t base, int L, int T, int m) {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ static_cast<std::uint64_t>(L));
  h = splitmix64(h ^ (static_cast<std::uint64_t>(T) << 20));
  return splitmix64(h ^ (static_cast<std::uint64_t>(m) << 40));
}

ReplicationRecord run_replication(const DgpSpec& spec, const ModelConfig& config) {
  ReplicationRecord rec;
  rec.seed = spec.seed;
  try {
    const auto sim = generate(spec);
    const auto fit = fit_full(sim.data, config);
    const auto& truth = sim.truth;
    rec.global_true = truth.global_count;
    rec.specific_true = truth.specific_counts;
    rec.global_hat = fit.selection.global_count;
    rec.specific_hat = fit.selection.specific_counts;
    rec.beta_sq_error = (fit.beta - truth.beta0).squaredNorm();
    const double dg = projector_distance(fit.factors.global, truth.factors.global);
    rec.global_dist_sq = dg * dg;
    double acc = 0.0;
    for (int i = 0; i < sim.data.L(); ++i) {
      const auto ii = static_cast<std::size_t>(i);
      const double ds = projector_distance(fit.factors.specific[ii], truth.factors.specific[ii]);
      acc += ds * ds;
    }
    rec.specific_dist_sq_mean = acc / sim.data.L();
    rec.max_objective_increase = std::max(fit.initial.max_objective_increase(), max_increase(fit.objective_trace));
    rec.ok = true;
  } catch (const Error& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  return rec;
}

CellMetrics run_cell(const DgpSpec& spec, int reps, const ModelConfig& config, int threads) {
  if (reps < 1) throw ValidationError("reps must be >= 1");
  check_spec(spec);
  check_config(config);

  const auto start = std::chrono::steady_clock::now();
  CellMetrics cell;
  cell.L = spec.L;
  cell.T = spec.T;
  cell.reps = reps;
  cell.records.resize(static_cast<std::size_t>(reps));

  auto run_one = [&](int m) {
    DgpSpec s = spec;
    s.seed = replication_seed(spec.seed, spec.L, spec.T, m);
    cell.records[static_cast<std::size_t>(m)] = run_replication(s, config);
  };
  const int workers = std::clamp(threads, 1, reps);
  if (workers == 1) {
    for (int m = 0; m < reps; ++m) run_one(m);
  } else {
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int m = next++; m < reps; m = next++) run_one(m);
      });
  }

  // Fixed-order reduction over replications.
  int ok = 0;
  double lg = 0.0, ls = 0.0, ls_star = 0.0, sb = 0.0, sg = 0.0, ss = 0.0;
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& r : cell.records) {
    if (!r.ok) {
      ++cell.failures;
      continue;
    }
    ++ok;
    lg += r.global_hat == r.global_true ? 1.0 : 0.0;
    ls += r.specific_hat == r.specific_true ? 1.0 : 0.0;
    int hits = 0;
    for (std::size_t i = 0; i < r.specific_true.size(); ++i) hits += r.specific_hat[i] == r.specific_true[i] ? 1 : 0;
    ls_star += static_cast<double>(hits) / static_cast<double>(r.specific_true.size());
    sb += r.beta_sq_error;
    sg += r.global_dist_sq;
    ss += r.specific_dist_sq_mean;
    worst = std::max(worst, r.max_objective_increase);
  }
  if (ok > 0) {
    cell.acc_lG = lg / ok;
    cell.acc_lS = ls / ok;
    cell.acc_lS_star = ls_star / ok;
    cell.rmse_beta = std::sqrt(sb / ok);
    cell.rmse_FG = std::sqrt(sg / ok);
    cell.rmse_FS = std::sqrt(ss / ok);
    cell.max_objective_increase = worst;
  }
  cell.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return cell;
}

McReport run_grid(const std::vector<int>& L_values, const std::vector<int>& T_values, int reps,
                  const DgpSpec& spec_template, const ModelConfig& config, int threads) {
  if (L_values.empty() || T_values.empty()) throw ValidationError("grid lists must be non-empty");
  McReport report;
  report.base_seed = spec_template.seed;
  report.reps = reps;
  for (int L : L_values)
    for (int T : T_values) {
      DgpSpec spec = spec_template;
      spec.L = L;
      spec.T = T;
      report.cells.push_back(run_cell(spec, reps, config, threads));
    }
  return report;
}

}  // namespace hpanel
