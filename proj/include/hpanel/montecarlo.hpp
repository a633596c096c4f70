#pragma once

#include "hpanel/dgp.hpp"
#include "hpanel/panel.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hpanel {

/// Frobenius distance ||P_A - P_B|| between the projectors onto two column spans.
[[nodiscard]] double projector_distance(const Matrix& A, const Matrix& B);

/// Outcome of one simulated dataset run through fit_full.
struct ReplicationRecord {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;

  int global_true = 0;
  int global_hat = 0;
  std::vector<int> specific_true;
  std::vector<int> specific_hat;
  double beta_sq_error = 0.0;
  double global_dist_sq = 0.0;
  double specific_dist_sq_mean = 0.0;
  double max_objective_increase = 0.0;  // over both alternating stages
};

struct CellMetrics {
  int L = 0;
  int T = 0;
  int reps = 0;
  int failures = 0;
  double acc_lG = 0.0;
  double acc_lS = 0.0;
  double acc_lS_star = 0.0;
  double rmse_beta = 0.0;
  double rmse_FG = 0.0;
  double rmse_FS = 0.0;
  double max_objective_increase = 0.0;
  double wall_seconds = 0.0;
  std::vector<ReplicationRecord> records;
};

struct McReport {
  std::uint64_t base_seed = 0;
  int reps = 0;
  std::vector<CellMetrics> cells;
};

/// Seed of replication m of the (L,T) cell drawn from a base seed; streams of distinct cells are disjoint.
[[nodiscard]] std::uint64_t replication_seed(std::uint64_t base, int L, int T, int m);

[[nodiscard]] ReplicationRecord run_replication(const DgpSpec& spec, const ModelConfig& config);

/**
 * Runs `reps` replications of the design `spec` (spec.seed is the base seed)
 * and aggregates the six evaluation criteria. Failed replications are counted
 * and excluded from the averages. `threads` > 1 spreads replications over
 * worker threads without changing the result.
 */
[[nodiscard]] CellMetrics run_cell(const DgpSpec& spec, int reps, const ModelConfig& config, int threads = 1);

[[nodiscard]] McReport run_grid(const std::vector<int>& L_values, const std::vector<int>& T_values, int reps,
                                const DgpSpec& spec_template, const ModelConfig& config, int threads = 1);

}  // namespace hpanel
