#pragma once

#include "hpanel/panel.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace hpanel {

enum class EstimationMode { homogeneous, heterogeneous };

/// Default block length floor(T^{1/3}), at least 1.
[[nodiscard]] int default_block_length(int T);

/**
 * Moving-block resampling of the time axis. k0 = floor(T/l0) + 1 block starts are
 * drawn uniformly from {0, ..., T-l0-1} (0-based); blocks of length l0 are laid
 * end to end and the sequence is truncated to exactly T entries.
 */
[[nodiscard]] std::vector<int> mbb_time_indices(int T, int block_length, std::mt19937_64& rng);

/// Rebuilds every series on the given time indices; all units share the same indices.
[[nodiscard]] PanelDataset resample_periods(const PanelDataset& data, std::span<const int> time_indices);

/// 1-based order statistics (ceil(B a/2), ceil(B (1 - a/2))) used as percentile bounds.
[[nodiscard]] std::pair<int, int> percentile_ranks(int replicates, double level);

/// Factor counts held fixed across bootstrap replicates.
struct FixedCounts {
  int global = 0;
  std::vector<int> specific;
};

struct BootstrapOptions {
  EstimationMode mode = EstimationMode::homogeneous;
  int replications = 399;
  double level = 0.05;
  std::optional<int> block_length;
  std::uint64_t seed = 0;
};

struct BootstrapResult {
  EstimationMode mode = EstimationMode::homogeneous;
  std::vector<Vector> point;           // one slope (homogeneous) or one per industry
  std::vector<Matrix> replicate_betas;  // [slope] successful replicates x d_x
  std::vector<Vector> lower;
  std::vector<Vector> upper;
  int requested = 0;
  int failures = 0;
  int block_length = 0;
  double level = 0.05;
};

/**
 * Percentile confidence intervals for the slopes. Each replicate resamples time
 * blocks jointly across all units and re-estimates the slopes by alternating
 * minimization at ranks l^G + l_i^S; counts are never reselected. Replicate
 * failures are recorded; more than 5% of B failing raises NumericError.
 */
[[nodiscard]] BootstrapResult bootstrap_ci(const PanelDataset& data, const ModelConfig& config,
                                           const BootstrapOptions& options, const FixedCounts& counts,
                                           std::span<const Vector> point_estimates);

/// Runs the full pipeline in the requested mode first, then bootstraps at its selected counts.
[[nodiscard]] BootstrapResult bootstrap_ci(const PanelDataset& data, const ModelConfig& config,
                                           const BootstrapOptions& options);

}  // namespace hpanel
