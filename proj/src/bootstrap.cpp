#include "hpanel/bootstrap.hpp"

#include "hpanel/error.hpp"
#include "hpanel/heterogeneous.hpp"
#include "hpanel/homogeneous.hpp"
#include "hpanel/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hpanel {

int default_block_length(int T) {
  const int l0 = static_cast<int>(std::floor(std::cbrt(static_cast<double>(T)) + 1e-9));
  return std::max(1, l0);
}

std::vector<int> mbb_time_indices(int T, int block_length, std::mt19937_64& rng) {
  if (block_length < 1) throw ValidationError("block length must be >= 1");
  if (T - block_length < 1)
    throw ValidationError("block length " + std::to_string(block_length) + " leaves no admissible block start for T=" +
                          std::to_string(T));
  const int blocks = T / block_length + 1;
  std::uniform_int_distribution<int> start_dist(0, T - block_length - 1);
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(T));
  for (int b = 0; b < blocks; ++b) {
    const int start = start_dist(rng);
    for (int s = 0; s < block_length && static_cast<int>(out.size()) < T; ++s) out.push_back(start + s);
  }
  return out;
}

PanelDataset resample_periods(const PanelDataset& data, std::span<const int> time_indices) {
  if (static_cast<int>(time_indices.size()) != data.T) throw ValidationError("time index sequence must have length T");
  for (int t : time_indices)
    if (t < 0 || t >= data.T) throw ValidationError("time index out of range");
  PanelDataset out = data;
  for (auto& industry : out.units)
    for (auto& u : industry) {
      const Vector y = u.y;
      const Matrix X = u.X;
      for (int t = 0; t < data.T; ++t) {
        const int src = time_indices[static_cast<std::size_t>(t)];
        u.y(t) = y(src);
        u.X.row(t) = X.row(src);
      }
    }
  return out;
}

std::pair<int, int> percentile_ranks(int replicates, double level) {
  if (replicates < 1) throw ValidationError("no bootstrap replicates");
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("level must lie in (0,1)");
  // The small offset keeps exact products such as 0.025*400 = 10 from rounding up.
  const double B = replicates;
  const int lo = static_cast<int>(std::ceil(level / 2.0 * B - 1e-9));
  const int hi = static_cast<int>(std::ceil((1.0 - level / 2.0) * B - 1e-9));
  return {std::clamp(lo, 1, replicates), std::clamp(hi, 1, replicates)};
}

namespace {

std::vector<Vector> estimate_slopes(const PanelDataset& sample, const ModelConfig& config, EstimationMode mode,
                                    const FixedCounts& counts, std::span<const Vector> start) {
  std::vector<int> ranks;
  for (int c : counts.specific) ranks.push_back(counts.global + c);
  if (mode == EstimationMode::homogeneous) {
    return {fit_alternating(sample, ranks, config, start.front()).beta};
  }
  std::vector<Vector> out;
  for (int i = 0; i < sample.L(); ++i) {
    const auto ii = static_cast<std::size_t>(i);
    out.push_back(fit_industry(industry_panel(sample, i), ranks[ii], config, start[ii]).beta);
  }
  return out;
}

}  // namespace

BootstrapResult bootstrap_ci(const PanelDataset& data, const ModelConfig& config, const BootstrapOptions& options,
                             const FixedCounts& counts, std::span<const Vector> point_estimates) {
  require_valid(data);
  check_config(config);
  if (options.replications < 1) throw ValidationError("bootstrap replications must be >= 1");
  if (static_cast<int>(counts.specific.size()) != data.L())
    throw ValidationError("fixed counts must list one specific count per industry");
  const std::size_t slopes = options.mode == EstimationMode::homogeneous ? 1 : static_cast<std::size_t>(data.L());
  if (point_estimates.size() != slopes) throw ValidationError("point estimates do not match the estimation mode");
  (void)percentile_ranks(1, options.level);

  BootstrapResult out;
  out.mode = options.mode;
  out.point.assign(point_estimates.begin(), point_estimates.end());
  out.requested = options.replications;
  out.level = options.level;
  out.block_length = options.block_length.value_or(default_block_length(data.T));

  std::vector<std::vector<Vector>> draws;
  for (int b = 0; b < options.replications; ++b) {
    std::mt19937_64 rng(sub_seed(options.seed, static_cast<std::uint64_t>(b)));
    const auto idx = mbb_time_indices(data.T, out.block_length, rng);
    try {
      draws.push_back(estimate_slopes(resample_periods(data, idx), config, options.mode, counts, point_estimates));
    } catch (const NumericError&) {
      ++out.failures;
    }
  }
  if (out.failures * 20 > options.replications)
    throw NumericError("bootstrap: " + std::to_string(out.failures) + " of " + std::to_string(options.replications) +
                       " replicates failed (limit 5%)");

  const int ok = static_cast<int>(draws.size());
  const auto [lo, hi] = percentile_ranks(ok, options.level);
  for (std::size_t s = 0; s < slopes; ++s) {
    Matrix reps(ok, data.dx);
    for (int b = 0; b < ok; ++b) reps.row(b) = draws[static_cast<std::size_t>(b)][s].transpose();
    Vector lower(data.dx);
    Vector upper(data.dx);
    for (int k = 0; k < data.dx; ++k) {
      std::vector<double> column(reps.col(k).data(), reps.col(k).data() + ok);
      std::sort(column.begin(), column.end());
      lower(k) = column[static_cast<std::size_t>(lo - 1)];
      upper(k) = column[static_cast<std::size_t>(hi - 1)];
    }
    out.replicate_betas.push_back(std::move(reps));
    out.lower.push_back(std::move(lower));
    out.upper.push_back(std::move(upper));
  }
  return out;
}

BootstrapResult bootstrap_ci(const PanelDataset& data, const ModelConfig& config, const BootstrapOptions& options) {
  if (options.mode == EstimationMode::homogeneous) {
    const auto fit = fit_full(data, config);
    const FixedCounts counts{fit.selection.global_count, fit.selection.specific_counts};
    const Vector point[] = {fit.beta};
    return bootstrap_ci(data, config, options, counts, point);
  }
  const auto fit = fit_heterogeneous(data, config);
  const FixedCounts counts{fit.selection.global_count, fit.selection.specific_counts};
  return bootstrap_ci(data, config, options, counts, fit.betas);
}

}  // namespace hpanel
