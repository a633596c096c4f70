#pragma once

#include "hpanel/bootstrap.hpp"
#include "hpanel/dgp.hpp"
#include "hpanel/heterogeneous.hpp"
#include "hpanel/homogeneous.hpp"
#include "hpanel/montecarlo.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hpanel {

inline constexpr std::string_view kVersion = "0.1.0";

enum class ReportFormat { csv, markdown, json };

[[nodiscard]] ReportFormat parse_report_format(std::string_view name);

/// Provenance echoed into every report so a run can be reproduced exactly.
struct RunInfo {
  std::string command;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> config;  // ordered key/value echo
};

/// Wall times are only emitted when `timing` is set; they would break byte-identical reruns.
[[nodiscard]] std::string render_mc_report(const McReport& report, ReportFormat format, const RunInfo& info,
                                           bool timing = false);

[[nodiscard]] std::string render_fit_report(const PanelDataset& data, const HomogeneousFit& fit, ReportFormat format,
                                            const RunInfo& info);
[[nodiscard]] std::string render_fit_report(const PanelDataset& data, const HeterogeneousFit& fit,
                                            ReportFormat format, const RunInfo& info);

[[nodiscard]] std::string render_bootstrap_report(const PanelDataset& data, const BootstrapResult& result,
                                                  ReportFormat format, const RunInfo& info);

/// JSON sidecar with the simulation design and its ground truth.
[[nodiscard]] std::string render_truth(const SimulatedPanel& sim, const DgpSpec& spec, const RunInfo& info);

}  // namespace hpanel
