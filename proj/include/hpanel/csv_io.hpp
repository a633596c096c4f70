#pragma once

#include "hpanel/panel.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace hpanel {

/// Names of the key and value columns in a long-format panel CSV.
struct ColumnMapping {
  std::string industry = "industry";
  std::string country = "country";
  std::string period = "period";
  std::string outcome = "y";
  std::vector<std::string> regressors;  // empty: every remaining column, in header order
};

struct LongCsvRow {
  std::string industry;
  std::string country;
  long long period = 0;
  double y = 0.0;
  std::vector<double> x;
};

/// Splits one CSV record; double-quoted fields may contain commas and "" escapes.
[[nodiscard]] std::vector<std::string> split_csv_record(const std::string& line);

/// Shortest decimal text that parses back to exactly the same double.
[[nodiscard]] std::string format_number(double value);

/**
 * Reads a long-format panel. Industries and countries are ordered
 * lexicographically and periods ascending; every (industry, country) pair must
 * cover the same set of periods. Throws ValidationError on duplicate keys,
 * unbalanced coverage (listing the missing triples) or unparseable numbers.
 */
[[nodiscard]] PanelDataset read_csv(std::istream& in, const ColumnMapping& mapping = {});
[[nodiscard]] PanelDataset load_csv(const std::filesystem::path& path, const ColumnMapping& mapping = {});

/// Assembles already-parsed rows; `regressor_names` labels the x columns.
[[nodiscard]] PanelDataset assemble_panel(const std::vector<LongCsvRow>& rows,
                                          const std::vector<std::string>& regressor_names);

/// Long-format export: industry,country,period,y,<regressors>. Missing labels are generated.
void write_csv(std::ostream& out, const PanelDataset& data);
void save_csv(const std::filesystem::path& path, const PanelDataset& data);

}  // namespace hpanel
