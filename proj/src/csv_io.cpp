#include "hpanel/csv_io.hpp"

#include "hpanel/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace hpanel {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return c != ' ' && c != '\t' && c != '\r' && c != '\n'; };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_double(const std::string& text, std::size_t line, const std::string& column) {
  const std::string s = trim(text);
  double value = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (s.empty() || ec != std::errc() || ptr != last)
    throw ValidationError("line " + std::to_string(line) + ": cannot parse '" + s + "' in column '" + column +
                          "' as a number");
  return value;
}

long long parse_period(const std::string& text, std::size_t line) {
  const std::string s = trim(text);
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw ValidationError("line " + std::to_string(line) + ": cannot parse period '" + s + "' as an integer");
  return value;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ValidationError("CSV header has no column named '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

std::string padded_label(char prefix, std::size_t index, std::size_t count) {
  const std::string digits = std::to_string(index + 1);
  const std::size_t width = std::max<std::size_t>(3, std::to_string(count).size());
  return std::string(1, prefix) + std::string(width - std::min(width, digits.size()), '0') + digits;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::vector<std::string> split_csv_record(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        field += '"';
        ++k;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(field);
  return fields;
}

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw IoError("number formatting failed");
  return std::string(buf, ptr);
}

PanelDataset assemble_panel(const std::vector<LongCsvRow>& rows, const std::vector<std::string>& regressor_names) {
  if (rows.empty()) throw ValidationError("CSV contains no data rows");
  const std::size_t dx = regressor_names.size();
  if (dx == 0) throw ValidationError("CSV has no regressor columns");

  using Key = std::tuple<std::string, std::string, long long>;
  std::map<Key, const LongCsvRow*> cells;
  std::set<long long> period_set;
  std::map<std::string, std::set<std::string>> countries;
  for (const auto& r : rows) {
    if (r.x.size() != dx) throw ValidationError("row regressor count does not match the header");
    Key key{r.industry, r.country, r.period};
    if (!cells.emplace(key, &r).second)
      throw ValidationError("duplicate key (" + r.industry + ", " + r.country + ", " + std::to_string(r.period) + ")");
    period_set.insert(r.period);
    countries[r.industry].insert(r.country);
  }

  const std::vector<long long> periods(period_set.begin(), period_set.end());
  std::vector<std::string> missing;
  for (const auto& [industry, names] : countries)
    for (const auto& country : names)
      for (long long p : periods)
        if (!cells.count(Key{industry, country, p}))
          missing.push_back("(" + industry + ", " + country + ", " + std::to_string(p) + ")");
  if (!missing.empty()) {
    std::string msg = "unbalanced time coverage; missing " + std::to_string(missing.size()) + " cell(s):";
    for (const auto& m : missing) msg += " " + m;
    throw ValidationError(msg);
  }

  PanelDataset data;
  data.T = static_cast<int>(periods.size());
  data.dx = static_cast<int>(dx);
  data.regressor_names = regressor_names;
  data.periods = periods;
  for (const auto& [industry, names] : countries) {
    data.industry_labels.push_back(industry);
    data.country_labels.emplace_back(names.begin(), names.end());
    auto& block = data.units.emplace_back();
    for (const auto& country : names) {
      UnitSeries u;
      u.y.resize(data.T);
      u.X.resize(data.T, data.dx);
      for (int t = 0; t < data.T; ++t) {
        const auto* r = cells.at(Key{industry, country, periods[static_cast<std::size_t>(t)]});
        u.y(t) = r->y;
        for (int k = 0; k < data.dx; ++k) u.X(t, k) = r->x[static_cast<std::size_t>(k)];
      }
      block.push_back(std::move(u));
    }
  }
  require_valid(data);
  return data;
}

PanelDataset read_csv(std::istream& in, const ColumnMapping& mapping) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("CSV is empty (no header)");
  std::vector<std::string> header = split_csv_record(line);
  for (auto& h : header) h = trim(h);

  const std::size_t ci = column_index(header, mapping.industry);
  const std::size_t cc = column_index(header, mapping.country);
  const std::size_t cp = column_index(header, mapping.period);
  const std::size_t cy = column_index(header, mapping.outcome);
  std::vector<std::string> names = mapping.regressors;
  if (names.empty())
    for (std::size_t k = 0; k < header.size(); ++k)
      if (k != ci && k != cc && k != cp && k != cy) names.push_back(header[k]);
  std::vector<std::size_t> cx;
  for (const auto& n : names) cx.push_back(column_index(header, n));

  std::vector<LongCsvRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv_record(line);
    if (f.size() != header.size())
      throw ValidationError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                            " fields, found " + std::to_string(f.size()));
    LongCsvRow r;
    r.industry = trim(f[ci]);
    r.country = trim(f[cc]);
    r.period = parse_period(f[cp], line_no);
    r.y = parse_double(f[cy], line_no, header[cy]);
    for (std::size_t k = 0; k < cx.size(); ++k) r.x.push_back(parse_double(f[cx[k]], line_no, names[k]));
    rows.push_back(std::move(r));
  }
  return assemble_panel(rows, names);
}

PanelDataset load_csv(const std::filesystem::path& path, const ColumnMapping& mapping) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_csv(in, mapping);
}

void write_csv(std::ostream& out, const PanelDataset& data) {
  out << "industry,country,period,y";
  for (int k = 0; k < data.dx; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    out << "," << quote_if_needed(kk < data.regressor_names.size() ? data.regressor_names[kk] : "x" + std::to_string(k + 1));
  }
  out << "\n";
  const auto L = static_cast<std::size_t>(data.L());
  for (std::size_t i = 0; i < L; ++i) {
    const std::string industry = i < data.industry_labels.size() ? data.industry_labels[i] : padded_label('I', i, L);
    const auto N = data.units[i].size();
    for (std::size_t j = 0; j < N; ++j) {
      const bool have = i < data.country_labels.size() && j < data.country_labels[i].size();
      const std::string country = have ? data.country_labels[i][j] : padded_label('C', j, N);
      const auto& u = data.units[i][j];
      for (int t = 0; t < data.T; ++t) {
        const auto tt = static_cast<std::size_t>(t);
        const long long period = tt < data.periods.size() ? data.periods[tt] : t + 1;
        out << quote_if_needed(industry) << "," << quote_if_needed(country) << "," << period << ","
            << format_number(u.y(t));
        for (int k = 0; k < data.dx; ++k) out << "," << format_number(u.X(t, k));
        out << "\n";
      }
    }
  }
}

void save_csv(const std::filesystem::path& path, const PanelDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_csv(out, data);
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace hpanel
