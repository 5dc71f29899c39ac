#include "fsdea/panel.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace fsdea {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_cell(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

bool is_missing_token(const std::string& s) {
  return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan";
}
}  // namespace

std::string role_name(VariableRole role) {
  switch (role) {
    case VariableRole::InitialInput: return "initial-input";
    case VariableRole::FinalOutput: return "final-output";
    case VariableRole::IntermediateOutput: return "intermediate-output";
    case VariableRole::ExternalInput: return "external-input";
    case VariableRole::RegressionDependent: return "regression-dependent";
    case VariableRole::RegressionExplanatory: return "regression-explanatory";
    case VariableRole::RegressionControl: return "regression-control";
    case VariableRole::Identifier: return "identifier";
  }
  return "?";
}

VariableRole role_from_name(const std::string& name) {
  for (int r = 0; r <= static_cast<int>(VariableRole::Identifier); ++r) {
    const auto role = static_cast<VariableRole>(r);
    if (role_name(role) == name) return role;
  }
  throw SchemaError("unknown variable role: " + name);
}

std::string transform_name(Transform t) {
  switch (t) {
    case Transform::None: return "none";
    case Transform::Log: return "log";
    case Transform::DivideBy100: return "divide-by-100";
    case Transform::Ratio: return "ratio";
  }
  return "?";
}

Transform transform_from_name(const std::string& name) {
  for (int t = 0; t <= static_cast<int>(Transform::Ratio); ++t) {
    const auto tr = static_cast<Transform>(t);
    if (transform_name(tr) == name) return tr;
  }
  throw SchemaError("unknown transform: " + name);
}

bool is_dea_role(VariableRole role) {
  return role == VariableRole::InitialInput || role == VariableRole::FinalOutput ||
         role == VariableRole::IntermediateOutput ||
         role == VariableRole::ExternalInput;
}

VariableDictionary VariableDictionary::builtin_default() {
  VariableDictionary d;
  auto put = [&](const std::string& n, VariableRole r, Transform t,
                 const std::string& desc) { d.entries[n] = {r, t, desc}; };
  // Regression block.
  put("FSI", VariableRole::RegressionDependent, Transform::None,
      "financial sustainability index");
  put("FTI", VariableRole::RegressionExplanatory, Transform::DivideBy100,
      "digital financial inclusion index / 100");
  put("GDP_g", VariableRole::RegressionControl, Transform::Ratio, "GDP growth rate");
  put("FDL", VariableRole::RegressionControl, Transform::Ratio,
      "deposits+loans over local GDP");
  put("LDR", VariableRole::RegressionControl, Transform::Ratio, "loan-to-deposit ratio");
  put("NIIR", VariableRole::RegressionControl, Transform::Ratio,
      "non-interest income ratio");
  put("ROA", VariableRole::RegressionControl, Transform::Ratio, "return on assets");
  put("DAR", VariableRole::RegressionControl, Transform::Ratio, "debt-to-asset ratio");
  put("TAS", VariableRole::RegressionControl, Transform::Log, "log total assets");
  put("OEX", VariableRole::RegressionControl, Transform::Log, "log operating expenses");
  put("CAR", VariableRole::RegressionControl, Transform::Ratio, "capital adequacy ratio");
  put("IV2", VariableRole::RegressionControl, Transform::None,
      "spillover instrument (precomputed)");
  put("listed", VariableRole::RegressionControl, Transform::None,
      "listing flag for subsample splits");
  // Columns written back by the index pipeline.
  put("EC", VariableRole::RegressionControl, Transform::None, "efficiency change");
  put("TC", VariableRole::RegressionControl, Transform::None, "technical change");
  put("MI_d", VariableRole::RegressionControl, Transform::None, "deposit-stage index");
  put("MI_l", VariableRole::RegressionControl, Transform::None, "loan-stage index");
  put("MI_p", VariableRole::RegressionControl, Transform::None,
      "profitability-stage index");
  put("fsi_ok", VariableRole::RegressionControl, Transform::None,
      "solver status flag for the index row");
  // DEA block (default three-stage layout).
  put("salary_pe", VariableRole::InitialInput, Transform::None, "salary per employee");
  put("capex", VariableRole::InitialInput, Transform::None, "capital expenditures");
  put("equity", VariableRole::InitialInput, Transform::None, "shareholders' equity");
  put("roe", VariableRole::FinalOutput, Transform::None, "return on equity");
  put("deposits", VariableRole::IntermediateOutput, Transform::None, "total deposits");
  put("cash_ops", VariableRole::IntermediateOutput, Transform::None,
      "cash from operations");
  put("total_assets", VariableRole::ExternalInput, Transform::None, "total assets");
  put("roa", VariableRole::FinalOutput, Transform::None, "return on assets (stage)");
  put("net_loans", VariableRole::IntermediateOutput, Transform::None, "net loans");
  put("net_interest_income", VariableRole::IntermediateOutput, Transform::None,
      "net interest income");
  put("fixed_assets", VariableRole::ExternalInput, Transform::None,
      "external input to the profitability stage");
  put("revenue_pe", VariableRole::FinalOutput, Transform::None, "revenue per employee");
  put("total_revenue", VariableRole::FinalOutput, Transform::None, "total revenue");
  put("net_profit_margin", VariableRole::FinalOutput, Transform::None,
      "net profit margin");
  return d;
}

VariableDictionary VariableDictionary::from_json(const nlohmann::json& j) {
  VariableDictionary d;
  for (auto it = j.begin(); it != j.end(); ++it) {
    DictEntry e;
    e.role = role_from_name(it.value().at("role").get<std::string>());
    if (it.value().contains("transform"))
      e.transform = transform_from_name(it.value()["transform"].get<std::string>());
    if (it.value().contains("description"))
      e.description = it.value()["description"].get<std::string>();
    d.entries[it.key()] = e;
  }
  return d;
}

VariableDictionary VariableDictionary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dictionary file: " + path);
  nlohmann::json j;
  in >> j;
  return from_json(j);
}

nlohmann::json VariableDictionary::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, e] : entries) {
    j[name] = {{"role", role_name(e.role)},
               {"transform", transform_name(e.transform)},
               {"description", e.description}};
  }
  return j;
}

Panel::Panel(std::vector<std::string> units, std::vector<int> periods)
    : units_(std::move(units)), periods_(std::move(periods)) {
  for (size_t i = 1; i < periods_.size(); ++i) {
    if (periods_[i] <= periods_[i - 1])
      throw SchemaError("period labels must be strictly increasing");
  }
}

int Panel::unit_index(const std::string& unit) const {
  auto it = std::find(units_.begin(), units_.end(), unit);
  return it == units_.end() ? -1 : static_cast<int>(it - units_.begin());
}

int Panel::period_index(int period) const {
  auto it = std::find(periods_.begin(), periods_.end(), period);
  return it == periods_.end() ? -1 : static_cast<int>(it - periods_.begin());
}

int Panel::column_index(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  return it == names_.end() ? -1 : static_cast<int>(it - names_.begin());
}

int Panel::require_column(const std::string& name) const {
  const int c = column_index(name);
  if (c < 0) throw SchemaError("column not present in panel: " + name);
  return c;
}

int Panel::add_column(const std::string& name, VariableRole role) {
  if (column_index(name) >= 0) throw SchemaError("duplicate column: " + name);
  names_.push_back(name);
  roles_.push_back(role);
  data_.emplace_back(static_cast<size_t>(n_rows()), kNaN);
  return n_columns() - 1;
}

Panel Panel::subset_periods(const std::vector<int>& periods) const {
  Panel out(units_, periods);
  for (int c = 0; c < n_columns(); ++c) {
    out.add_column(names_[c], roles_[c]);
    for (int u = 0; u < n_units(); ++u) {
      for (size_t pi = 0; pi < periods.size(); ++pi) {
        const int src = period_index(periods[pi]);
        if (src < 0) throw SchemaError("period not in panel");
        out.set(c, u, static_cast<int>(pi), value(c, u, src));
      }
    }
  }
  out.metadata = metadata;
  return out;
}

Panel parse_panel_csv(const std::string& text, const VariableDictionary& dictionary) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty input");
  const auto header = split_csv_line(line);
  int unit_col = -1, period_col = -1;
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "unit") unit_col = static_cast<int>(i);
    if (header[i] == "period") period_col = static_cast<int>(i);
  }
  if (unit_col < 0) throw SchemaError("missing mandatory column: unit");
  if (period_col < 0) throw SchemaError("missing mandatory column: period");

  std::vector<int> data_cols;
  std::vector<DictEntry> data_entries;
  for (size_t i = 0; i < header.size(); ++i) {
    if (static_cast<int>(i) == unit_col || static_cast<int>(i) == period_col) continue;
    auto it = dictionary.entries.find(header[i]);
    if (it == dictionary.entries.end())
      throw SchemaError("column not in variable dictionary: " + header[i]);
    data_cols.push_back(static_cast<int>(i));
    data_entries.push_back(it->second);
  }

  struct Row {
    std::string unit;
    int period;
    std::vector<double> cells;
  };
  std::vector<Row> rows;
  std::vector<std::string> units;
  std::set<int> period_set;
  std::set<std::pair<std::string, int>> seen;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw ParseError("row " + std::to_string(lineno) + ": expected " +
                       std::to_string(header.size()) + " cells, got " +
                       std::to_string(cells.size()));
    Row row;
    row.unit = cells[unit_col];
    try {
      row.period = std::stoi(cells[period_col]);
    } catch (const std::exception&) {
      throw ParseError("row " + std::to_string(lineno) + ", column period: not an integer");
    }
    if (!seen.insert({row.unit, row.period}).second)
      throw DuplicateKeyError("duplicate (unit, period) key: " + row.unit + ", " +
                              std::to_string(row.period));
    if (std::find(units.begin(), units.end(), row.unit) == units.end())
      units.push_back(row.unit);
    period_set.insert(row.period);
    for (size_t k = 0; k < data_cols.size(); ++k) {
      const std::string& tok = cells[data_cols[k]];
      if (is_missing_token(tok)) {
        row.cells.push_back(kNaN);
        continue;
      }
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0')
        throw ParseError("row " + std::to_string(lineno) + ", column " +
                         header[data_cols[k]] + ": not numeric: " + tok);
      double x = v;
      switch (data_entries[k].transform) {
        case Transform::None:
        case Transform::Ratio:
          break;
        case Transform::Log:
          if (x <= 0.0)
            throw ParseError("row " + std::to_string(lineno) + ", column " +
                             header[data_cols[k]] + ": log of non-positive value");
          x = std::log(x);
          break;
        case Transform::DivideBy100:
          x /= 100.0;
          break;
      }
      row.cells.push_back(x);
    }
    rows.push_back(std::move(row));
  }

  Panel panel(units, std::vector<int>(period_set.begin(), period_set.end()));
  for (size_t k = 0; k < data_cols.size(); ++k)
    panel.add_column(header[data_cols[k]], data_entries[k].role);
  for (const auto& row : rows) {
    const int u = panel.unit_index(row.unit);
    const int t = panel.period_index(row.period);
    for (size_t k = 0; k < row.cells.size(); ++k)
      panel.set(static_cast<int>(k), u, t, row.cells[k]);
  }
  return panel;
}

Panel load_panel(const std::string& path, const VariableDictionary& dictionary) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open panel file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_panel_csv(buf.str(), dictionary);
}

std::string panel_to_csv(const Panel& panel) {
  std::ostringstream out;
  out << "unit,period";
  for (const auto& n : panel.column_names()) out << ',' << n;
  out << '\n';
  for (int u = 0; u < panel.n_units(); ++u) {
    for (int t = 0; t < panel.n_periods(); ++t) {
      out << panel.units()[u] << ',' << panel.periods()[t];
      for (int c = 0; c < panel.n_columns(); ++c)
        out << ',' << format_cell(panel.value(c, u, t));
      out << '\n';
    }
  }
  return out.str();
}

void write_panel(const Panel& panel, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << panel_to_csv(panel);
}

std::string panel_to_csv_raw(const Panel& panel, const VariableDictionary& dictionary) {
  std::vector<Transform> transforms(panel.n_columns(), Transform::None);
  for (int c = 0; c < panel.n_columns(); ++c) {
    const auto it = dictionary.entries.find(panel.column_names()[c]);
    if (it != dictionary.entries.end()) transforms[c] = it->second.transform;
  }
  std::ostringstream out;
  out << "unit,period";
  for (const auto& n : panel.column_names()) out << ',' << n;
  out << '\n';
  for (int u = 0; u < panel.n_units(); ++u) {
    for (int t = 0; t < panel.n_periods(); ++t) {
      out << panel.units()[u] << ',' << panel.periods()[t];
      for (int c = 0; c < panel.n_columns(); ++c) {
        double x = panel.value(c, u, t);
        switch (transforms[c]) {
          case Transform::None:
          case Transform::Ratio:
            break;
          case Transform::Log:
            x = std::exp(x);
            break;
          case Transform::DivideBy100:
            x *= 100.0;
            break;
        }
        out << ',' << format_cell(x);
      }
      out << '\n';
    }
  }
  return out.str();
}

void write_panel_raw(const Panel& panel, const VariableDictionary& dictionary,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << panel_to_csv_raw(panel, dictionary);
}

bool ValidationReport::dea_ready() const {
  for (const auto& i : issues)
    if (i.kind.rfind("dea-", 0) == 0) return false;
  return true;
}

int ValidationReport::count(const std::string& kind) const {
  int n = 0;
  for (const auto& i : issues)
    if (i.kind == kind) ++n;
  return n;
}

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& i : issues)
    arr.push_back({{"kind", i.kind},
                   {"unit", i.unit},
                   {"period", i.period},
                   {"column", i.column}});
  return {{"issues", arr}, {"dea_ready", dea_ready()}};
}

ValidationReport validate_panel(const Panel& panel,
                                const std::vector<std::string>& dea_columns) {
  ValidationReport report;
  std::vector<int> dea_idx;
  for (const auto& name : dea_columns) dea_idx.push_back(panel.require_column(name));

  for (int u = 0; u < panel.n_units(); ++u) {
    for (int t = 0; t < panel.n_periods(); ++t) {
      bool drop = false;
      for (int c : dea_idx) {
        if (panel.is_missing(c, u, t)) {
          report.issues.push_back({"dea-missing", panel.units()[u],
                                   panel.periods()[t], panel.column_names()[c]});
          drop = true;
        } else if (panel.value(c, u, t) <= 0.0) {
          report.issues.push_back({"dea-nonpositive", panel.units()[u],
                                   panel.periods()[t], panel.column_names()[c]});
          drop = true;
        }
      }
      if (drop)
        report.issues.push_back(
            {"dea-drop", panel.units()[u], panel.periods()[t], ""});
      for (int c = 0; c < panel.n_columns(); ++c) {
        if (is_dea_role(panel.role(c))) continue;
        if (panel.is_missing(c, u, t))
          report.issues.push_back({"regression-missing", panel.units()[u],
                                   panel.periods()[t], panel.column_names()[c]});
      }
    }
  }
  return report;
}

Panel shift_normalize(const Panel& panel, const std::vector<std::string>& columns,
                      double floor, std::vector<ShiftRecord>* applied) {
  if (!(floor > 0.0 && floor < 1.0))
    throw ConfigError("shift_normalize floor must lie in (0, 1)");
  Panel out = panel;
  for (const auto& name : columns) {
    const int c = out.require_column(name);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int u = 0; u < out.n_units(); ++u)
      for (int t = 0; t < out.n_periods(); ++t)
        if (!out.is_missing(c, u, t)) {
          lo = std::min(lo, out.value(c, u, t));
          hi = std::max(hi, out.value(c, u, t));
        }
    if (!(lo < hi)) throw DegenerateColumnError("constant column: " + name);
    if (lo > 0.0 && lo / hi >= floor) continue;  // already positive enough
    // Solve (lo + s) = floor * (hi + s).
    const double s = (floor * hi - lo) / (1.0 - floor);
    for (int u = 0; u < out.n_units(); ++u)
      for (int t = 0; t < out.n_periods(); ++t)
        if (!out.is_missing(c, u, t))
          out.set(c, u, t, out.value(c, u, t) + s);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", s);
    out.metadata["shift:" + name] = buf;
    if (applied) applied->push_back({name, s});
  }
  return out;
}

}  // namespace fsdea
