#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fsdea/errors.hpp"

namespace fsdea {

enum class VariableRole {
  InitialInput,
  FinalOutput,
  IntermediateOutput,
  ExternalInput,
  RegressionDependent,
  RegressionExplanatory,
  RegressionControl,
  Identifier,
};

enum class Transform { None, Log, DivideBy100, Ratio };

std::string role_name(VariableRole role);
VariableRole role_from_name(const std::string& name);
std::string transform_name(Transform t);
Transform transform_from_name(const std::string& name);

bool is_dea_role(VariableRole role);

struct DictEntry {
  VariableRole role = VariableRole::RegressionControl;
  Transform transform = Transform::None;
  std::string description;
};

struct VariableDictionary {
  std::map<std::string, DictEntry> entries;

  /// The eleven regression variables of the built-in model plus the DEA
  /// stage variables used by the default network layout.
  static VariableDictionary builtin_default();
  static VariableDictionary from_json(const nlohmann::json& j);
  static VariableDictionary load(const std::string& path);
  nlohmann::json to_json() const;
};

/// Rectangular bank-by-year dataset. Missing cells are stored as NaN and
/// exposed through is_missing(); they are never imputed.
class Panel {
 public:
  Panel() = default;
  Panel(std::vector<std::string> units, std::vector<int> periods);

  int n_units() const { return static_cast<int>(units_.size()); }
  int n_periods() const { return static_cast<int>(periods_.size()); }
  int n_columns() const { return static_cast<int>(names_.size()); }
  int n_rows() const { return n_units() * n_periods(); }

  const std::vector<std::string>& units() const { return units_; }
  const std::vector<int>& periods() const { return periods_; }
  const std::vector<std::string>& column_names() const { return names_; }
  VariableRole role(int col) const { return roles_[col]; }

  int unit_index(const std::string& unit) const;
  int period_index(int period) const;
  /// -1 when absent.
  int column_index(const std::string& name) const;
  int require_column(const std::string& name) const;

  int add_column(const std::string& name, VariableRole role);

  double value(int col, int unit, int period) const {
    return data_[col][cell(unit, period)];
  }
  bool is_missing(int col, int unit, int period) const {
    return std::isnan(value(col, unit, period));
  }
  void set(int col, int unit, int period, double v) {
    data_[col][cell(unit, period)] = v;
  }

  const std::vector<double>& column(int col) const { return data_[col]; }

  /// New panel holding the given periods only (same units and columns).
  Panel subset_periods(const std::vector<int>& periods) const;

  std::map<std::string, std::string> metadata;

 private:
  int cell(int unit, int period) const { return unit * n_periods() + period; }

  std::vector<std::string> units_;
  std::vector<int> periods_;
  std::vector<std::string> names_;
  std::vector<VariableRole> roles_;
  std::vector<std::vector<double>> data_;
};

Panel load_panel(const std::string& path, const VariableDictionary& dictionary);
Panel parse_panel_csv(const std::string& text, const VariableDictionary& dictionary);
std::string panel_to_csv(const Panel& panel);
void write_panel(const Panel& panel, const std::string& path);

/// CSV in raw source units: inverts the dictionary transforms (exp for log
/// columns, x100 for divide-by-100 columns) so that reloading the file with
/// the same dictionary reproduces the in-memory model units.
std::string panel_to_csv_raw(const Panel& panel, const VariableDictionary& dictionary);
void write_panel_raw(const Panel& panel, const VariableDictionary& dictionary,
                     const std::string& path);

struct ValidationIssue {
  std::string kind;  // dea-missing | dea-nonpositive | dea-drop | regression-missing
  std::string unit;
  int period = 0;
  std::string column;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool dea_ready() const;
  int count(const std::string& kind) const;
  nlohmann::json to_json() const;
};

/// Checks every DEA-role column named in dea_columns for missing cells and
/// non-positive values, and derives the unit-periods that DEA evaluation
/// must drop. Regression-role columns are scanned for missing cells only.
ValidationReport validate_panel(const Panel& panel,
                                const std::vector<std::string>& dea_columns);

struct ShiftRecord {
  std::string column;
  double shift = 0.0;
};

/// Affine shift per listed column so that over the pooled non-missing cells
/// min = floor * max (after shifting) whenever the column is not already
/// positive with min/max >= floor. Ranks are preserved.
Panel shift_normalize(const Panel& panel, const std::vector<std::string>& columns,
                      double floor, std::vector<ShiftRecord>* applied = nullptr);

}  // namespace fsdea
