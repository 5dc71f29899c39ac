#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "fsdea/panel.hpp"

using namespace fsdea;

namespace {

Panel make_panel(const std::vector<std::string>& units, const std::vector<int>& periods,
                 const std::string& column, const std::vector<double>& values) {
  Panel p(units, periods);
  const int c = p.add_column(column, VariableRole::FinalOutput);
  int k = 0;
  for (size_t u = 0; u < units.size(); ++u)
    for (size_t t = 0; t < periods.size(); ++t) p.set(c, u, t, values[k++]);
  return p;
}

}  // namespace

TEST_CASE("builtin dictionary contains the regression block") {
  const auto d = VariableDictionary::builtin_default();
  for (const std::string name :
       {"FSI", "FTI", "GDP_g", "FDL", "LDR", "NIIR", "ROA", "DAR", "TAS", "OEX", "CAR"})
    CHECK(d.entries.count(name) == 1);
  CHECK(d.entries.at("FTI").transform == Transform::DivideBy100);
  CHECK(d.entries.at("TAS").transform == Transform::Log);
}

TEST_CASE("transforms applied at load") {
  const std::string csv =
      "unit,period,FTI,TAS\n"
      "B1,2015,277.69," + std::to_string(std::exp(20.0)) + "\n";
  const Panel p = parse_panel_csv(csv, VariableDictionary::builtin_default());
  CHECK(p.value(p.require_column("FTI"), 0, 0) == doctest::Approx(2.7769).epsilon(1e-12));
  CHECK(p.value(p.require_column("TAS"), 0, 0) == doctest::Approx(20.0).epsilon(1e-9));
}

TEST_CASE("full rectangular panel has n_units * n_periods rows") {
  std::ostringstream csv;
  csv << "unit,period,FSI\n";
  for (int u = 0; u < 104; ++u)
    for (int t = 0; t < 9; ++t)
      csv << "B" << u << ',' << 2015 + t << ',' << (u + t + 1) << '\n';
  const Panel p = parse_panel_csv(csv.str(), VariableDictionary::builtin_default());
  CHECK(p.n_rows() == 936);
  CHECK(p.n_units() == 104);
  CHECK(p.n_periods() == 9);
}

TEST_CASE("schema, duplicate and parse errors") {
  const auto dict = VariableDictionary::builtin_default();
  CHECK_THROWS_AS(parse_panel_csv("bank,period,FSI\nB1,2015,1\n", dict), SchemaError);
  CHECK_THROWS_AS(parse_panel_csv("unit,year,FSI\nB1,2015,1\n", dict), SchemaError);
  CHECK_THROWS_AS(parse_panel_csv("unit,period,mystery\nB1,2015,1\n", dict), SchemaError);
  CHECK_THROWS_AS(
      parse_panel_csv("unit,period,FSI\nB1,2015,1\nB1,2015,2\n", dict),
      DuplicateKeyError);
  try {
    parse_panel_csv("unit,period,FSI\nB1,2015,abc\n", dict);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 2") != std::string::npos);
    CHECK(msg.find("FSI") != std::string::npos);
  }
}

TEST_CASE("missing tokens become NaN, not errors") {
  const Panel p = parse_panel_csv("unit,period,FSI\nB1,2015,\nB1,2016,NA\nB1,2017,3\n",
                                  VariableDictionary::builtin_default());
  const int c = p.require_column("FSI");
  CHECK(p.is_missing(c, 0, 0));
  CHECK(p.is_missing(c, 0, 1));
  CHECK(p.value(c, 0, 2) == 3.0);
}

TEST_CASE("csv round-trip is cell-exact") {
  Panel p({"B1", "B2"}, {2015, 2016});
  const int c = p.add_column("FSI", VariableRole::RegressionDependent);
  p.set(c, 0, 0, 1.0 / 3.0);
  p.set(c, 0, 1, 2.7769);
  p.set(c, 1, 0, -1.5e-7);
  // B2@2016 left missing.
  const std::string text = panel_to_csv(p);
  const Panel q = parse_panel_csv(text, VariableDictionary::builtin_default());
  REQUIRE(q.n_rows() == p.n_rows());
  for (int u = 0; u < 2; ++u)
    for (int t = 0; t < 2; ++t) {
      if (p.is_missing(c, u, t))
        CHECK(q.is_missing(c, u, t));
      else
        CHECK(q.value(c, u, t) == p.value(c, u, t));
    }
  CHECK(panel_to_csv(q) == text);
}

TEST_CASE("validation flags non-positive and missing DEA cells") {
  Panel p({"B1", "B2"}, {2015});
  const int roe = p.add_column("roe", VariableRole::FinalOutput);
  p.set(roe, 0, 0, -0.2);
  p.set(roe, 1, 0, 0.1);
  const auto report = validate_panel(p, {"roe"});
  CHECK(report.count("dea-nonpositive") == 1);
  CHECK(report.count("dea-drop") == 1);
  CHECK_FALSE(report.dea_ready());
  CHECK(report.issues.front().unit == "B1");
  CHECK(report.issues.front().column == "roe");
}

TEST_CASE("clean panel produces an empty report") {
  const Panel p = make_panel({"B1", "B2"}, {2015, 2016}, "roe", {1, 2, 3, 4});
  const auto report = validate_panel(p, {"roe"});
  CHECK(report.issues.empty());
  CHECK(report.dea_ready());
}

TEST_CASE("regression-side missing cells are counted separately") {
  Panel p({"B1"}, {2015, 2016, 2017});
  const int roe = p.add_column("roe", VariableRole::FinalOutput);
  const int car = p.add_column("CAR", VariableRole::RegressionControl);
  for (int t = 0; t < 3; ++t) p.set(roe, 0, t, 1.0);
  p.set(car, 0, 0, 0.12);  // two CAR cells left missing
  const auto report = validate_panel(p, {"roe"});
  CHECK(report.count("regression-missing") == 2);
  CHECK(report.count("dea-missing") == 0);
  CHECK(report.dea_ready());
}

TEST_CASE("shift maps the minimum to floor times the maximum") {
  const Panel p = make_panel({"B1", "B2", "B3"}, {2015}, "roe", {-1, 0, 1});
  const Panel q = shift_normalize(p, {"roe"}, 0.1);
  const int c = q.require_column("roe");
  double lo = 1e300, hi = -1e300;
  for (int u = 0; u < 3; ++u) {
    lo = std::min(lo, q.value(c, u, 0));
    hi = std::max(hi, q.value(c, u, 0));
  }
  CHECK(lo > 0.0);
  CHECK(lo / hi == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("already-positive column is untouched") {
  const Panel p = make_panel({"B1", "B2"}, {2015}, "roe", {2.0, 10.0});
  const Panel q = shift_normalize(p, {"roe"}, 0.1);
  const int c = q.require_column("roe");
  CHECK(q.value(c, 0, 0) == 2.0);
  CHECK(q.value(c, 1, 0) == 10.0);
  CHECK(q.metadata.count("shift:roe") == 0);
}

TEST_CASE("shift solves the one-variable equation") {
  const Panel p = make_panel({"B1", "B2", "B3"}, {2015}, "roe", {-5, 5, 15});
  std::vector<ShiftRecord> applied;
  const Panel q = shift_normalize(p, {"roe"}, 0.1, &applied);
  REQUIRE(applied.size() == 1);
  // (floor*hi - lo)/(1 - floor) = (1.5 + 5)/0.9
  CHECK(applied[0].shift == doctest::Approx(65.0 / 9.0).epsilon(1e-12));
  const int c = q.require_column("roe");
  CHECK(q.value(c, 0, 0) == doctest::Approx(-5 + 65.0 / 9.0).epsilon(1e-12));
  CHECK(q.value(c, 2, 0) == doctest::Approx(15 + 65.0 / 9.0).epsilon(1e-12));
  CHECK(q.value(c, 0, 0) / q.value(c, 2, 0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(q.metadata.count("shift:roe") == 1);
}

TEST_CASE("shift preserves ordering and rejects constant columns") {
  const Panel p =
      make_panel({"B1", "B2", "B3", "B4"}, {2015}, "roe", {0.3, -2.0, 5.0, 1.0});
  const Panel q = shift_normalize(p, {"roe"}, 0.25);
  const int c = q.require_column("roe");
  CHECK(q.value(c, 1, 0) < q.value(c, 0, 0));
  CHECK(q.value(c, 0, 0) < q.value(c, 3, 0));
  CHECK(q.value(c, 3, 0) < q.value(c, 2, 0));

  const Panel flat = make_panel({"B1", "B2"}, {2015}, "roe", {-3, -3});
  CHECK_THROWS_AS(shift_normalize(flat, {"roe"}, 0.1), DegenerateColumnError);
}

TEST_CASE("period subsetting keeps units and columns") {
  const Panel p = make_panel({"B1", "B2"}, {2015, 2016, 2017}, "roe",
                             {1, 2, 3, 4, 5, 6});
  const Panel q = p.subset_periods({2016, 2017});
  CHECK(q.n_periods() == 2);
  const int c = q.require_column("roe");
  CHECK(q.value(c, 0, 0) == 2.0);
  CHECK(q.value(c, 1, 1) == 6.0);
}

TEST_CASE("dictionary json round-trip") {
  const auto d = VariableDictionary::builtin_default();
  const auto d2 = VariableDictionary::from_json(d.to_json());
  REQUIRE(d2.entries.size() == d.entries.size());
  for (const auto& [name, e] : d.entries) {
    CHECK(d2.entries.at(name).role == e.role);
    CHECK(d2.entries.at(name).transform == e.transform);
  }
}

TEST_CASE("determinism of repeated parsing") {
  const std::string csv = "unit,period,FSI,FTI\nB1,2015,1.5,200\nB2,2015,2.5,300\n";
  const auto d = VariableDictionary::builtin_default();
  CHECK(panel_to_csv(parse_panel_csv(csv, d)) == panel_to_csv(parse_panel_csv(csv, d)));
}
