#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fsdea/econ.hpp"
#include "fsdea/netdea.hpp"
#include "fsdea/synth.hpp"

using namespace fsdea;

namespace {

RegressionDesign full_design() {
  RegressionDesign d;
  d.dependent = "FSI";
  d.explanatory = {"FTI"};
  d.controls = {"GDP_g", "FDL", "LDR", "NIIR", "ROA", "DAR", "TAS", "OEX", "CAR"};
  return d;
}

}  // namespace

TEST_CASE("config validation") {
  DgpConfig c;
  CHECK_NOTHROW(c.check());
  c.n_units = 2;
  CHECK_THROWS_AS(c.check(), ConfigError);
  c = DgpConfig{};
  c.endogeneity_rho = 1.5;
  CHECK_THROWS_AS(c.check(), ConfigError);
  c = DgpConfig{};
  c.noise_sigma = -0.1;
  CHECK_THROWS_AS(c.check(), ConfigError);
}

TEST_CASE("generation is deterministic for a fixed seed") {
  DgpConfig c;
  c.n_units = 12;
  c.n_periods = 4;
  c.seed = 99;
  const std::string a = panel_to_csv(generate(c));
  const std::string b = panel_to_csv(generate(c));
  CHECK(a == b);
  c.seed = 100;
  CHECK(panel_to_csv(generate(c)) != a);
}

TEST_CASE("generated panels are DEA-ready") {
  DgpConfig c;
  c.n_units = 20;
  c.n_periods = 5;
  c.seed = 7;
  const Panel p = generate(c);
  CHECK(p.n_rows() == 100);
  const auto spec = NetworkSpec::three_stage_default("fixed_assets");
  const auto report = validate_panel(p, spec.all_columns());
  CHECK(report.dea_ready());
  CHECK(report.count("dea-nonpositive") == 0);
  CHECK(report.count("dea-missing") == 0);
}

TEST_CASE("designated frontier unit is efficient every period") {
  DgpConfig c;
  c.n_units = 15;
  c.n_periods = 3;
  c.seed = 5;
  c.noise_sigma = 0.0;
  const Panel p = generate(c);
  const auto spec = NetworkSpec::three_stage_default("fixed_assets");
  for (int t : p.periods()) {
    const auto recs = evaluate_period(spec, p, t, t);
    bool found = false;
    for (const auto& r : recs)
      if (r.dmu == "B001") {
        found = true;
        REQUIRE(r.status == LpStatus::Optimal);
        CHECK(r.theta > 1.0 - 1e-5);
        CHECK(r.theta <= 1.0 + 1e-8);
      }
    CHECK(found);
  }
}

TEST_CASE("noise-free regression block is exactly linear") {
  DgpConfig c;
  c.n_units = 30;
  c.n_periods = 5;
  c.seed = 17;
  c.noise_sigma = 0.0;
  const Panel p = generate(c);
  const FitResult fit = fit_twfe(full_design(), p);
  CHECK(std::fabs(fit.coef(0) - c.fintech_effect) < 1e-8);
  const auto truth = nlohmann::json::parse(p.metadata.at("truth"));
  for (const auto& [name, coef] : truth["controls"].items())
    CHECK(std::fabs(fit.coef(fit.index(name)) - coef.get<double>()) < 1e-8);
}

TEST_CASE("truth metadata round-trips the configuration") {
  DgpConfig c;
  c.n_units = 5;
  c.n_periods = 2;
  c.seed = 3;
  c.fintech_effect = -0.75;
  c.endogeneity_rho = 0.4;
  const Panel p = generate(c);
  const auto truth = nlohmann::json::parse(p.metadata.at("truth"));
  CHECK(truth["fintech_effect"].get<double>() == -0.75);
  CHECK(truth["endogeneity_rho"].get<double>() == 0.4);
  CHECK(truth["seed"].get<uint64_t>() == 3);
}

TEST_CASE("listed units can carry a distinct effect") {
  DgpConfig c;
  c.n_units = 40;
  c.n_periods = 5;
  c.seed = 23;
  c.noise_sigma = 0.0;
  c.fintech_effect = -0.5;
  c.fintech_effect_listed = -0.9;
  const Panel p = generate(c);
  const SplitFit f = heterogeneity_split(p, {"listed", "flag"}, full_design());
  CHECK(std::fabs(f.above.coef(0) + 0.9) < 1e-8);
  CHECK(std::fabs(f.below.coef(0) + 0.5) < 1e-8);
}

TEST_CASE("instrument and lag structure are informative") {
  DgpConfig c;
  c.n_units = 50;
  c.n_periods = 8;
  c.seed = 29;
  const Panel p = generate(c);
  InstrumentSpec iv;
  iv.spillover = "IV2";
  const IvFit f = fit_2sls(full_design(), iv, p);
  CHECK(f.diagnostics.kp_rk_wald_f > 10.0);
  CHECK(f.first_stage.coef(f.first_stage.index("IV2")) > 0.5);
}
