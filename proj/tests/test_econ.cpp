#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "fsdea/econ.hpp"
#include "fsdea/rng.hpp"

using namespace fsdea;

namespace {

// Random unbalanced panel with y = beta*x + unit effects + time effects + noise.
Panel random_panel(uint64_t seed, int n_units, int n_periods, double beta,
                   double missing_rate = 0.1, double sigma = 0.5) {
  CounterRng rng(seed);
  std::vector<std::string> units;
  std::vector<int> periods;
  for (int u = 0; u < n_units; ++u) units.push_back("U" + std::to_string(u));
  for (int t = 0; t < n_periods; ++t) periods.push_back(2015 + t);
  Panel p(units, periods);
  const int cy = p.add_column("FSI", VariableRole::RegressionDependent);
  const int cx = p.add_column("FTI", VariableRole::RegressionExplanatory);
  std::vector<double> alpha(n_units), tau(n_periods);
  for (auto& a : alpha) a = rng.normal();
  for (auto& t : tau) t = rng.normal();
  for (int u = 0; u < n_units; ++u)
    for (int t = 0; t < n_periods; ++t) {
      if (rng.uniform() < missing_rate && !(u == 0 && t == 0)) continue;
      const double x = rng.normal();
      p.set(cx, u, t, x);
      p.set(cy, u, t, beta * x + alpha[u] + tau[t] + sigma * rng.normal());
    }
  return p;
}

// Dummy-variable OLS oracle: regress y on [x, unit dummies, time dummies, 1].
double dummy_ols_coefficient(const Panel& p, const std::string& ycol,
                             const std::string& xcol) {
  const int cy = p.require_column(ycol);
  const int cx = p.require_column(xcol);
  std::vector<std::array<int, 2>> rows;
  for (int u = 0; u < p.n_units(); ++u)
    for (int t = 0; t < p.n_periods(); ++t)
      if (!p.is_missing(cy, u, t) && !p.is_missing(cx, u, t)) rows.push_back({u, t});
  const int n = static_cast<int>(rows.size());
  const int k = 1 + (p.n_units() - 1) + (p.n_periods() - 1) + 1;
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, k);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const auto [u, t] = rows[i];
    y(i) = p.value(cy, u, t);
    X(i, 0) = p.value(cx, u, t);
    if (u > 0) X(i, u) = 1.0;
    if (t > 0) X(i, p.n_units() - 1 + t) = 1.0;
    X(i, k - 1) = 1.0;
  }
  const Eigen::VectorXd b = X.colPivHouseholderQr().solve(y);
  return b(0);
}

RegressionDesign simple_design() {
  RegressionDesign d;
  d.dependent = "FSI";
  d.explanatory = {"FTI"};
  return d;
}

}  // namespace

TEST_CASE("design validation") {
  RegressionDesign d;
  CHECK_THROWS_AS(d.check(), ConfigError);
  d = simple_design();
  CHECK_NOTHROW(d.check());
  d.controls = {"FTI"};
  CHECK_THROWS_AS(d.check(), ConfigError);
}

TEST_CASE("within transform zeroes additive structures") {
  // Balanced 2x2 with purely additive cells.
  std::vector<int> unit = {0, 0, 1, 1};
  std::vector<int> period = {0, 1, 0, 1};
  Eigen::MatrixXd m(4, 1);
  m << 1, 2, 3, 4;
  within_transform(unit, period, m, true, true);
  CHECK(m.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("within transform matches the dummy regression") {
  for (uint64_t seed : {21, 22, 23}) {
    const Panel q = random_panel(seed, 10, 5, -0.7, 0.2);
    const FitResult fit = fit_twfe(simple_design(), q);
    const double oracle = dummy_ols_coefficient(q, "FSI", "FTI");
    CHECK(std::fabs(fit.coef(0) - oracle) < 1e-8);
  }
}

TEST_CASE("noise-free linear panel recovers the coefficient exactly") {
  const Panel p = random_panel(31, 8, 6, 2.0, 0.0, 0.0);
  const FitResult fit = fit_twfe(simple_design(), p);
  CHECK(std::fabs(fit.coef(0) - 2.0) < 1e-10);
  CHECK(fit.r2_within == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("CR1 equals HC1 with singleton clusters") {
  Panel p = random_panel(41, 12, 4, 0.8, 0.1);
  // A cluster id column with one distinct value per observed row.
  const int cid = p.add_column("CAR", VariableRole::RegressionControl);
  int next = 0;
  for (int u = 0; u < p.n_units(); ++u)
    for (int t = 0; t < p.n_periods(); ++t) p.set(cid, u, t, next++);
  RegressionDesign d = simple_design();
  d.cluster = "CAR";
  const FitResult fit = fit_twfe(d, p);

  // HC1 oracle on the same within-transformed sample.
  RegressionFrame f = build_frame(p, d);
  const int n = static_cast<int>(f.y.size());
  Eigen::MatrixXd all(n, 2);
  all.col(0) = f.y;
  all.col(1) = f.X.col(0);
  within_transform(f.unit, f.period, all, true, true);
  const Eigen::VectorXd y = all.col(0);
  const Eigen::MatrixXd X = all.rightCols(1);
  const Eigen::VectorXd b = (X.transpose() * X).ldlt().solve(X.transpose() * y);
  const Eigen::VectorXd e = y - X * b;
  const Eigen::MatrixXd bread = (X.transpose() * X).inverse();
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(1, 1);
  for (int i = 0; i < n; ++i)
    meat += X.row(i).transpose() * X.row(i) * e(i) * e(i);
  // HC1 factor N/(N-K) with K = 1.
  const Eigen::MatrixXd hc1_vcov =
      (static_cast<double>(n) / (n - 1.0)) * bread * meat * bread;
  CHECK(std::fabs(fit.vcov(0, 0) - hc1_vcov(0, 0)) < 1e-10);
}

TEST_CASE("collinear regressors are reported by name") {
  Panel p = random_panel(51, 8, 4, 1.0, 0.0);
  const int c = p.add_column("ROA", VariableRole::RegressionControl);
  const int cx = p.require_column("FTI");
  for (int u = 0; u < p.n_units(); ++u)
    for (int t = 0; t < p.n_periods(); ++t) p.set(c, u, t, 2.0 * p.value(cx, u, t));
  RegressionDesign d = simple_design();
  d.controls = {"ROA"};
  try {
    fit_twfe(d, p);
    FAIL("expected EstimationError");
  } catch (const EstimationError& e) {
    CHECK(std::string(e.what()).find("collinear") != std::string::npos);
  }
}

TEST_CASE("2sls reduces to ols when the instrument is the regressor") {
  Panel p = random_panel(61, 15, 6, -0.9, 0.0);
  const int iv2 = p.add_column("IV2", VariableRole::RegressionControl);
  const int cx = p.require_column("FTI");
  for (int u = 0; u < p.n_units(); ++u)
    for (int t = 0; t < p.n_periods(); ++t) p.set(iv2, u, t, p.value(cx, u, t));
  InstrumentSpec iv;
  iv.spillover = "IV2";
  const IvFit f = fit_2sls(simple_design(), iv, p);

  // OLS on the identical estimation sample: drop the first year, which the
  // lag instrument removes from the 2SLS frame.
  Panel q = p;
  const int cy = q.require_column("FSI");
  for (int u = 0; u < q.n_units(); ++u)
    q.set(cy, u, 0, std::numeric_limits<double>::quiet_NaN());
  const FitResult ols = fit_twfe(simple_design(), q);
  CHECK(f.second_stage.n_obs == ols.n_obs);
  CHECK(std::fabs(f.second_stage.coef(0) - ols.coef(0)) < 1e-10);
}

TEST_CASE("control function equals 2sls on the endogenous coefficient") {
  for (uint64_t seed : {71, 72}) {
    Panel p = random_panel(seed, 20, 6, -0.5, 0.05);
    CounterRng rng(seed + 500);
    const int iv2 = p.add_column("IV2", VariableRole::RegressionControl);
    const int cx = p.require_column("FTI");
    for (int u = 0; u < p.n_units(); ++u)
      for (int t = 0; t < p.n_periods(); ++t)
        if (!p.is_missing(cx, u, t))
          p.set(iv2, u, t, 0.8 * p.value(cx, u, t) + rng.normal());
    InstrumentSpec iv;
    iv.spillover = "IV2";
    const IvFit tsls = fit_2sls(simple_design(), iv, p);
    const ControlFunctionFit cf = fit_control_function(simple_design(), iv, p);
    CHECK(std::fabs(tsls.second_stage.coef(0) - cf.second_stage.coef(0)) < 1e-8);
    CHECK(cf.lambda == cf.second_stage.coef(cf.second_stage.index("first_stage_residual")));
  }
}

TEST_CASE("hansen j is exactly zero when just-identified") {
  Panel p = random_panel(81, 15, 6, -0.5, 0.0);
  InstrumentSpec iv;  // lag instrument only
  const IvFit f = fit_2sls(simple_design(), iv, p);
  CHECK(f.diagnostics.hansen_j == 0.0);
  CHECK(f.diagnostics.hansen_j_p == 1.0);
  CHECK_FALSE(f.diagnostics.stock_yogo_available);
}

TEST_CASE("hansen j is invariant to instrument rescaling") {
  Panel p = random_panel(91, 18, 6, -0.5, 0.0);
  CounterRng rng(991);
  const int iv2 = p.add_column("IV2", VariableRole::RegressionControl);
  const int cx = p.require_column("FTI");
  for (int u = 0; u < p.n_units(); ++u)
    for (int t = 0; t < p.n_periods(); ++t)
      p.set(iv2, u, t, 0.5 * p.value(cx, u, t) + rng.normal());
  InstrumentSpec iv;
  iv.spillover = "IV2";
  const IvFit a = fit_2sls(simple_design(), iv, p);
  for (int u = 0; u < p.n_units(); ++u)
    for (int t = 0; t < p.n_periods(); ++t) p.set(iv2, u, t, 13.0 * p.value(iv2, u, t));
  const IvFit b = fit_2sls(simple_design(), iv, p);
  CHECK(std::fabs(a.diagnostics.hansen_j - b.diagnostics.hansen_j) < 1e-9);
  CHECK(a.diagnostics.stock_yogo_available);
  CHECK(a.diagnostics.stock_yogo_10pct == 19.93);
}

TEST_CASE("vcov is symmetric and diagnostics finite") {
  Panel p = random_panel(101, 20, 5, -0.5, 0.05);
  CounterRng rng(1101);
  const int iv2 = p.add_column("IV2", VariableRole::RegressionControl);
  const int cx = p.require_column("FTI");
  for (int u = 0; u < p.n_units(); ++u)
    for (int t = 0; t < p.n_periods(); ++t)
      p.set(iv2, u, t, 0.7 * p.value(cx, u, t) + rng.normal());
  InstrumentSpec iv;
  iv.spillover = "IV2";
  const IvFit f = fit_2sls(simple_design(), iv, p);
  const auto& d = f.diagnostics;
  for (double v : {d.kp_rk_lm, d.cragg_donald_f, d.kp_rk_wald_f, d.hansen_j}) {
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
  }
  CHECK((f.second_stage.vcov - f.second_stage.vcov.transpose()).cwiseAbs().maxCoeff() <
        1e-10);
  const FitResult base = fit_twfe(simple_design(), p);
  CHECK((base.vcov - base.vcov.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(base.r2_within >= 0.0);
  CHECK(base.r2_within <= 1.0);
}

TEST_CASE("mechanism chain recovers an exact pass-through") {
  // channel = 3*FTI, FSI = 2*channel, no noise or effects.
  std::vector<std::string> units;
  for (int u = 0; u < 6; ++u) units.push_back("U" + std::to_string(u));
  Panel p(units, {2015, 2016, 2017});
  const int cy = p.add_column("FSI", VariableRole::RegressionDependent);
  const int cx = p.add_column("FTI", VariableRole::RegressionExplanatory);
  const int cm = p.add_column("MI_d", VariableRole::RegressionControl);
  CounterRng rng(7);
  for (int u = 0; u < 6; ++u)
    for (int t = 0; t < 3; ++t) {
      const double x = rng.normal();
      p.set(cx, u, t, x);
      p.set(cm, u, t, 3.0 * x);
      p.set(cy, u, t, 6.0 * x);
    }
  const MechanismFit f = mechanism_two_stage(p, "MI_d", simple_design());
  CHECK(std::fabs(f.first.coef(0) - 3.0) < 1e-8);
  CHECK(std::fabs(f.second.coef(0) - 2.0) < 1e-8);
  CHECK(f.second.names[0] == "predicted_MI_d");
}

TEST_CASE("median split divides distinct units evenly") {
  Panel p = random_panel(111, 10, 4, -0.5, 0.0);
  const int c = p.add_column("TAS", VariableRole::RegressionControl);
  for (int u = 0; u < 10; ++u)
    for (int t = 0; t < 4; ++t) p.set(c, u, t, static_cast<double>(u));
  const SplitFit f = heterogeneity_split(p, {"TAS", "median"}, simple_design());
  CHECK(f.above.n_clusters == 5);
  CHECK(f.below.n_clusters == 5);
  CHECK(f.above.n_obs + f.below.n_obs == f.above.n_obs * 2);
}

TEST_CASE("degenerate flag split raises an error") {
  Panel p = random_panel(121, 6, 4, -0.5, 0.0);
  const int c = p.add_column("listed", VariableRole::RegressionControl);
  for (int u = 0; u < 6; ++u)
    for (int t = 0; t < 4; ++t) p.set(c, u, t, 1.0);
  CHECK_THROWS_AS(heterogeneity_split(p, {"listed", "flag"}, simple_design()),
                  EstimationError);
}

TEST_CASE("table writer emits stacked rows and summary lines") {
  const Panel p = random_panel(131, 8, 5, 1.0, 0.0);
  const FitResult fit = fit_twfe(simple_design(), p);
  const std::string csv = regression_table_csv({"(1)"}, {&fit});
  CHECK(csv.find("term,(1)") == 0);
  CHECK(csv.find("FTI,") != std::string::npos);
  CHECK(csv.find(",(") != std::string::npos);  // standard error row
  CHECK(csv.find("Observations,") != std::string::npos);
  CHECK(csv.find("Clusters,") != std::string::npos);
  CHECK(csv.find("R2,") != std::string::npos);
  const auto j = fit.to_json();
  CHECK(j.contains("coefficients"));
  CHECK(j["coefficients"].contains("FTI"));
  CHECK(j["coefficients"]["FTI"].contains("stars"));
}
