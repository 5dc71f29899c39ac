#include "fsdea/synth.hpp"

#include <cmath>
#include <limits>

#include "fsdea/rng.hpp"

namespace fsdea {

namespace {
// True control coefficients of the FSI equation, fixed across configs.
constexpr int kNumControls = 9;
const char* kControlNames[kNumControls] = {"GDP_g", "FDL", "LDR", "NIIR", "ROA",
                                           "DAR",   "TAS", "OEX", "CAR"};
const double kControlCoefs[kNumControls] = {0.08, -0.05, 0.1,  -0.03, 0.12,
                                            -0.2, 0.05,  0.04, 0.02};
constexpr double kIntercept = 1.0;
}  // namespace

void DgpConfig::check() const {
  if (n_units < 3) throw ConfigError("DGP needs at least 3 units");
  if (n_periods < 1) throw ConfigError("DGP needs at least 1 period");
  if (noise_sigma < 0.0) throw ConfigError("noise sigma must be non-negative");
  if (endogeneity_rho < -1.0 || endogeneity_rho > 1.0)
    throw ConfigError("endogeneity rho must lie in [-1, 1]");
  if (!(inefficiency_min > 0.0 && inefficiency_min <= 1.0))
    throw ConfigError("inefficiency floor must lie in (0, 1]");
}

nlohmann::json DgpConfig::truth_json() const {
  nlohmann::json controls = nlohmann::json::object();
  for (int c = 0; c < kNumControls; ++c) controls[kControlNames[c]] = kControlCoefs[c];
  nlohmann::json j = {{"fintech_effect", fintech_effect},
                      {"intercept", kIntercept},
                      {"controls", controls},
                      {"endogeneity_rho", endogeneity_rho},
                      {"instrument_strength", instrument_strength},
                      {"fti_autocorr", fti_autocorr},
                      {"noise_sigma", noise_sigma},
                      {"frontier_growth", frontier_growth},
                      {"seed", seed}};
  if (!std::isnan(fintech_effect_listed))
    j["fintech_effect_listed"] = fintech_effect_listed;
  return j;
}

Panel generate(const DgpConfig& cfg) {
  cfg.check();
  const int N = cfg.n_units, T = cfg.n_periods;

  std::vector<std::string> units;
  for (int u = 0; u < N; ++u) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "B%03d", u + 1);
    units.push_back(buf);
  }
  std::vector<int> periods;
  for (int t = 0; t < T; ++t) periods.push_back(cfg.first_period + t);
  Panel panel(units, periods);

  const char* dea_inputs[] = {"salary_pe", "capex", "equity", "total_assets",
                              "fixed_assets"};
  const char* dea_outputs[] = {"roe",        "deposits",     "cash_ops",
                               "net_loans",  "net_interest_income",
                               "roa",        "revenue_pe",   "total_revenue",
                               "net_profit_margin"};
  const auto dict = VariableDictionary::builtin_default();
  auto add = [&](const std::string& name) {
    return panel.add_column(name, dict.entries.at(name).role);
  };
  std::vector<int> cin, cout_;
  for (const char* n : dea_inputs) cin.push_back(add(n));
  for (const char* n : dea_outputs) cout_.push_back(add(n));
  const int c_fsi = add("FSI");
  const int c_fti = add("FTI");
  std::vector<int> c_ctl;
  for (const char* n : kControlNames) c_ctl.push_back(add(n));
  const int c_iv2 = add("IV2");
  const int c_listed = add("listed");

  CounterRng rng(CounterRng::derive_seed(cfg.seed, 0x4445414eULL));

  // Unit-level structure.
  std::vector<double> ineff(N), alpha(N), listed(N);
  for (int u = 0; u < N; ++u) {
    ineff[u] = cfg.inefficiency_min + (1.0 - cfg.inefficiency_min) * rng.uniform();
    alpha[u] = 0.3 * rng.normal();
    listed[u] = rng.uniform() < 0.5 ? 1.0 : 0.0;
  }
  ineff[0] = 1.0;
  std::vector<double> tau(T);
  for (int t = 0; t < T; ++t) tau[t] = 0.1 * rng.normal();

  auto cd = [](double scale, std::initializer_list<double> xs,
               std::initializer_list<double> es) {
    double v = scale;
    auto e = es.begin();
    for (double x : xs) v *= std::pow(x, *e++);
    return v;
  };

  std::vector<double> fti_prev(N, 0.0);
  for (int t = 0; t < T; ++t) {
    const double tech = std::pow(1.0 + cfg.frontier_growth, t);
    for (int u = 0; u < N; ++u) {
      // Inputs.
      const double salary = std::exp(0.25 * rng.normal());
      const double capex = 2.0 * std::exp(0.25 * rng.normal());
      const double equity = 3.0 * std::exp(0.25 * rng.normal());
      const double ta = 10.0 * std::exp(0.25 * rng.normal());
      const double fa = 1.5 * std::exp(0.25 * rng.normal());
      const double f = ineff[u];
      auto noise = [&] { return std::exp(cfg.noise_sigma * rng.normal()); };

      // Stage 1: deposit production.
      const double deposits =
          cd(8.0 * tech, {salary, capex, equity}, {0.25, 0.25, 0.25}) * f * noise();
      const double cash = cd(2.0 * tech, {salary, capex, equity}, {0.3, 0.2, 0.2}) *
                          f * noise();
      const double roe = cd(0.15 * tech, {salary, capex, equity}, {0.2, 0.2, 0.3}) *
                         f * noise();
      // Stage 2: lending.
      const double loans =
          cd(5.0 * tech, {deposits, cash, ta}, {0.3, 0.15, 0.3}) * f * noise();
      const double nii = cd(1.0 * tech, {deposits, cash, ta}, {0.25, 0.2, 0.3}) * f *
                         noise();
      const double roa =
          cd(0.05 * tech, {deposits, cash, ta}, {0.2, 0.2, 0.25}) * f * noise();
      // Stage 3: profitability.
      const double rev_pe =
          cd(0.8 * tech, {loans, nii, fa}, {0.3, 0.2, 0.2}) * f * noise();
      const double rev = cd(4.0 * tech, {loans, nii, fa}, {0.35, 0.2, 0.2}) * f *
                         noise();
      const double npm =
          cd(0.2 * tech, {loans, nii, fa}, {0.2, 0.25, 0.2}) * f * noise();

      const double din[] = {salary, capex, equity, ta, fa};
      const double dout[] = {roe, deposits, cash, loans, nii, roa, rev_pe, rev, npm};
      for (int j = 0; j < 5; ++j) panel.set(cin[j], u, t, din[j]);
      for (int j = 0; j < 9; ++j) panel.set(cout_[j], u, t, dout[j]);

      // Regression block.
      const double z = rng.normal();  // spillover instrument
      const double v = rng.normal();  // FTI shock
      const double w = rng.normal();
      const double e = cfg.endogeneity_rho * v +
                       std::sqrt(1.0 - cfg.endogeneity_rho * cfg.endogeneity_rho) * w;
      const double fti = (t == 0 ? 1.5 : 0.5 + cfg.fti_autocorr * fti_prev[u]) +
                         cfg.instrument_strength * z + 0.5 * v;
      fti_prev[u] = fti;

      double fsi = kIntercept + alpha[u] + tau[t] + cfg.noise_sigma * e;
      const double beta = (!std::isnan(cfg.fintech_effect_listed) && listed[u] != 0.0)
                              ? cfg.fintech_effect_listed
                              : cfg.fintech_effect;
      fsi += beta * fti;
      for (int c = 0; c < kNumControls; ++c) {
        const double x = rng.normal();
        panel.set(c_ctl[c], u, t, x);
        fsi += kControlCoefs[c] * x;
      }
      panel.set(c_fsi, u, t, fsi);
      panel.set(c_fti, u, t, fti);
      panel.set(c_iv2, u, t, z);
      panel.set(c_listed, u, t, listed[u]);
    }
  }

  if (cfg.place_frontier_unit) {
    // Make unit 1 stage-wise dominant: strictly smallest inputs and largest
    // outputs each period, so every stage supports it with efficiency 1.
    for (int t = 0; t < T; ++t) {
      for (int c : cin) {
        double lo = std::numeric_limits<double>::infinity();
        for (int u = 1; u < N; ++u) lo = std::min(lo, panel.value(c, u, t));
        panel.set(c, 0, t, 0.9 * lo);
      }
      for (int c : cout_) {
        double hi = -std::numeric_limits<double>::infinity();
        for (int u = 1; u < N; ++u) hi = std::max(hi, panel.value(c, u, t));
        panel.set(c, 0, t, 1.1 * hi);
      }
    }
  }

  panel.metadata["truth"] = cfg.truth_json().dump();
  return panel;
}

}  // namespace fsdea
