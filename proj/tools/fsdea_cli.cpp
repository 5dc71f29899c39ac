// Pipeline driver: validate -> DEA/Malmquist -> FSI panel -> regressions.
#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fsdea/econ.hpp"
#include "fsdea/malmquist.hpp"
#include "fsdea/netdea.hpp"
#include "fsdea/panel.hpp"
#include "fsdea/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fsdea;

namespace {

// Exit-code contract.
constexpr int kOk = 0;
constexpr int kValidationFailure = 1;
constexpr int kConfigError = 2;
constexpr int kPartialSolverFailure = 3;
constexpr int kEstimationFailure = 4;

void log_event(const std::string& event, json fields = json::object()) {
  fields["event"] = event;
  std::cerr << fields.dump() << "\n";
}

json default_config() {
  return json{
      {"input", "panel.csv"},
      {"network_spec", ""},
      {"stage3_external_input", "fixed_assets"},
      {"dictionary", ""},
      {"output_dir", "out"},
      {"options",
       {{"positivity_floor", 1e-6},
        {"feasibility_tol", 1e-8},
        {"optimality_tol", 1e-9},
        {"iteration_limit", 50000},
        {"shift_floor", 0.1},
        {"threads", 1},
        {"seed", 1}}},
      {"analyses",
       {{"baseline", true},
        {"iv", true},
        {"cf", true},
        {"mechanism", true},
        {"heterogeneity", true}}},
      {"regression",
       {{"dependent", "FSI"},
        {"explanatory", "FTI"},
        {"controls",
         json::array({"GDP_g", "FDL", "LDR", "NIIR", "ROA", "DAR", "TAS", "OEX",
                      "CAR"})},
        {"cluster", ""},
        {"iv_spillover", "IV2"},
        {"split_column", "TAS"},
        {"split_rule", "median"}}},
      {"simulate",
       {{"n_units", 20},
        {"n_periods", 4},
        {"first_period", 2015},
        {"noise_sigma", 0.1},
        {"fintech_effect", -0.5},
        {"endogeneity_rho", 0.0},
        {"instrument_strength", 1.0}}},
  };
}

void apply_override(json& cfg, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override must look like key=value: " + kv);
  std::string path = kv.substr(0, eq);
  const std::string value = kv.substr(eq + 1);
  json* node = &cfg;
  size_t pos = 0;
  while (true) {
    const auto dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot - pos);
    if (dot == std::string::npos) {
      json parsed = json::parse(value, nullptr, false);
      (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
      return;
    }
    node = &(*node)[key];
    pos = dot + 1;
  }
}

struct Loaded {
  Panel panel;
  NetworkSpec spec;
  VariableDictionary dict;
};

Loaded load_inputs(const json& cfg) {
  Loaded l;
  const std::string dict_path = cfg["dictionary"].get<std::string>();
  l.dict = dict_path.empty() ? VariableDictionary::builtin_default()
                             : VariableDictionary::load(dict_path);
  const std::string spec_path = cfg["network_spec"].get<std::string>();
  l.spec = spec_path.empty()
               ? NetworkSpec::three_stage_default(
                     cfg["stage3_external_input"].get<std::string>())
               : NetworkSpec::load(spec_path);
  l.panel = load_panel(cfg["input"].get<std::string>(), l.dict);
  return l;
}

FsiOptions fsi_options(const json& cfg) {
  const auto& o = cfg["options"];
  FsiOptions opt;
  opt.dea.positivity_floor = o["positivity_floor"].get<double>();
  opt.dea.lp.feasibility_tol = o["feasibility_tol"].get<double>();
  opt.dea.lp.optimality_tol = o["optimality_tol"].get<double>();
  opt.dea.lp.iteration_limit = o["iteration_limit"].get<int>();
  opt.dea.threads = o["threads"].get<int>();
  opt.shift_floor = o["shift_floor"].get<double>();
  return opt;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

int cmd_validate(const json& cfg) {
  const Loaded l = load_inputs(cfg);
  const auto report = validate_panel(l.panel, l.spec.all_columns());
  const fs::path dir(cfg["output_dir"].get<std::string>());
  fs::create_directories(dir);
  write_text(dir / "validation.json", report.to_json().dump(2) + "\n");
  log_event("validate", {{"issues", report.issues.size()},
                         {"dea_ready", report.dea_ready()}});
  std::cout << "validation: " << report.issues.size() << " issue(s), "
            << (report.dea_ready() ? "DEA-ready" : "not DEA-ready") << "\n";
  return report.dea_ready() ? kOk : kValidationFailure;
}

std::string fsi_csv(const Panel& p, int n_stages) {
  std::ostringstream out;
  const auto mi = stage_mi_names(n_stages);
  std::vector<std::string> cols = {"FSI", "EC", "TC"};
  cols.insert(cols.end(), mi.begin(), mi.end());
  cols.push_back("fsi_ok");
  out << "unit,period";
  for (const auto& c : cols) out << ',' << c;
  out << '\n';
  char buf[32];
  for (int u = 0; u < p.n_units(); ++u)
    for (int t = 0; t < p.n_periods(); ++t) {
      out << p.units()[u] << ',' << p.periods()[t];
      for (const auto& c : cols) {
        const int ci = p.column_index(c);
        const double v = ci < 0 ? std::nan("") : p.value(ci, u, t);
        if (std::isnan(v)) {
          out << ',';
        } else {
          std::snprintf(buf, sizeof(buf), ",%.17g", v);
          out << buf;
        }
      }
      out << '\n';
    }
  return out.str();
}

int run_fsi(const json& cfg, FsiResult* out_result) {
  const Loaded l = load_inputs(cfg);
  FsiResult result = fsi_panel(l.panel, l.spec, fsi_options(cfg));
  const fs::path dir(cfg["output_dir"].get<std::string>());
  fs::create_directories(dir);
  write_text(dir / "fsi.csv", fsi_csv(result.panel, l.spec.n_stages()));
  // Raw units so a reload through the same dictionary round-trips.
  write_panel_raw(result.panel, l.dict, (dir / "panel_fsi.csv").string());
  const int expected = static_cast<int>(result.records.size()) +
                       static_cast<int>(result.skipped.size());
  log_event("fsi", {{"solves", result.solves},
                    {"optimal", result.optimal},
                    {"scored", result.records.size()},
                    {"skipped", result.skipped.size()}});
  std::cout << "fsi: " << result.records.size() << " unit-pair(s) scored, "
            << result.skipped.size() << " skipped\n";
  if (out_result) *out_result = std::move(result);
  if (expected > 0 &&
      static_cast<double>(expected - static_cast<int>(out_result
                                                          ? out_result->records.size()
                                                          : result.records.size())) >
          0.1 * expected)
    return kPartialSolverFailure;
  return kOk;
}

int cmd_fsi(const json& cfg) { return run_fsi(cfg, nullptr); }

RegressionDesign base_design(const json& cfg) {
  const auto& r = cfg["regression"];
  RegressionDesign d;
  d.dependent = r["dependent"].get<std::string>();
  d.explanatory = {r["explanatory"].get<std::string>()};
  d.controls = r["controls"].get<std::vector<std::string>>();
  d.cluster = r["cluster"].get<std::string>();
  return d;
}

int cmd_regress(const json& cfg) {
  Loaded l = load_inputs(cfg);
  if (l.panel.column_index(cfg["regression"]["dependent"].get<std::string>()) < 0) {
    // No dependent column yet: run the DEA/Malmquist pass first.
    FsiResult r;
    const int rc = run_fsi(cfg, &r);
    if (rc != kOk && rc != kPartialSolverFailure) return rc;
    l.panel = r.panel;
  }
  const fs::path dir(cfg["output_dir"].get<std::string>());
  fs::create_directories(dir);
  const auto& analyses = cfg["analyses"];
  const auto& rcfg = cfg["regression"];
  bool any_failed = false;

  auto emit = [&](const std::string& name, const std::vector<std::string>& labels,
                  const std::vector<const FitResult*>& fits, json sidecar) {
    write_text(dir / (name + ".csv"), regression_table_csv(labels, fits));
    write_text(dir / (name + ".json"), sidecar.dump(2) + "\n");
    log_event("table", {{"name", name}});
  };
  auto guard = [&](const std::string& name, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      any_failed = true;
      log_event("table-error", {{"name", name}, {"error", e.what()}});
      std::cout << name << ": FAILED (" << e.what() << ")\n";
    }
  };

  const RegressionDesign design = base_design(cfg);

  if (analyses["baseline"].get<bool>()) {
    guard("baseline", [&] {
      RegressionDesign d1 = design;  // year FE only, no controls
      d1.controls.clear();
      d1.unit_effect = false;
      RegressionDesign d2 = design;  // both FE, no controls
      d2.controls.clear();
      RegressionDesign d3 = design;  // year FE only, controls
      d3.unit_effect = false;
      const FitResult f1 = fit_twfe(d1, l.panel);
      const FitResult f2 = fit_twfe(d2, l.panel);
      const FitResult f3 = fit_twfe(d3, l.panel);
      const FitResult f4 = fit_twfe(design, l.panel);
      emit("baseline", {"(1)", "(2)", "(3)", "(4)"}, {&f1, &f2, &f3, &f4},
           json{{"(1)", f1.to_json()},
                {"(2)", f2.to_json()},
                {"(3)", f3.to_json()},
                {"(4)", f4.to_json()}});
    });
  }

  InstrumentSpec iv;
  iv.spillover = rcfg["iv_spillover"].get<std::string>();

  if (analyses["iv"].get<bool>()) {
    guard("iv", [&] {
      const IvFit f = fit_2sls(design, iv, l.panel);
      json sidecar{{"first_stage", f.first_stage.to_json()},
                   {"second_stage", f.second_stage.to_json()},
                   {"diagnostics", f.diagnostics.to_json()}};
      emit("iv", {"first", "second"}, {&f.first_stage, &f.second_stage}, sidecar);
    });
  }
  if (analyses["cf"].get<bool>()) {
    guard("cf", [&] {
      const ControlFunctionFit f = fit_control_function(design, iv, l.panel);
      json sidecar{{"first_stage", f.first_stage.to_json()},
                   {"second_stage", f.second_stage.to_json()},
                   {"lambda",
                    {{"coef", f.lambda},
                     {"se", f.lambda_se},
                     {"t", f.lambda_t},
                     {"p", f.lambda_p}}}};
      emit("cf", {"first", "second"}, {&f.first_stage, &f.second_stage}, sidecar);
    });
  }
  if (analyses["mechanism"].get<bool>()) {
    guard("mechanism", [&] {
      std::vector<std::string> labels;
      std::vector<MechanismFit> fits;
      json sidecar = json::object();
      for (const auto& channel : stage_mi_names(l.spec.n_stages())) {
        if (l.panel.column_index(channel) < 0)
          throw EstimationError("channel column missing: " + channel);
        fits.push_back(mechanism_two_stage(l.panel, channel, design));
        labels.push_back(channel);
        sidecar[channel] = {{"first", fits.back().first.to_json()},
                            {"second", fits.back().second.to_json()}};
      }
      std::vector<const FitResult*> seconds;
      for (const auto& f : fits) seconds.push_back(&f.second);
      emit("mechanism", labels, seconds, sidecar);
    });
  }
  if (analyses["heterogeneity"].get<bool>()) {
    guard("heterogeneity", [&] {
      SplitCriterion crit{rcfg["split_column"].get<std::string>(),
                          rcfg["split_rule"].get<std::string>()};
      const SplitFit f = heterogeneity_split(l.panel, crit, design);
      emit("heterogeneity", {"above", "below"}, {&f.above, &f.below},
           json{{"above", f.above.to_json()}, {"below", f.below.to_json()}});
    });
  }
  return any_failed ? kEstimationFailure : kOk;
}

int cmd_simulate(const json& cfg) {
  const auto& s = cfg["simulate"];
  DgpConfig dgp;
  dgp.n_units = s["n_units"].get<int>();
  dgp.n_periods = s["n_periods"].get<int>();
  dgp.first_period = s["first_period"].get<int>();
  dgp.seed = cfg["options"]["seed"].get<uint64_t>();
  dgp.noise_sigma = s["noise_sigma"].get<double>();
  dgp.fintech_effect = s["fintech_effect"].get<double>();
  dgp.endogeneity_rho = s["endogeneity_rho"].get<double>();
  dgp.instrument_strength = s["instrument_strength"].get<double>();
  const Panel panel = generate(dgp);
  const fs::path dir(cfg["output_dir"].get<std::string>());
  fs::create_directories(dir);
  const auto dict = VariableDictionary::builtin_default();
  write_panel_raw(panel, dict, (dir / "panel.csv").string());
  write_text(dir / "dictionary.json", dict.to_json().dump(2) + "\n");
  write_text(dir / "network_spec.json",
             NetworkSpec::three_stage_default("fixed_assets").to_json().dump(2) + "\n");
  write_text(dir / "truth.json", dgp.truth_json().dump(2) + "\n");
  log_event("simulate", {{"units", dgp.n_units}, {"periods", dgp.n_periods}});
  std::cout << "simulate: wrote " << (dir / "panel.csv").string() << "\n";
  return kOk;
}

int cmd_all(const json& cfg) {
  const int v = cmd_validate(cfg);
  if (v != kOk) return v;
  FsiResult result;
  const int f = run_fsi(cfg, &result);
  if (f != kOk && f != kPartialSolverFailure) return f;
  json cfg2 = cfg;
  const fs::path dir(cfg["output_dir"].get<std::string>());
  cfg2["input"] = (dir / "panel_fsi.csv").string();
  const int r = cmd_regress(cfg2);
  if (r != kOk) return r;
  return f;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-stage financial sustainability efficiency pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--set", overrides, "Override a config entry, e.g. options.seed=7");

  auto* c_validate = app.add_subcommand("validate", "Check DEA readiness");
  auto* c_fsi = app.add_subcommand("fsi", "Compute the FSI panel");
  auto* c_regress = app.add_subcommand("regress", "Run the regression suite");
  auto* c_simulate = app.add_subcommand("simulate", "Generate a synthetic panel");
  auto* c_all = app.add_subcommand("all", "validate + fsi + regress");

  CLI11_PARSE(app, argc, argv);

  json cfg = default_config();
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("cannot open config: " + config_path);
      json user;
      in >> user;
      cfg.merge_patch(user);
    }
    for (const auto& kv : overrides) apply_override(cfg, kv);

    if (c_validate->parsed()) return cmd_validate(cfg);
    if (c_fsi->parsed()) return cmd_fsi(cfg);
    if (c_regress->parsed()) return cmd_regress(cfg);
    if (c_simulate->parsed()) return cmd_simulate(cfg);
    if (c_all->parsed()) return cmd_all(cfg);
  } catch (const ConfigError& e) {
    log_event("config-error", {{"error", e.what()}});
    std::cout << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const EstimationError& e) {
    log_event("estimation-error", {{"error", e.what()}});
    std::cout << "estimation error: " << e.what() << "\n";
    return kEstimationFailure;
  } catch (const std::exception& e) {
    log_event("error", {{"error", e.what()}});
    std::cout << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kOk;
}
