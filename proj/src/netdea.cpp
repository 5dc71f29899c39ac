#include "fsdea/netdea.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <atomic>
#include <future>
#include <sstream>

namespace fsdea {

void NetworkSpec::validate() const {
  if (stages.empty()) throw SpecError("network needs at least one stage");
  if (stages.front().initial_inputs.empty())
    throw SpecError("stage 1 needs initial inputs");
  if (!stages.front().external_inputs.empty())
    throw SpecError("stage 1 takes initial inputs, not external inputs");
  for (size_t p = 1; p < stages.size(); ++p) {
    if (!stages[p].initial_inputs.empty())
      throw SpecError("initial inputs are allowed at stage 1 only");
    if (stages[p - 1].intermediate_outputs.empty() && stages[p].external_inputs.empty())
      throw SpecError("stage " + std::to_string(p + 1) + " has no inputs");
  }
  if (!stages.back().intermediate_outputs.empty())
    throw SpecError("the last stage cannot have intermediate outputs");
  for (size_t p = 0; p < stages.size(); ++p) {
    if (stages[p].final_outputs.empty() && stages[p].intermediate_outputs.empty())
      throw SpecError("stage " + std::to_string(p + 1) + " has no outputs");
  }
}

std::vector<std::string> NetworkSpec::all_columns() const {
  std::vector<std::string> out;
  for (const auto& s : stages) {
    for (const auto& c : s.initial_inputs) out.push_back(c);
    for (const auto& c : s.external_inputs) out.push_back(c);
    for (const auto& c : s.final_outputs) out.push_back(c);
    for (const auto& c : s.intermediate_outputs) out.push_back(c);
  }
  return out;
}

NetworkSpec NetworkSpec::three_stage_default(const std::string& stage3_external_input) {
  if (stage3_external_input.empty())
    throw ConfigError("the external input to stage 3 must be named explicitly");
  NetworkSpec spec;
  spec.stages.resize(3);
  spec.stages[0].initial_inputs = {"salary_pe", "capex", "equity"};
  spec.stages[0].final_outputs = {"roe"};
  spec.stages[0].intermediate_outputs = {"deposits", "cash_ops"};
  spec.stages[1].external_inputs = {"total_assets"};
  spec.stages[1].final_outputs = {"roa"};
  spec.stages[1].intermediate_outputs = {"net_loans", "net_interest_income"};
  spec.stages[2].external_inputs = {stage3_external_input};
  spec.stages[2].final_outputs = {"revenue_pe", "total_revenue", "net_profit_margin"};
  spec.validate();
  return spec;
}

NetworkSpec NetworkSpec::from_json(const nlohmann::json& j) {
  NetworkSpec spec;
  for (const auto& js : j.at("stages")) {
    StageSpec s;
    auto get = [&](const char* key, std::vector<std::string>& out) {
      if (js.contains(key)) out = js[key].get<std::vector<std::string>>();
    };
    get("initial_inputs", s.initial_inputs);
    get("final_outputs", s.final_outputs);
    get("intermediate_outputs", s.intermediate_outputs);
    get("external_inputs", s.external_inputs);
    spec.stages.push_back(std::move(s));
  }
  spec.validate();
  return spec;
}

NetworkSpec NetworkSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open network spec: " + path);
  nlohmann::json j;
  in >> j;
  return from_json(j);
}

nlohmann::json NetworkSpec::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : stages) {
    nlohmann::json js = nlohmann::json::object();
    if (!s.initial_inputs.empty()) js["initial_inputs"] = s.initial_inputs;
    if (!s.final_outputs.empty()) js["final_outputs"] = s.final_outputs;
    if (!s.intermediate_outputs.empty())
      js["intermediate_outputs"] = s.intermediate_outputs;
    if (!s.external_inputs.empty()) js["external_inputs"] = s.external_inputs;
    arr.push_back(js);
  }
  return {{"stages", arr}};
}

DmuObservation make_observation(const Panel& panel, const NetworkSpec& spec,
                                int unit, int period) {
  DmuObservation obs;
  obs.id = panel.units()[unit];
  auto fetch = [&](const std::string& name) {
    const int c = panel.require_column(name);
    const double v = panel.value(c, unit, period);
    if (!(v > 0.0) || !std::isfinite(v))
      throw PositivityError("non-positive DEA value at unit " + obs.id + ", period " +
                            std::to_string(panel.periods()[period]) + ", column " + name);
    return v;
  };
  for (const auto& n : spec.stages.front().initial_inputs)
    obs.initial_inputs.push_back(fetch(n));
  for (const auto& s : spec.stages) {
    StageData d;
    for (const auto& n : s.final_outputs) d.final_outputs.push_back(fetch(n));
    for (const auto& n : s.intermediate_outputs)
      d.intermediate_outputs.push_back(fetch(n));
    for (const auto& n : s.external_inputs) d.external_inputs.push_back(fetch(n));
    obs.stages.push_back(std::move(d));
  }
  return obs;
}

namespace {

void check_dims(const NetworkSpec& spec, const DmuObservation& obs) {
  if (obs.stages.size() != spec.stages.size() ||
      obs.initial_inputs.size() != spec.stages.front().initial_inputs.size())
    throw SpecError("observation does not match network spec");
  for (size_t p = 0; p < spec.stages.size(); ++p) {
    if (obs.stages[p].final_outputs.size() != spec.stages[p].final_outputs.size() ||
        obs.stages[p].intermediate_outputs.size() !=
            spec.stages[p].intermediate_outputs.size() ||
        obs.stages[p].external_inputs.size() != spec.stages[p].external_inputs.size())
      throw SpecError("observation does not match network spec");
  }
}

// Virtual input of stage p at the given multiplier values.
double stage_input(const AssembledLp& a, const std::vector<double>& v,
                   const DmuObservation& obs, int p) {
  double s = 0.0;
  if (p == 0) {
    for (size_t j = 0; j < a.nu0.size(); ++j)
      s += v[a.nu0[j]] * obs.initial_inputs[j];
    return s;
  }
  for (size_t k = 0; k < a.eta[p - 1].size(); ++k)
    s += v[a.eta[p - 1][k]] * obs.stages[p - 1].intermediate_outputs[k];
  for (size_t j = 0; j < a.nu[p].size(); ++j)
    s += v[a.nu[p][j]] * obs.stages[p].external_inputs[j];
  return s;
}

double stage_output(const AssembledLp& a, const std::vector<double>& v,
                    const DmuObservation& obs, int p, bool with_eps) {
  double s = 0.0;
  for (size_t r = 0; r < a.u[p].size(); ++r)
    s += v[a.u[p][r]] * obs.stages[p].final_outputs[r];
  for (size_t k = 0; k < a.eta[p].size(); ++k)
    s += v[a.eta[p][k]] * obs.stages[p].intermediate_outputs[k];
  if (with_eps) s += v[a.eps[p]];
  return s;
}

}  // namespace

AssembledLp assemble_lp(const NetworkSpec& spec,
                        const std::vector<DmuObservation>& frontier,
                        const DmuObservation& target, double positivity_floor) {
  spec.validate();
  if (frontier.empty()) throw SpecError("frontier set is empty");
  check_dims(spec, target);
  for (const auto& f : frontier) check_dims(spec, f);

  const int P = spec.n_stages();
  AssembledLp a;
  a.u.resize(P);
  a.eta.resize(P);
  a.nu.resize(P);
  a.eps.resize(P);
  char buf[48];

  for (size_t j = 0; j < spec.stages.front().initial_inputs.size(); ++j) {
    std::snprintf(buf, sizeof(buf), "nu0_%zu", j + 1);
    a.nu0.push_back(a.lp.add_variable(buf, positivity_floor, kInf));
  }
  for (int p = 0; p < P; ++p) {
    for (size_t r = 0; r < spec.stages[p].final_outputs.size(); ++r) {
      std::snprintf(buf, sizeof(buf), "u%d_%zu", p + 1, r + 1);
      a.u[p].push_back(a.lp.add_variable(buf, positivity_floor, kInf));
    }
    for (size_t k = 0; k < spec.stages[p].intermediate_outputs.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "eta%d_%zu", p + 1, k + 1);
      a.eta[p].push_back(a.lp.add_variable(buf, positivity_floor, kInf));
    }
    for (size_t j = 0; j < spec.stages[p].external_inputs.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "nu%d_%zu", p + 1, j + 1);
      a.nu[p].push_back(a.lp.add_variable(buf, positivity_floor, kInf));
    }
  }
  for (int p = 0; p < P; ++p) {
    std::snprintf(buf, sizeof(buf), "eps%d", p + 1);
    a.eps[p] = a.lp.add_variable(buf, -kInf, kInf);
  }

  // Objective: weighted outputs of the target across all stages.
  for (int p = 0; p < P; ++p) {
    for (size_t r = 0; r < a.u[p].size(); ++r)
      a.lp.set_objective(a.u[p][r], target.stages[p].final_outputs[r]);
    for (size_t k = 0; k < a.eta[p].size(); ++k)
      a.lp.set_objective(a.eta[p][k], target.stages[p].intermediate_outputs[k]);
    a.lp.set_objective(a.eps[p], 1.0);
  }

  // Normalization: the target's total virtual input equals one.
  const int norm = a.lp.add_constraint("NORM", Relation::Eq, 1.0);
  for (size_t j = 0; j < a.nu0.size(); ++j)
    a.lp.add_coeff(norm, a.nu0[j], target.initial_inputs[j]);
  for (int p = 1; p < P; ++p) {
    for (size_t k = 0; k < a.eta[p - 1].size(); ++k)
      a.lp.add_coeff(norm, a.eta[p - 1][k],
                     target.stages[p - 1].intermediate_outputs[k]);
    for (size_t j = 0; j < a.nu[p].size(); ++j)
      a.lp.add_coeff(norm, a.nu[p][j], target.stages[p].external_inputs[j]);
  }

  // Feasibility: stage output (with intercept) <= stage input, per frontier DMU.
  for (size_t i = 0; i < frontier.size(); ++i) {
    const auto& f = frontier[i];
    for (int p = 0; p < P; ++p) {
      std::snprintf(buf, sizeof(buf), "S%dD%zu", p + 1, i + 1);
      const int row = a.lp.add_constraint(buf, Relation::Le, 0.0);
      for (size_t r = 0; r < a.u[p].size(); ++r)
        a.lp.add_coeff(row, a.u[p][r], f.stages[p].final_outputs[r]);
      for (size_t k = 0; k < a.eta[p].size(); ++k)
        a.lp.add_coeff(row, a.eta[p][k], f.stages[p].intermediate_outputs[k]);
      a.lp.add_coeff(row, a.eps[p], 1.0);
      if (p == 0) {
        for (size_t j = 0; j < a.nu0.size(); ++j)
          a.lp.add_coeff(row, a.nu0[j], -f.initial_inputs[j]);
      } else {
        for (size_t k = 0; k < a.eta[p - 1].size(); ++k)
          a.lp.add_coeff(row, a.eta[p - 1][k],
                         -f.stages[p - 1].intermediate_outputs[k]);
        for (size_t j = 0; j < a.nu[p].size(); ++j)
          a.lp.add_coeff(row, a.nu[p][j], -f.stages[p].external_inputs[j]);
      }
    }
  }
  return a;
}

EfficiencyRecord evaluate(const NetworkSpec& spec,
                          const std::vector<DmuObservation>& frontier,
                          const DmuObservation& target, int data_period,
                          int frontier_period, const NetDeaOptions& options) {
  AssembledLp a = assemble_lp(spec, frontier, target, options.positivity_floor);
  LpSolution sol = solve(a.lp, options.lp);
  std::vector<DmuObservation> rows = frontier;
  if (sol.status == LpStatus::Unbounded && data_period != frontier_period) {
    // A cross-period target outside the frontier hull makes the multiplier
    // LP unbounded (free intercepts). Bound it by appending the target's own
    // feasibility rows, which caps its score at 1.
    rows.push_back(target);
    a = assemble_lp(spec, rows, target, options.positivity_floor);
    sol = solve(a.lp, options.lp);
  }
  if (sol.status == LpStatus::Optimal && spec.n_stages() > 1) {
    // The split of the free intercepts across stages is not unique at the
    // optimum. Canonicalize it: with all weights fixed and the intercept sum
    // preserved (so theta and the stage weights are untouched), redistribute
    // the intercepts to maximize the smallest stage score.
    const int P = spec.n_stages();
    LinearProgram lp2;
    std::vector<int> ev(P);
    char nb[16];
    for (int p = 0; p < P; ++p) {
      std::snprintf(nb, sizeof(nb), "e%d", p + 1);
      ev[p] = lp2.add_variable(nb, -kInf, kInf);
    }
    const int tv = lp2.add_variable("t", -kInf, kInf);
    lp2.set_objective(tv, 1.0);
    double eps_sum = 0.0;
    for (int p = 0; p < P; ++p) eps_sum += sol.values[a.eps[p]];
    const int sum_row = lp2.add_constraint("SUM", Relation::Eq, eps_sum);
    for (int p = 0; p < P; ++p) lp2.add_coeff(sum_row, ev[p], 1.0);
    for (size_t i = 0; i < rows.size(); ++i)
      for (int p = 0; p < P; ++p) {
        const double slack = stage_input(a, sol.values, rows[i], p) -
                             stage_output(a, sol.values, rows[i], p, false);
        std::snprintf(nb, sizeof(nb), "F%zuS%d", i + 1, p + 1);
        const int r = lp2.add_constraint(nb, Relation::Le, slack);
        lp2.add_coeff(r, ev[p], 1.0);
      }
    for (int p = 0; p < P; ++p) {
      std::snprintf(nb, sizeof(nb), "T%d", p + 1);
      const int r = lp2.add_constraint(
          nb, Relation::Ge, -stage_output(a, sol.values, target, p, false));
      lp2.add_coeff(r, ev[p], 1.0);
      lp2.add_coeff(r, tv, -stage_input(a, sol.values, target, p));
    }
    const LpSolution sol2 = solve(lp2, options.lp);
    if (sol2.status == LpStatus::Optimal) {
      for (int p = 0; p + 1 < P; ++p) sol.values[a.eps[p]] = sol2.values[ev[p]];
      double partial = 0.0;
      for (int p = 0; p + 1 < P; ++p) partial += sol.values[a.eps[p]];
      // Close the sum exactly so the decomposition identity is preserved to
      // rounding, not to the solver's feasibility tolerance.
      sol.values[a.eps[P - 1]] = eps_sum - partial;
    }
  }

  EfficiencyRecord rec;
  rec.dmu = target.id;
  rec.data_period = data_period;
  rec.frontier_period = frontier_period;
  rec.status = sol.status;
  if (sol.status != LpStatus::Optimal) return rec;

  const int P = spec.n_stages();
  double total_input = 0.0;
  std::vector<double> inputs(P);
  for (int p = 0; p < P; ++p) {
    inputs[p] = stage_input(a, sol.values, target, p);
    total_input += inputs[p];
  }
  for (int p = 0; p < P; ++p) {
    rec.stage_weights.push_back(inputs[p] / total_input);
    rec.stage_scores.push_back(stage_output(a, sol.values, target, p, true) / inputs[p]);
  }
  rec.theta = sol.objective;
  for (size_t j = 0; j < a.lp.variables.size(); ++j)
    rec.multipliers[a.lp.variables[j].name] = sol.values[j];

  double wsum = 0.0, decomposed = 0.0;
  for (int p = 0; p < P; ++p) {
    wsum += rec.stage_weights[p];
    decomposed += rec.stage_weights[p] * rec.stage_scores[p];
  }
  if (std::fabs(wsum - 1.0) > 1e-6 || std::fabs(decomposed - rec.theta) > 1e-6)
    throw ConsistencyError("stage decomposition identity violated for " + target.id);
  return rec;
}

std::vector<EfficiencyRecord> evaluate_period(const NetworkSpec& spec,
                                              const Panel& panel, int data_period,
                                              int frontier_period,
                                              const NetDeaOptions& options) {
  const int dp = panel.period_index(data_period);
  const int fp = panel.period_index(frontier_period);
  if (dp < 0 || fp < 0) throw SchemaError("period not present in panel");

  const auto dea_cols = spec.all_columns();
  auto valid_at = [&](int u, int t) {
    for (const auto& name : dea_cols) {
      const int c = panel.require_column(name);
      const double v = panel.value(c, u, t);
      if (std::isnan(v) || !(v > 0.0)) return false;
    }
    return true;
  };

  std::vector<int> eligible;
  for (int u = 0; u < panel.n_units(); ++u)
    if (valid_at(u, dp) && valid_at(u, fp)) eligible.push_back(u);
  if (eligible.empty())
    throw Error("no DMU is DEA-valid in both periods " + std::to_string(data_period) +
                " and " + std::to_string(frontier_period));

  std::vector<DmuObservation> frontier;
  for (int u : eligible) frontier.push_back(make_observation(panel, spec, u, fp));

  const auto run_one = [&](size_t i) {
    const DmuObservation target =
        dp == fp ? frontier[i] : make_observation(panel, spec, eligible[i], dp);
    return evaluate(spec, frontier, target, data_period, frontier_period, options);
  };

  std::vector<EfficiencyRecord> records(eligible.size());
  if (options.threads > 1) {
    std::vector<std::future<void>> jobs;
    std::atomic<size_t> next{0};
    for (int t = 0; t < options.threads; ++t) {
      jobs.push_back(std::async(std::launch::async, [&] {
        for (size_t i = next.fetch_add(1); i < records.size(); i = next.fetch_add(1))
          records[i] = run_one(i);
      }));
    }
    for (auto& j : jobs) j.get();
  } else {
    for (size_t i = 0; i < records.size(); ++i) records[i] = run_one(i);
  }
  return records;
}

std::string efficiency_records_to_csv(const std::vector<EfficiencyRecord>& records) {
  std::ostringstream out;
  out << "unit,data_period,frontier_period,theta1,theta2,theta3,w1,w2,w3,theta,status\n";
  char buf[32];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (const auto& r : records) {
    out << r.dmu << ',' << r.data_period << ',' << r.frontier_period;
    for (int p = 0; p < 3; ++p)
      out << ',' << (p < static_cast<int>(r.stage_scores.size())
                         ? num(r.stage_scores[p]) : "");
    for (int p = 0; p < 3; ++p)
      out << ',' << (p < static_cast<int>(r.stage_weights.size())
                         ? num(r.stage_weights[p]) : "");
    out << ',' << (r.status == LpStatus::Optimal ? num(r.theta) : "") << ','
        << lp_status_name(r.status) << '\n';
  }
  return out.str();
}

}  // namespace fsdea
