#include "fsdea/malmquist.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <map>

namespace fsdea {

namespace {
void check_positive(const ScoreQuadruple& q) {
  if (!(q.same_t > 0.0 && q.cross_t > 0.0 && q.cross_next > 0.0 && q.same_next > 0.0))
    throw Error("Malmquist quadruple requires strictly positive scores");
}

// Stage splits at the LP optimum are not unique and stage ratios can come
// back negative; the index is still well defined whenever both period
// ratios are positive. Invalid stage quadruples yield NaN instead of
// aborting the whole panel.
double lenient_mi(const ScoreQuadruple& q) {
  const double r1 = q.cross_t / q.same_t;
  const double r2 = q.same_next / q.cross_next;
  if (std::isfinite(r1) && std::isfinite(r2) && r1 > 0.0 && r2 > 0.0)
    return std::sqrt(r1 * r2);
  return std::numeric_limits<double>::quiet_NaN();
}
}  // namespace

double malmquist(const ScoreQuadruple& q) {
  check_positive(q);
  return std::sqrt((q.cross_t / q.same_t) * (q.same_next / q.cross_next));
}

Decomposition decompose(const ScoreQuadruple& q) {
  check_positive(q);
  Decomposition d;
  d.ec = q.same_next / q.same_t;
  d.tc = std::sqrt((q.cross_t / q.same_next) * (q.same_t / q.cross_next));
  return d;
}

std::vector<std::string> stage_mi_names(int n_stages) {
  if (n_stages == 3) return {"MI_d", "MI_l", "MI_p"};
  std::vector<std::string> names;
  for (int p = 1; p <= n_stages; ++p) names.push_back("MI_s" + std::to_string(p));
  return names;
}

FsiResult fsi_panel(const Panel& panel, const NetworkSpec& spec,
                    const FsiOptions& options) {
  spec.validate();
  const int P = spec.n_stages();
  const auto mi_names = stage_mi_names(P);

  FsiResult result;
  result.panel = panel;
  // Index columns are recomputed from scratch; stale values would otherwise
  // survive in never-scored cells (first year, skipped pairs).
  auto ensure = [&](const std::string& name, VariableRole role) {
    int c = result.panel.column_index(name);
    if (c < 0) c = result.panel.add_column(name, role);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int u = 0; u < result.panel.n_units(); ++u)
      for (int t = 0; t < result.panel.n_periods(); ++t)
        result.panel.set(c, u, t, nan);
    return c;
  };
  const int c_fsi = ensure("FSI", VariableRole::RegressionDependent);
  const int c_ec = ensure("EC", VariableRole::RegressionControl);
  const int c_tc = ensure("TC", VariableRole::RegressionControl);
  std::vector<int> c_mi;
  for (const auto& n : mi_names) c_mi.push_back(ensure(n, VariableRole::RegressionControl));
  const int c_ok = ensure("fsi_ok", VariableRole::RegressionControl);

  const auto dea_cols = spec.all_columns();
  for (int ti = 0; ti + 1 < panel.n_periods(); ++ti) {
    const int year_t = panel.periods()[ti];
    const int year_n = panel.periods()[ti + 1];

    Panel pair = panel.subset_periods({year_t, year_n});
    // Shift only the columns that need it over this pooled pair.
    for (const auto& name : dea_cols) {
      const int c = pair.require_column(name);
      double lo = kInf, hi = -kInf;
      bool any = false;
      for (int u = 0; u < pair.n_units(); ++u)
        for (int t = 0; t < 2; ++t)
          if (!pair.is_missing(c, u, t)) {
            lo = std::min(lo, pair.value(c, u, t));
            hi = std::max(hi, pair.value(c, u, t));
            any = true;
          }
      if (any && !(lo > 0.0 && lo / hi >= options.shift_floor) && lo < hi)
        pair = shift_normalize(pair, {name}, options.shift_floor);
    }

    std::map<std::string, std::array<const EfficiencyRecord*, 4>> by_unit;
    std::array<std::vector<EfficiencyRecord>, 4> passes;
    try {
      passes[0] = evaluate_period(spec, pair, year_t, year_t, options.dea);
      passes[1] = evaluate_period(spec, pair, year_n, year_t, options.dea);
      passes[2] = evaluate_period(spec, pair, year_t, year_n, options.dea);
      passes[3] = evaluate_period(spec, pair, year_n, year_n, options.dea);
    } catch (const Error&) {
      for (int u = 0; u < panel.n_units(); ++u)
        result.skipped.push_back(panel.units()[u] + "@" + std::to_string(year_n));
      continue;
    }
    for (auto& pass : passes) result.solves += static_cast<int>(pass.size());
    for (int k = 0; k < 4; ++k)
      for (const auto& r : passes[k]) by_unit[r.dmu][k] = &r;

    for (const auto& [unit, recs] : by_unit) {
      const int u = panel.unit_index(unit);
      const int t_out = panel.period_index(year_n);
      bool ok = true;
      for (const auto* r : recs)
        ok = ok && r != nullptr && r->status == LpStatus::Optimal;
      if (!ok) {
        result.skipped.push_back(unit + "@" + std::to_string(year_n));
        result.panel.set(c_ok, u, t_out, 0.0);
        continue;
      }
      result.optimal += 4;

      ScoreQuadruple q{recs[0]->theta, recs[1]->theta, recs[2]->theta, recs[3]->theta};
      if (!(q.same_t > 0.0 && q.cross_t > 0.0 && q.cross_next > 0.0 &&
            q.same_next > 0.0)) {
        result.skipped.push_back(unit + "@" + std::to_string(year_n));
        result.panel.set(c_ok, u, t_out, 0.0);
        continue;
      }
      MalmquistRecord m;
      m.unit = unit;
      m.year_from = year_t;
      m.year_to = year_n;
      m.mi = malmquist(q);
      const auto d = decompose(q);
      m.ec = d.ec;
      m.tc = d.tc;
      for (int p = 0; p < P; ++p) {
        ScoreQuadruple sq{recs[0]->stage_scores[p], recs[1]->stage_scores[p],
                          recs[2]->stage_scores[p], recs[3]->stage_scores[p]};
        m.stage_mi.push_back(lenient_mi(sq));
      }
      result.panel.set(c_fsi, u, t_out, m.mi);
      result.panel.set(c_ec, u, t_out, m.ec);
      result.panel.set(c_tc, u, t_out, m.tc);
      for (int p = 0; p < P; ++p) result.panel.set(c_mi[p], u, t_out, m.stage_mi[p]);
      result.panel.set(c_ok, u, t_out, 1.0);
      result.records.push_back(std::move(m));
    }
  }
  return result;
}

}  // namespace fsdea
