#include "fsdea/econ.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "fsdea/stats.hpp"

namespace fsdea {

void RegressionDesign::check() const {
  if (dependent.empty()) throw ConfigError("regression design needs a dependent column");
  std::set<std::string> seen{dependent};
  for (const auto& lists : {explanatory, controls})
    for (const auto& c : lists)
      if (!seen.insert(c).second)
        throw ConfigError("column appears twice in regression design: " + c);
  if (explanatory.empty())
    throw ConfigError("regression design needs at least one explanatory column");
}

RegressionFrame build_frame(const Panel& panel, const RegressionDesign& design,
                            const std::vector<std::string>& extra_columns) {
  design.check();
  std::vector<int> cols;
  cols.push_back(panel.require_column(design.dependent));
  for (const auto& c : design.explanatory) cols.push_back(panel.require_column(c));
  for (const auto& c : design.controls) cols.push_back(panel.require_column(c));
  std::vector<int> extra_idx;
  for (const auto& c : extra_columns) extra_idx.push_back(panel.require_column(c));
  const int cluster_col =
      design.cluster.empty() ? -1 : panel.require_column(design.cluster);

  std::vector<std::array<int, 2>> rows;
  for (int u = 0; u < panel.n_units(); ++u)
    for (int t = 0; t < panel.n_periods(); ++t) {
      bool ok = true;
      for (int c : cols) ok = ok && !panel.is_missing(c, u, t);
      for (int c : extra_idx) ok = ok && !panel.is_missing(c, u, t);
      if (cluster_col >= 0) ok = ok && !panel.is_missing(cluster_col, u, t);
      if (ok) rows.push_back({u, t});
    }

  RegressionFrame f;
  const int n = static_cast<int>(rows.size());
  const int k = static_cast<int>(cols.size()) - 1;
  f.y.resize(n);
  f.X.resize(n, k);
  f.extra.resize(n, static_cast<int>(extra_idx.size()));
  std::map<double, int> cluster_ids;
  for (int i = 0; i < n; ++i) {
    const auto [u, t] = rows[i];
    f.unit.push_back(u);
    f.period.push_back(t);
    f.y(i) = panel.value(cols[0], u, t);
    for (int j = 0; j < k; ++j) f.X(i, j) = panel.value(cols[j + 1], u, t);
    for (size_t j = 0; j < extra_idx.size(); ++j)
      f.extra(i, static_cast<int>(j)) = panel.value(extra_idx[j], u, t);
    if (cluster_col < 0) {
      f.cluster.push_back(u);
    } else {
      const double key = panel.value(cluster_col, u, t);
      auto [it, fresh] = cluster_ids.emplace(key, static_cast<int>(cluster_ids.size()));
      (void)fresh;
      f.cluster.push_back(it->second);
    }
  }
  // Renumber unit-based clusters densely.
  std::map<int, int> dense;
  for (int& c : f.cluster) {
    auto [it, fresh] = dense.emplace(c, static_cast<int>(dense.size()));
    (void)fresh;
    c = it->second;
  }
  f.n_clusters = static_cast<int>(dense.size());
  for (const auto& c : design.explanatory) f.names.push_back(c);
  for (const auto& c : design.controls) f.names.push_back(c);
  f.extra_cols = extra_idx;
  return f;
}

void within_transform(const std::vector<int>& unit, const std::vector<int>& period,
                      Eigen::MatrixXd& columns, bool unit_effect, bool time_effect) {
  if (!unit_effect && !time_effect) return;
  const int n = static_cast<int>(unit.size());
  if (columns.rows() != n) throw EstimationError("within_transform size mismatch");
  int max_u = 0, max_t = 0;
  for (int i = 0; i < n; ++i) {
    max_u = std::max(max_u, unit[i]);
    max_t = std::max(max_t, period[i]);
  }
  Eigen::MatrixXd prev;
  for (int sweep = 0; sweep < 10000; ++sweep) {
    prev = columns;
    if (unit_effect) {
      Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(max_u + 1, columns.cols());
      Eigen::VectorXd cnt = Eigen::VectorXd::Zero(max_u + 1);
      for (int i = 0; i < n; ++i) {
        sum.row(unit[i]) += columns.row(i);
        cnt(unit[i]) += 1.0;
      }
      for (int i = 0; i < n; ++i) columns.row(i) -= sum.row(unit[i]) / cnt(unit[i]);
    }
    if (time_effect) {
      Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(max_t + 1, columns.cols());
      Eigen::VectorXd cnt = Eigen::VectorXd::Zero(max_t + 1);
      for (int i = 0; i < n; ++i) {
        sum.row(period[i]) += columns.row(i);
        cnt(period[i]) += 1.0;
      }
      for (int i = 0; i < n; ++i) columns.row(i) -= sum.row(period[i]) / cnt(period[i]);
    }
    const double delta = (columns - prev).cwiseAbs().maxCoeff();
    if (delta < 1e-10) return;
  }
  throw EstimationError("within transform failed to converge");
}

namespace {

// OLS with CR1 clustered covariance on already-transformed data.
FitResult ols_cr1(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                  const std::vector<std::string>& names,
                  const std::vector<int>& cluster, int n_clusters) {
  const int n = static_cast<int>(y.size());
  const int k = static_cast<int>(X.cols());
  if (n <= k)
    throw EstimationError("more parameters than observations after deletion");
  if (n_clusters < 2)
    throw EstimationError("clustered covariance needs at least two clusters");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < k) {
    std::string bad;
    const auto& perm = qr.colsPermutation().indices();
    for (int j = qr.rank(); j < k; ++j)
      bad += (bad.empty() ? "" : ", ") + names[perm(j)];
    throw EstimationError("perfectly collinear regressors: " + bad);
  }

  FitResult fit;
  fit.names = names;
  fit.coef = qr.solve(y);
  fit.residuals = y - X * fit.coef;
  fit.n_obs = n;
  fit.n_clusters = n_clusters;
  fit.df_resid = n_clusters - 1;

  const Eigen::MatrixXd bread = (X.transpose() * X).inverse();
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
  std::vector<Eigen::VectorXd> score(n_clusters, Eigen::VectorXd::Zero(k));
  for (int i = 0; i < n; ++i)
    score[cluster[i]] += X.row(i).transpose() * fit.residuals(i);
  for (const auto& s : score) meat += s * s.transpose();
  const double g = n_clusters;
  const double factor = g / (g - 1.0) * (n - 1.0) / static_cast<double>(n - k);
  fit.vcov = factor * bread * meat * bread;

  const double tss = (y.array() - y.mean()).square().sum();
  const double rss = fit.residuals.squaredNorm();
  fit.r2_within = tss > 0.0 ? std::clamp(1.0 - rss / tss, 0.0, 1.0) : 0.0;
  return fit;
}

// Residualize the columns of M on X (both already within-transformed).
Eigen::MatrixXd residualize(const Eigen::MatrixXd& M, const Eigen::MatrixXd& X) {
  if (X.cols() == 0) return M;
  return M - X * (X.transpose() * X).ldlt().solve(X.transpose() * M);
}

struct IvWork {
  RegressionFrame frame;     // X = [endog, controls], extra = [IV1, IV2]
  Eigen::VectorXd y;         // demeaned
  Eigen::VectorXd endog;     // demeaned endogenous column
  Eigen::MatrixXd controls;  // demeaned controls
  Eigen::MatrixXd Z;         // demeaned excluded instruments
  std::vector<std::string> control_names;
};

IvWork prepare_iv(const RegressionDesign& design, const InstrumentSpec& instruments,
                  const Panel& panel) {
  if (design.explanatory.size() != 1)
    throw EstimationError("IV estimation supports exactly one endogenous regressor");
  Panel work = panel;
  const std::string lag_source =
      instruments.lag_of.empty() ? design.explanatory.front() : instruments.lag_of;
  const int src = work.require_column(lag_source);
  const int lag_col = work.add_column("IV1", VariableRole::RegressionControl);
  for (int u = 0; u < work.n_units(); ++u) {
    for (int t = 1; t < work.n_periods(); ++t)
      work.set(lag_col, u, t, work.value(src, u, t - 1));
  }
  std::vector<std::string> extras = {"IV1"};
  if (!instruments.spillover.empty()) extras.push_back(instruments.spillover);
  const int L = static_cast<int>(extras.size());

  IvWork w;
  w.frame = build_frame(work, design, extras);
  const int n = static_cast<int>(w.frame.y.size());
  const int k = static_cast<int>(w.frame.X.cols());
  Eigen::MatrixXd all(n, 1 + k + L);
  all.col(0) = w.frame.y;
  all.block(0, 1, n, k) = w.frame.X;
  all.block(0, 1 + k, n, L) = w.frame.extra;
  within_transform(w.frame.unit, w.frame.period, all, design.unit_effect,
                   design.time_effect);
  w.y = all.col(0);
  w.endog = all.col(1);
  w.controls = all.block(0, 2, n, k - 1);
  w.Z = all.block(0, 1 + k, n, L);
  w.control_names.assign(w.frame.names.begin() + 1, w.frame.names.end());
  return w;
}

std::vector<std::string> instrument_names(const IvWork& w) {
  std::vector<std::string> names = {"IV1"};
  if (w.Z.cols() == 2) names.push_back("IV2");
  return names;
}

IvDiagnostics compute_diagnostics(const IvWork& w, const Eigen::VectorXd& u2sls) {
  IvDiagnostics d;
  const int n = static_cast<int>(w.y.size());
  const int L = static_cast<int>(w.Z.cols());
  const int G = w.frame.n_clusters;

  // Partial the controls out of the endogenous column and the instruments.
  const Eigen::VectorXd e = residualize(w.endog, w.controls);
  const Eigen::MatrixXd Zp = residualize(w.Z, w.controls);

  // First-stage coefficients on the excluded instruments.
  const Eigen::MatrixXd ZtZ = Zp.transpose() * Zp;
  const Eigen::VectorXd pi = ZtZ.ldlt().solve(Zp.transpose() * e);
  const Eigen::VectorXd v1 = e - Zp * pi;

  // Cluster-robust Wald F of the excluded instruments.
  {
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(L, L);
    std::vector<Eigen::VectorXd> score(G, Eigen::VectorXd::Zero(L));
    for (int i = 0; i < n; ++i)
      score[w.frame.cluster[i]] += Zp.row(i).transpose() * v1(i);
    for (const auto& s : score) meat += s * s.transpose();
    const double factor =
        static_cast<double>(G) / (G - 1.0) * (n - 1.0) / static_cast<double>(n - L);
    const Eigen::MatrixXd bread = ZtZ.inverse();
    const Eigen::MatrixXd V = factor * bread * meat * bread;
    d.kp_rk_wald_f = pi.dot(V.inverse() * pi) / L;
  }

  // Cluster-robust score test of joint instrument relevance.
  {
    const Eigen::VectorXd g = Zp.transpose() * e;
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(L, L);
    std::vector<Eigen::VectorXd> score(G, Eigen::VectorXd::Zero(L));
    for (int i = 0; i < n; ++i)
      score[w.frame.cluster[i]] += Zp.row(i).transpose() * e(i);
    for (const auto& s : score) S += s * s.transpose();
    d.kp_rk_lm = g.dot(S.ldlt().solve(g));
    d.kp_rk_lm_p = chi2_sf(d.kp_rk_lm, L);
  }

  // Homoskedastic first-stage F.
  {
    const double ess = (Zp * pi).squaredNorm();
    const int absorbed = static_cast<int>(w.controls.cols()) + L;
    const int dof = n - absorbed - G;  // FE absorbed at cluster granularity
    const double rss = v1.squaredNorm();
    d.cragg_donald_f = (ess / L) / (rss / std::max(dof, 1));
  }

  // Hansen J from the 2SLS residuals over the full instrument set.
  if (L > 1) {
    const int kz = L + static_cast<int>(w.controls.cols());
    Eigen::MatrixXd Zfull(n, kz);
    Zfull.leftCols(L) = w.Z;
    Zfull.rightCols(w.controls.cols()) = w.controls;
    const Eigen::VectorXd g = Zfull.transpose() * u2sls;
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(kz, kz);
    std::vector<Eigen::VectorXd> score(G, Eigen::VectorXd::Zero(kz));
    for (int i = 0; i < n; ++i)
      score[w.frame.cluster[i]] += Zfull.row(i).transpose() * u2sls(i);
    for (const auto& s : score) S += s * s.transpose();
    d.hansen_j = g.dot(S.ldlt().solve(g));
    d.hansen_j_p = chi2_sf(d.hansen_j, L - 1);
  } else {
    d.hansen_j = 0.0;  // just-identified: the moment conditions hold exactly
    d.hansen_j_p = 1.0;
  }

  if (L == 2) {
    d.stock_yogo_10pct = 19.93;
    d.stock_yogo_available = true;
  }
  return d;
}

}  // namespace

double FitResult::se(int j) const { return std::sqrt(vcov(j, j)); }
double FitResult::tstat(int j) const { return coef(j) / se(j); }
double FitResult::pvalue(int j) const { return t_pvalue(tstat(j), df_resid); }

int FitResult::index(const std::string& name) const {
  for (size_t j = 0; j < names.size(); ++j)
    if (names[j] == name) return static_cast<int>(j);
  throw EstimationError("no coefficient named " + name);
}

nlohmann::json FitResult::to_json() const {
  nlohmann::json coefs = nlohmann::json::object();
  for (size_t j = 0; j < names.size(); ++j) {
    const int i = static_cast<int>(j);
    const double p = pvalue(i);
    std::string stars;
    if (p < 0.01) stars = "***";
    else if (p < 0.05) stars = "**";
    else if (p < 0.1) stars = "*";
    coefs[names[j]] = {{"coef", coef(i)}, {"se", se(i)},   {"t", tstat(i)},
                       {"p", p},          {"stars", stars}};
  }
  return {{"coefficients", coefs}, {"constant", constant},   {"n", n_obs},
          {"clusters", n_clusters}, {"r2", r2_within}};
}

nlohmann::json IvDiagnostics::to_json() const {
  nlohmann::json j = {{"kp_rk_lm", kp_rk_lm},
                      {"kp_rk_lm_p", kp_rk_lm_p},
                      {"cragg_donald_f", cragg_donald_f},
                      {"kp_rk_wald_f", kp_rk_wald_f},
                      {"hansen_j", hansen_j},
                      {"hansen_j_p", hansen_j_p}};
  if (stock_yogo_available)
    j["stock_yogo_10pct"] = stock_yogo_10pct;
  else
    j["stock_yogo_10pct"] = "no tabulated value";
  return j;
}

FitResult fit_twfe(const RegressionDesign& design, const Panel& panel) {
  RegressionFrame f = build_frame(panel, design);
  const Eigen::VectorXd y_raw = f.y;
  const Eigen::MatrixXd X_raw = f.X;
  const int n = static_cast<int>(f.y.size());
  Eigen::MatrixXd all(n, 1 + f.X.cols());
  all.col(0) = f.y;
  all.rightCols(f.X.cols()) = f.X;
  within_transform(f.unit, f.period, all, design.unit_effect, design.time_effect);

  FitResult fit = ols_cr1(all.col(0), all.rightCols(f.X.cols()), f.names, f.cluster,
                          f.n_clusters);
  Eigen::VectorXd xbar = X_raw.colwise().mean();
  fit.constant = y_raw.mean() - xbar.dot(fit.coef);
  return fit;
}

IvFit fit_2sls(const RegressionDesign& design, const InstrumentSpec& instruments,
               const Panel& panel) {
  IvWork w = prepare_iv(design, instruments, panel);
  const int n = static_cast<int>(w.y.size());
  const int kc = static_cast<int>(w.controls.cols());
  const int L = static_cast<int>(w.Z.cols());

  // First stage: endogenous on instruments plus controls.
  Eigen::MatrixXd X1(n, L + kc);
  X1.leftCols(L) = w.Z;
  X1.rightCols(kc) = w.controls;
  std::vector<std::string> names1 = instrument_names(w);
  names1.insert(names1.end(), w.control_names.begin(), w.control_names.end());
  IvFit out;
  out.first_stage = ols_cr1(w.endog, X1, names1, w.frame.cluster, w.frame.n_clusters);

  // Second stage on the fitted endogenous column.
  const Eigen::VectorXd fitted = X1 * out.first_stage.coef;
  Eigen::MatrixXd X2(n, 1 + kc);
  X2.col(0) = fitted;
  X2.rightCols(kc) = w.controls;
  std::vector<std::string> names2 = {design.explanatory.front()};
  names2.insert(names2.end(), w.control_names.begin(), w.control_names.end());

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X2);
  qr.setThreshold(1e-10);
  if (qr.rank() < X2.cols())
    throw EstimationError("instrument matrix is rank deficient");

  FitResult fit;
  fit.names = names2;
  fit.coef = qr.solve(w.y);
  // Residuals use the original endogenous column.
  Eigen::MatrixXd X_orig(n, 1 + kc);
  X_orig.col(0) = w.endog;
  X_orig.rightCols(kc) = w.controls;
  fit.residuals = w.y - X_orig * fit.coef;
  fit.n_obs = n;
  fit.n_clusters = w.frame.n_clusters;
  fit.df_resid = w.frame.n_clusters - 1;
  {
    const int k = static_cast<int>(X2.cols());
    const Eigen::MatrixXd bread = (X2.transpose() * X2).inverse();
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
    std::vector<Eigen::VectorXd> score(w.frame.n_clusters, Eigen::VectorXd::Zero(k));
    for (int i = 0; i < n; ++i)
      score[w.frame.cluster[i]] += X2.row(i).transpose() * fit.residuals(i);
    for (const auto& s : score) meat += s * s.transpose();
    const double g = w.frame.n_clusters;
    const double factor = g / (g - 1.0) * (n - 1.0) / static_cast<double>(n - k);
    fit.vcov = factor * bread * meat * bread;
  }
  const double tss = (w.y.array() - w.y.mean()).square().sum();
  fit.r2_within =
      tss > 0.0 ? std::clamp(1.0 - fit.residuals.squaredNorm() / tss, 0.0, 1.0) : 0.0;
  out.second_stage = fit;
  out.diagnostics = compute_diagnostics(w, fit.residuals);
  return out;
}

ControlFunctionFit fit_control_function(const RegressionDesign& design,
                                        const InstrumentSpec& instruments,
                                        const Panel& panel) {
  IvWork w = prepare_iv(design, instruments, panel);
  const int n = static_cast<int>(w.y.size());
  const int kc = static_cast<int>(w.controls.cols());
  const int L = static_cast<int>(w.Z.cols());

  Eigen::MatrixXd X1(n, L + kc);
  X1.leftCols(L) = w.Z;
  X1.rightCols(kc) = w.controls;
  std::vector<std::string> names1 = instrument_names(w);
  names1.insert(names1.end(), w.control_names.begin(), w.control_names.end());

  ControlFunctionFit out;
  out.first_stage = ols_cr1(w.endog, X1, names1, w.frame.cluster, w.frame.n_clusters);
  const Eigen::VectorXd xi = w.endog - X1 * out.first_stage.coef;

  Eigen::MatrixXd X2(n, 2 + kc);
  X2.col(0) = w.endog;
  X2.block(0, 1, n, kc) = w.controls;
  X2.col(1 + kc) = xi;
  std::vector<std::string> names2 = {design.explanatory.front()};
  names2.insert(names2.end(), w.control_names.begin(), w.control_names.end());
  names2.push_back("first_stage_residual");

  out.second_stage = ols_cr1(w.y, X2, names2, w.frame.cluster, w.frame.n_clusters);
  const int jl = 1 + kc;
  out.lambda = out.second_stage.coef(jl);
  out.lambda_se = out.second_stage.se(jl);
  out.lambda_t = out.second_stage.tstat(jl);
  out.lambda_p = out.second_stage.pvalue(jl);
  return out;
}

IvDiagnostics iv_diagnostics(const RegressionDesign& design,
                             const InstrumentSpec& instruments, const Panel& panel) {
  return fit_2sls(design, instruments, panel).diagnostics;
}

MechanismFit mechanism_two_stage(const Panel& panel, const std::string& channel,
                                 const RegressionDesign& design) {
  RegressionDesign first = design;
  first.dependent = channel;
  // One frame so both stages share rows: needs channel, FSI, FTI, controls.
  RegressionFrame f = build_frame(panel, first, {design.dependent});
  const int n = static_cast<int>(f.y.size());
  const int k = static_cast<int>(f.X.cols());
  Eigen::MatrixXd all(n, 1 + k + 1);
  all.col(0) = f.y;  // channel
  all.block(0, 1, n, k) = f.X;
  all.col(1 + k) = f.extra.col(0);  // dependent
  within_transform(f.unit, f.period, all, design.unit_effect, design.time_effect);

  MechanismFit out;
  out.first =
      ols_cr1(all.col(0), all.block(0, 1, n, k), f.names, f.cluster, f.n_clusters);

  const Eigen::VectorXd predicted = all.block(0, 1, n, k) * out.first.coef;
  const int kc = k - 1;  // controls only
  Eigen::MatrixXd X2(n, 1 + kc);
  X2.col(0) = predicted;
  X2.rightCols(kc) = all.block(0, 2, n, kc);
  std::vector<std::string> names2 = {"predicted_" + channel};
  names2.insert(names2.end(), f.names.begin() + 1, f.names.end());
  out.second = ols_cr1(all.col(1 + k), X2, names2, f.cluster, f.n_clusters);
  return out;
}

SplitFit heterogeneity_split(const Panel& panel, const SplitCriterion& criterion,
                             const RegressionDesign& design) {
  const int c = panel.require_column(criterion.column);
  std::vector<bool> in_above(panel.n_units(), false);
  if (criterion.rule == "median") {
    std::vector<double> means;
    std::vector<int> idx;
    for (int u = 0; u < panel.n_units(); ++u) {
      double s = 0.0;
      int cnt = 0;
      for (int t = 0; t < panel.n_periods(); ++t)
        if (!panel.is_missing(c, u, t)) {
          s += panel.value(c, u, t);
          ++cnt;
        }
      if (cnt > 0) {
        means.push_back(s / cnt);
        idx.push_back(u);
      }
    }
    std::vector<double> sorted = means;
    std::sort(sorted.begin(), sorted.end());
    const double med = sorted.size() % 2 == 1
                           ? sorted[sorted.size() / 2]
                           : 0.5 * (sorted[sorted.size() / 2 - 1] +
                                    sorted[sorted.size() / 2]);
    for (size_t i = 0; i < idx.size(); ++i) in_above[idx[i]] = means[i] > med;
  } else if (criterion.rule == "flag") {
    for (int u = 0; u < panel.n_units(); ++u)
      for (int t = 0; t < panel.n_periods(); ++t)
        if (!panel.is_missing(c, u, t) && panel.value(c, u, t) != 0.0)
          in_above[u] = true;
  } else {
    throw ConfigError("unknown split rule: " + criterion.rule);
  }

  auto restrict = [&](bool above) {
    Panel sub = panel;
    const int dep = sub.require_column(design.dependent);
    bool any = false;
    for (int u = 0; u < sub.n_units(); ++u) {
      if (in_above[u] == above) {
        any = true;
        continue;
      }
      for (int t = 0; t < sub.n_periods(); ++t)
        sub.set(dep, u, t, std::numeric_limits<double>::quiet_NaN());
    }
    if (!any) throw EstimationError("empty subsample in heterogeneity split");
    return sub;
  };

  SplitFit out;
  out.above = fit_twfe(design, restrict(true));
  out.below = fit_twfe(design, restrict(false));
  return out;
}

std::string regression_table_csv(const std::vector<std::string>& fit_labels,
                                 const std::vector<const FitResult*>& fits) {
  std::vector<std::string> row_names;
  for (const auto* f : fits)
    for (const auto& n : f->names)
      if (std::find(row_names.begin(), row_names.end(), n) == row_names.end())
        row_names.push_back(n);

  std::ostringstream out;
  char buf[64];
  out << "term";
  for (const auto& l : fit_labels) out << ',' << l;
  out << '\n';
  for (const auto& name : row_names) {
    out << name;
    std::string se_line = "";
    for (const auto* f : fits) {
      int j = -1;
      for (size_t i = 0; i < f->names.size(); ++i)
        if (f->names[i] == name) j = static_cast<int>(i);
      if (j < 0) {
        out << ',';
        se_line += ",";
        continue;
      }
      const double p = f->pvalue(j);
      const char* stars = p < 0.01 ? "***" : p < 0.05 ? "**" : p < 0.1 ? "*" : "";
      std::snprintf(buf, sizeof(buf), ",%.3f%s", f->coef(j), stars);
      out << buf;
      std::snprintf(buf, sizeof(buf), ",(%.3f)", f->se(j));
      se_line += buf;
    }
    out << '\n' << se_line << '\n';
  }
  out << "Observations";
  for (const auto* f : fits) out << ',' << f->n_obs;
  out << "\nClusters";
  for (const auto* f : fits) out << ',' << f->n_clusters;
  out << "\nR2";
  for (const auto* f : fits) {
    std::snprintf(buf, sizeof(buf), ",%.2f", f->r2_within);
    out << buf;
  }
  out << '\n';
  return out.str();
}

}  // namespace fsdea
