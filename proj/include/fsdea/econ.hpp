#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "fsdea/panel.hpp"

namespace fsdea {

struct RegressionDesign {
  std::string dependent;
  std::vector<std::string> explanatory;
  std::vector<std::string> controls;
  bool unit_effect = true;
  bool time_effect = true;
  /// Cluster on units when empty.
  std::string cluster;

  void check() const;
};

/// Listwise-complete rows extracted from a Panel for one design.
struct RegressionFrame {
  std::vector<int> unit;     // unit index per row
  std::vector<int> period;   // period index per row
  std::vector<int> cluster;  // cluster id per row
  int n_clusters = 0;
  Eigen::VectorXd y;
  Eigen::MatrixXd X;  // explanatory then controls
  std::vector<std::string> names;
  std::vector<int> extra_cols;  // indices of extra columns (instruments, ...)
  Eigen::MatrixXd extra;
};

RegressionFrame build_frame(const Panel& panel, const RegressionDesign& design,
                            const std::vector<std::string>& extra_columns = {});

/// Alternating unit/time demeaning until the largest cell change drops below
/// 1e-10. Columns come back with all absorbed group means below 1e-8.
void within_transform(const std::vector<int>& unit, const std::vector<int>& period,
                      Eigen::MatrixXd& columns, bool unit_effect, bool time_effect);

struct FitResult {
  std::vector<std::string> names;
  Eigen::VectorXd coef;
  Eigen::MatrixXd vcov;  // cluster-robust (CR1)
  double constant = 0.0;
  int n_obs = 0;
  int n_clusters = 0;
  int df_resid = 0;
  double r2_within = 0.0;
  Eigen::VectorXd residuals;

  double se(int j) const;
  double tstat(int j) const;
  /// Two-sided p-value on G-1 degrees of freedom.
  double pvalue(int j) const;
  int index(const std::string& name) const;
  nlohmann::json to_json() const;
};

FitResult fit_twfe(const RegressionDesign& design, const Panel& panel);

struct InstrumentSpec {
  /// Column to lag one period within unit for IV1; defaults to the first
  /// explanatory variable.
  std::string lag_of;
  /// Precomputed spillover instrument column (IV2).
  std::string spillover;
};

struct IvDiagnostics {
  double kp_rk_lm = 0.0;
  double kp_rk_lm_p = 1.0;
  double cragg_donald_f = 0.0;
  double kp_rk_wald_f = 0.0;
  double hansen_j = 0.0;
  double hansen_j_p = 1.0;
  /// Stock-Yogo 10% size critical value; tabulated here only for the
  /// 2-instrument / 1-endogenous case.
  double stock_yogo_10pct = 0.0;
  bool stock_yogo_available = false;

  nlohmann::json to_json() const;
};

struct IvFit {
  FitResult first_stage;
  FitResult second_stage;
  IvDiagnostics diagnostics;
};

/// 2SLS with one endogenous regressor (the first explanatory column) and the
/// two instruments of the spec; everything is within-transformed first.
IvFit fit_2sls(const RegressionDesign& design, const InstrumentSpec& instruments,
               const Panel& panel);

struct ControlFunctionFit {
  FitResult first_stage;
  FitResult second_stage;  // includes the first-stage residual term
  double lambda = 0.0;     // coefficient on the residual
  double lambda_se = 0.0;
  double lambda_t = 0.0;
  double lambda_p = 1.0;
};

ControlFunctionFit fit_control_function(const RegressionDesign& design,
                                        const InstrumentSpec& instruments,
                                        const Panel& panel);

IvDiagnostics iv_diagnostics(const RegressionDesign& design,
                             const InstrumentSpec& instruments, const Panel& panel);

struct MechanismFit {
  FitResult first;   // channel on the explanatory variable
  FitResult second;  // dependent on the predicted channel
};

MechanismFit mechanism_two_stage(const Panel& panel, const std::string& channel,
                                 const RegressionDesign& design);

struct SplitCriterion {
  std::string column;
  /// "median": unit-level mean above/below the cross-sectional median;
  /// "flag": nonzero versus zero.
  std::string rule = "median";
};

struct SplitFit {
  FitResult above;  // above-median or flagged subsample
  FitResult below;
};

SplitFit heterogeneity_split(const Panel& panel, const SplitCriterion& criterion,
                             const RegressionDesign& design);

/// CSV table in the stacked coefficient/(se) layout used for reporting,
/// one column per fit.
std::string regression_table_csv(const std::vector<std::string>& fit_labels,
                                 const std::vector<const FitResult*>& fits);

}  // namespace fsdea
