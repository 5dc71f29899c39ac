#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "fsdea/lp.hpp"
#include "fsdea/panel.hpp"

namespace fsdea {

struct StageSpec {
  std::vector<std::string> initial_inputs;        // stage 1 only
  std::vector<std::string> final_outputs;         // exit the process here
  std::vector<std::string> intermediate_outputs;  // feed the next stage
  std::vector<std::string> external_inputs;       // enter at this stage (p >= 2)
};

/// Linear chain of production stages. Stage 1 consumes the initial inputs;
/// every later stage consumes the previous stage's intermediate outputs plus
/// its own external inputs; the last stage has no intermediate outputs.
struct NetworkSpec {
  std::vector<StageSpec> stages;

  void validate() const;
  std::vector<std::string> all_columns() const;
  int n_stages() const { return static_cast<int>(stages.size()); }

  /// Deposit -> loan -> profitability layout. The external input to the
  /// profitability stage has no default and must be named by the caller.
  /// The exiting output of stage 1 defaults to ROE but is plain config.
  static NetworkSpec three_stage_default(const std::string& stage3_external_input);

  static NetworkSpec from_json(const nlohmann::json& j);
  static NetworkSpec load(const std::string& path);
  nlohmann::json to_json() const;
};

struct StageData {
  std::vector<double> final_outputs;
  std::vector<double> intermediate_outputs;
  std::vector<double> external_inputs;
};

struct DmuObservation {
  std::string id;
  std::vector<double> initial_inputs;
  std::vector<StageData> stages;
};

/// Extracts one unit-period observation, enforcing strict positivity of
/// every DEA cell.
DmuObservation make_observation(const Panel& panel, const NetworkSpec& spec,
                                int unit, int period);

struct NetDeaOptions {
  double positivity_floor = 1e-6;
  LpOptions lp;
  int threads = 1;
};

/// The multiplier LP plus the index of every decision variable in it.
struct AssembledLp {
  LinearProgram lp;
  std::vector<int> nu0;               // initial-input weights
  std::vector<std::vector<int>> u;    // per stage: final-output weights
  std::vector<std::vector<int>> eta;  // per stage: intermediate weights
  std::vector<std::vector<int>> nu;   // per stage (>=2): external-input weights
  std::vector<int> eps;               // per stage: free intercept
};

AssembledLp assemble_lp(const NetworkSpec& spec,
                        const std::vector<DmuObservation>& frontier,
                        const DmuObservation& target, double positivity_floor);

struct EfficiencyRecord {
  std::string dmu;
  int data_period = 0;
  int frontier_period = 0;
  std::vector<double> stage_scores;
  std::vector<double> stage_weights;
  double theta = 0.0;
  std::map<std::string, double> multipliers;
  LpStatus status = LpStatus::Infeasible;
};

EfficiencyRecord evaluate(const NetworkSpec& spec,
                          const std::vector<DmuObservation>& frontier,
                          const DmuObservation& target, int data_period,
                          int frontier_period, const NetDeaOptions& options = {});

/// One record per unit present and DEA-valid in both periods. The frontier is
/// the full frontier-period cross-section; the target joins it only when the
/// two periods coincide.
std::vector<EfficiencyRecord> evaluate_period(const NetworkSpec& spec,
                                              const Panel& panel, int data_period,
                                              int frontier_period,
                                              const NetDeaOptions& options = {});

std::string efficiency_records_to_csv(const std::vector<EfficiencyRecord>& records);

}  // namespace fsdea
