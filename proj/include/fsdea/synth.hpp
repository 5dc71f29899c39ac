#pragma once

#include <cstdint>
#include <limits>
#include <string>

#include <json.hpp>

#include "fsdea/panel.hpp"

namespace fsdea {

/// Ground-truth configuration for the synthetic bank-panel generator.
struct DgpConfig {
  int n_units = 104;
  int n_periods = 9;
  int first_period = 2015;
  uint64_t seed = 1;

  /// Multiplicative frontier shift per period (technical change).
  double frontier_growth = 0.05;
  /// Unit inefficiency factors are drawn uniformly from [this, 1).
  double inefficiency_min = 0.6;
  /// Noise sigma for stage outputs and for the regression error.
  double noise_sigma = 0.1;
  /// True effect of the FinTech index on the sustainability index.
  double fintech_effect = -0.5;
  /// Correlation between the FTI shock and the FSI shock.
  double endogeneity_rho = 0.0;
  /// Loading of the spillover instrument in the FTI equation.
  double instrument_strength = 1.0;
  /// AR(1) coefficient of FTI; relevance of the lag instrument.
  double fti_autocorr = 0.6;
  /// When true, unit 1 is made stage-wise dominant so its efficiency is 1.
  bool place_frontier_unit = true;
  /// Optional distinct effect for listed units (heterogeneity tests);
  /// NaN means identical effect.
  double fintech_effect_listed = std::numeric_limits<double>::quiet_NaN();

  void check() const;
  nlohmann::json truth_json() const;
};

/// Deterministic synthetic panel: DEA stage variables on a Cobb-Douglas
/// frontier plus the full regression block with known coefficients. The
/// truth is recorded in panel metadata under "truth".
Panel generate(const DgpConfig& config);

}  // namespace fsdea
