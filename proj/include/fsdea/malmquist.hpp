#pragma once

#include <string>
#include <vector>

#include "fsdea/netdea.hpp"
#include "fsdea/panel.hpp"

namespace fsdea {

/// Four distance scores for one unit across a year pair. Superscript is the
/// frontier period, argument the data period.
struct ScoreQuadruple {
  double same_t = 1.0;       // theta^t(t)
  double cross_t = 1.0;      // theta^t(t+1)
  double cross_next = 1.0;   // theta^{t+1}(t)
  double same_next = 1.0;    // theta^{t+1}(t+1)
};

double malmquist(const ScoreQuadruple& q);

struct Decomposition {
  double ec = 1.0;
  double tc = 1.0;
};
Decomposition decompose(const ScoreQuadruple& q);

struct MalmquistRecord {
  std::string unit;
  int year_from = 0;
  int year_to = 0;
  double mi = 1.0;
  double ec = 1.0;
  double tc = 1.0;
  std::vector<double> stage_mi;  // deposit, loan, profitability for 3 stages
};

struct FsiOptions {
  NetDeaOptions dea;
  /// Positivity floor used when shifting DEA columns over each year pair.
  double shift_floor = 0.1;
};

struct FsiResult {
  Panel panel;  // input panel plus FSI, EC, TC, stage MI columns
  std::vector<MalmquistRecord> records;
  int solves = 0;
  int optimal = 0;
  std::vector<std::string> skipped;  // "unit@year" pairs left unscored
};

/// Runs the four cross/same-period DEA passes for every consecutive year
/// pair and writes the indices at the later year; the first panel year keeps
/// missing index cells.
FsiResult fsi_panel(const Panel& panel, const NetworkSpec& spec,
                    const FsiOptions& options = {});

std::vector<std::string> stage_mi_names(int n_stages);

}  // namespace fsdea
