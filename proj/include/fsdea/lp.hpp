#pragma once

#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "fsdea/errors.hpp"

namespace fsdea {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { Le, Eq, Ge };

struct LpVariable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
};

struct LpConstraint {
  std::string name;
  std::vector<std::pair<int, double>> coeffs;  // (variable index, value)
  Relation rel = Relation::Le;
  double rhs = 0.0;
};

/// Maximization LP over bounded variables. Free variables are expressed by
/// (-inf, +inf) bounds, not by sign splitting, so their optimal values carry
/// sign information directly.
struct LinearProgram {
  std::vector<LpVariable> variables;
  std::vector<std::pair<int, double>> objective;  // maximize
  std::vector<LpConstraint> constraints;

  int add_variable(const std::string& name, double lower = 0.0, double upper = kInf);
  void set_objective(int var, double coeff);
  int add_constraint(const std::string& name, Relation rel, double rhs);
  void add_coeff(int constraint, int var, double value);

  void check_well_formed() const;
  /// Fixed-format MPS dump for cross-checking with external solvers.
  void write_mps(std::ostream& out, const std::string& name = "FSDEA") const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpOptions {
  double feasibility_tol = 1e-8;
  double optimality_tol = 1e-9;
  int iteration_limit = 50000;
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> values;
  int iterations = 0;
};

const char* lp_status_name(LpStatus s);

/// Revised simplex (dense basis inverse, bounded variables, two phases).
/// Dantzig pricing with lowest-index tie breaking; Bland's rule takes over
/// after a run of degenerate pivots. Deterministic for fixed input.
LpSolution solve(const LinearProgram& lp, const LpOptions& options = {});

}  // namespace fsdea
