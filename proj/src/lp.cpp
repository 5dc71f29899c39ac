#include "fsdea/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

namespace fsdea {

int LinearProgram::add_variable(const std::string& name, double lower, double upper) {
  variables.push_back({name, lower, upper});
  return static_cast<int>(variables.size()) - 1;
}

void LinearProgram::set_objective(int var, double coeff) {
  objective.emplace_back(var, coeff);
}

int LinearProgram::add_constraint(const std::string& name, Relation rel, double rhs) {
  constraints.push_back({name, {}, rel, rhs});
  return static_cast<int>(constraints.size()) - 1;
}

void LinearProgram::add_coeff(int constraint, int var, double value) {
  constraints[constraint].coeffs.emplace_back(var, value);
}

void LinearProgram::check_well_formed() const {
  const int n = static_cast<int>(variables.size());
  for (const auto& v : variables)
    if (!(v.lower <= v.upper))
      throw SpecError("variable " + v.name + ": lower bound exceeds upper bound");
  for (const auto& [j, c] : objective) {
    (void)c;
    if (j < 0 || j >= n) throw SpecError("objective references unknown variable");
  }
  for (const auto& row : constraints)
    for (const auto& [j, c] : row.coeffs) {
      (void)c;
      if (j < 0 || j >= n)
        throw SpecError("constraint " + row.name + " references unknown variable");
    }
}

void LinearProgram::write_mps(std::ostream& out, const std::string& name) const {
  char buf[128];
  out << "NAME          " << name << "\n";
  out << "OBJSENSE\n    MAX\n";
  out << "ROWS\n N  OBJ\n";
  for (const auto& row : constraints) {
    const char rel = row.rel == Relation::Le ? 'L' : row.rel == Relation::Ge ? 'G' : 'E';
    out << ' ' << rel << "  " << row.name << "\n";
  }
  out << "COLUMNS\n";
  std::vector<double> obj(variables.size(), 0.0);
  for (const auto& [j, c] : objective) obj[j] += c;
  for (size_t j = 0; j < variables.size(); ++j) {
    if (obj[j] != 0.0) {
      std::snprintf(buf, sizeof(buf), "    %-10s%-10s%.12g\n",
                    variables[j].name.c_str(), "OBJ", obj[j]);
      out << buf;
    }
    for (const auto& row : constraints)
      for (const auto& [k, c] : row.coeffs)
        if (static_cast<size_t>(k) == j) {
          std::snprintf(buf, sizeof(buf), "    %-10s%-10s%.12g\n",
                        variables[j].name.c_str(), row.name.c_str(), c);
          out << buf;
        }
  }
  out << "RHS\n";
  for (const auto& row : constraints)
    if (row.rhs != 0.0) {
      std::snprintf(buf, sizeof(buf), "    %-10s%-10s%.12g\n", "RHS", row.name.c_str(),
                    row.rhs);
      out << buf;
    }
  out << "BOUNDS\n";
  for (const auto& v : variables) {
    if (v.lower == -kInf && v.upper == kInf) {
      std::snprintf(buf, sizeof(buf), " FR %-10s%-10s\n", "BND", v.name.c_str());
      out << buf;
      continue;
    }
    if (v.lower != 0.0) {
      std::snprintf(buf, sizeof(buf), " LO %-10s%-10s%.12g\n", "BND", v.name.c_str(),
                    v.lower);
      out << buf;
    }
    if (v.upper != kInf) {
      std::snprintf(buf, sizeof(buf), " UP %-10s%-10s%.12g\n", "BND", v.name.c_str(),
                    v.upper);
      out << buf;
    }
  }
  out << "ENDATA\n";
}

const char* lp_status_name(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration-limit";
  }
  return "?";
}

namespace {

enum class VarState { Basic, AtLower, AtUpper, FreeZero };

struct Simplex {
  // Columns of the equality-form problem [A | slacks | artificials].
  std::vector<std::vector<std::pair<int, double>>> cols;
  std::vector<double> lb, ub, cost;  // phase-2 cost
  std::vector<double> b;
  std::vector<VarState> state;
  std::vector<int> basis;    // column basic in each row
  std::vector<double> x;     // current value of every column
  std::vector<double> binv;  // m x m row-major
  int m = 0;
  int n_struct = 0;
  int iterations = 0;
  int degenerate_streak = 0;
  bool bland = false;
  const LpOptions* opt = nullptr;

  double& Binv(int i, int j) { return binv[static_cast<size_t>(i) * m + j]; }

  void refactor() {
    // Gauss-Jordan inverse of the current basis matrix.
    std::vector<double> mat(static_cast<size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i) {
      for (const auto& [r, v] : cols[basis[i]]) mat[static_cast<size_t>(r) * m + i] = v;
    }
    std::fill(binv.begin(), binv.end(), 0.0);
    for (int i = 0; i < m; ++i) Binv(i, i) = 1.0;
    for (int c = 0; c < m; ++c) {
      int piv = c;
      double best = std::fabs(mat[static_cast<size_t>(c) * m + c]);
      for (int r = c + 1; r < m; ++r) {
        const double a = std::fabs(mat[static_cast<size_t>(r) * m + c]);
        if (a > best) {
          best = a;
          piv = r;
        }
      }
      if (best < 1e-14) throw SolverError("singular basis during refactorization");
      if (piv != c) {
        for (int j = 0; j < m; ++j) {
          std::swap(mat[static_cast<size_t>(piv) * m + j], mat[static_cast<size_t>(c) * m + j]);
          std::swap(Binv(piv, j), Binv(c, j));
        }
      }
      const double d = mat[static_cast<size_t>(c) * m + c];
      for (int j = 0; j < m; ++j) {
        mat[static_cast<size_t>(c) * m + j] /= d;
        Binv(c, j) /= d;
      }
      for (int r = 0; r < m; ++r) {
        if (r == c) continue;
        const double f = mat[static_cast<size_t>(r) * m + c];
        if (f == 0.0) continue;
        for (int j = 0; j < m; ++j) {
          mat[static_cast<size_t>(r) * m + j] -= f * mat[static_cast<size_t>(c) * m + j];
          Binv(r, j) -= f * Binv(c, j);
        }
      }
    }
    recompute_basics();
  }

  void recompute_basics() {
    // x_B = Binv * (b - A_N x_N)
    std::vector<double> rhs = b;
    for (size_t j = 0; j < cols.size(); ++j) {
      if (state[j] == VarState::Basic || x[j] == 0.0) continue;
      for (const auto& [r, v] : cols[j]) rhs[r] -= v * x[j];
    }
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      for (int r = 0; r < m; ++r) s += Binv(i, r) * rhs[r];
      x[basis[i]] = s;
    }
  }

  // One simplex phase over the given objective; returns true when optimal.
  // Sets *unbounded on an unbounded ray.
  bool run(const std::vector<double>& c, bool* unbounded) {
    *unbounded = false;
    const int ncols = static_cast<int>(cols.size());
    std::vector<double> y(m), w(m);
    while (iterations < opt->iteration_limit) {
      // y = c_B' Binv
      std::fill(y.begin(), y.end(), 0.0);
      for (int i = 0; i < m; ++i) {
        const double cb = c[basis[i]];
        if (cb == 0.0) continue;
        for (int j = 0; j < m; ++j) y[j] += cb * Binv(i, j);
      }
      // Price nonbasic columns.
      int enter = -1, dir = 0;
      double best = 0.0;
      for (int j = 0; j < ncols; ++j) {
        if (state[j] == VarState::Basic) continue;
        if (lb[j] == ub[j]) continue;  // fixed
        double d = c[j];
        for (const auto& [r, v] : cols[j]) d -= y[r] * v;
        int cand_dir = 0;
        if (state[j] == VarState::AtLower && d > opt->optimality_tol) cand_dir = 1;
        else if (state[j] == VarState::AtUpper && d < -opt->optimality_tol) cand_dir = -1;
        else if (state[j] == VarState::FreeZero && std::fabs(d) > opt->optimality_tol)
          cand_dir = d > 0.0 ? 1 : -1;
        if (cand_dir == 0) continue;
        if (bland) {
          enter = j;
          dir = cand_dir;
          break;
        }
        if (std::fabs(d) > best) {
          best = std::fabs(d);
          enter = j;
          dir = cand_dir;
        }
      }
      if (enter < 0) return true;  // optimal for this phase

      // w = Binv * A_enter
      std::fill(w.begin(), w.end(), 0.0);
      for (const auto& [r, v] : cols[enter]) {
        for (int i = 0; i < m; ++i) w[i] += Binv(i, r) * v;
      }

      double t_max = kInf;  // entering's own bound range
      if (lb[enter] > -kInf && ub[enter] < kInf) t_max = ub[enter] - lb[enter];
      double t_best = kInf;
      int leave_row = -1;
      for (int i = 0; i < m; ++i) {
        const double g = -dir * w[i];  // change rate of basic i
        const int bj = basis[i];
        if (g < -1e-11) {
          if (lb[bj] == -kInf) continue;
          const double t = (x[bj] - lb[bj]) / (-g);
          if (t < t_best - 1e-12 ||
              (t < t_best + 1e-12 && (leave_row < 0 || bj < basis[leave_row]))) {
            t_best = std::max(t, 0.0);
            leave_row = i;
          }
        } else if (g > 1e-11) {
          if (ub[bj] == kInf) continue;
          const double t = (ub[bj] - x[bj]) / g;
          if (t < t_best - 1e-12 ||
              (t < t_best + 1e-12 && (leave_row < 0 || bj < basis[leave_row]))) {
            t_best = std::max(t, 0.0);
            leave_row = i;
          }
        }
      }

      ++iterations;
      if (t_best == kInf && t_max == kInf) {
        *unbounded = true;
        return false;
      }

      if (t_max <= t_best) {
        // Bound flip, no basis change.
        for (int i = 0; i < m; ++i) x[basis[i]] -= dir * t_max * w[i];
        x[enter] = state[enter] == VarState::AtLower ? ub[enter] : lb[enter];
        state[enter] =
            state[enter] == VarState::AtLower ? VarState::AtUpper : VarState::AtLower;
        note_step(t_max);
        continue;
      }

      const double t = t_best;
      for (int i = 0; i < m; ++i) x[basis[i]] -= dir * t * w[i];
      x[enter] += dir * t;

      const int leave = basis[leave_row];
      // Leaving variable lands on whichever of its bounds it hit.
      if (lb[leave] == ub[leave]) {
        x[leave] = lb[leave];
        state[leave] = VarState::AtLower;
      } else if (ub[leave] < kInf &&
                 std::fabs(x[leave] - ub[leave]) <= std::fabs(x[leave] - lb[leave])) {
        x[leave] = ub[leave];
        state[leave] = VarState::AtUpper;
      } else {
        x[leave] = lb[leave];
        state[leave] = VarState::AtLower;
      }

      const double wr = w[leave_row];
      for (int i = 0; i < m; ++i) {
        if (i == leave_row) continue;
        const double f = w[i] / wr;
        if (f == 0.0) continue;
        for (int j = 0; j < m; ++j) Binv(i, j) -= f * Binv(leave_row, j);
      }
      for (int j = 0; j < m; ++j) Binv(leave_row, j) /= wr;

      basis[leave_row] = enter;
      state[enter] = VarState::Basic;
      note_step(t);
      if (iterations % 500 == 0) refactor();
    }
    return false;  // iteration limit
  }

  void note_step(double t) {
    if (t < 1e-10) {
      if (++degenerate_streak > 60) bland = true;
    } else {
      degenerate_streak = 0;
      bland = false;
    }
  }
};

}  // namespace

LpSolution solve(const LinearProgram& lp, const LpOptions& options) {
  lp.check_well_formed();
  Simplex s;
  s.opt = &options;
  s.m = static_cast<int>(lp.constraints.size());
  s.n_struct = static_cast<int>(lp.variables.size());

  const int m = s.m;
  s.cols.resize(s.n_struct);
  s.lb.resize(s.n_struct);
  s.ub.resize(s.n_struct);
  for (int j = 0; j < s.n_struct; ++j) {
    s.lb[j] = lp.variables[j].lower;
    s.ub[j] = lp.variables[j].upper;
  }
  s.b.resize(m);
  for (int i = 0; i < m; ++i) {
    s.b[i] = lp.constraints[i].rhs;
    for (const auto& [j, v] : lp.constraints[i].coeffs)
      if (v != 0.0) s.cols[j].emplace_back(i, v);
  }
  // Slack per row.
  std::vector<int> slack_of(m);
  for (int i = 0; i < m; ++i) {
    slack_of[i] = static_cast<int>(s.cols.size());
    s.cols.push_back({{i, 1.0}});
    switch (lp.constraints[i].rel) {
      case Relation::Le:
        s.lb.push_back(0.0);
        s.ub.push_back(kInf);
        break;
      case Relation::Ge:
        s.lb.push_back(-kInf);
        s.ub.push_back(0.0);
        break;
      case Relation::Eq:
        s.lb.push_back(0.0);
        s.ub.push_back(0.0);
        break;
    }
  }

  // Initial point: structurals at their nearest finite bound (0 if free).
  s.x.assign(s.cols.size(), 0.0);
  s.state.assign(s.cols.size(), VarState::AtLower);
  for (int j = 0; j < s.n_struct; ++j) {
    if (s.lb[j] > -kInf) {
      s.x[j] = s.lb[j];
      s.state[j] = VarState::AtLower;
    } else if (s.ub[j] < kInf) {
      s.x[j] = s.ub[j];
      s.state[j] = VarState::AtUpper;
    } else {
      s.x[j] = 0.0;
      s.state[j] = VarState::FreeZero;
    }
  }

  // Residual with all structurals at their start values and slacks at 0.
  std::vector<double> resid = s.b;
  for (int j = 0; j < s.n_struct; ++j) {
    if (s.x[j] == 0.0) continue;
    for (const auto& [r, v] : s.cols[j]) resid[r] -= v * s.x[j];
  }

  s.basis.resize(m);
  std::vector<int> artificials;
  for (int i = 0; i < m; ++i) {
    const int sj = slack_of[i];
    if (resid[i] >= s.lb[sj] - options.feasibility_tol &&
        resid[i] <= s.ub[sj] + options.feasibility_tol) {
      s.basis[i] = sj;
      s.state[sj] = VarState::Basic;
      s.x[sj] = resid[i];
    } else {
      // Slack pinned at its nearest bound, artificial absorbs the rest.
      const double sv = std::clamp(resid[i], s.lb[sj], s.ub[sj]);
      s.x[sj] = sv;
      s.state[sj] = sv == s.lb[sj] ? VarState::AtLower : VarState::AtUpper;
      const double gap = resid[i] - sv;
      const int aj = static_cast<int>(s.cols.size());
      s.cols.push_back({{i, gap >= 0.0 ? 1.0 : -1.0}});
      s.lb.push_back(0.0);
      s.ub.push_back(kInf);
      s.x.push_back(std::fabs(gap));
      s.state.push_back(VarState::Basic);
      s.basis[i] = aj;
      artificials.push_back(aj);
    }
  }

  s.binv.assign(static_cast<size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) {
    const auto& col = s.cols[s.basis[i]];
    s.Binv(i, i) = 1.0 / col.front().second;  // unit columns, possibly negated
  }

  LpSolution sol;
  bool unbounded = false;

  if (!artificials.empty()) {
    std::vector<double> c1(s.cols.size(), 0.0);
    for (int aj : artificials) c1[aj] = -1.0;
    const bool opt1 = s.run(c1, &unbounded);
    if (!opt1 && !unbounded) {
      sol.status = LpStatus::IterationLimit;
      sol.iterations = s.iterations;
      return sol;
    }
    double infeas = 0.0;
    for (int aj : artificials) infeas += s.x[aj];
    if (infeas > options.feasibility_tol * (1.0 + std::fabs(infeas))) {
      sol.status = LpStatus::Infeasible;
      sol.iterations = s.iterations;
      return sol;
    }
    // Artificials may not re-enter.
    for (int aj : artificials) {
      s.lb[aj] = 0.0;
      s.ub[aj] = 0.0;
      if (s.state[aj] != VarState::Basic) s.x[aj] = 0.0;
    }
  }

  std::vector<double> c2(s.cols.size(), 0.0);
  for (const auto& [j, v] : lp.objective) c2[j] += v;
  const bool opt2 = s.run(c2, &unbounded);
  sol.iterations = s.iterations;
  if (unbounded) {
    sol.status = LpStatus::Unbounded;
    return sol;
  }
  sol.status = opt2 ? LpStatus::Optimal : LpStatus::IterationLimit;
  sol.values.assign(s.x.begin(), s.x.begin() + s.n_struct);
  sol.objective = 0.0;
  for (const auto& [j, v] : lp.objective) sol.objective += v * s.x[j];
  return sol;
}

}  // namespace fsdea
