#include <algorithm>
#include <cmath>
#include <string>

#include "basis_factor.hpp"
#include "rasddp/lp.hpp"

namespace rasddp {

void SparseMatrix::multiply_add(const std::vector<double>& x, std::vector<double>& y) const {
  for (const Triplet& t : entries) y[t.row] += t.value * x[t.col];
}

void SparseMatrix::transpose_multiply_add(const std::vector<double>& x,
                                          std::vector<double>& y) const {
  for (const Triplet& t : entries) y[t.col] += t.value * x[t.row];
}

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
  }
  return "?";
}

std::string LinearProgram::structural_error() const {
  const int n = num_vars();
  const int m = num_rows();
  if (static_cast<int>(var_lower.size()) != n || static_cast<int>(var_upper.size()) != n) {
    return "bound vectors do not match the number of variables";
  }
  if (eq_matrix.rows != m || eq_matrix.cols != n) {
    return "matrix dimensions do not match objective/rhs";
  }
  for (const Triplet& t : eq_matrix.entries) {
    if (t.row < 0 || t.row >= m || t.col < 0 || t.col >= n) return "triplet index out of range";
    if (!std::isfinite(t.value)) return "non-finite matrix coefficient";
  }
  for (int j = 0; j < n; ++j) {
    if (!std::isfinite(objective[j])) return "non-finite objective coefficient";
    if (std::isnan(var_lower[j]) || std::isnan(var_upper[j])) return "NaN bound";
    if (var_lower[j] > var_upper[j]) return "lower bound exceeds upper bound";
    if (var_lower[j] == kInf || var_upper[j] == -kInf) return "infinite bound on wrong side";
  }
  for (double v : eq_rhs) {
    if (!std::isfinite(v)) return "non-finite right-hand side";
  }
  return {};
}

namespace {
enum class Outcome { Optimal, Infeasible, Unbounded };
}

struct SimplexSolver::Work {
  const SimplexOptions& opt;
  explicit Work(const SimplexOptions& o) : opt(o) {}

  int n = 0;
  int m = 0;
  int total = 0;
  std::vector<int> col_start;
  std::vector<int> row_idx;
  std::vector<double> val;
  std::vector<double> one{1.0};
  std::vector<int> art_row;

  std::vector<double> cost, lb, ub, x, rhs;
  std::vector<VarStatus> status;
  std::vector<int> head;
  std::vector<int> posn;

  detail::BasisFactor factor;
  std::vector<double> y, d, alpha, rho_row, row_alpha;
  int iterations = 0;

  void load(const LinearProgram& lp) {
    n = lp.num_vars();
    m = lp.num_rows();
    total = n + m;
    // Column-compressed copy with duplicates summed.
    std::vector<Triplet> t = lp.eq_matrix.entries;
    std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
      return a.col != b.col ? a.col < b.col : a.row < b.row;
    });
    col_start.assign(n + 1, 0);
    row_idx.clear();
    val.clear();
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (!row_idx.empty() && k > 0 && t[k].col == t[k - 1].col && t[k].row == t[k - 1].row) {
        val.back() += t[k].value;
        continue;
      }
      row_idx.push_back(t[k].row);
      val.push_back(t[k].value);
      col_start[t[k].col + 1] = static_cast<int>(row_idx.size());
    }
    for (int j = 0; j < n; ++j) col_start[j + 1] = std::max(col_start[j + 1], col_start[j]);
    art_row.resize(m);
    for (int i = 0; i < m; ++i) art_row[i] = i;

    cost.assign(total, 0.0);
    lb.assign(total, 0.0);
    ub.assign(total, 0.0);
    for (int j = 0; j < n; ++j) {
      cost[j] = lp.objective[j];
      lb[j] = lp.var_lower[j];
      ub[j] = lp.var_upper[j];
    }
    rhs = lp.eq_rhs;
    x.assign(total, 0.0);
    status.assign(total, VarStatus::AtLower);
    head.assign(m, -1);
    posn.assign(total, -1);
    y.assign(m, 0.0);
    d.assign(total, 0.0);
    alpha.assign(m, 0.0);
    rho_row.assign(m, 0.0);
    row_alpha.assign(total, 0.0);
    iterations = 0;
  }

  detail::ColumnView column(int j) const {
    if (j < n) {
      return {row_idx.data() + col_start[j], val.data() + col_start[j],
              col_start[j + 1] - col_start[j]};
    }
    return {art_row.data() + (j - n), one.data(), 1};
  }

  double dot_column(int j, const std::vector<double>& v) const {
    if (j >= n) return v[j - n];
    double s = 0.0;
    for (int k = col_start[j]; k < col_start[j + 1]; ++k) s += val[k] * v[row_idx[k]];
    return s;
  }

  void load_column(int j, std::vector<double>& out) const {
    std::fill(out.begin(), out.end(), 0.0);
    if (j >= n) {
      out[j - n] = 1.0;
      return;
    }
    for (int k = col_start[j]; k < col_start[j + 1]; ++k) out[row_idx[k]] += val[k];
  }

  bool fixed(int j) const { return lb[j] == ub[j]; }

  void place_nonbasic(int j, VarStatus s) {
    if (s == VarStatus::AtLower && lb[j] == -kInf) s = ub[j] < kInf ? VarStatus::AtUpper : VarStatus::Free;
    if (s == VarStatus::AtUpper && ub[j] == kInf) s = lb[j] > -kInf ? VarStatus::AtLower : VarStatus::Free;
    if (s == VarStatus::Free && lb[j] > -kInf) s = VarStatus::AtLower;
    if (s == VarStatus::Free && ub[j] < kInf) s = VarStatus::AtUpper;
    status[j] = s;
    posn[j] = -1;
    x[j] = s == VarStatus::AtLower ? lb[j] : (s == VarStatus::AtUpper ? ub[j] : 0.0);
  }

  void cold_basis() {
    for (int j = 0; j < n; ++j) place_nonbasic(j, VarStatus::AtLower);
    for (int i = 0; i < m; ++i) {
      const int j = n + i;
      status[j] = VarStatus::Basic;
      head[i] = j;
      posn[j] = i;
    }
  }

  bool warm_basis(const Basis& start) {
    if (static_cast<int>(start.status.size()) != total) return false;
    int basics = 0;
    for (VarStatus s : start.status) basics += s == VarStatus::Basic;
    if (basics != m) return false;
    int p = 0;
    for (int j = 0; j < total; ++j) {
      if (start.status[j] == VarStatus::Basic) {
        status[j] = VarStatus::Basic;
        head[p] = j;
        posn[j] = p++;
      } else {
        place_nonbasic(j, start.status[j]);
      }
    }
    return true;
  }

  bool refactor() {
    std::vector<detail::ColumnView> cols(m);
    for (int i = 0; i < m; ++i) cols[i] = column(head[i]);
    return factor.factorize(m, cols);
  }

  void recompute_basic_values() {
    std::vector<double> r = rhs;
    for (int j = 0; j < total; ++j) {
      if (status[j] == VarStatus::Basic || x[j] == 0.0) continue;
      const auto c = column(j);
      for (int k = 0; k < c.size; ++k) r[c.rows[k]] -= c.values[k] * x[j];
    }
    factor.ftran(r);
    for (int i = 0; i < m; ++i) x[head[i]] = r[i];
  }

  double ptol(double bound) const { return opt.primal_tolerance * std::max(1.0, std::abs(bound)); }
  double dtol(int j) const { return opt.dual_tolerance * std::max(1.0, std::abs(cost[j])); }
  bool below(int j) const { return x[j] < lb[j] - ptol(lb[j]); }
  bool above(int j) const { return x[j] > ub[j] + ptol(ub[j]); }

  /// y = B^{-T} c_B and d_j = c_j - a_j^T y for nonbasic j.
  void compute_duals(bool phase_one) {
    for (int i = 0; i < m; ++i) {
      const int j = head[i];
      if (phase_one) {
        y[i] = below(j) ? -1.0 : (above(j) ? 1.0 : 0.0);
      } else {
        y[i] = cost[j];
      }
    }
    factor.btran(y);
    for (int j = 0; j < total; ++j) {
      if (status[j] == VarStatus::Basic) {
        d[j] = 0.0;
        continue;
      }
      d[j] = (phase_one ? 0.0 : cost[j]) - dot_column(j, y);
    }
  }

  void tick() {
    if (++iterations > opt.max_iterations) throw LpError("solver stalled");
  }

  void maybe_refactor() {
    if (factor.updates() >= opt.refactor_interval) {
      if (!refactor()) throw LpError("solver stalled: singular basis on refactorisation");
      recompute_basic_values();
    }
  }

  void pivot(int r, int q) {
    const int leaving = head[r];
    factor.update(r, alpha);
    head[r] = q;
    posn[q] = r;
    status[q] = VarStatus::Basic;
    posn[leaving] = -1;
  }

  Outcome primal() {
    bool bland = false;
    int degenerate = 0;
    std::vector<int> rejected;
    for (;;) {
      maybe_refactor();
      bool phase_one = false;
      for (int i = 0; i < m && !phase_one; ++i) phase_one = below(head[i]) || above(head[i]);
      compute_duals(phase_one);

      int q = -1;
      double best = 0.0;
      for (int j = 0; j < total; ++j) {
        const VarStatus s = status[j];
        if (s == VarStatus::Basic || fixed(j)) continue;
        const double tol = phase_one ? opt.dual_tolerance : dtol(j);
        double score = 0.0;
        if (s == VarStatus::AtLower && d[j] < -tol) score = -d[j];
        else if (s == VarStatus::AtUpper && d[j] > tol) score = d[j];
        else if (s == VarStatus::Free && std::abs(d[j]) > tol) score = std::abs(d[j]);
        if (score == 0.0) continue;
        if (std::find(rejected.begin(), rejected.end(), j) != rejected.end()) continue;
        if (bland) {
          q = j;
          break;
        }
        if (score > best) {
          best = score;
          q = j;
        }
      }
      if (q < 0) return phase_one ? Outcome::Infeasible : Outcome::Optimal;
      tick();

      const double dir = d[q] < 0.0 ? 1.0 : -1.0;
      load_column(q, alpha);
      factor.ftran(alpha);

      int r = -1;
      double theta = kInf;
      double best_abs = 0.0;
      bool to_upper = false;
      for (int i = 0; i < m; ++i) {
        const double a = alpha[i];
        if (std::abs(a) <= opt.pivot_tolerance) continue;
        const double rate = -dir * a;
        const int j = head[i];
        double ratio;
        bool up;
        if (phase_one && below(j)) {
          if (rate <= 0.0) continue;
          ratio = (lb[j] - x[j]) / rate;
          up = false;
        } else if (phase_one && above(j)) {
          if (rate >= 0.0) continue;
          ratio = (ub[j] - x[j]) / rate;
          up = true;
        } else if (rate < 0.0) {
          if (lb[j] == -kInf) continue;
          ratio = (x[j] - lb[j]) / -rate;
          up = false;
        } else {
          if (ub[j] == kInf) continue;
          ratio = (ub[j] - x[j]) / rate;
          up = true;
        }
        ratio = std::max(ratio, 0.0);
        const double slack = 1e-12 * std::max(1.0, theta == kInf ? 1.0 : theta);
        bool take = false;
        if (ratio < theta - slack) {
          take = true;
        } else if (ratio <= theta + slack) {
          take = bland ? head[i] < head[r] : std::abs(a) > best_abs;
        }
        if (take) {
          theta = ratio;
          r = i;
          best_abs = std::abs(a);
          to_upper = up;
        }
      }

      const double span = ub[q] - lb[q];
      if (std::isfinite(span) && span <= theta) {
        // Entering variable runs to its opposite bound first.
        for (int i = 0; i < m; ++i) x[head[i]] -= dir * span * alpha[i];
        if (status[q] == VarStatus::AtLower) {
          status[q] = VarStatus::AtUpper;
          x[q] = ub[q];
        } else {
          status[q] = VarStatus::AtLower;
          x[q] = lb[q];
        }
        degenerate = 0;
        bland = false;
        rejected.clear();
        continue;
      }
      if (r < 0) {
        if (!phase_one) return Outcome::Unbounded;
        rejected.push_back(q);
        continue;
      }
      rejected.clear();

      x[q] += dir * theta;
      for (int i = 0; i < m; ++i) {
        if (i != r) x[head[i]] -= dir * theta * alpha[i];
      }
      const int leaving = head[r];
      x[leaving] = to_upper ? ub[leaving] : lb[leaving];
      status[leaving] = to_upper ? VarStatus::AtUpper : VarStatus::AtLower;
      pivot(r, q);

      if (theta <= 1e-12) {
        if (++degenerate > opt.degenerate_limit) bland = true;
      } else {
        degenerate = 0;
        bland = false;
      }
    }
  }

  /// Flips boxed nonbasic columns with wrong-signed reduced cost. Returns
  /// false when some column cannot be made dual feasible.
  bool make_dual_feasible() {
    compute_duals(false);
    bool ok = true;
    for (int j = 0; j < total; ++j) {
      const VarStatus s = status[j];
      if (s == VarStatus::Basic || fixed(j)) continue;
      const double tol = dtol(j);
      if (s == VarStatus::AtLower && d[j] < -tol) {
        if (ub[j] < kInf) place_nonbasic(j, VarStatus::AtUpper);
        else ok = false;
      } else if (s == VarStatus::AtUpper && d[j] > tol) {
        if (lb[j] > -kInf) place_nonbasic(j, VarStatus::AtLower);
        else ok = false;
      } else if (s == VarStatus::Free && std::abs(d[j]) > tol) {
        ok = false;
      }
    }
    return ok;
  }

  Outcome dual() {
    bool bland = false;
    int degenerate = 0;
    for (;;) {
      maybe_refactor();
      int r = -1;
      double worst = 0.0;
      for (int i = 0; i < m; ++i) {
        const int j = head[i];
        double infeas = 0.0;
        if (below(j)) infeas = lb[j] - x[j];
        else if (above(j)) infeas = x[j] - ub[j];
        if (infeas <= 0.0) continue;
        if (bland) {
          if (r < 0 || head[i] < head[r]) r = i;
        } else if (infeas > worst) {
          worst = infeas;
          r = i;
        }
      }
      if (r < 0) return Outcome::Optimal;
      tick();

      const int leaving = head[r];
      const bool increase = below(leaving);
      compute_duals(false);
      std::fill(rho_row.begin(), rho_row.end(), 0.0);
      rho_row[r] = 1.0;
      factor.btran(rho_row);

      int q = -1;
      double best_ratio = kInf;
      double best_abs = 0.0;
      for (int j = 0; j < total; ++j) {
        const VarStatus s = status[j];
        if (s == VarStatus::Basic || fixed(j)) continue;
        const double a = dot_column(j, rho_row);
        if (std::abs(a) <= opt.pivot_tolerance) continue;
        bool eligible;
        if (increase) {
          eligible = (s == VarStatus::AtLower && a < 0.0) || (s == VarStatus::AtUpper && a > 0.0) ||
                     s == VarStatus::Free;
        } else {
          eligible = (s == VarStatus::AtLower && a > 0.0) || (s == VarStatus::AtUpper && a < 0.0) ||
                     s == VarStatus::Free;
        }
        if (!eligible) continue;
        double dj = d[j];
        if (s == VarStatus::AtLower) dj = std::max(dj, 0.0);
        else if (s == VarStatus::AtUpper) dj = std::min(dj, 0.0);
        const double ratio = std::abs(dj) / std::abs(a);
        const double slack = 1e-12 * std::max(1.0, best_ratio == kInf ? 1.0 : best_ratio);
        bool take = false;
        if (ratio < best_ratio - slack) take = true;
        else if (ratio <= best_ratio + slack) take = bland ? j < q : std::abs(a) > best_abs;
        if (take) {
          best_ratio = ratio;
          best_abs = std::abs(a);
          q = j;
        }
      }
      if (q < 0) return Outcome::Infeasible;

      load_column(q, alpha);
      factor.ftran(alpha);
      const double target = increase ? lb[leaving] : ub[leaving];
      const double pivot_value = alpha[r];
      if (std::abs(pivot_value) <= opt.pivot_tolerance) {
        // Row and column computations disagree; rebuild the factor.
        if (!refactor()) throw LpError("solver stalled: singular basis");
        recompute_basic_values();
        bland = true;
        continue;
      }
      const double step = (x[leaving] - target) / pivot_value;
      x[q] += step;
      for (int i = 0; i < m; ++i) {
        if (i != r) x[head[i]] -= step * alpha[i];
      }
      x[leaving] = target;
      status[leaving] = increase ? VarStatus::AtLower : VarStatus::AtUpper;
      pivot(r, q);

      if (best_ratio <= 1e-12) {
        if (++degenerate > opt.degenerate_limit) bland = true;
      } else {
        degenerate = 0;
        bland = false;
      }
    }
  }

  LpSolution finish(Outcome outcome) {
    LpSolution sol;
    sol.iterations = iterations;
    sol.status = outcome == Outcome::Optimal     ? LpStatus::Optimal
                 : outcome == Outcome::Unbounded ? LpStatus::Unbounded
                                                 : LpStatus::Infeasible;
    sol.basis.status = status;
    if (outcome != Outcome::Optimal) return sol;
    compute_duals(false);
    sol.primal.assign(x.begin(), x.begin() + n);
    double obj = 0.0;
    for (int j = 0; j < n; ++j) obj += cost[j] * x[j];
    sol.objective_value = obj;
    sol.eq_duals = y;
    sol.bound_duals.assign(d.begin(), d.begin() + n);
    return sol;
  }

  Outcome run_from_current(bool try_dual) {
    Outcome out;
    if (try_dual && make_dual_feasible()) {
      recompute_basic_values();
      out = dual();
      if (out == Outcome::Infeasible) return out;
    } else {
      recompute_basic_values();
    }
    for (int pass = 0; pass < 3; ++pass) {
      const int before = iterations;
      out = primal();
      if (out != Outcome::Optimal) return out;
      if (factor.updates() == 0 && iterations == before) break;
      if (!refactor()) throw LpError("solver stalled: singular basis on refactorisation");
      recompute_basic_values();
    }
    return out;
  }
};

SimplexSolver::SimplexSolver(SimplexOptions options) : options_(options) {}
SimplexSolver::~SimplexSolver() = default;
SimplexSolver::SimplexSolver(SimplexSolver&&) noexcept = default;
SimplexSolver& SimplexSolver::operator=(SimplexSolver&&) noexcept = default;

LpSolution SimplexSolver::solve(const LinearProgram& lp) { return solve(lp, Basis{}); }

LpSolution SimplexSolver::solve(const LinearProgram& lp, const Basis& start) {
  if (const std::string err = lp.structural_error(); !err.empty()) {
    throw LpError("malformed LP: " + err);
  }
  if (!work_) work_ = std::make_unique<Work>(options_);
  Work& w = *work_;
  w.load(lp);

  bool warm = !start.empty() && w.warm_basis(start) && w.refactor();
  if (!warm) {
    w.cold_basis();
    if (!w.refactor()) throw LpError("solver stalled: singular initial basis");
  }
  return w.finish(w.run_from_current(warm));
}

LpSolution solve(const LinearProgram& lp) {
  SimplexSolver solver;
  return solver.solve(lp);
}

LpSolution solve_with_dual_start(const LinearProgram& lp, const LpSolution& previous) {
  SimplexSolver solver;
  return solver.solve(lp, previous.basis);
}

}  // namespace rasddp
