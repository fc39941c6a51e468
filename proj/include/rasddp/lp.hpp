#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace rasddp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Raised for structurally invalid programs ("malformed LP") and for
/// iteration-limit exhaustion ("solver stalled").
class LpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Coordinate-format sparse matrix. Duplicate (row, col) entries are summed
/// when a solver assembles it.
struct SparseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<Triplet> entries;

  SparseMatrix() = default;
  SparseMatrix(int r, int c) : rows(r), cols(c) {}

  void add(int r, int c, double v) { entries.push_back({r, c, v}); }
  /// y += M x
  void multiply_add(const std::vector<double>& x, std::vector<double>& y) const;
  /// y += M^T x
  void transpose_multiply_add(const std::vector<double>& x, std::vector<double>& y) const;
};

/// min c^T x  s.t.  M x = b,  lower <= x <= upper.
struct LinearProgram {
  std::vector<double> objective;
  SparseMatrix eq_matrix;
  std::vector<double> eq_rhs;
  std::vector<double> var_lower;
  std::vector<double> var_upper;

  int num_vars() const { return static_cast<int>(objective.size()); }
  int num_rows() const { return static_cast<int>(eq_rhs.size()); }

  /// Empty string when well formed, otherwise the first problem found.
  std::string structural_error() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LpStatus s);

enum class VarStatus : std::uint8_t { Basic, AtLower, AtUpper, Free };

/// Status of every structural column followed by one logical (artificial)
/// column per row. Used to warm start a solve of a same-shaped program.
struct Basis {
  std::vector<VarStatus> status;
  bool empty() const { return status.empty(); }
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> primal;
  double objective_value = 0.0;
  /// One multiplier per equality row, c = M^T y + d at optimality.
  std::vector<double> eq_duals;
  /// Reduced costs d of the structural columns.
  std::vector<double> bound_duals;
  Basis basis;
  int iterations = 0;

  bool optimal() const { return status == LpStatus::Optimal; }
};

struct SimplexOptions {
  int max_iterations = 100000;
  int refactor_interval = 100;
  double pivot_tolerance = 1e-9;
  double primal_tolerance = 1e-9;
  double dual_tolerance = 1e-9;
  /// Consecutive degenerate pivots before switching to Bland's rule.
  int degenerate_limit = 50;
};

/// Bounded-variable revised simplex. Cold solves run the primal method
/// (composite phase one). Warm starts from a dual feasible basis run the
/// dual method, which is the usual situation when only the right-hand side
/// moved or rows were appended with basic slacks.
///
/// A solver keeps mutable working storage; use one instance per thread.
class SimplexSolver {
 public:
  explicit SimplexSolver(SimplexOptions options = {});
  ~SimplexSolver();
  SimplexSolver(SimplexSolver&&) noexcept;
  SimplexSolver& operator=(SimplexSolver&&) noexcept;

  LpSolution solve(const LinearProgram& lp);
  /// Starts from `start` when its size matches the program; otherwise (or
  /// if that basis is singular) it falls back to a cold solve.
  LpSolution solve(const LinearProgram& lp, const Basis& start);

  const SimplexOptions& options() const { return options_; }

 private:
  struct Work;
  SimplexOptions options_;
  std::unique_ptr<Work> work_;
};

LpSolution solve(const LinearProgram& lp);
LpSolution solve_with_dual_start(const LinearProgram& lp, const LpSolution& previous);

/// Plain-text dump (objective, rows, bounds) for bug reports.
void write_lp_text(const LinearProgram& lp, std::ostream& out);

}  // namespace rasddp
