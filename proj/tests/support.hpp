#pragma once

// Generators and brute-force references shared by the unit tests and the
// acceptance runner. Nothing here calls into the code under test except to
// build inputs.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "rasddp/hydrothermal.hpp"
#include "rasddp/lp.hpp"
#include "rasddp/risk.hpp"
#include "rasddp/stage_model.hpp"

namespace support {

using rasddp::kInf;

inline double unif(std::mt19937_64& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}
inline int unif_int(std::mt19937_64& g, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g); }

// Risk references ----------------------------------------------------------

inline double mean(const std::vector<double>& z) {
  return std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(z.size());
}

/// min over u in {Z_i} of u + mean([Z - u]_+) / alpha.
inline double avar_by_enumeration(const std::vector<double>& z, double alpha) {
  double best = kInf;
  for (double u : z) {
    double ex = 0.0;
    for (double v : z) ex += std::max(0.0, v - u);
    best = std::min(best, u + ex / (alpha * static_cast<double>(z.size())));
  }
  return best;
}

/// inf{t in Z : #{Z <= t} / N >= 1 - alpha}, scanning candidates directly.
inline double var_by_definition(const std::vector<double>& z, double alpha) {
  double best = kInf;
  for (double t : z) {
    double cnt = 0;
    for (double v : z) cnt += v <= t ? 1.0 : 0.0;
    if (cnt / static_cast<double>(z.size()) >= 1.0 - alpha - 1e-15) best = std::min(best, t);
  }
  return best;
}

inline double rho_by_enumeration(const std::vector<double>& z, double lambda, double alpha) {
  return (1.0 - lambda) * mean(z) + lambda * avar_by_enumeration(z, alpha);
}

// LP references ------------------------------------------------------------

inline std::vector<double> dense_column(const rasddp::LinearProgram& lp, int col) {
  std::vector<double> c(lp.num_rows(), 0.0);
  for (const auto& e : lp.eq_matrix.entries) {
    if (e.col == col) c[e.row] += e.value;
  }
  return c;
}

/// Optimal value by enumerating every basic solution. Requires every
/// variable to have a finite bound and a bounded problem. nullopt means
/// infeasible.
inline std::optional<double> vertex_enumeration(const rasddp::LinearProgram& lp) {
  const int m = lp.num_rows();
  const int n = lp.num_vars();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, n);
  for (const auto& e : lp.eq_matrix.entries) A(e.row, e.col) += e.value;
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) b(i) = lp.eq_rhs[i];
  std::optional<double> best;
  // Nonbasic set choices: every subset of size n - r for r = rank(A) and
  // every finite-bound assignment. Enumerate all 3^n states (basic / lower
  // / upper) with exactly the right number of basics.
  const int rank = static_cast<int>(Eigen::FullPivLU<Eigen::MatrixXd>(A).rank());
  std::vector<int> state(n, 0);
  for (;;) {
    int basics = 0;
    for (int s : state) basics += s == 0 ? 1 : 0;
    bool bounds_ok = true;
    for (int j = 0; j < n && bounds_ok; ++j) {
      if (state[j] == 1 && !std::isfinite(lp.var_lower[j])) bounds_ok = false;
      if (state[j] == 2 && !std::isfinite(lp.var_upper[j])) bounds_ok = false;
      if (state[j] == 2 && lp.var_lower[j] == lp.var_upper[j]) bounds_ok = false;
    }
    if (basics == rank && bounds_ok) {
      Eigen::VectorXd rhs = b;
      std::vector<int> basic;
      Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
      for (int j = 0; j < n; ++j) {
        if (state[j] == 0) {
          basic.push_back(j);
        } else {
          x(j) = state[j] == 1 ? lp.var_lower[j] : lp.var_upper[j];
          rhs -= A.col(j) * x(j);
        }
      }
      Eigen::MatrixXd AB(m, basics);
      for (int k = 0; k < basics; ++k) AB.col(k) = A.col(basic[k]);
      // Eigen does not factor matrices without columns
      if (basics == 0 || Eigen::FullPivLU<Eigen::MatrixXd>(AB).rank() == basics) {
        Eigen::VectorXd xb = basics == 0 ? Eigen::VectorXd() : Eigen::VectorXd(AB.colPivHouseholderQr().solve(rhs));
        if ((AB * xb - rhs).lpNorm<Eigen::Infinity>() <= 1e-9 * (1.0 + rhs.lpNorm<Eigen::Infinity>())) {
          bool feasible = true;
          for (int k = 0; k < basics; ++k) {
            const int j = basic[k];
            x(j) = xb(k);
            if (xb(k) < lp.var_lower[j] - 1e-9 || xb(k) > lp.var_upper[j] + 1e-9) feasible = false;
          }
          if (feasible) {
            double v = 0.0;
            for (int j = 0; j < n; ++j) v += lp.objective[j] * x(j);
            if (!best || v < *best) best = v;
          }
        }
      }
    }
    int j = 0;
    while (j < n && state[j] == 2) state[j++] = 0;
    if (j == n) break;
    ++state[j];
  }
  return best;
}

/// Feasible and bounded by construction: b = A x0 with x0 inside the
/// bounds; one-sided variables get costs pushing them toward their bound.
inline rasddp::LinearProgram random_lp(std::mt19937_64& g, int m, int n, double density = 0.6) {
  rasddp::LinearProgram lp;
  lp.eq_matrix = rasddp::SparseMatrix(m, n);
  std::vector<double> x0(n);
  for (int j = 0; j < n; ++j) {
    const int kind = unif_int(g, 0, 3);
    double lo = std::round(unif(g, -5, 2));
    double hi = lo + std::round(unif(g, 0, 8));
    double c = std::round(unif(g, -10, 10));
    if (kind == 1) {
      hi = kInf;
      c = std::abs(c) + 1;
    } else if (kind == 2) {
      lo = -kInf;
      c = -std::abs(c) - 1;
    }
    lp.var_lower.push_back(lo);
    lp.var_upper.push_back(hi);
    lp.objective.push_back(c);
    const double a = std::isfinite(lo) ? lo : hi - 3;
    const double bnd = std::isfinite(hi) ? hi : lo + 3;
    x0[j] = unif(g, a, bnd);
  }
  for (int i = 0; i < m; ++i) {
    bool any = false;
    for (int j = 0; j < n; ++j) {
      if (unif(g, 0, 1) < density) {
        lp.eq_matrix.add(i, j, std::round(unif(g, -9, 9)) + 0.5 * unif_int(g, 0, 1));
        any = true;
      }
    }
    if (!any) lp.eq_matrix.add(i, unif_int(g, 0, n - 1), 1.0);
  }
  lp.eq_rhs.assign(m, 0.0);
  lp.eq_matrix.multiply_add(x0, lp.eq_rhs);
  return lp;
}

// Instances ----------------------------------------------------------------

/// Tiny single-reservoir system cut to horizon T.
inline rasddp::HydroSystemSpec tiny_hydro(int T) {
  auto spec = rasddp::default_desk_instance(rasddp::DeskSize::Tiny);
  spec.horizon = T;
  for (auto& s : spec.subsystems) s.demand.resize(T, 50.0);
  spec.inflow.noise.resize(T - 1, spec.inflow.noise.front());
  return spec;
}

/// Random previous-stage decision of a hydro instance: storages in
/// [0, capacity], inflows in [0, 80], everything else in [0, 50].
inline std::vector<double> random_hydro_state(const rasddp::HydroSystemSpec& spec, std::mt19937_64& g) {
  const auto lay = rasddp::hydro_layout(spec);
  std::vector<double> x(lay.size);
  for (double& v : x) v = unif(g, 0, 50);
  for (int k = 0; k < lay.K; ++k) {
    x[lay.storage + k] = unif(g, 0, spec.subsystems[k].storage_capacity);
    x[lay.inflow + k] = unif(g, 0, 80);
  }
  return x;
}

/// Two-stage problem: first stage splits capacity between a cheap early
/// buy x1 and a reserve x2; second stage meets demand d_j from x1, a recourse
/// purchase, the reserve, or shortage. A per-outcome fixed cost k_j keeps
/// the outcome values apart.
inline rasddp::Instance random_two_stage(std::mt19937_64& g, int N) {
  using namespace rasddp;
  Instance inst;
  StageRealization& f = inst.first_stage;
  // x = (x1, x2, slack): x1 + x2 + slack = 10
  f.c = {unif(g, 1, 3), unif(g, 0.5, 2), 0.0};
  f.lb = {0, 0, 0};
  f.ub = {10, 10, kInf};
  f.A = SparseMatrix(1, 3);
  f.A.add(0, 0, 1);
  f.A.add(0, 1, 1);
  f.A.add(0, 2, 1);
  f.B = SparseMatrix(1, 0);
  f.b = {10};
  StageData sd;
  for (int j = 0; j < N; ++j) {
    StageRealization r;
    // y = (buy, reserve_use, shortage, surplus, unused_reserve, fixed)
    r.c = {unif(g, 3, 8), unif(g, 0.5, 1.5), unif(g, 15, 30), 0.0, 0.0, 2.0 * j + unif(g, 0, 1)};
    r.lb = {0, 0, 0, 0, 0, 1};
    r.ub = {6, kInf, kInf, kInf, kInf, 1};
    r.A = SparseMatrix(2, 6);
    r.B = SparseMatrix(2, 3);
    // x1 + buy + reserve_use + shortage - surplus = d_j
    r.B.add(0, 0, 1);
    r.A.add(0, 0, 1);
    r.A.add(0, 1, 1);
    r.A.add(0, 2, 1);
    r.A.add(0, 3, -1);
    // reserve_use + unused_reserve - x2 = 0
    r.B.add(1, 1, -1);
    r.A.add(1, 1, 1);
    r.A.add(1, 4, 1);
    r.b = {unif(g, 2, 16), 0};
    sd.realizations.push_back(std::move(r));
  }
  inst.stages.push_back(std::move(sd));
  return inst;
}

/// Multistage inventory problem whose outcome values are
/// fixed_cost[t][j] + (a bounded state-dependent part). Gaps of 100 between
/// the fixed costs dominate the state-dependent part, so the value order is
/// the same at every reachable state.
inline rasddp::Instance stable_order_inventory(int T, int N, std::uint64_t seed = 7) {
  using namespace rasddp;
  std::mt19937_64 g(seed);
  auto stage = [&](bool first, double demand, double fixed) {
    StageRealization r;
    // x = (stock_out, buy, shortage, fixed)
    r.c = {0.2, 1.0 + unif(g, 0, 0.5), 4.0, fixed};
    r.lb = {0, 0, 0, 1};
    r.ub = {15, 8, kInf, 1};
    r.A = SparseMatrix(1, 4);
    r.B = SparseMatrix(1, first ? 0 : 4);
    // stock_out - buy - shortage = stock_in - demand
    r.A.add(0, 0, 1);
    r.A.add(0, 1, -1);
    r.A.add(0, 2, -1);
    if (first) {
      r.b = {3.0 - demand};
    } else {
      r.B.add(0, 0, -1);
      r.b = {-demand};
    }
    return r;
  };
  Instance inst;
  inst.first_stage = stage(true, 2.0, 0.0);
  for (int t = 2; t <= T; ++t) {
    StageData sd;
    for (int j = 0; j < N; ++j) sd.realizations.push_back(stage(false, unif(g, 2, 6), 100.0 * j));
    inst.stages.push_back(std::move(sd));
  }
  return inst;
}

// Three-stage inventory with demand 5 +- 0.3: path costs barely vary.
inline rasddp::Instance calm_inventory() {
  rasddp::Instance inst;
  auto stage = [](bool first, double demand) {
    rasddp::StageRealization r;
    // x = (stock_out, buy, shortage)
    r.c = {0.1, 1.0, 3.0};
    r.lb = {0, 0, 0};
    r.ub = {20, 8, rasddp::kInf};
    r.A = rasddp::SparseMatrix(1, 3);
    r.A.add(0, 0, 1);
    r.A.add(0, 1, -1);
    r.A.add(0, 2, -1);
    r.B = rasddp::SparseMatrix(1, first ? 0 : 3);
    if (first) {
      r.b = {2.0 - demand};
    } else {
      r.B.add(0, 0, -1);
      r.b = {-demand};
    }
    return r;
  };
  inst.first_stage = stage(true, 5.0);
  for (int t = 2; t <= 3; ++t) {
    rasddp::StageData sd;
    for (double d : {4.7, 5.0, 5.3}) sd.realizations.push_back(stage(false, d));
    inst.stages.push_back(sd);
  }
  return inst;
}

}  // namespace support
