#include "rasddp/oracle.hpp"

#include <cstdint>
#include <limits>
#include <string>

namespace rasddp {

std::size_t tree_node_count(const Instance& instance, int root_stage) {
  const std::size_t max = std::numeric_limits<std::size_t>::max();
  std::size_t level = 1;
  std::size_t total = 1;
  for (int t = root_stage + 1; t <= instance.horizon(); ++t) {
    const std::size_t n = instance.stage(t).size();
    if (n != 0 && level > max / n) return max;
    level *= n;
    if (total > max - level) return max;
    total += level;
  }
  return total;
}

namespace {

const StageRealization& realization(const Instance& inst, int t, int j) {
  return t == 1 ? inst.first_stage : inst.stage(t).realizations.at(static_cast<std::size_t>(j));
}

ExtensiveForm build(const Instance& inst, const RiskParams& risk, int t0, int j0,
                    std::span<const double> x_prev, std::size_t cap) {
  risk.validate();
  const int T = inst.horizon();
  const std::size_t count = tree_node_count(inst, t0);
  if (count > cap) {
    throw OracleError("scenario tree has " + (count == std::numeric_limits<std::size_t>::max()
                                                  ? std::string("too many")
                                                  : std::to_string(count)) +
                      " nodes, above the cap of " + std::to_string(cap));
  }
  const bool tail = risk.lambda > 0.0;

  ExtensiveForm ef;
  auto& nodes = ef.tree.nodes;
  nodes.reserve(count);
  nodes.push_back({t0, j0, -1, 1.0, -1, 0});
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const int t = nodes[i].stage;
    if (t == T) continue;
    const StageData& next = inst.stage(t + 1);
    nodes[i].first_child = static_cast<int>(nodes.size());
    nodes[i].num_children = static_cast<int>(next.size());
    const double p = nodes[i].probability;
    for (std::size_t j = 0; j < next.size(); ++j) {
      nodes.push_back({t + 1, static_cast<int>(j), static_cast<int>(i), p * next.weight(j), -1, 0});
    }
  }

  // Columns: per node [x | theta u (w s)*children].
  LinearProgram& lp = ef.lp;
  auto add_col = [&lp](double cost, double lo, double hi) {
    lp.objective.push_back(cost);
    lp.var_lower.push_back(lo);
    lp.var_upper.push_back(hi);
    return static_cast<int>(lp.objective.size()) - 1;
  };
  ef.x_offset.resize(nodes.size());
  ef.theta_col.assign(nodes.size(), -1);
  std::vector<int> u_col(nodes.size(), -1);
  std::vector<int> w_first(nodes.size(), -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const StageRealization& r = realization(inst, nodes[i].stage, nodes[i].outcome);
    ef.x_offset[i] = static_cast<int>(lp.objective.size());
    for (int k = 0; k < r.num_vars(); ++k) add_col(i == 0 ? r.c[k] : 0.0, r.lb[k], r.ub[k]);
    if (nodes[i].num_children == 0) continue;
    ef.theta_col[i] = add_col(i == 0 ? 1.0 : 0.0, -kInf, kInf);
    if (tail) {
      u_col[i] = add_col(0.0, -kInf, kInf);
      w_first[i] = static_cast<int>(lp.objective.size());
      for (int c = 0; c < nodes[i].num_children; ++c) {
        add_col(0.0, 0.0, kInf);  // w
        add_col(0.0, 0.0, kInf);  // s
      }
    }
  }

  int row = 0;
  std::vector<Triplet>& e = lp.eq_matrix.entries;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const StageRealization& r = realization(inst, nodes[i].stage, nodes[i].outcome);
    const int xo = ef.x_offset[i];
    for (const Triplet& a : r.A.entries) e.push_back({row + a.row, xo + a.col, a.value});
    for (int k = 0; k < r.num_rows(); ++k) lp.eq_rhs.push_back(r.b[k]);
    if (i == 0) {
      if (!r.B.entries.empty() && static_cast<int>(x_prev.size()) != r.B.cols) {
        throw OracleError("previous decision has the wrong dimension");
      }
      for (const Triplet& b : r.B.entries) lp.eq_rhs[row + b.row] -= b.value * x_prev[b.col];
    } else {
      const int po = ef.x_offset[nodes[i].parent];
      for (const Triplet& b : r.B.entries) e.push_back({row + b.row, po + b.col, b.value});
    }
    row += r.num_rows();
  }

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const int nc = nodes[i].num_children;
    if (nc == 0) continue;
    const StageData& next = inst.stage(nodes[i].stage + 1);
    const int theta_row = row++;
    lp.eq_rhs.push_back(0.0);
    e.push_back({theta_row, ef.theta_col[i], 1.0});
    if (tail) e.push_back({theta_row, u_col[i], -risk.lambda});
    for (int c = 0; c < nc; ++c) {
      const std::size_t child = static_cast<std::size_t>(nodes[i].first_child + c);
      const double p = next.weight(static_cast<std::size_t>(c));
      const StageRealization& r = realization(inst, nodes[child].stage, nodes[child].outcome);
      const int xo = ef.x_offset[child];
      // z_child = c^T x_child + theta_child
      const double zc = -(1.0 - risk.lambda) * p;
      if (zc != 0.0) {
        for (int k = 0; k < r.num_vars(); ++k) {
          if (r.c[k] != 0.0) e.push_back({theta_row, xo + k, zc * r.c[k]});
        }
        if (ef.theta_col[child] >= 0) e.push_back({theta_row, ef.theta_col[child], zc});
      }
      if (!tail) continue;
      const int w = w_first[i] + 2 * c;
      e.push_back({theta_row, w, -risk.lambda * p / risk.alpha});
      // w - z + u - s = 0
      const int ex = row++;
      lp.eq_rhs.push_back(0.0);
      e.push_back({ex, w, 1.0});
      for (int k = 0; k < r.num_vars(); ++k) {
        if (r.c[k] != 0.0) e.push_back({ex, xo + k, -r.c[k]});
      }
      if (ef.theta_col[child] >= 0) e.push_back({ex, ef.theta_col[child], -1.0});
      e.push_back({ex, u_col[i], 1.0});
      e.push_back({ex, w + 1, -1.0});
    }
  }
  lp.eq_matrix.rows = row;
  lp.eq_matrix.cols = lp.num_vars();
  return ef;
}

double solve_value(const LinearProgram& lp, const char* what) {
  const LpSolution s = solve(lp);
  if (!s.optimal()) throw OracleError(std::string(what) + ": extensive form is " + to_string(s.status));
  return s.objective_value;
}

}  // namespace

ExtensiveForm extensive_form(const Instance& instance, const RiskParams& risk, std::size_t node_cap) {
  return build(instance, risk, 1, 0, {}, node_cap);
}

ExtensiveForm extensive_form_at(const Instance& instance, const RiskParams& risk, int t, int j,
                                std::span<const double> x_prev, std::size_t node_cap) {
  if (t < 2 || t > instance.horizon()) throw OracleError("stage out of range");
  if (j < 0 || static_cast<std::size_t>(j) >= instance.stage(t).size()) throw OracleError("outcome out of range");
  if (static_cast<int>(x_prev.size()) != instance.decision_dim(t - 1)) {
    throw OracleError("previous decision has the wrong dimension");
  }
  return build(instance, risk, t, j, x_prev, node_cap);
}

double exact_value(const Instance& instance, const RiskParams& risk, std::size_t node_cap) {
  return solve_value(extensive_form(instance, risk, node_cap).lp, "exact_value");
}

double exact_stage_value(const Instance& instance, const RiskParams& risk, int t, int j,
                         std::span<const double> x_prev, std::size_t node_cap) {
  return solve_value(extensive_form_at(instance, risk, t, j, x_prev, node_cap).lp, "exact_stage_value");
}

double exact_cost_to_go(const Instance& instance, const RiskParams& risk, int t,
                        std::span<const double> x_prev, std::size_t node_cap) {
  if (t < 2 || t > instance.horizon()) throw OracleError("stage out of range");
  const StageData& stage = instance.stage(t);
  OutcomeValues z;
  for (std::size_t j = 0; j < stage.size(); ++j) {
    z.values.push_back(exact_stage_value(instance, risk, t, static_cast<int>(j), x_prev, node_cap));
  }
  if (!stage.uniform()) z.base_weights = stage.effective_weights();
  return rho(z, risk);
}

}  // namespace rasddp
