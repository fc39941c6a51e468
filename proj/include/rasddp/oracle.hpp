#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "rasddp/lp.hpp"
#include "rasddp/risk.hpp"
#include "rasddp/stage_model.hpp"

namespace rasddp {

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kOracleNodeCap = 5000;

/// Full scenario tree below one root node. Node 0 is the root; children of
/// a node are contiguous and ordered by outcome index.
struct ScenarioTree {
  struct Node {
    int stage = 1;
    int outcome = 0;      // realization index; 0 for the first stage
    int parent = -1;
    double probability = 1.0;  // product of conditional weights from the root
    int first_child = -1;
    int num_children = 0;
  };
  std::vector<Node> nodes;
};

/// Number of nodes in the tree rooted at one stage-`root_stage` node,
/// saturating at SIZE_MAX.
std::size_t tree_node_count(const Instance& instance, int root_stage = 1);

struct ExtensiveForm {
  LinearProgram lp;
  ScenarioTree tree;
  std::vector<int> x_offset;   // first column of each node's decision block
  std::vector<int> theta_col;  // -1 at leaves
};

/// Single LP over the scenario tree. Every internal node n carries
///   theta_n = (1-lambda) sum_j p_j z_j + lambda (u_n + sum_j p_j w_j / alpha)
///   w_j >= z_j - u_n,  w_j >= 0,   z_j = c_j^T x_j + theta_j,
/// which equals the nested rho at the optimum. The objective is
/// c_1^T x_1 + theta_root.
ExtensiveForm extensive_form(const Instance& instance, const RiskParams& risk,
                             std::size_t node_cap = kOracleNodeCap);

/// Same construction rooted at outcome `j` of stage `t` with x_{t-1} fixed.
ExtensiveForm extensive_form_at(const Instance& instance, const RiskParams& risk, int t, int j,
                                std::span<const double> x_prev, std::size_t node_cap = kOracleNodeCap);

/// Optimal value of the nested risk-averse problem.
double exact_value(const Instance& instance, const RiskParams& risk, std::size_t node_cap = kOracleNodeCap);

/// V_t(x_prev, xi_t^j) including the exact future.
double exact_stage_value(const Instance& instance, const RiskParams& risk, int t, int j,
                         std::span<const double> x_prev, std::size_t node_cap = kOracleNodeCap);

/// Cost-to-go V_t(x_prev) = rho_t over outcomes j of V_t(x_prev, xi_t^j),
/// t in [2, T].
double exact_cost_to_go(const Instance& instance, const RiskParams& risk, int t,
                        std::span<const double> x_prev, std::size_t node_cap = kOracleNodeCap);

}  // namespace rasddp
