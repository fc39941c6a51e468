#include "rasddp/stage_model.hpp"

#include <cmath>
#include <sstream>

namespace rasddp {

WeightVector StageData::effective_weights() const {
  if (!weights.empty()) return weights;
  return WeightVector(realizations.size(), 1.0 / static_cast<double>(realizations.size()));
}

bool StageData::uniform() const {
  if (weights.empty()) return true;
  const double u = 1.0 / static_cast<double>(weights.size());
  for (double w : weights) {
    if (w != u) return false;
  }
  return true;
}

int Instance::decision_dim(int t) const {
  if (t == 1) return first_stage.num_vars();
  const StageData& s = stage(t);
  return s.realizations.empty() ? 0 : s.realizations.front().num_vars();
}

namespace {

bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

void check_realization(const StageRealization& r, int t, int prev_dim,
                       std::vector<std::string>& out) {
  const std::string where = "stage " + std::to_string(t) + ": ";
  const int n = r.num_vars();
  const int m = r.num_rows();
  if (static_cast<int>(r.lb.size()) != n || static_cast<int>(r.ub.size()) != n) {
    out.push_back(where + "bound vectors do not match cost vector length");
  }
  if (r.A.rows != m || r.A.cols != n) out.push_back(where + "A has wrong dimensions");
  if (r.B.rows != m && !(t == 1 && r.B.entries.empty())) out.push_back(where + "B has wrong row count");
  if (r.B.cols != prev_dim && !(t == 1 && r.B.entries.empty())) {
    out.push_back(where + "B has wrong column count");
  }
  for (const auto* mat : {&r.A, &r.B}) {
    for (const Triplet& e : mat->entries) {
      if (e.row < 0 || e.row >= mat->rows || e.col < 0 || e.col >= mat->cols) {
        out.push_back(where + "matrix entry out of range");
        break;
      }
      if (!std::isfinite(e.value)) {
        out.push_back(where + "non-finite matrix entry");
        break;
      }
    }
  }
  if (!all_finite(r.c)) out.push_back(where + "non-finite cost");
  if (!all_finite(r.b)) out.push_back(where + "non-finite right-hand side");
  for (std::size_t j = 0; j < r.lb.size() && j < r.ub.size(); ++j) {
    if (std::isnan(r.lb[j]) || std::isnan(r.ub[j]) || r.lb[j] > r.ub[j] || r.lb[j] == kInf ||
        r.ub[j] == -kInf) {
      out.push_back(where + "invalid bounds on variable " + std::to_string(j));
      break;
    }
  }
}

}  // namespace

std::vector<std::string> validate(const Instance& instance) {
  std::vector<std::string> out;
  if (instance.horizon() < 2) out.push_back("horizon must be at least 2");
  check_realization(instance.first_stage, 1, 0, out);
  if (!instance.first_stage.B.entries.empty()) out.push_back("stage 1: first stage must not have B");
  int prev_dim = instance.first_stage.num_vars();
  for (int t = 2; t <= instance.horizon(); ++t) {
    const StageData& s = instance.stage(t);
    const std::string where = "stage " + std::to_string(t) + ": ";
    if (s.realizations.empty()) {
      out.push_back(where + "no realizations");
      continue;
    }
    const int n = s.realizations.front().num_vars();
    const int m = s.realizations.front().num_rows();
    for (const StageRealization& r : s.realizations) {
      if (r.num_vars() != n || r.num_rows() != m) {
        out.push_back(where + "realizations differ in dimensions");
        break;
      }
    }
    for (const StageRealization& r : s.realizations) check_realization(r, t, prev_dim, out);
    if (!s.weights.empty()) {
      if (s.weights.size() != s.realizations.size()) {
        out.push_back(where + "weights length differs from realization count");
      } else if (!is_probability_vector(s.weights)) {
        out.push_back(where + "weights are not a probability vector");
      }
    }
    if (!std::isfinite(s.cost_to_go_lower_bound)) out.push_back(where + "non-finite lower bound");
    prev_dim = n;
  }
  if (!instance.variable_names.empty() &&
      static_cast<int>(instance.variable_names.size()) != instance.first_stage.num_vars()) {
    out.push_back("variable_names length differs from stage dimension");
  }
  if (instance.reporting_horizon < 0 || instance.reporting_horizon > instance.horizon()) {
    out.push_back("reporting_horizon outside [0, T]");
  }
  return out;
}

Instance reweight(const Instance& instance, const StageWeights& q) {
  if (q.size() != instance.stages.size()) {
    throw ModelError("reweight: expected weights for " + std::to_string(instance.stages.size()) +
                     " stages, got " + std::to_string(q.size()));
  }
  Instance out = instance;
  for (std::size_t k = 0; k < q.size(); ++k) {
    const int t = static_cast<int>(k) + 2;
    if (q[k].size() != instance.stages[k].size()) {
      throw ModelError("reweight: stage " + std::to_string(t) + " weight length mismatch");
    }
    if (!is_probability_vector(q[k])) {
      throw ModelError("reweight: stage " + std::to_string(t) + " weights are not a probability vector");
    }
    out.stages[k].weights = q[k];
  }
  return out;
}

ScenarioCount scenario_count(const Instance& instance) {
  ScenarioCount sc{1, false};
  for (const StageData& s : instance.stages) {
    const std::uint64_t n = s.size();
    if (n != 0 && sc.count > kMaxScenarioCount / n) {
      return {kMaxScenarioCount, true};
    }
    sc.count *= n;
  }
  return sc;
}

bool operator==(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.rows != b.rows || a.cols != b.cols || a.entries.size() != b.entries.size()) return false;
  for (std::size_t k = 0; k < a.entries.size(); ++k) {
    const Triplet& x = a.entries[k];
    const Triplet& y = b.entries[k];
    if (x.row != y.row || x.col != y.col || x.value != y.value) return false;
  }
  return true;
}

bool operator==(const StageRealization& a, const StageRealization& b) {
  return a.c == b.c && a.B == b.B && a.A == b.A && a.b == b.b && a.lb == b.lb && a.ub == b.ub;
}

bool operator==(const StageData& a, const StageData& b) {
  return a.realizations == b.realizations && a.effective_weights() == b.effective_weights() &&
         a.cost_to_go_lower_bound == b.cost_to_go_lower_bound;
}

bool operator==(const Instance& a, const Instance& b) {
  return a.first_stage == b.first_stage && a.stages == b.stages &&
         a.variable_names == b.variable_names && a.reporting_horizon == b.reporting_horizon;
}

}  // namespace rasddp
