#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rasddp/lp.hpp"
#include "rasddp/risk.hpp"

namespace rasddp {

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Data of one stage LP for one noise outcome:
///   min c^T x_t  s.t.  B x_{t-1} + A x_t = b,  lb <= x_t <= ub.
/// The first stage has an empty B (zero columns).
struct StageRealization {
  std::vector<double> c;
  SparseMatrix B;
  SparseMatrix A;
  std::vector<double> b;
  std::vector<double> lb;
  std::vector<double> ub;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_rows() const { return static_cast<int>(b.size()); }
};

struct StageData {
  std::vector<StageRealization> realizations;
  /// Empty means uniform 1/N.
  WeightVector weights;
  /// Valid lower bound L_t on the stage cost-to-go; seeds its cut pool.
  double cost_to_go_lower_bound = 0.0;

  std::size_t size() const { return realizations.size(); }
  double weight(std::size_t j) const {
    return weights.empty() ? 1.0 / static_cast<double>(realizations.size()) : weights[j];
  }
  WeightVector effective_weights() const;
  bool uniform() const;
};

/// A multistage stochastic linear program with stagewise independent,
/// finitely supported noise. `stages[0]` holds stage 2.
struct Instance {
  StageRealization first_stage;
  std::vector<StageData> stages;
  /// Optional per-variable labels shared by every stage.
  std::vector<std::string> variable_names;
  /// Stages reported by simulation statistics; 0 means the whole horizon.
  int reporting_horizon = 0;

  int horizon() const { return static_cast<int>(stages.size()) + 1; }
  /// Stage t in [2, T].
  const StageData& stage(int t) const { return stages.at(static_cast<std::size_t>(t - 2)); }
  StageData& stage(int t) { return stages.at(static_cast<std::size_t>(t - 2)); }
  /// Dimension of x_t, t in [1, T].
  int decision_dim(int t) const;
  int report_until() const { return reporting_horizon > 0 ? reporting_horizon : horizon(); }
};

/// Per-stage weights for stages 2..T; index 0 is stage 2.
using StageWeights = std::vector<WeightVector>;

/// Empty list means the instance is valid.
std::vector<std::string> validate(const Instance& instance);

/// Copy with replaced stage weights; the input is untouched. Equality and
/// serialisation use effective weights, so an implicit-uniform stage and an
/// explicit 1/N vector are the same instance.
Instance reweight(const Instance& instance, const StageWeights& q);

struct ScenarioCount {
  std::uint64_t count = 0;
  bool overflow = false;
};

inline constexpr std::uint64_t kMaxScenarioCount = UINT64_MAX;

/// Product of per-stage outcome counts, saturating at kMaxScenarioCount.
ScenarioCount scenario_count(const Instance& instance);

bool operator==(const SparseMatrix& a, const SparseMatrix& b);
bool operator==(const StageRealization& a, const StageRealization& b);
bool operator==(const StageData& a, const StageData& b);
bool operator==(const Instance& a, const Instance& b);

// JSON interchange (see README for the schema).
Instance load_instance(const std::string& path);
void save_instance(const Instance& instance, const std::string& path);
Instance instance_from_json_text(const std::string& text);
std::string instance_to_json_text(const Instance& instance);

}  // namespace rasddp
