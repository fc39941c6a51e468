#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rasddp/cuts.hpp"
#include "rasddp/lp.hpp"
#include "rasddp/risk.hpp"
#include "rasddp/sampling.hpp"
#include "rasddp/stage_model.hpp"

namespace rasddp {

/// Fatal engine conditions: recourse violations, unbounded stages, invalid
/// configuration.
class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One forward realization. Stage t values live at index t - 1 for
/// trial_points and stage_costs, and at index t - 2 for sampled_indices.
struct Trajectory {
  std::vector<int> sampled_indices;               // j_t, t = 2..T
  std::vector<std::vector<double>> trial_points;  // x_t, t = 1..T-1
  std::vector<double> stage_costs;                // c_t^T x_t, t = 1..T

  double cumulative_cost() const;
};

struct IterationRecord {
  int iteration = 0;
  double lower_bound = 0.0;
  double cumulative_cost = 0.0;
  double wall_ms = 0.0;
  std::vector<int> scenario;
};

struct IterationLog {
  RiskParams risk;
  std::vector<IterationRecord> records;
};

struct RunConfig {
  RiskParams risk;
  int max_iterations = 100;
  std::uint64_t seed = 1;
  SamplerSpec sampler;
  /// With a FixedBias sampler, iterations before this one sample from the
  /// instance weights. If the fixed weights are empty, they are taken from
  /// the run's own visit frequencies at the switch.
  int switch_iteration = 0;
  /// Stop when the relative lower-bound gain over `stall_window` iterations
  /// drops below this value; 0 disables the rule.
  double stall_tolerance = 0.0;
  int stall_window = 100;
  /// FIFO cap per cut pool; 0 keeps every cut.
  std::size_t cut_capacity = 0;
  std::string mode;
};

struct RunResult {
  CutPools pools;
  IterationLog log;
  FrequencyTable frequencies;  // undecayed W
  FrequencyTable adjusted;     // gamma, dynamic samplers only
  StageWeights switched_weights;
  std::uint64_t lp_solves = 0;
};

/// Optimal value and solution of one stage LP against the next pool.
struct StageSolution {
  double value = 0.0;       // c^T x + theta
  double stage_cost = 0.0;  // c^T x
  std::vector<double> x;
  std::vector<double> row_duals;  // stage rows only
};

/// Per-stage output of a backward pass. `values[t-2]` holds the N stage
/// values at x_{t-1}, indexed by outcome.
struct BackwardResult {
  std::vector<Cut> cuts;
  std::vector<std::vector<double>> values;
};

/// Combines outcome values and subgradients measured at `anchor` into
/// s(x) = sum_j w_j (value_j + g_j^T (x - anchor)).
Cut combine_cut(std::span<const double> values, const std::vector<std::vector<double>>& gradients,
                std::span<const double> weights, std::span<const double> anchor);

/// Cut-generation weights for one stage: rank weights of the values under
/// risk aversion, the stage's own probabilities when lambda = 0.
WeightVector cut_weights(std::span<const double> values, const StageData& stage, const RiskParams& risk);

class Engine {
 public:
  Engine(const Instance& instance, RiskParams risk);
  Engine(const Instance& instance, RiskParams risk, CutPools pools);
  ~Engine();
  Engine(Engine&&) noexcept;
  Engine& operator=(Engine&&) = delete;

  const Instance& instance() const { return *instance_; }
  const RiskParams& risk() const { return risk_; }
  const CutPools& pools() const { return pools_; }
  CutPools& pools() { return pools_; }
  CutPools release_pools() { return std::move(pools_); }
  std::uint64_t lp_solves() const { return lp_solves_; }

  /// Stage t (1..T) LP for outcome j at x_prev against pool t+1. Stage 1
  /// ignores j and x_prev.
  StageSolution solve_stage(int t, int j, std::span<const double> x_prev);

  /// Samples j_2..j_T from `sampling` (index 0 = stage 2) and solves stages
  /// 1..T-1 along the path.
  Trajectory forward_pass(const StageWeights& sampling, Rng& rng);

  /// Adds one cut per stage t = T..2 at the trajectory's trial points and
  /// fills the stage-T cost of the sampled outcome.
  BackwardResult backward_pass(Trajectory& trajectory, int iteration);

  /// Optimal value of the first-stage LP with the current pool for stage 2.
  double lower_bound();

 private:
  struct LazyState;
  const Instance* instance_;
  RiskParams risk_;
  CutPools pools_;
  SimplexSolver solver_;
  std::vector<std::vector<LazyState>> lazy_;  // [t-1][j]
  std::uint64_t lp_solves_ = 0;
};

RunResult run(const Instance& instance, const RunConfig& config, CutPools initial = {});

/// One simulated scenario under fixed pools: sampled j_2..j_T, decisions
/// x_1..x_T and stage costs.
struct SimulatedPath {
  std::vector<int> indices;
  std::vector<std::vector<double>> decisions;
  std::vector<double> stage_costs;
};

/// Rolls the policy defined by `pools` forward over `count` scenarios drawn
/// from the instance's stage weights.
std::vector<SimulatedPath> simulate_paths(const Instance& instance, const CutPools& pools, int count,
                                          std::uint64_t seed);

/// Running average of cumulative forward costs over iterations 1..m; only
/// meaningful when forward sampling matches the objective measure.
double statistical_upper_bound(const IterationLog& log, int m);

}  // namespace rasddp
