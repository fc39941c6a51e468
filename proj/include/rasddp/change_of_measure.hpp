#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rasddp/cuts.hpp"
#include "rasddp/risk.hpp"
#include "rasddp/stage_model.hpp"

namespace rasddp {

/// Per-stage outcome weights q_t replacing the base probabilities, plus
/// where they came from.
struct MeasureChange {
  StageWeights q;
  std::string source;
  int iterations = 0;
  RiskParams identified_with;
};

/// Reweighted instance. It is meant to be solved risk neutrally; see
/// measure_change_risk().
Instance build(const Instance& instance, const MeasureChange& mc);

/// Risk parameters used for the reweighted problem (lambda = 0).
RiskParams measure_change_risk(const MeasureChange& mc);

/// s(x) = sum_j q_j (value_j + g_j^T (x - anchor)); with uniform q this is
/// bitwise the risk-neutral engine cut.
Cut weighted_expectation_cut(std::span<const double> values, const std::vector<std::vector<double>>& gradients,
                             std::span<const double> q, std::span<const double> anchor);

/// Rank weights of the stage values of the policy defined by `pools`,
/// measured at the trial points of one evaluation forward pass. No cuts are
/// added.
StageWeights identify_weights(const Instance& instance, const CutPools& pools, const RiskParams& risk,
                              std::uint64_t seed);

/// Linear-interpolation quantile (p in [0, 1]) of an unsorted sample.
double empirical_quantile(std::vector<double> sample, double p);

inline constexpr double kReportQuantiles[] = {0.05, 0.25, 0.5, 0.75, 0.95};

struct StageQuantiles {
  int stage = 0;
  std::vector<double> risk_averse;  // 5/25/50/75/95 %
  std::vector<double> reweighted;
};

struct EquivalenceReport {
  double risk_averse_value = 0.0;  // oracle
  double com_value = 0.0;          // oracle on the reweighted instance
  double gap = 0.0;                // |difference| / max(1, |risk_averse_value|)
  double sddp_lower_bound = 0.0;
  int iterations = 0;
  StageWeights weights;
  std::vector<StageQuantiles> stage_costs;

  std::string to_json() const;
};

struct EquivalenceOptions {
  int iterations = 200;
  std::uint64_t seed = 1;
  /// Simulated scenarios per policy for the stage-cost quantiles; 0 skips
  /// the comparison.
  int scenarios = 0;
};

/// Solves the risk-averse problem with SDDP, identifies weights from the
/// resulting policy, and compares the oracle values of both formulations.
EquivalenceReport equivalence_report(const Instance& instance, const RiskParams& risk,
                                     const EquivalenceOptions& options = {});

}  // namespace rasddp
