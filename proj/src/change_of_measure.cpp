#include "rasddp/change_of_measure.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "rasddp/engine.hpp"
#include "rasddp/oracle.hpp"

namespace rasddp {

Instance build(const Instance& instance, const MeasureChange& mc) { return reweight(instance, mc.q); }

RiskParams measure_change_risk(const MeasureChange& mc) { return {0.0, mc.identified_with.alpha}; }

Cut weighted_expectation_cut(std::span<const double> values, const std::vector<std::vector<double>>& gradients,
                             std::span<const double> q, std::span<const double> anchor) {
  return combine_cut(values, gradients, q, anchor);
}

StageWeights identify_weights(const Instance& instance, const CutPools& pools, const RiskParams& risk,
                              std::uint64_t seed) {
  Engine engine(instance, risk, pools);
  StageWeights sampling;
  for (const StageData& s : instance.stages) sampling.push_back(s.effective_weights());
  Rng rng(seed);
  const Trajectory traj = engine.forward_pass(sampling, rng);
  StageWeights out;
  for (int t = 2; t <= instance.horizon(); ++t) {
    std::vector<double> values;
    for (std::size_t j = 0; j < instance.stage(t).size(); ++j) {
      values.push_back(engine.solve_stage(t, static_cast<int>(j), traj.trial_points[t - 2]).value);
    }
    out.push_back(rank_weights(values, risk));
  }
  return out;
}

double empirical_quantile(std::vector<double> sample, double p) {
  if (sample.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(sample.begin(), sample.end());
  const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(sample.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sample.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sample[lo] + frac * (sample[hi] - sample[lo]);
}

std::string EquivalenceReport::to_json() const {
  nlohmann::json j;
  j["risk_averse_value"] = risk_averse_value;
  j["com_value"] = com_value;
  j["gap"] = gap;
  j["sddp_lower_bound"] = sddp_lower_bound;
  j["iterations"] = iterations;
  nlohmann::json w = nlohmann::json::array();
  for (std::size_t k = 0; k < weights.size(); ++k) w.push_back({{"t", static_cast<int>(k) + 2}, {"q", weights[k]}});
  j["weights"] = w;
  nlohmann::json sc = nlohmann::json::array();
  for (const StageQuantiles& s : stage_costs) {
    sc.push_back({{"t", s.stage}, {"risk_averse", s.risk_averse}, {"reweighted", s.reweighted}});
  }
  j["stage_cost_quantiles"] = sc;
  return j.dump(1);
}

EquivalenceReport equivalence_report(const Instance& instance, const RiskParams& risk,
                                     const EquivalenceOptions& options) {
  EquivalenceReport rep;
  RunConfig cfg;
  cfg.risk = risk;
  cfg.max_iterations = options.iterations;
  cfg.seed = options.seed;
  cfg.mode = "raus";
  RunResult ra = run(instance, cfg);
  rep.iterations = static_cast<int>(ra.log.records.size());
  rep.sddp_lower_bound = ra.log.records.back().lower_bound;
  rep.weights = identify_weights(instance, ra.pools, risk, options.seed);

  MeasureChange mc{rep.weights, "equivalence_report", rep.iterations, risk};
  const Instance com = build(instance, mc);
  rep.risk_averse_value = exact_value(instance, risk);
  rep.com_value = exact_value(com, measure_change_risk(mc));
  rep.gap = std::abs(rep.risk_averse_value - rep.com_value) / std::max(1.0, std::abs(rep.risk_averse_value));

  if (options.scenarios > 0) {
    RunConfig ccfg = cfg;
    ccfg.risk = measure_change_risk(mc);
    ccfg.mode = "nrn";
    const RunResult nrn = run(com, ccfg);
    // Both policies are evaluated on the same scenarios drawn from the base
    // probabilities.
    const auto pa = simulate_paths(instance, ra.pools, options.scenarios, options.seed + 1);
    const auto pb = simulate_paths(instance, nrn.pools, options.scenarios, options.seed + 1);
    for (int t = 1; t <= instance.horizon(); ++t) {
      StageQuantiles q;
      q.stage = t;
      std::vector<double> a, b;
      for (const auto& p : pa) a.push_back(p.stage_costs[t - 1]);
      for (const auto& p : pb) b.push_back(p.stage_costs[t - 1]);
      for (double level : kReportQuantiles) {
        q.risk_averse.push_back(empirical_quantile(a, level));
        q.reweighted.push_back(empirical_quantile(b, level));
      }
      rep.stage_costs.push_back(std::move(q));
    }
  }
  return rep;
}

}  // namespace rasddp
