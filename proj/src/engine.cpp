#include "rasddp/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace rasddp {

double Trajectory::cumulative_cost() const {
  return std::accumulate(stage_costs.begin(), stage_costs.end(), 0.0);
}

Cut combine_cut(std::span<const double> values, const std::vector<std::vector<double>>& gradients,
                std::span<const double> weights, std::span<const double> anchor) {
  const std::size_t n = values.size();
  if (gradients.size() != n || weights.size() != n) {
    throw EngineError("combine_cut: values, gradients and weights differ in length");
  }
  Cut cut;
  cut.gradient.assign(anchor.size(), 0.0);
  double value = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (gradients[j].size() != anchor.size()) throw EngineError("combine_cut: gradient dimension mismatch");
    if (weights[j] == 0.0) continue;
    value += weights[j] * values[j];
    for (std::size_t i = 0; i < anchor.size(); ++i) cut.gradient[i] += weights[j] * gradients[j][i];
  }
  cut.intercept = value;
  for (std::size_t i = 0; i < anchor.size(); ++i) cut.intercept -= cut.gradient[i] * anchor[i];
  return cut;
}

WeightVector cut_weights(std::span<const double> values, const StageData& stage, const RiskParams& risk) {
  if (risk.risk_neutral()) return stage.effective_weights();
  if (!stage.uniform()) {
    throw EngineError("risk-averse cuts need uniform stage weights; reweighted instances are solved with lambda = 0");
  }
  return rank_weights(values, risk);
}

struct Engine::LazyState {
  std::vector<std::uint64_t> active;  // cut ids, in row order
  Basis basis;                        // basis of the last solve with `active`
};

namespace {

int cut_slack_col(int n, int r) { return n + 1 + r; }
int cut_logical_col(int n, int m, int k, int r) { return n + 1 + k + m + r; }

// Drops cut rows that were slack at the last solve; the remaining basis stays
// square and nonsingular because the removed basic column is a unit vector
// confined to the removed row.
void prune_rows(std::vector<std::uint64_t>& active, Basis& basis, const CutPool& pool, int n, int m) {
  const int k = static_cast<int>(active.size());
  if (k == 0) return;
  const bool have_basis = static_cast<int>(basis.status.size()) == n + 1 + k + m + k;
  std::vector<char> keep(k, 1);
  bool evicted = false;
  for (int r = 0; r < k; ++r) {
    if (pool.position_of(active[r]) < 0) {
      keep[r] = 0;
      evicted = true;
    } else if (have_basis && basis.status[cut_slack_col(n, r)] == VarStatus::Basic) {
      keep[r] = 0;
    }
  }
  if (std::all_of(keep.begin(), keep.end(), [](char c) { return c != 0; })) return;

  std::vector<std::uint64_t> next_active;
  Basis next;
  if (have_basis && !evicted) {
    next.status.assign(basis.status.begin(), basis.status.begin() + n + 1);
    for (int r = 0; r < k; ++r) {
      if (keep[r]) next.status.push_back(basis.status[cut_slack_col(n, r)]);
    }
    for (int i = 0; i < m; ++i) next.status.push_back(basis.status[n + 1 + k + i]);
    for (int r = 0; r < k; ++r) {
      if (keep[r]) next.status.push_back(basis.status[cut_logical_col(n, m, k, r)]);
    }
  }
  for (int r = 0; r < k; ++r) {
    if (keep[r]) next_active.push_back(active[r]);
  }
  active = std::move(next_active);
  basis = std::move(next);
}

// Appends rows for `added` cuts: each new slack enters the basis, each new
// logical column stays nonbasic. Reduced costs are unchanged, so the basis
// stays dual feasible.
void extend_basis(Basis& basis, int n, int m, int k, std::size_t added) {
  if (basis.empty()) return;
  std::vector<VarStatus> s;
  s.reserve(basis.status.size() + 2 * added);
  s.insert(s.end(), basis.status.begin(), basis.status.begin() + n + 1 + k);
  s.insert(s.end(), added, VarStatus::Basic);
  s.insert(s.end(), basis.status.begin() + n + 1 + k, basis.status.end());
  s.insert(s.end(), added, VarStatus::AtLower);
  (void)m;
  basis.status = std::move(s);
}

constexpr std::size_t kCutsPerRound = 3;

}  // namespace

Engine::Engine(const Instance& instance, RiskParams risk) : Engine(instance, risk, make_pools(instance)) {}

Engine::Engine(const Instance& instance, RiskParams risk, CutPools pools)
    : instance_(&instance), risk_(risk), pools_(std::move(pools)) {
  risk_.validate();
  const int T = instance.horizon();
  if (pools_.horizon() != T) throw EngineError("cut pools do not match the instance horizon");
  for (int t = 2; t <= T; ++t) {
    if (pools_.at(t).dim() != instance.decision_dim(t - 1)) {
      throw EngineError("cut pool for stage " + std::to_string(t) + " has the wrong dimension");
    }
  }
  if (!risk_.risk_neutral()) {
    for (int t = 2; t <= T; ++t) {
      if (!instance.stage(t).uniform()) {
        throw EngineError("risk-averse runs need uniform stage weights (stage " + std::to_string(t) + ")");
      }
    }
  }
  lazy_.resize(static_cast<std::size_t>(T));
  lazy_[0].resize(1);
  for (int t = 2; t <= T; ++t) lazy_[t - 1].resize(instance.stage(t).size());
}

Engine::~Engine() = default;
Engine::Engine(Engine&&) noexcept = default;

StageSolution Engine::solve_stage(int t, int j, std::span<const double> x_prev) {
  const Instance& inst = *instance_;
  const int T = inst.horizon();
  if (t < 1 || t > T) throw EngineError("stage index out of range");
  const StageRealization& real = t == 1 ? inst.first_stage : inst.stage(t).realizations.at(j);
  const CutPool* next = t < T ? &pools_.at(t + 1) : nullptr;
  LazyState& st = lazy_[t - 1][t == 1 ? 0 : j];
  const int n = real.num_vars();
  const int m = real.num_rows();

  if (next != nullptr) prune_rows(st.active, st.basis, *next, n, m);

  std::vector<std::size_t> positions;
  std::vector<char> in_active;
  LpSolution sol;
  for (;;) {
    positions.clear();
    if (next != nullptr) {
      in_active.assign(next->size(), 0);
      for (std::uint64_t id : st.active) {
        const auto p = static_cast<std::size_t>(next->position_of(id));
        positions.push_back(p);
        in_active[p] = 1;
      }
    }
    const LinearProgram lp = assemble_stage_lp(real, x_prev, next, positions);
    sol = st.basis.empty() ? solver_.solve(lp) : solver_.solve(lp, st.basis);
    ++lp_solves_;
    if (sol.status == LpStatus::Infeasible) {
      throw EngineError("recourse violated at stage " + std::to_string(t) + " (outcome " + std::to_string(j + 1) + ")");
    }
    if (sol.status == LpStatus::Unbounded) {
      throw EngineError("stage " + std::to_string(t) + " LP is unbounded (outcome " + std::to_string(j + 1) + ")");
    }
    st.basis = sol.basis;
    if (next == nullptr) break;

    const std::span<const double> x(sol.primal.data(), static_cast<std::size_t>(n));
    const double theta = sol.primal[n];
    const double tol = 1e-9 * (1.0 + std::abs(theta));
    std::vector<std::pair<double, std::size_t>> violated;
    for (std::size_t p = 0; p < next->size(); ++p) {
      if (in_active[p]) continue;
      const double v = next->cut(p).value_at(x) - theta;
      if (v > tol) violated.emplace_back(v, p);
    }
    if (violated.empty()) break;
    const std::size_t take = std::min(kCutsPerRound, violated.size());
    std::partial_sort(violated.begin(), violated.begin() + static_cast<std::ptrdiff_t>(take), violated.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
    const int k = static_cast<int>(st.active.size());
    for (std::size_t i = 0; i < take; ++i) st.active.push_back(next->id_at(violated[i].second));
    extend_basis(st.basis, n, m, k, take);
  }

  StageSolution out;
  out.x.assign(sol.primal.begin(), sol.primal.begin() + n);
  out.stage_cost = 0.0;
  for (int i = 0; i < n; ++i) out.stage_cost += real.c[i] * out.x[i];
  out.value = sol.objective_value;
  out.row_duals.assign(sol.eq_duals.begin(), sol.eq_duals.begin() + m);
  return out;
}

Trajectory Engine::forward_pass(const StageWeights& sampling, Rng& rng) {
  const int T = instance_->horizon();
  if (static_cast<int>(sampling.size()) != T - 1) throw EngineError("sampling weights do not cover stages 2..T");
  Trajectory traj;
  traj.sampled_indices = sample_scenario(sampling, rng);
  traj.stage_costs.assign(static_cast<std::size_t>(T), 0.0);
  StageSolution s = solve_stage(1, 0, {});
  traj.stage_costs[0] = s.stage_cost;
  traj.trial_points.push_back(std::move(s.x));
  for (int t = 2; t <= T - 1; ++t) {
    s = solve_stage(t, traj.sampled_indices[t - 2], traj.trial_points.back());
    traj.stage_costs[t - 1] = s.stage_cost;
    traj.trial_points.push_back(std::move(s.x));
  }
  return traj;
}

BackwardResult Engine::backward_pass(Trajectory& traj, int iteration) {
  const Instance& inst = *instance_;
  const int T = inst.horizon();
  if (static_cast<int>(traj.trial_points.size()) != T - 1) throw EngineError("trajectory lacks trial points");
  BackwardResult out;
  out.cuts.resize(static_cast<std::size_t>(T - 1));
  out.values.resize(static_cast<std::size_t>(T - 1));
  for (int t = T; t >= 2; --t) {
    const StageData& stage = inst.stage(t);
    const std::vector<double>& anchor = traj.trial_points[t - 2];
    const std::size_t N = stage.size();
    std::vector<double> values(N);
    std::vector<std::vector<double>> grads(N);
    for (std::size_t j = 0; j < N; ++j) {
      StageSolution s = solve_stage(t, static_cast<int>(j), anchor);
      values[j] = s.value;
      grads[j].assign(anchor.size(), 0.0);
      stage.realizations[j].B.transpose_multiply_add(s.row_duals, grads[j]);
      for (double& g : grads[j]) g = -g;
      if (t == T && static_cast<int>(j) == traj.sampled_indices.at(T - 2)) traj.stage_costs[T - 1] = s.stage_cost;
    }
    Cut cut = combine_cut(values, grads, cut_weights(values, stage, risk_), anchor);
    cut.origin_iteration = iteration;
    out.cuts[t - 2] = cut;
    out.values[t - 2] = std::move(values);
    pools_.at(t).add(std::move(cut));
  }
  return out;
}

double Engine::lower_bound() { return solve_stage(1, 0, {}).value; }

namespace {

StageWeights instance_weights(const Instance& inst) {
  StageWeights w;
  for (const StageData& s : inst.stages) w.push_back(s.effective_weights());
  return w;
}

}  // namespace

RunResult run(const Instance& instance, const RunConfig& config, CutPools initial) {
  if (config.max_iterations < 1) throw EngineError("max_iterations must be at least 1");
  if (const auto v = validate(instance); !v.empty()) throw EngineError("invalid instance: " + v.front());
  config.risk.validate();
  const int T = instance.horizon();
  if (config.sampler.kind == SamplerSpec::Kind::FixedBias) {
    if (config.sampler.fixed.empty() && config.switch_iteration <= 0) {
      throw EngineError("fixed-bias sampling needs weights or a switch iteration");
    }
    if (!config.sampler.fixed.empty()) {
      if (static_cast<int>(config.sampler.fixed.size()) != T - 1) throw EngineError("sampling weights do not cover stages 2..T");
      for (int t = 2; t <= T; ++t) {
        const auto& w = config.sampler.fixed[t - 2];
        if (w.size() != instance.stage(t).size() || !is_probability_vector(w, 1e-9)) {
          throw EngineError("invalid sampling weights for stage " + std::to_string(t));
        }
      }
    }
  }

  RunResult result;
  Engine engine(instance, config.risk, initial.pools.empty() ? make_pools(instance) : std::move(initial));
  if (config.cut_capacity > 0) {
    for (CutPool& p : engine.pools().pools) p.set_capacity(config.cut_capacity);
  }
  result.log.risk = config.risk;
  result.frequencies = FrequencyTable(instance);
  result.adjusted = FrequencyTable(instance);
  const StageWeights base = instance_weights(instance);
  StageWeights fixed = config.sampler.fixed;
  Rng rng(config.seed);

  const bool dynamic = config.sampler.kind == SamplerSpec::Kind::DynamicBias;
  for (int m = 1; m <= config.max_iterations; ++m) {
    const auto start = std::chrono::steady_clock::now();
    StageWeights sampling;
    switch (config.sampler.kind) {
      case SamplerSpec::Kind::Uniform:
        sampling = base;
        break;
      case SamplerSpec::Kind::FixedBias:
        if (config.switch_iteration > 0 && m < config.switch_iteration) {
          sampling = base;
        } else {
          if (fixed.empty()) {
            fixed = result.frequencies.empty() ? base : finalize_bad_outcome_weights(result.frequencies, config.risk);
            result.switched_weights = fixed;
          }
          sampling = fixed;
        }
        break;
      case SamplerSpec::Kind::DynamicBias:
        for (int t = 2; t <= T; ++t) {
          sampling.push_back(current_stage_weights(config.sampler, result.adjusted, config.risk, t, base));
        }
        break;
    }

    Trajectory traj = engine.forward_pass(sampling, rng);
    BackwardResult back = engine.backward_pass(traj, m);
    for (int t = 2; t <= T; ++t) {
      record_backward_values(result.frequencies, t, back.values[t - 2], config.risk.alpha, m, Decay::None);
      if (dynamic) {
        record_backward_values(result.adjusted, t, back.values[t - 2], config.risk.alpha, m, config.sampler.decay);
      }
    }
    IterationRecord rec;
    rec.iteration = m;
    rec.lower_bound = engine.lower_bound();
    rec.cumulative_cost = traj.cumulative_cost();
    rec.scenario = traj.sampled_indices;
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    result.log.records.push_back(std::move(rec));

    if (config.stall_tolerance > 0.0 && m > config.stall_window) {
      const double now = result.log.records.back().lower_bound;
      const double then = result.log.records[m - 1 - config.stall_window].lower_bound;
      if (now - then <= config.stall_tolerance * std::max(1.0, std::abs(now))) break;
    }
  }
  result.lp_solves = engine.lp_solves();
  result.pools = engine.release_pools();
  return result;
}

std::vector<SimulatedPath> simulate_paths(const Instance& instance, const CutPools& pools, int count,
                                          std::uint64_t seed) {
  if (count < 0) throw EngineError("scenario count must be nonnegative");
  Engine engine(instance, RiskParams{0.0, 0.5}, pools);
  const StageWeights w = instance_weights(instance);
  Rng rng(seed);
  std::vector<SimulatedPath> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) {
    SimulatedPath path;
    path.indices = sample_scenario(w, rng);
    StageSolution sol = engine.solve_stage(1, 0, {});
    path.stage_costs.push_back(sol.stage_cost);
    path.decisions.push_back(std::move(sol.x));
    for (int t = 2; t <= instance.horizon(); ++t) {
      sol = engine.solve_stage(t, path.indices[t - 2], path.decisions.back());
      path.stage_costs.push_back(sol.stage_cost);
      path.decisions.push_back(std::move(sol.x));
    }
    out.push_back(std::move(path));
  }
  return out;
}

double statistical_upper_bound(const IterationLog& log, int m) {
  if (!log.risk.risk_neutral()) {
    throw EngineError("statistical upper bound is invalid under risk aversion");
  }
  if (m < 1 || m > static_cast<int>(log.records.size())) throw EngineError("statistical_upper_bound: iteration out of range");
  double sum = 0.0;
  for (int i = 0; i < m; ++i) sum += log.records[i].cumulative_cost;
  return sum / static_cast<double>(m);
}

}  // namespace rasddp
