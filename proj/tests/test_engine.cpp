#include <cmath>
#include <random>

#include "doctest.h"
#include "rasddp/engine.hpp"
#include "rasddp/oracle.hpp"
#include "support.hpp"

using namespace rasddp;
using doctest::Approx;

namespace {

StageWeights uniform_weights(const Instance& inst) {
  StageWeights w;
  for (const auto& s : inst.stages) w.push_back(s.effective_weights());
  return w;
}

bool same_log(const IterationLog& a, const IterationLog& b) {
  if (a.records.size() != b.records.size()) return false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& x = a.records[i];
    const auto& y = b.records[i];
    if (x.lower_bound != y.lower_bound || x.cumulative_cost != y.cumulative_cost || x.scenario != y.scenario) {
      return false;
    }
  }
  return true;
}

// Expected-value SDDP loop written out step by step: it borrows only the
// engine's stage solver and does its own sampling, averaging and cut
// bookkeeping. Cross-checks the engine's risk-neutral configuration.
struct ReferenceSddp {
  const Instance& inst;
  Engine solver;

  explicit ReferenceSddp(const Instance& i) : inst(i), solver(i, {0.0, 0.5}) {}

  double iterate(Rng& rng, int m) {
    const int T = inst.horizon();
    const auto idx = sample_scenario(uniform_weights(inst), rng);
    std::vector<std::vector<double>> xs;
    xs.push_back(solver.solve_stage(1, 0, {}).x);
    for (int t = 2; t <= T - 1; ++t) xs.push_back(solver.solve_stage(t, idx[t - 2], xs.back()).x);
    for (int t = T; t >= 2; --t) {
      const auto& xp = xs[t - 2];
      const std::size_t N = inst.stage(t).size();
      Cut cut;
      cut.gradient.assign(xp.size(), 0.0);
      cut.origin_iteration = m;
      double at_anchor = 0;
      for (std::size_t j = 0; j < N; ++j) {
        const auto sol = solver.solve_stage(t, static_cast<int>(j), xp);
        std::vector<double> g(xp.size(), 0.0);
        inst.stage(t).realizations[j].B.transpose_multiply_add(sol.row_duals, g);
        at_anchor += sol.value / static_cast<double>(N);
        for (std::size_t k = 0; k < g.size(); ++k) cut.gradient[k] -= g[k] / static_cast<double>(N);
      }
      cut.intercept = at_anchor;
      for (std::size_t k = 0; k < xp.size(); ++k) cut.intercept -= cut.gradient[k] * xp[k];
      solver.pools().at(t).add(cut);
    }
    return solver.lower_bound();
  }
};

Instance infeasible_recourse() {
  Instance inst;
  auto& f = inst.first_stage;
  f.c = {1};
  f.lb = {0};
  f.ub = {kInf};
  f.A = SparseMatrix(1, 1);
  f.A.add(0, 0, 1);
  f.B = SparseMatrix(1, 0);
  f.b = {1};
  StageData sd;
  StageRealization r;
  r.c = {1};
  r.lb = {0};
  r.ub = {1};
  r.A = SparseMatrix(1, 1);
  r.A.add(0, 0, 1);
  r.B = SparseMatrix(1, 1);
  r.b = {5};
  sd.realizations = {r, r};
  sd.realizations[0].b = {0.5};
  inst.stages.push_back(sd);
  return inst;
}

}  // namespace

TEST_CASE("deterministic instance") {
  const auto inst = support::stable_order_inventory(4, 1);
  Engine a(inst, {0.3, 0.5});
  Engine b(inst, {0.3, 0.5});
  Rng r1(1), r2(999);
  const auto w = uniform_weights(inst);
  for (int m = 1; m <= 3; ++m) {
    auto t1 = a.forward_pass(w, r1);
    auto t2 = b.forward_pass(w, r2);
    CHECK(t1.sampled_indices == std::vector<int>{0, 0, 0});
    CHECK(t1.trial_points == t2.trial_points);
    a.backward_pass(t1, m);
    b.backward_pass(t2, m);
  }
  RunConfig cfg;
  cfg.risk = {0.3, 0.5};
  cfg.max_iterations = 10;
  const auto res = run(inst, cfg);
  CHECK(res.log.records.back().lower_bound == Approx(exact_value(inst, cfg.risk)).epsilon(1e-9));
}

TEST_CASE("two-stage trajectories hold only the first decision") {
  std::mt19937_64 g(1);
  const auto inst = support::random_two_stage(g, 4);
  Engine e(inst, {0.2, 0.5});
  Rng rng(3);
  const auto traj = e.forward_pass(uniform_weights(inst), rng);
  CHECK(traj.trial_points.size() == 1);
  CHECK(traj.sampled_indices.size() == 1);
}

TEST_CASE("sampled indices are reproducible") {
  const auto inst = build_instance(support::tiny_hydro(3));
  RunConfig cfg;
  cfg.risk = {0.2, 0.4};
  cfg.max_iterations = 30;
  cfg.seed = 77;
  const auto a = run(inst, cfg);
  const auto b = run(inst, cfg);
  CHECK(same_log(a.log, b.log));
  CHECK(a.frequencies.counts == b.frequencies.counts);
  cfg.seed = 78;
  const auto c = run(inst, cfg);
  bool differ = false;
  for (std::size_t i = 0; i < c.log.records.size(); ++i) {
    differ = differ || c.log.records[i].scenario != a.log.records[i].scenario;
  }
  CHECK(differ);
}

TEST_CASE("cut formula") {
  const std::vector<double> values{1, 2, 3, 4};
  const std::vector<std::vector<double>> grads{{1, 0}, {0, 1}, {2, 2}, {-1, 3}};
  const std::vector<double> anchor{1, 1};
  StageData sd;
  sd.realizations.resize(4);
  const auto avg = combine_cut(values, grads, cut_weights(values, sd, {0.0, 0.5}), anchor);
  CHECK(avg.value_at(anchor) == Approx(2.5));
  CHECK(avg.gradient[0] == Approx(0.5));
  CHECK(avg.gradient[1] == Approx(1.5));

  const auto ra = combine_cut(values, grads, cut_weights(values, sd, {0.2, 0.5}), anchor);
  CHECK(ra.value_at(anchor) == Approx(2.7));
  // direct sorted-order composition: (1-l)/N sum + l v_(k) + l/(aN) sum_{j>k} (v_(j) - v_(k))
  const double l = 0.2, a = 0.5;
  const double g0 = (1 - l) / 4 * (1 + 0 + 2 - 1) + l * 0 + l / (a * 4) * ((2 - 0) + (-1 - 0));
  const double g1 = (1 - l) / 4 * (0 + 1 + 2 + 3) + l * 1 + l / (a * 4) * ((2 - 1) + (3 - 1));
  CHECK(ra.gradient[0] == Approx(g0));
  CHECK(ra.gradient[1] == Approx(g1));

  StageData one;
  one.realizations.resize(1);
  const std::vector<double> v1{7};
  const auto single = combine_cut(v1, {{2, -1}}, cut_weights(v1, one, {0.9, 0.1}), anchor);
  CHECK(single.value_at(anchor) == Approx(7));
  CHECK(single.gradient == std::vector<double>{2, -1});
}

TEST_CASE("cut value at the anchor equals rho of the stage values") {
  const auto spec = support::tiny_hydro(4);
  const auto inst = build_instance(spec);
  const RiskParams rp{0.2, 0.4};
  Engine e(inst, rp);
  Rng rng(5);
  for (int m = 1; m <= 20; ++m) {
    auto traj = e.forward_pass(uniform_weights(inst), rng);
    const auto back = e.backward_pass(traj, m);
    for (int t = 2; t <= inst.horizon(); ++t) {
      const double r = rho({back.values[t - 2]}, rp);
      CHECK(std::abs(back.cuts[t - 2].value_at(traj.trial_points[t - 2]) - r) <= 1e-9 * (1 + std::abs(r)));
    }
  }
}

TEST_CASE("two-stage cut against independently solved values") {
  std::mt19937_64 g(2);
  for (int rep = 0; rep < 10; ++rep) {
    const auto inst = support::random_two_stage(g, 5);
    const RiskParams rp{0.3, 0.4};
    Engine e(inst, rp);
    Rng rng(rep);
    auto traj = e.forward_pass(uniform_weights(inst), rng);
    const auto back = e.backward_pass(traj, 1);
    std::vector<double> vals;
    for (const auto& r : inst.stage(2).realizations) {
      vals.push_back(solve(assemble_stage_lp(r, traj.trial_points[0], nullptr)).objective_value);
    }
    const double expect = rho({vals}, rp);
    CHECK(back.cuts[0].value_at(traj.trial_points[0]) == Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("one cut per stage after a single iteration") {
  const auto inst = build_instance(support::tiny_hydro(4));
  RunConfig cfg;
  cfg.max_iterations = 1;
  const auto res = run(inst, cfg);
  for (int t = 2; t <= 4; ++t) CHECK(res.pools.at(t).size() == 1);
  CHECK(res.log.records.size() == 1);
}

TEST_CASE("risk-neutral runs match a reference implementation") {
  const auto inst = build_instance(support::tiny_hydro(4));
  RunConfig cfg;
  cfg.risk = {0.0, 0.5};
  cfg.max_iterations = 40;
  cfg.seed = 11;
  const auto res = run(inst, cfg);
  ReferenceSddp ref(inst);
  Rng rng(cfg.seed);
  for (int m = 1; m <= cfg.max_iterations; ++m) {
    const double lb = ref.iterate(rng, m);
    CHECK(res.log.records[m - 1].lower_bound == Approx(lb).epsilon(1e-12));
  }
  for (int t = 2; t <= inst.horizon(); ++t) {
    const auto& mine = ref.solver.pools().at(t);
    REQUIRE(res.pools.at(t).size() == mine.size());
    for (std::size_t k = 0; k < mine.size(); ++k) {
      const auto& a = res.pools.at(t).cut(k);
      const auto& b = mine.cut(k);
      CHECK(a.intercept == Approx(b.intercept).epsilon(1e-12));
      for (std::size_t i = 0; i < a.gradient.size(); ++i) {
        CHECK(std::abs(a.gradient[i] - b.gradient[i]) <= 1e-12 * (1 + std::abs(b.gradient[i])));
      }
    }
  }
}

TEST_CASE("lazy stage solves equal full stage LPs") {
  const auto spec = support::tiny_hydro(4);
  const auto inst = build_instance(spec);
  RunConfig cfg;
  cfg.risk = {0.2, 0.4};
  cfg.max_iterations = 60;
  auto res = run(inst, cfg);
  const CutPools pools = res.pools;
  Engine e(inst, cfg.risk, std::move(res.pools));
  std::mt19937_64 g(6);
  for (int k = 0; k < 60; ++k) {
    const int t = support::unif_int(g, 2, inst.horizon());
    const int j = support::unif_int(g, 0, 2);
    const auto x = support::random_hydro_state(spec, g);
    const CutPool* next = t < inst.horizon() ? &pools.at(t + 1) : nullptr;
    const auto full = solve(assemble_stage_lp(inst.stage(t).realizations[j], x, next));
    const auto lazy = e.solve_stage(t, j, x);
    REQUIRE(full.optimal());
    CHECK(lazy.value == Approx(full.objective_value).epsilon(1e-9));
  }
}

TEST_CASE("tiny instance converges to the oracle") {
  const auto inst = build_instance(support::tiny_hydro(3));
  const RiskParams rp{0.2, 0.4};
  const double v = exact_value(inst, rp);
  RunConfig cfg;
  cfg.risk = rp;
  cfg.max_iterations = 200;
  const auto res = run(inst, cfg);
  double prev = -kInf;
  for (const auto& r : res.log.records) {
    CHECK(r.lower_bound >= prev - 1e-9);
    CHECK(r.lower_bound <= v + 1e-7);
    prev = r.lower_bound;
  }
  CHECK(std::abs(res.log.records.back().lower_bound - v) <= 1e-6);
}

TEST_CASE("cuts stay below the exact cost-to-go") {
  const auto spec = support::tiny_hydro(3);
  const auto inst = build_instance(spec);
  const RiskParams rp{0.2, 0.4};
  RunConfig cfg;
  cfg.risk = rp;
  cfg.max_iterations = 50;
  const auto res = run(inst, cfg);
  std::mt19937_64 g(7);
  for (int k = 0; k < 30; ++k) {
    const auto x = support::random_hydro_state(spec, g);
    for (int t = 2; t <= 3; ++t) {
      CHECK(res.pools.at(t).evaluate(x) <= exact_cost_to_go(inst, rp, t, x) + 1e-7);
    }
  }
}

TEST_CASE("statistical upper bound") {
  const auto tiny = build_instance(support::tiny_hydro(3));
  RunConfig cfg;
  cfg.risk = {0.2, 0.4};
  cfg.max_iterations = 5;
  const auto ra = run(tiny, cfg);
  CHECK_THROWS_WITH_AS(statistical_upper_bound(ra.log, 5), doctest::Contains("invalid under risk aversion"),
                       EngineError);

  const auto det = support::stable_order_inventory(3, 1);
  cfg.risk = {0.0, 0.5};
  cfg.max_iterations = 8;
  const auto d = run(det, cfg);
  for (int m = 1; m <= 8; ++m) CHECK(statistical_upper_bound(d.log, m) == Approx(d.log.records[m - 1].cumulative_cost));
  CHECK(statistical_upper_bound(d.log, 8) == Approx(statistical_upper_bound(d.log, 3)));
  CHECK_THROWS_AS(statistical_upper_bound(d.log, 9), EngineError);

  cfg.max_iterations = 500;
  const auto calm = support::calm_inventory();
  const auto rn = run(calm, cfg);
  const double lb = rn.log.records.back().lower_bound;
  const double ub = statistical_upper_bound(rn.log, 500);
  CHECK(std::abs(ub - lb) <= 0.02 * std::abs(lb));
  CHECK(lb == Approx(exact_value(calm, cfg.risk)).epsilon(1e-9));

  // Hydro path costs spread too widely for a 2% band at 500 samples; check
  // the converged policy's simulated mean against its standard error instead.
  const auto hydro = run(tiny, cfg);
  const auto paths = simulate_paths(tiny, hydro.pools, 20000, 3);
  double s = 0, s2 = 0;
  for (const auto& p : paths) {
    double c = 0;
    for (double x : p.stage_costs) c += x;
    s += c;
    s2 += c * c;
  }
  const double n = static_cast<double>(paths.size());
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  const double v = exact_value(tiny, cfg.risk);
  CHECK(hydro.log.records.back().lower_bound == Approx(v).epsilon(1e-6));
  CHECK(std::abs(mean - v) <= 3 * se);
}

TEST_CASE("stall rule") {
  const auto inst = support::stable_order_inventory(3, 1);
  RunConfig cfg;
  cfg.max_iterations = 1000;
  cfg.stall_tolerance = 1e-9;
  cfg.stall_window = 10;
  const auto res = run(inst, cfg);
  CHECK(res.log.records.size() < 100);
  CHECK(res.log.records.size() > 10);
}

TEST_CASE("fatal stage conditions") {
  const auto inst = infeasible_recourse();
  RunConfig cfg;
  cfg.max_iterations = 3;
  CHECK_THROWS_WITH_AS(run(inst, cfg), doctest::Contains("recourse violated at stage 2"), EngineError);

  auto unb = infeasible_recourse();
  for (auto& r : unb.stage(2).realizations) {
    r.c = {-1, 0};
    r.lb = {0, 0};
    r.ub = {kInf, kInf};
    r.A = SparseMatrix(1, 2);
    r.A.add(0, 0, 1);
    r.A.add(0, 1, -1);
    r.b = {0};
  }
  CHECK_THROWS_WITH_AS(run(unb, cfg), doctest::Contains("unbounded"), EngineError);

  cfg.max_iterations = 0;
  CHECK_THROWS_AS(run(support::stable_order_inventory(3, 2), cfg), EngineError);

  auto weighted = support::stable_order_inventory(3, 2);
  weighted.stage(2).weights = {0.9, 0.1};
  cfg.max_iterations = 2;
  cfg.risk = {0.5, 0.5};
  CHECK_THROWS_AS(run(weighted, cfg), EngineError);
  cfg.risk = {0.0, 0.5};
  CHECK_NOTHROW(run(weighted, cfg));
}

TEST_CASE("simulated paths follow the policy") {
  const auto inst = build_instance(support::tiny_hydro(3));
  RunConfig cfg;
  cfg.max_iterations = 30;
  const auto res = run(inst, cfg);
  const auto a = simulate_paths(inst, res.pools, 20, 5);
  const auto b = simulate_paths(inst, res.pools, 20, 5);
  REQUIRE(a.size() == 20);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].indices == b[i].indices);
    CHECK(a[i].stage_costs == b[i].stage_costs);
    CHECK(a[i].decisions.size() == 3);
    CHECK(a[i].stage_costs.size() == 3);
  }
}
