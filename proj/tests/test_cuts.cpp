#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "rasddp/cuts.hpp"
#include "rasddp/engine.hpp"
#include "support.hpp"

using namespace rasddp;
using doctest::Approx;

namespace {

std::string tmp(const std::string& name) {
  std::filesystem::create_directories(RASDDP_TEST_TMP);
  return (std::filesystem::path(RASDDP_TEST_TMP) / name).string();
}

// Stage with x = (x1, x2): x1 + x2 = 4 - x_prev, 0 <= x <= 3, cost (1, 2).
StageRealization two_var_stage() {
  StageRealization r;
  r.c = {1, 2};
  r.lb = {0, 0};
  r.ub = {3, 3};
  r.A = SparseMatrix(1, 2);
  r.A.add(0, 0, 1);
  r.A.add(0, 1, 1);
  r.B = SparseMatrix(1, 1);
  r.B.add(0, 0, 1);
  r.b = {4};
  return r;
}

}  // namespace

TEST_CASE("evaluate") {
  CutPool empty(1);
  CHECK(empty.evaluate(std::vector<double>{12.0}) == 0);
  CutPool p(1);
  p.add({1, {2}, 1});
  CHECK(p.evaluate(std::vector<double>{3.0}) == 7);
  p.add({10, {-1}, 2});
  CHECK(p.evaluate(std::vector<double>{0.0}) == 10);
  CHECK_THROWS_AS(p.evaluate(std::vector<double>{1.0, 2.0}), CutError);
  CutPool neg(1, -5);
  CHECK(neg.evaluate(std::vector<double>{1.0}) == -5);
}

TEST_CASE("add") {
  CutPool p(2);
  CHECK(p.add({1, {1, 1}, 1}));
  CHECK(p.size() == 1);
  CHECK(!p.add({1 + 1e-14, {1, 1}, 2}));
  CHECK(p.size() == 1);
  CHECK(p.add({0, {1, 1}, 3}));  // dominated, kept
  CHECK(p.size() == 2);
  CHECK_THROWS_AS(p.add({0, {1}, 4}), CutError);
  CHECK_THROWS_AS(p.add({std::nan(""), {1, 1}, 4}), CutError);
}

TEST_CASE("capacity evicts oldest cuts") {
  CutPool p(1);
  p.set_capacity(3);
  for (int k = 0; k < 5; ++k) p.add({static_cast<double>(k), {0.0}, k});
  CHECK(p.size() == 3);
  CHECK(p.cut(0).intercept == 2);
  CHECK(p.id_at(0) == 2);
  CHECK(p.position_of(1) == -1);
  CHECK(p.position_of(4) == 2);
  CHECK(p.next_id() == 5);
}

TEST_CASE("assembled LP") {
  const auto r = two_var_stage();
  const std::vector<double> xp{1.0};

  SUBCASE("empty pool gives myopic value plus the bound") {
    CutPool pool(2, 1.5);
    const auto lp = assemble_stage_lp(r, xp, &pool);
    const auto s = solve(lp);
    REQUIRE(s.optimal());
    CHECK(s.objective_value == Approx(3 + 0 + 1.5));
  }
  SUBCASE("one cut is tight at the optimum") {
    CutPool pool(2);
    pool.add({1, {0, 4}, 1});
    const auto lp = assemble_stage_lp(r, xp, &pool);
    const auto s = solve(lp);
    REQUIRE(s.optimal());
    const double theta = s.primal[2];
    CHECK(theta == Approx(std::max(0.0, 1 + 4 * s.primal[1])));
    CHECK(s.objective_value == Approx(4.0));
  }
  SUBCASE("two cuts against vertex enumeration") {
    std::mt19937_64 g(12);
    for (int rep = 0; rep < 50; ++rep) {
      CutPool pool(2);
      pool.add({support::unif(g, -5, 5), {support::unif(g, -3, 3), support::unif(g, -3, 3)}, 1});
      pool.add({support::unif(g, -5, 5), {support::unif(g, -3, 3), support::unif(g, -3, 3)}, 2});
      const std::vector<double> x{support::unif(g, 1, 4)};
      const auto lp = assemble_stage_lp(r, x, &pool);
      const auto s = solve(lp);
      const auto v = support::vertex_enumeration(lp);
      REQUIRE(v.has_value());
      REQUIRE(s.optimal());
      CHECK(s.objective_value == Approx(*v).epsilon(1e-9));
      // grid check of the same value
      double best = kInf;
      for (int k = 0; k <= 3000; ++k) {
        const double x1 = 3.0 * k / 3000.0;
        const double x2 = 4 - x[0] - x1;
        if (x2 < 0 || x2 > 3) continue;
        const std::vector<double> pt{x1, x2};
        best = std::min(best, x1 + 2 * x2 + pool.evaluate(pt));
      }
      CHECK(s.objective_value <= best + 1e-9);
      CHECK(s.objective_value >= best - 0.02);
    }
  }
  SUBCASE("last stage fixes theta") {
    const auto lp = assemble_stage_lp(r, xp, nullptr);
    CHECK(lp.var_lower[2] == 0);
    CHECK(lp.var_upper[2] == 0);
  }
  SUBCASE("position subsets") {
    CutPool pool(2);
    pool.add({100, {0, 0}, 1});
    pool.add({1, {0, 0}, 2});
    const std::vector<std::size_t> second{1};
    CHECK(solve(assemble_stage_lp(r, xp, &pool, second)).objective_value == Approx(4.0));
    CHECK(solve(assemble_stage_lp(r, xp, &pool)).objective_value == Approx(103.0));
    const std::vector<std::size_t> bad{5};
    CHECK_THROWS_AS(assemble_stage_lp(r, xp, &pool, bad), CutError);
  }
  SUBCASE("dimension errors") {
    CutPool pool(3);
    CHECK_THROWS_AS(assemble_stage_lp(r, xp, &pool), CutError);
    CutPool ok(2);
    CHECK_THROWS_AS(assemble_stage_lp(r, std::vector<double>{1, 2}, &ok), CutError);
  }
}

TEST_CASE("save and load") {
  const auto inst = build_instance(support::tiny_hydro(4));
  RunConfig cfg;
  cfg.risk = {0.2, 0.4};
  cfg.max_iterations = 20;
  const auto res = run(inst, cfg);
  const auto path = tmp("cuts.jsonl");
  save_cuts(res.pools, path, "manifest abc");
  const auto back = load_cuts(inst, path);
  std::mt19937_64 g(13);
  for (int t = 2; t <= inst.horizon(); ++t) {
    REQUIRE(back.at(t).size() == res.pools.at(t).size());
    for (int k = 0; k < 100; ++k) {
      std::vector<double> x(res.pools.at(t).dim());
      for (double& v : x) v = support::unif(g, 0, 100);
      CHECK(back.at(t).evaluate(x) == res.pools.at(t).evaluate(x));
    }
    for (std::size_t k = 0; k < back.at(t).size(); ++k) {
      CHECK(back.at(t).cut(k).intercept == res.pools.at(t).cut(k).intercept);
      CHECK(back.at(t).cut(k).gradient == res.pools.at(t).cut(k).gradient);
      CHECK(back.at(t).cut(k).origin_iteration == res.pools.at(t).cut(k).origin_iteration);
    }
  }

  const auto other = build_instance(support::tiny_hydro(3));
  CHECK_THROWS_AS(load_cuts(other, path), CutError);
  auto wide = build_instance(default_desk_instance(DeskSize::Small));
  CHECK_THROWS_AS(load_cuts(wide, path), CutError);

  const auto empty = tmp("empty.jsonl");
  std::ofstream(empty).close();
  const auto none = load_cuts(inst, empty);
  CHECK(none.total_cuts() == 0);
  CHECK(none.horizon() == inst.horizon());

  const auto junk = tmp("junk.jsonl");
  std::ofstream(junk) << "{\"t\": 2, \"intercept\": \n";
  CHECK_THROWS_AS(load_cuts(inst, junk), CutError);
  CHECK_THROWS_AS(load_cuts(inst, tmp("missing.jsonl")), CutError);
}

TEST_CASE("monotone refinement") {
  std::mt19937_64 g(14);
  CutPool p(3);
  std::vector<std::vector<double>> pts(100, std::vector<double>(3));
  for (auto& x : pts) {
    for (double& v : x) v = support::unif(g, -10, 10);
  }
  std::vector<double> prev(pts.size(), 0.0);
  for (int k = 0; k < 40; ++k) {
    p.add({support::unif(g, -20, 5), {support::unif(g, -2, 2), support::unif(g, -2, 2), support::unif(g, -2, 2)}, k});
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double v = p.evaluate(pts[i]);
      CHECK(v >= prev[i]);
      prev[i] = v;
    }
  }
}
