#include "rasddp/hydrothermal.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "rasddp/json_util.hpp"
#include "rasddp/sampling.hpp"

namespace rasddp {

HydroLayout hydro_layout(const HydroSystemSpec& spec) {
  HydroLayout l;
  l.K = spec.num_subsystems();
  int at = 0;
  l.storage = at;
  at += l.K;
  l.release = at;
  at += l.K;
  l.spill = at;
  at += l.K;
  l.thermal = at;
  at += static_cast<int>(spec.thermals.size());
  l.deficit = at;
  at += static_cast<int>(spec.deficits.size());
  l.flow = at;
  at += static_cast<int>(spec.arcs.size());
  l.inflow = at;
  at += l.K;
  l.lagged = at;
  at += l.K * std::max(0, spec.inflow.lag - 1);
  l.size = at;
  return l;
}

int state_dimension(const HydroSystemSpec& spec) { return spec.num_subsystems() * (1 + spec.inflow.lag); }

std::vector<std::string> validate(const HydroSystemSpec& spec) {
  std::vector<std::string> out;
  const int K = spec.num_subsystems();
  const int T = spec.horizon;
  const int p = spec.inflow.lag;
  const int P = spec.inflow.period;
  auto bad = [&out](std::string s) { out.push_back(std::move(s)); };
  if (K < 1) bad("at least one subsystem is required");
  if (T < 2) bad("horizon must be at least 2");
  if (spec.reporting_horizon < 0 || spec.reporting_horizon > T) bad("reporting horizon must lie in [0, T]");
  if (!(spec.discount > 0.0 && spec.discount <= 1.0)) bad("discount must lie in (0, 1]");
  if (p < 1) bad("inflow lag must be at least 1");
  if (P < 1) bad("inflow period must be at least 1");
  for (int k = 0; k < K; ++k) {
    const Subsystem& s = spec.subsystems[k];
    const std::string tag = "subsystem " + std::to_string(k + 1);
    if (!(s.storage_capacity >= 0.0) || !(s.hydro_capacity >= 0.0)) bad(tag + ": capacities must be nonnegative");
    if (!(s.initial_storage >= 0.0 && s.initial_storage <= s.storage_capacity)) bad(tag + ": initial storage outside [0, capacity]");
    if (static_cast<int>(s.initial_inflows.size()) != p) bad(tag + ": need one initial inflow per lag");
    if (static_cast<int>(s.demand.size()) != T) bad(tag + ": demand must list one value per stage");
    for (double d : s.demand) {
      if (!std::isfinite(d) || d < 0.0) bad(tag + ": demand must be finite and nonnegative");
    }
  }
  auto in_range = [K](int k) { return k >= 0 && k < K; };
  for (const ThermalPlant& g : spec.thermals) {
    if (!in_range(g.subsystem)) bad("thermal plant refers to an unknown subsystem");
    if (!(g.lower >= 0.0 && g.lower <= g.upper) || !std::isfinite(g.upper)) bad("thermal bounds must satisfy 0 <= lower <= upper < inf");
  }
  std::vector<int> top(K, 0);
  for (const DeficitTier& d : spec.deficits) {
    if (!in_range(d.subsystem)) {
      bad("deficit tier refers to an unknown subsystem");
      continue;
    }
    if (!(d.cap >= 0.0)) bad("deficit caps must be nonnegative");
    if (std::isinf(d.cap)) top[d.subsystem] = 1;
  }
  for (int k = 0; k < K; ++k) {
    if (!top[k]) bad("subsystem " + std::to_string(k + 1) + " needs an unbounded deficit tier");
  }
  for (const Interconnection& a : spec.arcs) {
    if (!in_range(a.from) || !in_range(a.to) || a.from == a.to) bad("interconnection endpoints invalid");
    if (!(a.lower <= a.upper)) bad("interconnection bounds inverted");
  }
  const InflowModel& m = spec.inflow;
  if (static_cast<int>(m.phi0.size()) != P) bad("phi0 must have one entry per season");
  for (const auto& v : m.phi0) {
    if (static_cast<int>(v.size()) != K) bad("phi0 entries must have K components");
  }
  if (static_cast<int>(m.phi.size()) != P) bad("phi must have one entry per season");
  for (const auto& season : m.phi) {
    if (static_cast<int>(season.size()) != p) bad("phi must hold one matrix per lag");
    for (const auto& mat : season) {
      if (static_cast<int>(mat.size()) != K * K) bad("phi matrices must be K x K");
    }
  }
  if (static_cast<int>(m.noise.size()) != T - 1) bad("noise must list outcomes for stages 2..T");
  for (std::size_t t = 0; t < m.noise.size(); ++t) {
    if (m.noise[t].empty()) bad("stage " + std::to_string(t + 2) + " has no noise outcomes");
    for (const auto& eta : m.noise[t]) {
      if (static_cast<int>(eta.size()) != K) bad("stage " + std::to_string(t + 2) + ": noise vectors must have K components");
      for (double e : eta) {
        if (!(e > 0.0) || !std::isfinite(e)) bad("stage " + std::to_string(t + 2) + ": noise factors must be positive");
      }
    }
  }
  return out;
}

namespace {

// Stage t realization with multiplicative noise eta.
StageRealization stage_realization(const HydroSystemSpec& spec, const HydroLayout& L, int t,
                                   const std::vector<double>& eta) {
  const int K = L.K;
  const int p = spec.inflow.lag;
  const int season = (t - 1) % spec.inflow.period;
  const auto& phi0 = spec.inflow.phi0[season];
  const auto& phi = spec.inflow.phi[season];
  const double scale = std::pow(spec.discount, t - 1);
  const bool first = t == 1;

  StageRealization r;
  r.c.assign(L.size, 0.0);
  r.lb.assign(L.size, 0.0);
  r.ub.assign(L.size, kInf);
  for (int k = 0; k < K; ++k) {
    r.ub[L.storage + k] = spec.subsystems[k].storage_capacity;
    r.ub[L.release + k] = spec.subsystems[k].hydro_capacity;
    r.lb[L.inflow + k] = -kInf;
  }
  for (std::size_t i = 0; i < spec.thermals.size(); ++i) {
    const auto c = L.thermal + static_cast<int>(i);
    r.c[c] = scale * spec.thermals[i].cost;
    r.lb[c] = spec.thermals[i].lower;
    r.ub[c] = spec.thermals[i].upper;
  }
  for (std::size_t i = 0; i < spec.deficits.size(); ++i) {
    const auto c = L.deficit + static_cast<int>(i);
    r.c[c] = scale * spec.deficits[i].cost;
    r.ub[c] = spec.deficits[i].cap;
  }
  for (std::size_t i = 0; i < spec.arcs.size(); ++i) {
    const auto c = L.flow + static_cast<int>(i);
    r.lb[c] = spec.arcs[i].lower;
    r.ub[c] = spec.arcs[i].upper;
  }
  for (int c = L.lagged; c < L.size; ++c) r.lb[c] = -kInf;

  const int lag_rows = K * (p - 1);
  const int rows = 3 * K + lag_rows;
  r.A = SparseMatrix(rows, L.size);
  r.B = SparseMatrix(rows, first ? 0 : L.size);
  r.b.assign(rows, 0.0);

  // Previous inflow a_{t-nu}, k: column of x_{t-1} or a known initial value.
  auto lag_column = [&](int nu, int k) {
    return nu == 1 ? L.inflow + k : L.lagged + (nu - 2) * K + k;
  };
  auto initial_lag = [&](int nu, int k) { return spec.subsystems[k].initial_inflows[nu - 1]; };

  for (int k = 0; k < K; ++k) {
    // v_{t+1} - a_t + q_t + s_t - v_t = 0
    const int row = k;
    r.A.add(row, L.storage + k, 1.0);
    r.A.add(row, L.inflow + k, -1.0);
    r.A.add(row, L.release + k, 1.0);
    r.A.add(row, L.spill + k, 1.0);
    if (first) {
      r.b[row] = spec.subsystems[k].initial_storage;
    } else {
      r.B.add(row, L.storage + k, -1.0);
    }
  }
  for (int k = 0; k < K; ++k) {
    // a_t - eta sum_nu phi_nu a_{t-nu} = eta phi0
    const int row = K + k;
    r.A.add(row, L.inflow + k, 1.0);
    double rhs = eta[k] * phi0[k];
    for (int nu = 1; nu <= p; ++nu) {
      for (int l = 0; l < K; ++l) {
        const double coef = phi[nu - 1][static_cast<std::size_t>(k * K + l)];
        if (coef == 0.0) continue;
        if (first) {
          rhs += eta[k] * coef * initial_lag(nu, l);
        } else {
          r.B.add(row, lag_column(nu, l), -eta[k] * coef);
        }
      }
    }
    r.b[row] = rhs;
  }
  for (int k = 0; k < K; ++k) {
    // q + sum g + sum Def + inflow arcs - outflow arcs = d
    const int row = 2 * K + k;
    r.A.add(row, L.release + k, 1.0);
    for (std::size_t i = 0; i < spec.thermals.size(); ++i) {
      if (spec.thermals[i].subsystem == k) r.A.add(row, L.thermal + static_cast<int>(i), 1.0);
    }
    for (std::size_t i = 0; i < spec.deficits.size(); ++i) {
      if (spec.deficits[i].subsystem == k) r.A.add(row, L.deficit + static_cast<int>(i), 1.0);
    }
    for (std::size_t i = 0; i < spec.arcs.size(); ++i) {
      if (spec.arcs[i].to == k) r.A.add(row, L.flow + static_cast<int>(i), 1.0);
      if (spec.arcs[i].from == k) r.A.add(row, L.flow + static_cast<int>(i), -1.0);
    }
    r.b[row] = spec.subsystems[k].demand[t - 1];
  }
  for (int i = 1; i < p; ++i) {
    // carried copy of a_{t-i}
    for (int k = 0; k < K; ++k) {
      const int row = 3 * K + (i - 1) * K + k;
      r.A.add(row, L.lagged + (i - 1) * K + k, 1.0);
      if (first) {
        r.b[row] = initial_lag(i, k);
      } else {
        r.B.add(row, lag_column(i, k), -1.0);
      }
    }
  }
  return r;
}

}  // namespace

Instance build_instance(const HydroSystemSpec& spec) {
  if (const auto v = validate(spec); !v.empty()) throw HydroSpecError("invalid hydrothermal spec: " + v.front());
  const HydroLayout L = hydro_layout(spec);
  Instance inst;
  inst.first_stage = stage_realization(spec, L, 1, std::vector<double>(L.K, 1.0));
  for (int t = 2; t <= spec.horizon; ++t) {
    StageData sd;
    for (const auto& eta : spec.inflow.noise[t - 2]) sd.realizations.push_back(stage_realization(spec, L, t, eta));
    inst.stages.push_back(std::move(sd));
  }
  inst.variable_names = variable_names(spec);
  inst.reporting_horizon = spec.reporting_horizon;
  return inst;
}

std::vector<std::string> variable_names(const HydroSystemSpec& spec) {
  const HydroLayout L = hydro_layout(spec);
  std::vector<std::string> names(L.size);
  auto sub = [&spec](int k) {
    const std::string& n = spec.subsystems[k].name;
    return n.empty() ? std::to_string(k + 1) : n;
  };
  for (int k = 0; k < L.K; ++k) {
    names[L.storage + k] = "StoVol_" + sub(k);
    names[L.release + k] = "HydroGen_" + sub(k);
    names[L.spill + k] = "Spill_" + sub(k);
    names[L.inflow + k] = "Inflow_" + sub(k);
  }
  for (std::size_t i = 0; i < spec.thermals.size(); ++i) {
    names[L.thermal + i] = "ThermalGen_" + sub(spec.thermals[i].subsystem) + "_" + std::to_string(i + 1);
  }
  for (std::size_t i = 0; i < spec.deficits.size(); ++i) {
    names[L.deficit + i] = "Deficit_" + sub(spec.deficits[i].subsystem) + "_" + std::to_string(i + 1);
  }
  for (std::size_t i = 0; i < spec.arcs.size(); ++i) {
    names[L.flow + i] = "Exchange_" + sub(spec.arcs[i].from) + "_" + sub(spec.arcs[i].to);
  }
  for (int i = 1; i < spec.inflow.lag; ++i) {
    for (int k = 0; k < L.K; ++k) {
      names[L.lagged + (i - 1) * L.K + k] = "InflowLag" + std::to_string(i) + "_" + sub(k);
    }
  }
  return names;
}

namespace {

double standard_normal(Rng& rng) {
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

HydroSystemSpec tiny_spec() {
  HydroSystemSpec s;
  s.horizon = 6;
  s.discount = 0.99;
  s.description = "tiny synthetic system: one reservoir, one thermal plant, two deficit tiers";
  Subsystem r;
  r.name = "R";
  r.storage_capacity = 100.0;
  r.hydro_capacity = 60.0;
  r.initial_storage = 40.0;
  r.initial_inflows = {40.0};
  r.demand.assign(6, 50.0);
  s.subsystems = {r};
  s.thermals = {{0, 10.0, 0.0, 30.0}};
  s.deficits = {{0, 100.0, 20.0}, {0, 500.0, kInf}};
  s.inflow.lag = 1;
  s.inflow.period = 1;
  s.inflow.phi0 = {{20.0}};
  s.inflow.phi = {{{0.5}}};
  s.inflow.noise.assign(5, {{0.6}, {1.0}, {1.4}});
  return s;
}

HydroSystemSpec small_spec(std::uint64_t seed) {
  constexpr int T = 12;
  constexpr int N = 10;
  HydroSystemSpec s;
  s.horizon = T;
  s.discount = 0.99;
  s.description = "small synthetic system: two subsystems, monthly seasonality, lognormal inflow noise (seed " +
                  std::to_string(seed) + ")";
  Subsystem se;
  se.name = "SE";
  se.storage_capacity = 200.0;
  se.hydro_capacity = 80.0;
  se.initial_storage = 100.0;
  se.initial_inflows = {40.0};
  Subsystem ne;
  ne.name = "NE";
  ne.storage_capacity = 80.0;
  ne.hydro_capacity = 40.0;
  ne.initial_storage = 40.0;
  ne.initial_inflows = {15.0};
  for (int t = 0; t < T; ++t) {
    const double season = std::cos(2.0 * std::numbers::pi * t / 12.0);
    se.demand.push_back(70.0 + 5.0 * season);
    ne.demand.push_back(30.0 + 2.0 * season);
  }
  s.subsystems = {se, ne};
  s.thermals = {{0, 20.0, 0.0, 25.0}, {0, 60.0, 0.0, 25.0}, {1, 25.0, 0.0, 15.0}, {1, 80.0, 0.0, 15.0}};
  s.deficits = {{0, 500.0, 10.0}, {0, 2000.0, kInf}, {1, 500.0, 5.0}, {1, 2000.0, kInf}};
  s.arcs = {{0, 1, 0.0, 20.0}, {1, 0, 0.0, 20.0}};
  s.inflow.lag = 1;
  s.inflow.period = 12;
  for (int m = 0; m < 12; ++m) {
    const double wave = std::sin(2.0 * std::numbers::pi * m / 12.0);
    s.inflow.phi0.push_back({20.0 * (1.0 + 0.5 * wave), 8.0 * (1.0 + 0.6 * wave)});
    s.inflow.phi.push_back({{0.5, 0.05, 0.0, 0.5}});
  }
  Rng rng(seed);
  const double sigma = 0.4;
  for (int t = 2; t <= T; ++t) {
    std::vector<std::vector<double>> stage;
    for (int j = 0; j < N; ++j) {
      std::vector<double> eta;
      for (int k = 0; k < 2; ++k) eta.push_back(std::exp(sigma * standard_normal(rng) - 0.5 * sigma * sigma));
      stage.push_back(eta);
    }
    s.inflow.noise.push_back(stage);
  }
  return s;
}

}  // namespace

HydroSystemSpec default_desk_instance(DeskSize size, std::uint64_t seed) {
  return size == DeskSize::Tiny ? tiny_spec() : small_spec(seed);
}

// JSON ------------------------------------------------------------------

std::string hydro_spec_to_json_text(const HydroSystemSpec& spec) {
  using nlohmann::json;
  json j;
  j["horizon"] = spec.horizon;
  j["reporting_horizon"] = spec.reporting_horizon;
  j["discount"] = spec.discount;
  j["description"] = spec.description;
  json subs = json::array();
  for (const Subsystem& s : spec.subsystems) {
    subs.push_back({{"name", s.name},
                    {"storage_capacity", number_to_json(s.storage_capacity)},
                    {"hydro_capacity", number_to_json(s.hydro_capacity)},
                    {"initial_storage", s.initial_storage},
                    {"initial_inflows", s.initial_inflows},
                    {"demand", s.demand}});
  }
  j["subsystems"] = subs;
  json th = json::array();
  for (const ThermalPlant& g : spec.thermals) {
    th.push_back({{"subsystem", g.subsystem}, {"cost", g.cost}, {"lower", g.lower}, {"upper", number_to_json(g.upper)}});
  }
  j["thermals"] = th;
  json def = json::array();
  for (const DeficitTier& d : spec.deficits) {
    def.push_back({{"subsystem", d.subsystem}, {"cost", d.cost}, {"cap", number_to_json(d.cap)}});
  }
  j["deficits"] = def;
  json arcs = json::array();
  for (const Interconnection& a : spec.arcs) {
    arcs.push_back({{"from", a.from}, {"to", a.to}, {"lower", number_to_json(a.lower)}, {"upper", number_to_json(a.upper)}});
  }
  j["arcs"] = arcs;
  j["inflow"] = {{"lag", spec.inflow.lag},
                 {"period", spec.inflow.period},
                 {"phi0", spec.inflow.phi0},
                 {"phi", spec.inflow.phi},
                 {"noise", spec.inflow.noise}};
  return j.dump(1);
}

HydroSystemSpec hydro_spec_from_json_text(const std::string& text) {
  using nlohmann::json;
  HydroSystemSpec spec;
  try {
    const json j = json::parse(text);
    spec.horizon = j.at("horizon").get<int>();
    spec.reporting_horizon = j.value("reporting_horizon", 0);
    spec.discount = j.value("discount", 1.0);
    spec.description = j.value("description", std::string{});
    for (const json& s : j.at("subsystems")) {
      Subsystem sub;
      sub.name = s.value("name", std::string{});
      sub.storage_capacity = number_from_json(s.at("storage_capacity"));
      sub.hydro_capacity = number_from_json(s.at("hydro_capacity"));
      sub.initial_storage = s.at("initial_storage").get<double>();
      sub.initial_inflows = s.at("initial_inflows").get<std::vector<double>>();
      sub.demand = s.at("demand").get<std::vector<double>>();
      spec.subsystems.push_back(std::move(sub));
    }
    for (const json& g : j.value("thermals", json::array())) {
      spec.thermals.push_back({g.at("subsystem").get<int>(), g.at("cost").get<double>(), g.value("lower", 0.0),
                               number_from_json(g.at("upper"))});
    }
    for (const json& d : j.at("deficits")) {
      spec.deficits.push_back({d.at("subsystem").get<int>(), d.at("cost").get<double>(), number_from_json(d.at("cap"))});
    }
    for (const json& a : j.value("arcs", json::array())) {
      spec.arcs.push_back({a.at("from").get<int>(), a.at("to").get<int>(), number_from_json(a.at("lower")),
                           number_from_json(a.at("upper"))});
    }
    const json& in = j.at("inflow");
    spec.inflow.lag = in.at("lag").get<int>();
    spec.inflow.period = in.at("period").get<int>();
    spec.inflow.phi0 = in.at("phi0").get<std::vector<std::vector<double>>>();
    spec.inflow.phi = in.at("phi").get<std::vector<std::vector<std::vector<double>>>>();
    spec.inflow.noise = in.at("noise").get<std::vector<std::vector<std::vector<double>>>>();
  } catch (const json::exception& e) {
    throw HydroSpecError(std::string("malformed hydrothermal spec: ") + e.what());
  }
  return spec;
}

HydroSystemSpec load_hydro_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw HydroSpecError("cannot open hydrothermal spec " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return hydro_spec_from_json_text(ss.str());
}

void save_hydro_spec(const HydroSystemSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw HydroSpecError("cannot write hydrothermal spec " + path);
  out << hydro_spec_to_json_text(spec) << "\n";
}

}  // namespace rasddp
