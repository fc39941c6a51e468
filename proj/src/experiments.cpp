#include "rasddp/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "rasddp/change_of_measure.hpp"
#include "rasddp/hydrothermal.hpp"
#include "rasddp/version.hpp"

namespace rasddp {

#ifndef RASDDP_VERSION
#define RASDDP_VERSION "dev"
#endif

const char* version_string() { return RASDDP_VERSION; }

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(Mode m) {
  switch (m) {
    case Mode::Raus: return "raus";
    case Mode::Rabs: return "rabs";
    case Mode::Radbs: return "radbs";
    case Mode::Radbsm1: return "radbsm1";
    case Mode::Radbsm2: return "radbsm2";
    case Mode::Nrn: return "nrn";
    case Mode::RausBs: return "raus+bs";
  }
  return "?";
}

Mode parse_mode(const std::string& s) {
  for (Mode m : {Mode::Raus, Mode::Rabs, Mode::Radbs, Mode::Radbsm1, Mode::Radbsm2, Mode::Nrn, Mode::RausBs}) {
    if (s == to_string(m)) return m;
  }
  throw ExperimentError("unknown mode '" + s + "' (expected raus, rabs, radbs, radbsm1, radbsm2, nrn or raus+bs)");
}

void ExperimentConfig::validate() const {
  if (instance_path.empty() == hydro_spec_path.empty()) {
    throw ExperimentError("exactly one of --instance and --hydro-spec is required");
  }
  try {
    risk.validate();
  } catch (const RiskError& e) {
    throw ExperimentError(e.what());
  }
  if (iterations < 1) throw ExperimentError("--iters must be at least 1");
  if (simulate < 0) throw ExperimentError("--simulate must be nonnegative");
  if ((mode == Mode::Rabs || mode == Mode::Nrn) && weights_path.empty()) {
    throw ExperimentError(std::string("mode ") + to_string(mode) + " requires a weights file (--weights)");
  }
  if (mode == Mode::RausBs && switch_iteration < 1) throw ExperimentError("mode raus+bs requires --switch-iter");
  if (mode != Mode::RausBs && switch_iteration != 0) throw ExperimentError("--switch-iter only applies to mode raus+bs");
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ExperimentError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string file_digest(const std::string& path) { return path.empty() ? std::string{} : fnv1a_hex(read_file(path)); }

std::optional<Decay> mode_decay(Mode m) {
  switch (m) {
    case Mode::Radbs: return Decay::MOverM1;
    case Mode::Radbsm1: return Decay::None;
    case Mode::Radbsm2: return Decay::OneMinusHalfPow;
    default: return std::nullopt;
  }
}

std::uint64_t simulation_seed(std::uint64_t seed) { return seed ^ 0x9e3779b97f4a7c15ULL; }

json manifest_json(const ExperimentConfig& c) {
  json j;
  j["tool"] = "rasddp";
  j["version"] = version_string();
  j["mode"] = to_string(c.mode);
  j["lambda"] = c.risk.lambda;
  j["alpha"] = c.risk.alpha;
  j["solve_lambda"] = c.mode == Mode::Nrn ? 0.0 : c.risk.lambda;
  j["iterations"] = c.iterations;
  j["seed"] = c.seed;
  j["rng"] = kRngName;
  if (auto d = mode_decay(c.mode)) j["decay"] = to_string(*d);
  if (c.mode == Mode::RausBs) j["switch_iteration"] = c.switch_iteration;
  if (!c.instance_path.empty()) {
    j["instance"] = c.instance_path;
    j["instance_digest"] = file_digest(c.instance_path);
  } else {
    j["hydro_spec"] = c.hydro_spec_path;
    j["hydro_spec_digest"] = file_digest(c.hydro_spec_path);
  }
  if (!c.weights_path.empty()) {
    j["weights"] = c.weights_path;
    j["weights_digest"] = file_digest(c.weights_path);
  }
  if (!c.load_cuts.empty()) {
    j["load_cuts"] = c.load_cuts;
    j["load_cuts_digest"] = file_digest(c.load_cuts);
  }
  j["simulate"] = c.simulate;
  if (c.simulate > 0) j["simulation_seed"] = simulation_seed(c.seed);
  j["wall_time"] = c.wall_time;
  return j;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ExperimentError("cannot write " + path);
  out.precision(17);
  return out;
}

std::string header(const std::string& hash) { return "manifest " + hash; }

}  // namespace

std::string manifest_text(const ExperimentConfig& config) { return manifest_json(config).dump(1); }

ExperimentConfig config_from_manifest(const std::string& path) {
  ExperimentConfig c;
  try {
    const json j = json::parse(read_file(path));
    c.mode = parse_mode(j.at("mode").get<std::string>());
    c.risk = {j.at("lambda").get<double>(), j.at("alpha").get<double>()};
    c.iterations = j.at("iterations").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.switch_iteration = j.value("switch_iteration", 0);
    c.instance_path = j.value("instance", std::string{});
    c.hydro_spec_path = j.value("hydro_spec", std::string{});
    c.weights_path = j.value("weights", std::string{});
    c.load_cuts = j.value("load_cuts", std::string{});
    c.simulate = j.value("simulate", 0);
    c.wall_time = j.value("wall_time", false);
    const std::pair<const char*, const std::string*> inputs[] = {{"instance", &c.instance_path},
                                                                 {"hydro_spec", &c.hydro_spec_path},
                                                                 {"weights", &c.weights_path},
                                                                 {"load_cuts", &c.load_cuts}};
    for (const auto& [key, p] : inputs) {
      const std::string dk = std::string(key) + "_digest";
      if (!p->empty() && j.contains(dk) && j[dk].get<std::string>() != file_digest(*p)) {
        throw ExperimentError("input " + *p + " changed since the manifest was written");
      }
    }
  } catch (const json::exception& e) {
    throw ExperimentError("malformed manifest " + path + ": " + e.what());
  }
  return c;
}

Instance load_experiment_instance(const ExperimentConfig& config) {
  Instance inst = config.instance_path.empty() ? build_instance(load_hydro_spec(config.hydro_spec_path))
                                               : load_instance(config.instance_path);
  if (const auto v = validate(inst); !v.empty()) throw ExperimentError("invalid instance: " + v.front());
  return inst;
}

void write_bounds_csv(const IterationLog& log, const std::string& path, const std::string& manifest_hash,
                      bool wall_time) {
  std::ofstream out = open_out(path);
  if (!manifest_hash.empty()) out << "# " << header(manifest_hash) << "\n";
  out << "iter,lower_bound,upper_bound,cum_cost,wall_ms\n";
  const bool ub = log.risk.risk_neutral();
  double sum = 0.0;
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    const IterationRecord& r = log.records[i];
    sum += r.cumulative_cost;
    out << r.iteration << ',' << r.lower_bound << ',';
    if (ub) out << sum / static_cast<double>(i + 1);
    out << ',' << r.cumulative_cost << ',';
    if (wall_time) out << r.wall_ms;
    out << "\n";
  }
}

void simulate_policy(const Instance& instance, const CutPools& pools, int scenarios, std::uint64_t seed,
                     const std::string& path, const std::string& manifest_hash) {
  const auto paths = simulate_paths(instance, pools, scenarios, seed);
  std::ofstream out = open_out(path);
  if (!manifest_hash.empty()) out << "# " << header(manifest_hash) << "\n";
  out << "scenario,stage,variable,value,stage_cost\n";
  const int until = instance.report_until();
  for (std::size_t s = 0; s < paths.size(); ++s) {
    for (int t = 1; t <= until; ++t) {
      const auto& x = paths[s].decisions[t - 1];
      for (std::size_t v = 0; v < x.size(); ++v) {
        out << s + 1 << ',' << t << ',' << v + 1 << ',' << x[v] << ',' << paths[s].stage_costs[t - 1] << "\n";
      }
    }
  }
}

ExperimentOutput run_experiment(const ExperimentConfig& config) {
  config.validate();
  const Instance base = load_experiment_instance(config);
  ExperimentOutput out;
  const std::string manifest = manifest_text(config);
  out.manifest_hash = fnv1a_hex(manifest);

  RunConfig rc;
  rc.risk = config.risk;
  rc.max_iterations = config.iterations;
  rc.seed = config.seed;
  rc.mode = to_string(config.mode);
  Instance reweighted;
  const Instance* inst = &base;
  switch (config.mode) {
    case Mode::Raus:
      break;
    case Mode::Rabs:
      rc.sampler = SamplerSpec::fixed_bias(load_weights(config.weights_path));
      break;
    case Mode::Radbs:
    case Mode::Radbsm1:
    case Mode::Radbsm2:
      rc.sampler = SamplerSpec::dynamic(*mode_decay(config.mode));
      break;
    case Mode::RausBs:
      rc.sampler = SamplerSpec::fixed_bias(config.weights_path.empty() ? StageWeights{} : load_weights(config.weights_path));
      rc.switch_iteration = config.switch_iteration;
      break;
    case Mode::Nrn: {
      MeasureChange mc{load_weights(config.weights_path), config.weights_path, 0, config.risk};
      try {
        reweighted = build(base, mc);
      } catch (const ModelError& e) {
        throw ExperimentError(std::string("weights do not fit the instance: ") + e.what());
      }
      inst = &reweighted;
      rc.risk = measure_change_risk(mc);
      break;
    }
  }

  CutPools initial;
  if (!config.load_cuts.empty()) initial = load_cuts(*inst, config.load_cuts);
  out.result = run(*inst, rc, std::move(initial));

  fs::create_directories(config.out_dir);
  auto file = [&](const char* name) {
    std::string p = (fs::path(config.out_dir) / name).string();
    out.files.push_back(p);
    return p;
  };
  const std::string tag = header(out.manifest_hash);
  write_bounds_csv(out.result.log, file("bounds.csv"), out.manifest_hash, config.wall_time);
  if (config.mode == Mode::Raus) {
    write_frequency_csv(out.result.frequencies, file("freq.csv"), tag);
    save_weights(finalize_bad_outcome_weights(out.result.frequencies, config.risk), file("weights.json"),
                 out.manifest_hash);
  } else if (config.mode == Mode::RausBs && !out.result.switched_weights.empty()) {
    save_weights(out.result.switched_weights, file("weights.json"), out.manifest_hash);
  }
  if (!config.save_cuts.empty()) {
    save_cuts(out.result.pools, config.save_cuts, tag);
    out.files.push_back(config.save_cuts);
  }
  if (config.simulate > 0) {
    simulate_policy(*inst, out.result.pools, config.simulate, simulation_seed(config.seed), file("trace.csv"),
                    out.manifest_hash);
    if (!inst->variable_names.empty()) {
      std::ofstream names = open_out(file("variables.csv"));
      names << "# " << tag << "\n" << "variable,name\n";
      for (std::size_t v = 0; v < inst->variable_names.size(); ++v) {
        names << v + 1 << ',' << inst->variable_names[v] << "\n";
      }
    }
  }
  if (!config.dump_lp.empty()) {
    std::ofstream lp = open_out(config.dump_lp);
    lp << "# " << tag << "\n";
    const CutPool* next = inst->horizon() >= 2 ? &out.result.pools.at(2) : nullptr;
    write_lp_text(assemble_stage_lp(inst->first_stage, {}, next), lp);
    out.files.push_back(config.dump_lp);
  }
  {
    json m = json::parse(manifest);
    m["manifest_hash"] = out.manifest_hash;
    std::ofstream mf = open_out(file("manifest.json"));
    mf << m.dump(1) << "\n";
  }
  return out;
}

// Trace comparison -------------------------------------------------------

namespace {

struct TraceData {
  std::map<std::pair<int, int>, std::vector<double>> values;  // (stage, variable)
  std::map<int, std::vector<double>> costs;                   // stage
};

TraceData read_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ExperimentError("cannot open trace " + path);
  TraceData d;
  std::string line;
  bool header_seen = false;
  std::map<std::pair<int, int>, bool> cost_seen;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "scenario,stage,variable,value,stage_cost") throw ExperimentError("trace " + path + ": unexpected header");
      header_seen = true;
      continue;
    }
    int scenario = 0, stage = 0, var = 0;
    double value = 0.0, cost = 0.0;
    if (std::sscanf(line.c_str(), "%d,%d,%d,%lf,%lf", &scenario, &stage, &var, &value, &cost) != 5) {
      throw ExperimentError("trace " + path + " line " + std::to_string(lineno) + ": malformed row");
    }
    d.values[{stage, var}].push_back(value);
    if (!cost_seen[{scenario, stage}]) {
      cost_seen[{scenario, stage}] = true;
      d.costs[stage].push_back(cost);
    }
  }
  if (!header_seen) throw ExperimentError("trace " + path + " is empty");
  return d;
}

QuantileRow quantile_row(int stage, std::string quantity, const std::vector<double>& a, const std::vector<double>& b) {
  QuantileRow r;
  r.stage = stage;
  r.quantity = std::move(quantity);
  for (double p : kReportQuantiles) {
    r.a.push_back(empirical_quantile(a, p));
    r.b.push_back(empirical_quantile(b, p));
    r.max_abs_diff = std::max(r.max_abs_diff, std::abs(r.a.back() - r.b.back()));
  }
  return r;
}

}  // namespace

CompareReport compare_runs(const std::string& trace_a, const std::string& trace_b) {
  const TraceData a = read_trace(trace_a);
  const TraceData b = read_trace(trace_b);
  bool same = a.values.size() == b.values.size() && a.costs.size() == b.costs.size();
  for (auto ia = a.values.begin(), ib = b.values.begin(); same && ia != a.values.end(); ++ia, ++ib) {
    same = ia->first == ib->first;
  }
  if (!same) throw ExperimentError("traces have different stages or variables");
  CompareReport rep;
  for (const auto& [stage, costs] : a.costs) {
    rep.rows.push_back(quantile_row(stage, "cost", costs, b.costs.at(stage)));
    for (auto it = a.values.lower_bound({stage, 0}); it != a.values.end() && it->first.first == stage; ++it) {
      rep.rows.push_back(quantile_row(stage, std::to_string(it->first.second), it->second, b.values.at(it->first)));
    }
  }
  for (const QuantileRow& r : rep.rows) rep.max_abs_diff = std::max(rep.max_abs_diff, r.max_abs_diff);
  return rep;
}

std::string CompareReport::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "stage,quantity";
  for (const char* side : {"a", "b"}) {
    for (const char* q : {"q05", "q25", "q50", "q75", "q95"}) out << ',' << q << '_' << side;
  }
  out << ",max_abs_diff\n";
  for (const QuantileRow& r : rows) {
    out << r.stage << ',' << r.quantity;
    for (double v : r.a) out << ',' << v;
    for (double v : r.b) out << ',' << v;
    out << ',' << r.max_abs_diff << "\n";
  }
  return out.str();
}

}  // namespace rasddp
