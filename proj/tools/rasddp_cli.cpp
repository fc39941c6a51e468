#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "rasddp/change_of_measure.hpp"
#include "rasddp/experiments.hpp"
#include "rasddp/hydrothermal.hpp"
#include "rasddp/version.hpp"

using namespace rasddp;

namespace {

void print_summary(const ExperimentOutput& out) {
  const auto& recs = out.result.log.records;
  std::printf("iterations %zu  lower bound %.10g  lp solves %llu\n", recs.size(), recs.back().lower_bound,
              static_cast<unsigned long long>(out.result.lp_solves));
  if (out.result.log.risk.risk_neutral()) {
    std::printf("statistical upper bound %.10g\n",
                statistical_upper_bound(out.result.log, static_cast<int>(recs.size())));
  }
  std::printf("manifest %s\n", out.manifest_hash.c_str());
  for (const auto& f : out.files) std::printf("wrote %s\n", f.c_str());
}

Instance instance_from(const std::string& instance_path, const std::string& spec_path) {
  if (instance_path.empty() == spec_path.empty()) {
    throw ExperimentError("exactly one of --instance and --hydro-spec is required");
  }
  return instance_path.empty() ? build_instance(load_hydro_spec(spec_path)) : load_instance(instance_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-averse SDDP experiments"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(0, 1);

  ExperimentConfig cfg;
  std::string mode = "raus";
  app.add_option("--instance", cfg.instance_path, "Instance JSON");
  app.add_option("--hydro-spec", cfg.hydro_spec_path, "Hydrothermal spec JSON (instead of --instance)");
  app.add_option("--mode", mode, "raus | rabs | radbs | radbsm1 | radbsm2 | nrn | raus+bs")->capture_default_str();
  app.add_option("--lambda", cfg.risk.lambda, "Weight of AV@R in the risk measure")->capture_default_str();
  app.add_option("--alpha", cfg.risk.alpha, "AV@R tail level")->capture_default_str();
  app.add_option("--iters", cfg.iterations, "Iteration budget")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  app.add_option("--switch-iter", cfg.switch_iteration, "First biased iteration (raus+bs)");
  app.add_option("--weights", cfg.weights_path, "Weights file (rabs, nrn, optional for raus+bs)");
  app.add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
  app.add_option("--save-cuts", cfg.save_cuts, "Write final cuts (JSON lines)");
  app.add_option("--load-cuts", cfg.load_cuts, "Start from saved cuts");
  app.add_option("--simulate", cfg.simulate, "Simulated scenarios for trace.csv")->capture_default_str();
  app.add_option("--dump-lp", cfg.dump_lp, "Write the final first-stage LP as text");
  app.add_flag("--wall-time", cfg.wall_time, "Fill the wall_ms column (makes bounds.csv run dependent)");

  auto* rerun = app.add_subcommand("rerun", "Repeat the run described by a manifest");
  std::string manifest_path;
  std::string rerun_out = ".";
  rerun->add_option("manifest", manifest_path, "manifest.json")->required();
  rerun->add_option("--out", rerun_out, "Output directory")->capture_default_str();

  auto* compare = app.add_subcommand("compare", "Quantile comparison of two trace files");
  std::string trace_a, trace_b, compare_out;
  compare->add_option("trace_a", trace_a)->required();
  compare->add_option("trace_b", trace_b)->required();
  compare->add_option("--out", compare_out, "Write the report here instead of stdout");

  auto* hydro = app.add_subcommand("hydro", "Hydrothermal model tools");
  hydro->require_subcommand(1);
  auto* hexport = hydro->add_subcommand("export", "Write a built-in synthetic spec");
  std::string size = "tiny";
  std::uint64_t hseed = 2024;
  std::string spec_out, instance_out;
  hexport->add_option("--size", size, "tiny | small")->capture_default_str();
  hexport->add_option("--seed", hseed, "Noise seed (small)")->capture_default_str();
  hexport->add_option("--spec-out", spec_out, "Spec JSON path");
  hexport->add_option("--instance-out", instance_out, "Generic instance JSON path");
  auto* hbuild = hydro->add_subcommand("build", "Convert a spec to a generic instance");
  std::string hbuild_spec, hbuild_out;
  hbuild->add_option("--hydro-spec", hbuild_spec)->required();
  hbuild->add_option("--instance-out", hbuild_out)->required();

  auto* equiv = app.add_subcommand("equivalence", "Risk-averse vs change-of-measure report");
  std::string eq_instance, eq_spec, eq_out;
  RiskParams eq_risk{0.2, 0.4};
  EquivalenceOptions eq_opts;
  equiv->add_option("--instance", eq_instance);
  equiv->add_option("--hydro-spec", eq_spec);
  equiv->add_option("--lambda", eq_risk.lambda)->capture_default_str();
  equiv->add_option("--alpha", eq_risk.alpha)->capture_default_str();
  equiv->add_option("--iters", eq_opts.iterations)->capture_default_str();
  equiv->add_option("--seed", eq_opts.seed)->capture_default_str();
  equiv->add_option("--scenarios", eq_opts.scenarios, "Simulated scenarios per policy")->capture_default_str();
  equiv->add_option("--out", eq_out, "Write the JSON report here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*rerun) {
      ExperimentConfig c = config_from_manifest(manifest_path);
      c.out_dir = rerun_out;
      print_summary(run_experiment(c));
    } else if (*compare) {
      const CompareReport rep = compare_runs(trace_a, trace_b);
      if (compare_out.empty()) {
        std::cout << rep.to_csv();
      } else {
        std::ofstream(compare_out, std::ios::binary) << rep.to_csv();
      }
      std::fprintf(stderr, "max abs quantile difference %.6g\n", rep.max_abs_diff);
    } else if (*hexport) {
      if (size != "tiny" && size != "small") throw ExperimentError("--size must be tiny or small");
      const HydroSystemSpec spec = default_desk_instance(size == "tiny" ? DeskSize::Tiny : DeskSize::Small, hseed);
      if (spec_out.empty() && instance_out.empty()) {
        std::cout << hydro_spec_to_json_text(spec) << "\n";
      }
      if (!spec_out.empty()) save_hydro_spec(spec, spec_out);
      if (!instance_out.empty()) save_instance(build_instance(spec), instance_out);
    } else if (*hbuild) {
      save_instance(build_instance(load_hydro_spec(hbuild_spec)), hbuild_out);
    } else if (*equiv) {
      const Instance inst = instance_from(eq_instance, eq_spec);
      const std::string text = equivalence_report(inst, eq_risk, eq_opts).to_json();
      if (eq_out.empty()) {
        std::cout << text << "\n";
      } else {
        std::ofstream(eq_out, std::ios::binary) << text << "\n";
      }
    } else {
      cfg.mode = parse_mode(mode);
      print_summary(run_experiment(cfg));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
