#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rasddp/engine.hpp"
#include "rasddp/stage_model.hpp"

namespace rasddp {

class ExperimentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { Raus, Rabs, Radbs, Radbsm1, Radbsm2, Nrn, RausBs };

const char* to_string(Mode m);
Mode parse_mode(const std::string& s);

struct ExperimentConfig {
  std::string instance_path;
  std::string hydro_spec_path;
  Mode mode = Mode::Raus;
  RiskParams risk{0.2, 0.05};
  int iterations = 3000;
  std::uint64_t seed = 1;
  int switch_iteration = 0;
  std::string weights_path;
  std::string out_dir = ".";
  int simulate = 0;
  std::string save_cuts;
  std::string load_cuts;
  std::string dump_lp;
  bool wall_time = false;

  /// Throws ExperimentError naming the first missing or conflicting input.
  void validate() const;
};

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(const std::string& bytes);

/// Canonical run description: every input that influences the numbers,
/// input file digests, seed, generator and code version. Output locations
/// are left out so a rerun into another directory hashes identically.
std::string manifest_text(const ExperimentConfig& config);
ExperimentConfig config_from_manifest(const std::string& path);

Instance load_experiment_instance(const ExperimentConfig& config);

struct ExperimentOutput {
  RunResult result;
  std::string manifest_hash;
  std::vector<std::string> files;
};

ExperimentOutput run_experiment(const ExperimentConfig& config);

/// iter, lower_bound, upper_bound (empty under risk aversion), cum_cost,
/// wall_ms (empty unless requested).
void write_bounds_csv(const IterationLog& log, const std::string& path, const std::string& manifest_hash,
                      bool wall_time);

/// trace.csv rows (scenario, stage, variable, value, stage_cost) over the
/// reporting horizon; variables are 1-based column ids.
void simulate_policy(const Instance& instance, const CutPools& pools, int scenarios, std::uint64_t seed,
                     const std::string& path, const std::string& manifest_hash = {});

struct QuantileRow {
  int stage = 0;
  std::string quantity;  // "cost" or a variable id
  std::vector<double> a;
  std::vector<double> b;
  double max_abs_diff = 0.0;
};

struct CompareReport {
  std::vector<QuantileRow> rows;
  double max_abs_diff = 0.0;

  std::string to_csv() const;
};

CompareReport compare_runs(const std::string& trace_a, const std::string& trace_b);

}  // namespace rasddp
