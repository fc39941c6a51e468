#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rasddp/risk.hpp"
#include "rasddp/stage_model.hpp"

namespace rasddp {

/// Deterministic 64-bit generator used for every random draw.
using Rng = std::mt19937_64;
inline constexpr const char* kRngName = "mt19937_64";

/// Uniform double in [0, 1) built from the top 53 bits; independent of the
/// standard library's distribution implementations.
double uniform01(Rng& rng);

/// Categorical draw; returns an index in [0, weights.size()).
std::size_t sample_index(std::span<const double> weights, Rng& rng);

/// Per-stage outcome counters for stages 2..T (index 0 is stage 2). Holds
/// either plain visit frequencies W or decayed frequencies gamma.
struct FrequencyTable {
  std::vector<std::vector<double>> counts;
  int iterations_observed = 0;

  FrequencyTable() = default;
  explicit FrequencyTable(const Instance& instance);

  std::vector<double>& stage(int t) { return counts.at(static_cast<std::size_t>(t - 2)); }
  const std::vector<double>& stage(int t) const { return counts.at(static_cast<std::size_t>(t - 2)); }
  bool empty() const { return counts.empty() || iterations_observed == 0; }
};

enum class Decay {
  MOverM1,          // gamma <- gamma * m / (m + 1)
  None,             // no adjustment
  OneMinusHalfPow,  // gamma <- gamma * (1 - 0.5^m)
};

const char* to_string(Decay d);

struct SamplerSpec {
  enum class Kind { Uniform, FixedBias, DynamicBias };
  Kind kind = Kind::Uniform;
  StageWeights fixed;  // FixedBias only
  Decay decay = Decay::MOverM1;

  static SamplerSpec uniform() { return {}; }
  static SamplerSpec fixed_bias(StageWeights w) { return {Kind::FixedBias, std::move(w), Decay::None}; }
  static SamplerSpec dynamic(Decay d) { return {Kind::DynamicBias, {}, d}; }
};

/// Independent categorical draw per stage: result[k] is the outcome index
/// of stage k + 2.
std::vector<int> sample_scenario(const StageWeights& stage_weights, Rng& rng);

/// Counts outcomes whose value reaches the kappa-th smallest value (ties
/// included), then applies the decay for iteration m (1-based).
void record_backward_values(FrequencyTable& table, int t, std::span<const double> values,
                            double alpha, int m, Decay decay);

/// Sampling distribution of stage t under the spec. `base` holds the
/// instance's own stage weights, used by Uniform sampling and by dynamic
/// sampling before any backward pass has been recorded.
WeightVector current_stage_weights(const SamplerSpec& spec, const FrequencyTable& table,
                                   const RiskParams& risk, int t, const StageWeights& base);

/// Rank weights of the visit frequencies, per stage.
StageWeights finalize_bad_outcome_weights(const FrequencyTable& table, const RiskParams& risk);

/// {"stages": [{"t": t, "q": [...]}, ...]}; optional "manifest_hash" key.
void save_weights(const StageWeights& w, const std::string& path, const std::string& manifest_hash = {});
StageWeights load_weights(const std::string& path);

/// CSV rows (t, j, W); j is 1-based.
void write_frequency_csv(const FrequencyTable& table, const std::string& path,
                         const std::string& header_comment = {});

}  // namespace rasddp
