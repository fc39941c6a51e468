#include "rasddp/sampling.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "rasddp/json_util.hpp"

namespace rasddp {

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t sample_index(std::span<const double> weights, Rng& rng) {
  const double u = uniform01(rng);
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] <= 0.0) continue;
    cum += weights[j];
    last_positive = j;
    if (u < cum) return j;
  }
  return last_positive;
}

FrequencyTable::FrequencyTable(const Instance& instance) {
  for (const StageData& s : instance.stages) counts.emplace_back(s.size(), 0.0);
}

const char* to_string(Decay d) {
  switch (d) {
    case Decay::MOverM1: return "m/(m+1)";
    case Decay::None: return "none";
    case Decay::OneMinusHalfPow: return "1-0.5^m";
  }
  return "?";
}

std::vector<int> sample_scenario(const StageWeights& stage_weights, Rng& rng) {
  std::vector<int> idx;
  idx.reserve(stage_weights.size());
  for (const WeightVector& w : stage_weights) idx.push_back(static_cast<int>(sample_index(w, rng)));
  return idx;
}

void record_backward_values(FrequencyTable& table, int t, std::span<const double> values,
                            double alpha, int m, Decay decay) {
  auto& counts = table.stage(t);
  if (counts.size() != values.size()) {
    throw std::invalid_argument("record_backward_values: expected " + std::to_string(counts.size()) +
                                " values, got " + std::to_string(values.size()));
  }
  const auto order = stable_rank_order(values);
  const double threshold = values[order[kappa_index(values.size(), alpha) - 1]];
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (values[j] >= threshold) counts[j] += 1.0;
  }
  double factor = 1.0;
  if (decay == Decay::MOverM1) {
    factor = static_cast<double>(m) / static_cast<double>(m + 1);
  } else if (decay == Decay::OneMinusHalfPow) {
    factor = 1.0 - std::pow(0.5, m);
  }
  if (factor != 1.0) {
    for (double& c : counts) c *= factor;
  }
  table.iterations_observed = std::max(table.iterations_observed, m);
}

WeightVector current_stage_weights(const SamplerSpec& spec, const FrequencyTable& table,
                                   const RiskParams& risk, int t, const StageWeights& base) {
  const auto k = static_cast<std::size_t>(t - 2);
  switch (spec.kind) {
    case SamplerSpec::Kind::Uniform:
      return base.at(k);
    case SamplerSpec::Kind::FixedBias:
      return spec.fixed.at(k);
    case SamplerSpec::Kind::DynamicBias:
      if (table.empty()) return base.at(k);
      return rank_weights(table.stage(t), risk);
  }
  return base.at(k);
}

StageWeights finalize_bad_outcome_weights(const FrequencyTable& table, const RiskParams& risk) {
  if (table.empty()) throw std::invalid_argument("finalize_bad_outcome_weights: empty frequency table");
  StageWeights out;
  out.reserve(table.counts.size());
  for (const auto& c : table.counts) out.push_back(rank_weights(c, risk));
  return out;
}

void save_weights(const StageWeights& w, const std::string& path, const std::string& manifest_hash) {
  nlohmann::json doc;
  if (!manifest_hash.empty()) doc["manifest_hash"] = manifest_hash;
  nlohmann::json stages = nlohmann::json::array();
  for (std::size_t k = 0; k < w.size(); ++k) {
    stages.push_back({{"t", static_cast<int>(k) + 2}, {"q", w[k]}});
  }
  doc["stages"] = stages;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write weights file " + path);
  out << doc.dump(1) << "\n";
}

StageWeights load_weights(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open weights file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  StageWeights out;
  try {
    const auto doc = nlohmann::json::parse(ss.str());
    for (const auto& s : doc.at("stages")) {
      const int t = s.at("t").get<int>();
      if (t != static_cast<int>(out.size()) + 2) {
        throw std::runtime_error("weights file " + path + ": stages must be listed as t = 2, 3, ...");
      }
      out.push_back(vector_from_json(s.at("q")));
      if (!is_probability_vector(out.back(), 1e-9)) {
        throw std::runtime_error("weights file " + path + ": stage " + std::to_string(t) +
                                 " is not a probability vector");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("weights file " + path + ": " + e.what());
  }
  return out;
}

void write_frequency_csv(const FrequencyTable& table, const std::string& path,
                         const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write frequency file " + path);
  out.precision(17);
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "t,j,W\n";
  for (std::size_t k = 0; k < table.counts.size(); ++k) {
    for (std::size_t j = 0; j < table.counts[k].size(); ++j) {
      out << k + 2 << ',' << j + 1 << ',' << table.counts[k][j] << "\n";
    }
  }
}

}  // namespace rasddp
