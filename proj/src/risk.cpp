#include "rasddp/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rasddp {

void RiskParams::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw RiskError("risk lambda must lie in [0,1]");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw RiskError("risk alpha must lie in (0,1)");
  }
}

void OutcomeValues::validate() const {
  if (values.empty()) throw RiskError("empty distribution");
  if (!base_weights.empty()) {
    if (base_weights.size() != values.size()) {
      throw RiskError("base weights length differs from values length");
    }
    if (!is_probability_vector(base_weights)) {
      throw RiskError("base weights are not a probability vector");
    }
  }
}

bool is_probability_vector(std::span<const double> w, double tol) {
  if (w.empty()) return false;
  double sum = 0.0;
  for (double v : w) {
    if (!std::isfinite(v) || v < 0.0) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= tol;
}

std::size_t kappa_index(std::size_t n, double alpha) {
  const double v = (1.0 - alpha) * static_cast<double>(n);
  const double r = std::round(v);
  double k = std::abs(v - r) <= 1e-9 * std::max(1.0, std::abs(v)) ? r : std::ceil(v);
  k = std::clamp(k, 1.0, static_cast<double>(n));
  return static_cast<std::size_t>(k);
}

std::vector<std::size_t> stable_rank_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  return order;
}

double value_at_risk(const OutcomeValues& z, double alpha) {
  z.validate();
  const auto order = stable_rank_order(z.values);
  if (z.uniform()) {
    return z.values[order[kappa_index(z.size(), alpha) - 1]];
  }
  // First value whose cumulative weight reaches 1 - alpha.
  const double target = 1.0 - alpha;
  double cum = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    cum += z.base_weights[order[i]];
    const bool last_of_tie =
        i + 1 == order.size() || z.values[order[i + 1]] != z.values[order[i]];
    if (last_of_tie && cum >= target - 1e-12) return z.values[order[i]];
  }
  return z.values[order.back()];
}

double average_value_at_risk(const OutcomeValues& z, double alpha) {
  const double u = value_at_risk(z, alpha);
  double excess = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    excess += z.weight(i) * std::max(z.values[i] - u, 0.0);
  }
  return u + excess / alpha;
}

double rho(const OutcomeValues& z, const RiskParams& rp) {
  rp.validate();
  z.validate();
  double mean = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) mean += z.weight(i) * z.values[i];
  if (rp.lambda == 0.0) return mean;
  return (1.0 - rp.lambda) * mean + rp.lambda * average_value_at_risk(z, rp.alpha);
}

WeightVector rank_weights(std::span<const double> scores, const RiskParams& rp) {
  rp.validate();
  if (scores.empty()) throw RiskError("empty distribution");
  const std::size_t n = scores.size();
  const double nd = static_cast<double>(n);
  const std::size_t kappa = kappa_index(n, rp.alpha);
  const double low = (1.0 - rp.lambda) / nd;
  const double mid = low + rp.lambda -
                     rp.lambda * static_cast<double>(n - kappa) / (rp.alpha * nd);
  const double high = low + rp.lambda / (rp.alpha * nd);

  const auto order = stable_rank_order(scores);
  WeightVector w(n, 0.0);
  bool clamped = false;
  for (std::size_t rank = 1; rank <= n; ++rank) {
    double q = rank < kappa ? low : (rank == kappa ? mid : high);
    if (q < 0.0) {
      if (q < -1e-12) throw RiskError("negative rank weight; alpha too small for N");
      q = 0.0;
      clamped = true;
    }
    w[order[rank - 1]] = q;
  }
  if (clamped) {
    const double s = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& v : w) v /= s;
  }
  return w;
}

namespace {

void require_coarse_tail(std::size_t n, double alpha) {
  if (kappa_index(n, alpha) + 1 > n) throw RiskError("tail level too fine for N");
}

}  // namespace

WeightVector worst_case_weights(const OutcomeValues& z, const RiskParams& rp) {
  z.validate();
  if (!z.uniform()) {
    throw RiskError("worst_case_weights requires uniform base weights");
  }
  rp.validate();
  require_coarse_tail(z.size(), rp.alpha);
  return rank_weights(z.values, rp);
}

WeightVector weights_from_scores(std::span<const double> scores, const RiskParams& rp) {
  if (scores.empty()) throw RiskError("empty distribution");
  rp.validate();
  require_coarse_tail(scores.size(), rp.alpha);
  return rank_weights(scores, rp);
}

}  // namespace rasddp
