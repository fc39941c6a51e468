#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rasddp {

/// Raised on invalid risk inputs (empty distributions, bad parameters,
/// tail levels too fine for the sample size).
class RiskError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parameters of rho(Z) = (1 - lambda) E[Z] + lambda AV@R_alpha(Z).
///
/// lambda = 0 (expectation) and lambda = 1 (pure tail) are both accepted.
struct RiskParams {
  double lambda = 0.0;
  double alpha = 0.05;

  void validate() const;
  bool risk_neutral() const { return lambda == 0.0; }
};

/// A finite distribution of costs. An empty `base_weights` means every
/// outcome has probability 1/N.
struct OutcomeValues {
  std::vector<double> values;
  std::vector<double> base_weights;

  OutcomeValues() = default;
  OutcomeValues(std::vector<double> v) : values(std::move(v)) {}  // NOLINT
  OutcomeValues(std::vector<double> v, std::vector<double> w)
      : values(std::move(v)), base_weights(std::move(w)) {}

  std::size_t size() const { return values.size(); }
  bool uniform() const { return base_weights.empty(); }
  double weight(std::size_t i) const {
    return base_weights.empty() ? 1.0 / static_cast<double>(values.size())
                                : base_weights[i];
  }
  void validate() const;
};

/// Probability weights indexed by original outcome index.
using WeightVector = std::vector<double>;

/// Checks entries are >= 0 and sum to one within `tol`.
bool is_probability_vector(std::span<const double> w, double tol = 1e-12);

/// ceil((1 - alpha) N), robust to the rounding of (1 - alpha) N when that
/// product is mathematically an integer.
std::size_t kappa_index(std::size_t n, double alpha);

/// inf{t : P(Z <= t) >= 1 - alpha}.
double value_at_risk(const OutcomeValues& z, double alpha);

/// AV@R via the variational form evaluated at u = V@R, which is a minimiser
/// for discrete distributions.
double average_value_at_risk(const OutcomeValues& z, double alpha);

double rho(const OutcomeValues& z, const RiskParams& rp);

/// Outcome order used everywhere ranks matter: ascending by value, ties by
/// original index.
std::vector<std::size_t> stable_rank_order(std::span<const double> scores);

/// Three-case rank weights: outcome at ascending rank i (1-based) receives
///   (1-lambda)/N                                    if i < kappa
///   (1-lambda)/N + lambda - lambda (N-kappa)/(alpha N)  if i = kappa
///   (1-lambda)/N + lambda/(alpha N)                 if i > kappa
/// mapped back to original indices. Accepts kappa = N, where the tail
/// collapses onto the maximum (AV@R equals the max when alpha N < 1).
WeightVector rank_weights(std::span<const double> scores, const RiskParams& rp);

/// Worst-case density of rho at Z expressed as probabilities. Requires uniform
/// base weights and kappa <= N - 1.
WeightVector worst_case_weights(const OutcomeValues& z, const RiskParams& rp);

/// Same mechanics as worst_case_weights applied to an arbitrary score vector
/// (visit frequencies, adjusted frequencies).
WeightVector weights_from_scores(std::span<const double> scores,
                                 const RiskParams& rp);

}  // namespace rasddp
