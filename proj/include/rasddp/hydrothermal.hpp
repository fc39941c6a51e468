#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rasddp/stage_model.hpp"

namespace rasddp {

class HydroSpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Aggregated reservoir, energy units throughout.
struct Subsystem {
  std::string name;
  double storage_capacity = 0.0;  // v-bar
  double hydro_capacity = 0.0;    // q-bar
  double initial_storage = 0.0;   // v_1
  /// a_0, a_{-1}, ..., a_{1-p}
  std::vector<double> initial_inflows;
  /// d_t for t = 1..T
  std::vector<double> demand;
};

struct ThermalPlant {
  int subsystem = 0;
  double cost = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct DeficitTier {
  int subsystem = 0;
  double cost = 0.0;
  double cap = 0.0;  // +inf for the top tier
};

struct Interconnection {
  int from = 0;
  int to = 0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Periodic autoregressive inflow model with multiplicative noise:
///   a_t = diag(eta_t) (phi0[s] + sum_{nu=1..p} phi[s][nu-1] a_{t-nu}),
/// s = (t - 1) mod period. phi[s][nu-1] is a row-major K x K matrix.
struct InflowModel {
  int lag = 1;
  int period = 1;
  std::vector<std::vector<double>> phi0;
  std::vector<std::vector<std::vector<double>>> phi;
  /// noise[t-2][j][k]: outcome j of stage t; stage 1 uses eta = 1.
  std::vector<std::vector<std::vector<double>>> noise;
};

struct HydroSystemSpec {
  int horizon = 2;
  int reporting_horizon = 0;
  double discount = 1.0;
  std::vector<Subsystem> subsystems;
  std::vector<ThermalPlant> thermals;
  std::vector<DeficitTier> deficits;
  std::vector<Interconnection> arcs;
  InflowModel inflow;
  /// Free-form note on where the numbers come from.
  std::string description;

  int num_subsystems() const { return static_cast<int>(subsystems.size()); }
};

/// Column layout of every stage decision vector.
struct HydroLayout {
  int K = 0;
  int storage = 0;  // v_{t+1}
  int release = 0;  // q_t
  int spill = 0;    // s_t
  int thermal = 0;  // g_t
  int deficit = 0;  // Def_t
  int flow = 0;     // f_t
  int inflow = 0;   // a_t
  int lagged = 0;   // a_{t-1}, ..., a_{t-p+1} carried forward (p > 1)
  int size = 0;
};

HydroLayout hydro_layout(const HydroSystemSpec& spec);

/// K (1 + p): storages plus the lagged inflows the next stage needs.
int state_dimension(const HydroSystemSpec& spec);

/// Empty when valid.
std::vector<std::string> validate(const HydroSystemSpec& spec);

Instance build_instance(const HydroSystemSpec& spec);

std::vector<std::string> variable_names(const HydroSystemSpec& spec);

enum class DeskSize { Tiny, Small };

/// Synthetic systems for tests and experiments; the numbers are illustrative.
HydroSystemSpec default_desk_instance(DeskSize size, std::uint64_t seed = 2024);

HydroSystemSpec hydro_spec_from_json_text(const std::string& text);
std::string hydro_spec_to_json_text(const HydroSystemSpec& spec);
HydroSystemSpec load_hydro_spec(const std::string& path);
void save_hydro_spec(const HydroSystemSpec& spec, const std::string& path);

}  // namespace rasddp
