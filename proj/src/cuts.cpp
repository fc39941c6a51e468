#include "rasddp/cuts.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"

namespace rasddp {

double Cut::value_at(std::span<const double> x) const {
  double v = intercept;
  for (std::size_t i = 0; i < gradient.size(); ++i) v += gradient[i] * x[i];
  return v;
}

double CutPool::evaluate(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) throw CutError("evaluate: dimension mismatch");
  double v = lower_bound_;
  for (const Cut& c : cuts_) v = std::max(v, c.value_at(x));
  return v;
}

bool CutPool::add(Cut cut) {
  if (static_cast<int>(cut.gradient.size()) != dim_) throw CutError("add_cut: dimension mismatch");
  if (!std::isfinite(cut.intercept)) throw CutError("add_cut: non-finite intercept");
  for (double g : cut.gradient) {
    if (!std::isfinite(g)) throw CutError("add_cut: non-finite gradient");
  }
  for (const Cut& c : cuts_) {
    if (std::abs(c.intercept - cut.intercept) > 1e-12) continue;
    bool same = true;
    for (int i = 0; i < dim_ && same; ++i) same = std::abs(c.gradient[i] - cut.gradient[i]) <= 1e-12;
    if (same) return false;
  }
  cuts_.push_back(std::move(cut));
  if (capacity_ > 0 && cuts_.size() > capacity_) {
    cuts_.pop_front();
    ++first_id_;
  }
  return true;
}

void CutPool::set_capacity(std::size_t capacity) {
  capacity_ = capacity;
  while (capacity_ > 0 && cuts_.size() > capacity_) {
    cuts_.pop_front();
    ++first_id_;
  }
}

std::int64_t CutPool::position_of(std::uint64_t id) const {
  if (id < first_id_ || id >= next_id()) return -1;
  return static_cast<std::int64_t>(id - first_id_);
}

std::size_t CutPools::total_cuts() const {
  std::size_t n = 0;
  for (const CutPool& p : pools) n += p.size();
  return n;
}

CutPools make_pools(const Instance& instance) {
  CutPools out;
  for (int t = 2; t <= instance.horizon(); ++t) {
    out.pools.emplace_back(instance.decision_dim(t - 1), instance.stage(t).cost_to_go_lower_bound);
  }
  return out;
}

namespace {

LinearProgram assemble(const StageRealization& real, std::span<const double> x_prev,
                       const CutPool* next, const std::size_t* positions, std::size_t count) {
  const int n = real.num_vars();
  const int m = real.num_rows();
  if (real.B.cols != static_cast<int>(x_prev.size()) && !(real.B.entries.empty() && x_prev.empty())) {
    throw CutError("assemble_stage_lp: previous decision has wrong dimension");
  }
  if (next != nullptr && next->dim() != n) {
    throw CutError("assemble_stage_lp: cut pool dimension differs from stage dimension");
  }
  const int k = static_cast<int>(count);
  const int theta = n;

  LinearProgram lp;
  lp.objective.assign(real.c.begin(), real.c.end());
  lp.objective.push_back(1.0);
  lp.objective.resize(n + 1 + k, 0.0);
  lp.var_lower.assign(real.lb.begin(), real.lb.end());
  lp.var_upper.assign(real.ub.begin(), real.ub.end());
  lp.var_lower.push_back(next != nullptr ? next->lower_bound() : 0.0);
  lp.var_upper.push_back(next != nullptr ? kInf : 0.0);
  lp.var_lower.resize(n + 1 + k, 0.0);
  lp.var_upper.resize(n + 1 + k, kInf);

  lp.eq_matrix = SparseMatrix(m + k, n + 1 + k);
  lp.eq_matrix.entries.reserve(real.A.entries.size() + static_cast<std::size_t>(k) * (n + 2));
  for (const Triplet& e : real.A.entries) lp.eq_matrix.entries.push_back(e);
  lp.eq_rhs = real.b;
  for (const Triplet& e : real.B.entries) lp.eq_rhs[e.row] -= e.value * x_prev[e.col];
  lp.eq_rhs.resize(m + k, 0.0);

  for (int r = 0; r < k; ++r) {
    const Cut& c = next->cut(positions[r]);
    const int row = m + r;
    lp.eq_matrix.add(row, theta, 1.0);
    for (int i = 0; i < n; ++i) {
      if (c.gradient[i] != 0.0) lp.eq_matrix.add(row, i, -c.gradient[i]);
    }
    lp.eq_matrix.add(row, n + 1 + r, -1.0);
    lp.eq_rhs[row] = c.intercept;
  }
  return lp;
}

}  // namespace

LinearProgram assemble_stage_lp(const StageRealization& real, std::span<const double> x_prev,
                                const CutPool* next) {
  std::vector<std::size_t> all(next != nullptr ? next->size() : 0);
  std::iota(all.begin(), all.end(), std::size_t{0});
  return assemble(real, x_prev, next, all.data(), all.size());
}

LinearProgram assemble_stage_lp(const StageRealization& real, std::span<const double> x_prev,
                                const CutPool* next, std::span<const std::size_t> positions) {
  if (next == nullptr && !positions.empty()) throw CutError("cut positions given without a pool");
  for (std::size_t p : positions) {
    if (p >= next->size()) throw CutError("cut position out of range");
  }
  return assemble(real, x_prev, next, positions.data(), positions.size());
}

void save_cuts(const CutPools& pools, const std::string& path, const std::string& header_comment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CutError("cannot write cut file " + path);
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  for (int t = 2; t <= pools.horizon(); ++t) {
    for (const Cut& c : pools.at(t).cuts()) {
      nlohmann::json j;
      j["t"] = t;
      j["intercept"] = c.intercept;
      j["gradient"] = c.gradient;
      j["iter"] = c.origin_iteration;
      out << j.dump() << "\n";
    }
  }
}

CutPools load_cuts(const Instance& instance, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CutError("cannot open cut file " + path);
  CutPools pools = make_pools(instance);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      const int t = j.at("t").get<int>();
      if (t < 2 || t > instance.horizon()) {
        throw CutError("cut file line " + std::to_string(lineno) + ": stage out of range");
      }
      Cut c;
      c.intercept = j.at("intercept").get<double>();
      c.gradient = j.at("gradient").get<std::vector<double>>();
      c.origin_iteration = j.value("iter", 0);
      if (static_cast<int>(c.gradient.size()) != pools.at(t).dim()) {
        throw CutError("cut file line " + std::to_string(lineno) +
                       ": gradient dimension does not match the instance");
      }
      pools.at(t).add(std::move(c));
    } catch (const nlohmann::json::exception& e) {
      throw CutError("cut file line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return pools;
}

}  // namespace rasddp
