#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "rasddp/lp.hpp"
#include "rasddp/stage_model.hpp"

namespace rasddp {

class CutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Affine minorant s(x) = intercept + <gradient, x> of a cost-to-go function.
struct Cut {
  double intercept = 0.0;
  std::vector<double> gradient;
  int origin_iteration = 0;

  double value_at(std::span<const double> x) const;
};

/// Polyhedral lower model max(L, max_k s_k(x)) of one stage cost-to-go
/// function. Cuts carry stable ids so callers can keep subsets across
/// insertions. Readers may share a pool; insertion must be exclusive.
class CutPool {
 public:
  CutPool() = default;
  explicit CutPool(int dim, double lower_bound = 0.0) : dim_(dim), lower_bound_(lower_bound) {}

  int dim() const { return dim_; }
  double lower_bound() const { return lower_bound_; }
  std::size_t size() const { return cuts_.size(); }
  bool empty() const { return cuts_.empty(); }

  double evaluate(std::span<const double> x) const;

  /// Appends the cut; exact duplicates (1e-12) are dropped and reported by
  /// returning false.
  bool add(Cut cut);

  /// Hard cap on stored cuts with FIFO eviction. 0 (default) keeps every
  /// cut. A cap breaks the monotone refinement of the model.
  void set_capacity(std::size_t capacity);

  const Cut& cut(std::size_t position) const { return cuts_[position]; }
  /// Id of the cut stored at `position`; ids increase with insertion order.
  std::uint64_t id_at(std::size_t position) const { return first_id_ + position; }
  /// Position of a live id, or -1 if it was evicted or never issued.
  std::int64_t position_of(std::uint64_t id) const;
  std::uint64_t next_id() const { return first_id_ + cuts_.size(); }

  const std::deque<Cut>& cuts() const { return cuts_; }

 private:
  int dim_ = 0;
  double lower_bound_ = 0.0;
  std::size_t capacity_ = 0;
  std::uint64_t first_id_ = 0;
  std::deque<Cut> cuts_;
};

/// One pool per stage t = 2..T approximating the cost-to-go of x_{t-1}.
struct CutPools {
  std::vector<CutPool> pools;

  CutPool& at(int t) { return pools.at(static_cast<std::size_t>(t - 2)); }
  const CutPool& at(int t) const { return pools.at(static_cast<std::size_t>(t - 2)); }
  int horizon() const { return static_cast<int>(pools.size()) + 1; }
  std::size_t total_cuts() const;
};

CutPools make_pools(const Instance& instance);

/// Epigraph stage LP for one outcome at a fixed previous decision:
///   columns  [x_t (n) | theta | one slack per cut]
///   rows     [A x_t = b - B x_prev | theta - g_k^T x_t - s_k = a_k]
/// `next` is the pool for stage t+1; nullptr marks the last stage, where
/// theta is fixed to 0. Cut multipliers are the trailing rows' duals.
LinearProgram assemble_stage_lp(const StageRealization& real, std::span<const double> x_prev,
                                const CutPool* next);

/// Same, restricted to the cuts at the given pool positions.
LinearProgram assemble_stage_lp(const StageRealization& real, std::span<const double> x_prev,
                                const CutPool* next, std::span<const std::size_t> positions);

/// JSON lines, one {"t", "intercept", "gradient", "iter"} object per cut.
/// Lines starting with '#' are comments.
void save_cuts(const CutPools& pools, const std::string& path, const std::string& header_comment = {});
CutPools load_cuts(const Instance& instance, const std::string& path);

}  // namespace rasddp
