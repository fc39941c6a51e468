#pragma once

#include <memory>
#include <vector>

namespace rasddp::detail {

/// Column of the constraint matrix in compressed form.
struct ColumnView {
  const int* rows = nullptr;
  const double* values = nullptr;
  int size = 0;
};

/// LU factorisation of a simplex basis plus a product-form eta file for the
/// pivots performed since the last refactorisation. Small bases use a dense
/// LU, larger ones a sparse LU.
class BasisFactor {
 public:
  BasisFactor();
  ~BasisFactor();

  /// Factorises the m x m matrix whose columns are `cols`. Returns false when
  /// the matrix is (numerically) singular.
  bool factorize(int m, const std::vector<ColumnView>& cols);

  /// v <- B^{-1} v
  void ftran(std::vector<double>& v) const;
  /// v <- B^{-T} v
  void btran(std::vector<double>& v) const;

  /// Records the pivot replacing basis position r; `alpha` is B^{-1} a_q for
  /// the entering column, computed with the current factor.
  void update(int r, const std::vector<double>& alpha);

  int updates() const { return static_cast<int>(etas_.size()); }
  int dim() const { return m_; }

 private:
  struct Eta {
    int pivot_row = 0;
    double pivot = 1.0;
    std::vector<int> index;
    std::vector<double> value;
  };

  struct Lu;
  std::unique_ptr<Lu> lu_;
  int m_ = 0;
  std::vector<Eta> etas_;
};

}  // namespace rasddp::detail
