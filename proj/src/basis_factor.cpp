#include "basis_factor.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <cmath>

namespace rasddp::detail {

namespace {
constexpr int kDenseLimit = 160;
}

struct BasisFactor::Lu {
  bool dense = true;
  Eigen::PartialPivLU<Eigen::MatrixXd> dense_lu;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> sparse_lu;
  Eigen::VectorXd scratch;
};

BasisFactor::BasisFactor() : lu_(std::make_unique<Lu>()) {}
BasisFactor::~BasisFactor() = default;

bool BasisFactor::factorize(int m, const std::vector<ColumnView>& cols) {
  m_ = m;
  etas_.clear();
  lu_->scratch.resize(m);
  if (m == 0) return true;
  lu_->dense = m <= kDenseLimit;
  if (lu_->dense) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m, m);
    for (int j = 0; j < m; ++j) {
      for (int k = 0; k < cols[j].size; ++k) b(cols[j].rows[k], j) += cols[j].values[k];
    }
    lu_->dense_lu.compute(b);
    const auto& u = lu_->dense_lu.matrixLU();
    double umax = 0.0;
    double umin = INFINITY;
    for (int i = 0; i < m; ++i) {
      umax = std::max(umax, std::abs(u(i, i)));
      umin = std::min(umin, std::abs(u(i, i)));
    }
    return umax > 0.0 && umin > 1e-11 * std::max(1.0, umax);
  }
  std::vector<Eigen::Triplet<double>> trip;
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < cols[j].size; ++k) trip.emplace_back(cols[j].rows[k], j, cols[j].values[k]);
  }
  Eigen::SparseMatrix<double> b(m, m);
  b.setFromTriplets(trip.begin(), trip.end());
  b.makeCompressed();
  lu_->sparse_lu.analyzePattern(b);
  lu_->sparse_lu.factorize(b);
  return lu_->sparse_lu.info() == Eigen::Success;
}

void BasisFactor::ftran(std::vector<double>& v) const {
  if (m_ == 0) return;
  Eigen::Map<Eigen::VectorXd> x(v.data(), m_);
  if (lu_->dense) {
    lu_->scratch = lu_->dense_lu.solve(x);
  } else {
    lu_->scratch = lu_->sparse_lu.solve(x);
  }
  x = lu_->scratch;
  for (const Eta& e : etas_) {
    const double xr = v[e.pivot_row] / e.pivot;
    v[e.pivot_row] = xr;
    if (xr == 0.0) continue;
    for (std::size_t k = 0; k < e.index.size(); ++k) v[e.index[k]] -= e.value[k] * xr;
  }
}

void BasisFactor::btran(std::vector<double>& v) const {
  if (m_ == 0) return;
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double s = v[it->pivot_row];
    for (std::size_t k = 0; k < it->index.size(); ++k) s -= it->value[k] * v[it->index[k]];
    v[it->pivot_row] = s / it->pivot;
  }
  Eigen::Map<Eigen::VectorXd> x(v.data(), m_);
  if (lu_->dense) {
    lu_->scratch = lu_->dense_lu.transpose().solve(x);
  } else {
    lu_->scratch = lu_->sparse_lu.transpose().solve(x);
  }
  x = lu_->scratch;
}

void BasisFactor::update(int r, const std::vector<double>& alpha) {
  Eta e;
  e.pivot_row = r;
  e.pivot = alpha[r];
  for (int i = 0; i < m_; ++i) {
    if (i != r && alpha[i] != 0.0) {
      e.index.push_back(i);
      e.value.push_back(alpha[i]);
    }
  }
  etas_.push_back(std::move(e));
}

}  // namespace rasddp::detail
