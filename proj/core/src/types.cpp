#include "ajd/types.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace ajd {

namespace detail {

MatrixSetStorage::MatrixSetStorage(int n, int p) : n_(n), p_(p) {
  if (n < 1 || p < 1) {
    throw std::invalid_argument("matrix set requires n >= 1 and p >= 1");
  }
  data_.assign(static_cast<std::size_t>(n) * p * p, 0.0);
}

}  // namespace detail

namespace {

// (M + M^T) / 2 entry by entry; addition commutes, so the result is
// symmetric bit-exactly.
void symmetrize_into(const Matrix& m, MatrixView out) {
  out = 0.5 * (m + m.transpose());
}

void check_symmetry_gate(const Matrix& m, int index) {
  const double scale = m.cwiseAbs().maxCoeff();
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > kAsymmetryTol * scale) {
    throw std::invalid_argument("matrix " + std::to_string(index) +
                                " is not symmetric (asymmetry " +
                                std::to_string(asym) + " exceeds tolerance)");
  }
}

}  // namespace

SymmetricMatrixSet SymmetricMatrixSet::FromMatrices(
    const std::vector<Matrix>& mats) {
  if (mats.empty()) {
    throw std::invalid_argument("matrix set requires n >= 1 and p >= 1");
  }
  const int p = static_cast<int>(mats.front().rows());
  detail::MatrixSetStorage storage(static_cast<int>(mats.size()), p);
  for (int i = 0; i < storage.size(); ++i) {
    const Matrix& m = mats[i];
    if (m.rows() != p || m.cols() != p) {
      throw std::invalid_argument("matrix " + std::to_string(i) +
                                  " has mismatched dimensions");
    }
    check_symmetry_gate(m, i);
    symmetrize_into(m, storage.matrix(i));
  }
  return SymmetricMatrixSet(std::move(storage));
}

SymmetricMatrixSet SymmetricMatrixSet::FromRaw(int n, int p,
                                               std::vector<double> data) {
  detail::MatrixSetStorage storage(n, p);
  if (data.size() != storage.raw().size()) {
    throw std::invalid_argument("raw buffer size does not match n * p * p");
  }
  storage.raw() = std::move(data);
  for (int i = 0; i < n; ++i) {
    MatrixView m = storage.matrix(i);
    const Matrix copy = m;
    check_symmetry_gate(copy, i);
    symmetrize_into(copy, m);
  }
  return SymmetricMatrixSet(std::move(storage));
}

TransformedSet TransformedSet::FromMatrices(const std::vector<Matrix>& mats) {
  if (mats.empty()) {
    throw std::invalid_argument("matrix set requires n >= 1 and p >= 1");
  }
  const int p = static_cast<int>(mats.front().rows());
  TransformedSet out(static_cast<int>(mats.size()), p);
  for (int i = 0; i < out.size(); ++i) {
    if (mats[i].rows() != p || mats[i].cols() != p) {
      throw std::invalid_argument("matrix " + std::to_string(i) +
                                  " has mismatched dimensions");
    }
    symmetrize_into(mats[i], out.matrix(i));
  }
  return out;
}

double log_abs_det(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw std::invalid_argument("log_abs_det requires a square matrix");
  }
  Eigen::PartialPivLU<Matrix> lu(m);
  double sum = 0.0;
  for (int k = 0; k < m.rows(); ++k) {
    const double pivot = std::abs(lu.matrixLU()(k, k));
    if (pivot == 0.0) return -std::numeric_limits<double>::infinity();
    sum += std::log(pivot);
  }
  return sum;
}

Diagonalizer Diagonalizer::Identity(int p) {
  if (p < 1) throw std::invalid_argument("dimension must be >= 1");
  return Diagonalizer(Matrix::Identity(p, p), 0.0);
}

Diagonalizer Diagonalizer::FromMatrix(const Matrix& b) {
  const double lad = ajd::log_abs_det(b);
  if (!std::isfinite(lad)) {
    throw std::invalid_argument("diagonalizer matrix is singular");
  }
  return Diagonalizer(b, lad);
}

Diagonalizer Diagonalizer::FromMatrix(const Matrix& b, double log_abs_det) {
  if (b.rows() != b.cols() || b.rows() < 1) {
    throw std::invalid_argument("diagonalizer matrix must be square");
  }
  if (!std::isfinite(log_abs_det)) {
    throw std::invalid_argument("diagonalizer matrix is singular");
  }
  return Diagonalizer(b, log_abs_det);
}

void Diagonalizer::apply_update(const Matrix& m, double log_abs_det_m) {
  if (m.rows() != b_.rows() || m.cols() != b_.rows()) {
    throw std::invalid_argument("update matrix has mismatched dimensions");
  }
  b_ = m * b_;
  log_abs_det_ += log_abs_det_m;
}

namespace {

template <typename SetT>
TransformedSet congruence_transform(const SetT& set, const Matrix& m) {
  if (m.rows() != set.dim() || m.cols() != set.dim()) {
    throw std::invalid_argument("transform matrix has mismatched dimensions");
  }
  TransformedSet out(set.size(), set.dim());
  Matrix prod(set.dim(), set.dim());
  for (int i = 0; i < set.size(); ++i) {
    prod.noalias() = m * set.matrix(i) * m.transpose();
    out.matrix(i) = 0.5 * (prod + prod.transpose());
  }
  return out;
}

}  // namespace

TransformedSet transform_set(const SymmetricMatrixSet& cset,
                             const Diagonalizer& b) {
  return congruence_transform(cset, b.matrix());
}

TransformedSet transform_set(const TransformedSet& dset, const Matrix& m) {
  return congruence_transform(dset, m);
}

SpdReport validate_spd(const SymmetricMatrixSet& cset) {
  SpdReport report;
  report.positive_definite.resize(cset.size(), false);
  for (int i = 0; i < cset.size(); ++i) {
    const Matrix m = cset.matrix(i);
    bool ok = m.allFinite();
    if (ok) {
      Eigen::LLT<Matrix> llt(m);
      ok = (llt.info() == Eigen::Success);
    }
    report.positive_definite[i] = ok;
    if (!ok) report.failures.push_back(i);
  }
  report.all_positive_definite = report.failures.empty();
  return report;
}

}  // namespace ajd
