#pragma once

#include <Eigen/Dense>

#include <vector>

namespace ajd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Matrices inside a set are stored row-major so that the on-disk layout and
// the in-memory layout coincide.
using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixConstView = Eigen::Map<const RowMajorMatrix>;
using MatrixView = Eigen::Map<RowMajorMatrix>;

// Construction rejects a matrix whose asymmetry max|C_ab - C_ba| exceeds
// kAsymmetryTol * max|C|; smaller asymmetries (rounding noise in covariance
// estimates) are symmetrized silently.
inline constexpr double kAsymmetryTol = 1e-8;

namespace detail {

// Contiguous storage for n square matrices of size p x p, row-major within
// each matrix. The n-indexed reductions over a set walk this buffer linearly.
class MatrixSetStorage {
 public:
  MatrixSetStorage(int n, int p);

  int size() const { return n_; }  // number of matrices
  int dim() const { return p_; }   // matrix dimension

  MatrixConstView matrix(int i) const {
    return MatrixConstView(data_.data() + slot(i), p_, p_);
  }
  MatrixView matrix(int i) {
    return MatrixView(data_.data() + slot(i), p_, p_);
  }

  const std::vector<double>& raw() const { return data_; }
  std::vector<double>& raw() { return data_; }

 private:
  std::ptrdiff_t slot(int i) const {
    return static_cast<std::ptrdiff_t>(i) * p_ * p_;
  }

  int n_ = 0;
  int p_ = 0;
  std::vector<double> data_;
};

}  // namespace detail

/// The input set C = (C^1, ..., C^n) of n symmetric p x p matrices.
/// Every stored matrix is symmetric bit-exactly; construction symmetrizes
/// inputs whose asymmetry is below kAsymmetryTol * max|C| and rejects the
/// rest with std::invalid_argument.
class SymmetricMatrixSet {
 public:
  static SymmetricMatrixSet FromMatrices(const std::vector<Matrix>& mats);

  /// Takes ownership of a raw row-major buffer of n*p*p values (the MSET
  /// payload layout) and applies the same symmetry gate as FromMatrices.
  static SymmetricMatrixSet FromRaw(int n, int p, std::vector<double> data);

  int size() const { return storage_.size(); }
  int dim() const { return storage_.dim(); }
  MatrixConstView matrix(int i) const { return storage_.matrix(i); }
  const std::vector<double>& raw() const { return storage_.raw(); }

 private:
  explicit SymmetricMatrixSet(detail::MatrixSetStorage storage)
      : storage_(std::move(storage)) {}

  detail::MatrixSetStorage storage_;
};

/// The working set D^i = B C^i B^T. Writers symmetrize explicitly after every
/// congruence product, so the stored matrices are symmetric bit-exactly.
class TransformedSet {
 public:
  TransformedSet(int n, int p) : storage_(n, p) {}

  /// Builds a working set directly from matrices (tests, diagonal sets).
  /// Each matrix is stored as (M + M^T) / 2.
  static TransformedSet FromMatrices(const std::vector<Matrix>& mats);

  int size() const { return storage_.size(); }
  int dim() const { return storage_.dim(); }
  MatrixConstView matrix(int i) const { return storage_.matrix(i); }
  MatrixView matrix(int i) { return storage_.matrix(i); }
  Vector diagonal(int i) const { return storage_.matrix(i).diagonal(); }
  const std::vector<double>& raw() const { return storage_.raw(); }

 private:
  detail::MatrixSetStorage storage_;
};

/// Invertible p x p matrix B together with its running log|det B|. The log
/// determinant is maintained incrementally across multiplicative updates and
/// stays within 1e-8 relative of a direct recomputation.
class Diagonalizer {
 public:
  static Diagonalizer Identity(int p);

  /// Computes log|det b| from scratch; throws std::invalid_argument when b is
  /// singular.
  static Diagonalizer FromMatrix(const Matrix& b);

  /// Adopts a caller-supplied log|det b| (used where it is known analytically,
  /// e.g. from an eigendecomposition).
  static Diagonalizer FromMatrix(const Matrix& b, double log_abs_det);

  int dim() const { return static_cast<int>(b_.rows()); }
  const Matrix& matrix() const { return b_; }
  double log_abs_det() const { return log_abs_det_; }

  /// Relative update b <- m * b with the update's log|det m| supplied by the
  /// caller (the solver gets it from the line search).
  void apply_update(const Matrix& m, double log_abs_det_m);

 private:
  Diagonalizer(Matrix b, double log_abs_det)
      : b_(std::move(b)), log_abs_det_(log_abs_det) {}

  Matrix b_;
  double log_abs_det_;
};

/// log|det m| via a partially pivoted LU; -inf when m is singular.
double log_abs_det(const Matrix& m);

/// The congruence transform D^i = B C^i B^T for all i, symmetrized.
/// Throws std::invalid_argument on dimension mismatch.
TransformedSet transform_set(const SymmetricMatrixSet& cset,
                             const Diagonalizer& b);

/// Same transform applied to a working set with an update matrix m,
/// D^i <- m D^i m^T. This is the per-iteration path of the solver.
TransformedSet transform_set(const TransformedSet& dset, const Matrix& m);

/// Per-matrix symmetric positive-definite check (diagnostic only).
struct SpdReport {
  std::vector<bool> positive_definite;  // one entry per matrix
  std::vector<int> failures;            // indices whose factorization failed
  bool all_positive_definite = false;
};

SpdReport validate_spd(const SymmetricMatrixSet& cset);

}  // namespace ajd
