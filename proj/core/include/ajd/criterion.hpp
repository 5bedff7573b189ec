#pragma once

#include <limits>
#include <vector>

#include "ajd/types.hpp"

namespace ajd {

/// Distinguished loss value for iterates outside the domain (a non-positive
/// transformed diagonal or a failed positive-definite factorization). The
/// line search treats such steps as non-improving instead of erroring out:
/// the log det term acts as a barrier that candidate steps may probe past.
inline constexpr double kInfiniteLoss = std::numeric_limits<double>::infinity();

/// 2x2 blocks whose determinant Gamma_ab * Gamma_ba - 1 falls below this
/// threshold are degenerate (near-proportional transformed diagonals); the
/// block solve falls back to the identity action, i.e. a plain gradient step
/// on that pair, which keeps the direction a descent direction.
inline constexpr double kDegenerateBlockTol = 1e-9;

/// Joint-diagonality criterion
///   L = 1/(2n) sum_i [ log det diag(D^i) - log det D^i ] >= 0,
/// evaluated directly by factorizing each D^i. Returns kInfiniteLoss when a
/// diagonal entry is non-positive or a factorization fails.
double loss(const TransformedSet& dset);

/// L evaluated at B: transforms the set, then applies the direct path.
double loss_at(const SymmetricMatrixSet& cset, const Diagonalizer& b);

/// Incremental evaluation path for solver runs. Uses
///   log det(B C^i B^T) = log det C^i + 2 log|det B|,
/// with every log det C^i factorized once at construction, so evaluation
/// needs only the transformed diagonals and log|det B|. Summation is grouped
/// per matrix; each bracket is the matrix's own small loss contribution, so
/// the result stays accurate to ~1e-15 absolute near a joint diagonalizer.
class IncrementalLoss {
 public:
  /// Factorizes every C^i once; throws std::domain_error when one is not
  /// positive definite.
  explicit IncrementalLoss(const SymmetricMatrixSet& cset);

  /// Loss of a transformed set with the matching log|det B|.
  double operator()(const TransformedSet& dset, double log_abs_det_b) const;

  double sum_log_det_inputs() const { return sum_log_det_inputs_; }
  int size() const { return n_; }

 private:
  std::vector<double> log_det_inputs_;
  double sum_log_det_inputs_ = 0.0;
  int n_ = 0;
};

/// Relative gradient G_ab = (1/n) sum_i D^i_ab / D^i_aa - delta_ab.
/// The diagonal is exactly zero by construction. Throws std::domain_error on
/// a non-positive transformed diagonal.
Matrix relative_gradient(const TransformedSet& dset);

/// Dense relative Hessian tensor, index order (a, b, c, d). Reference code
/// for small p; building it costs O(n p^3) and is not on the solver path.
class HessianTensor {
 public:
  explicit HessianTensor(int p)
      : p_(p), h_(static_cast<std::size_t>(p) * p * p * p, 0.0) {}

  int dim() const { return p_; }

  double& operator()(int a, int b, int c, int d) {
    return h_[index(a, b, c, d)];
  }
  double operator()(int a, int b, int c, int d) const {
    return h_[index(a, b, c, d)];
  }

  /// The tensor as a p^2 x p^2 operator with row index a*p + b.
  Matrix as_operator() const;

  /// <M | H | M'> = sum_{abcd} H_abcd M_ab M'_cd.
  double bilinear(const Matrix& m, const Matrix& mp) const;

  const std::vector<double>& raw() const { return h_; }

 private:
  std::size_t index(int a, int b, int c, int d) const {
    return ((static_cast<std::size_t>(a) * p_ + b) * p_ + c) * p_ + d;
  }

  int p_;
  std::vector<double> h_;
};

/// Full relative Hessian
///   H_abcd = delta_ac (1/n) sum_i [ D^i_bd / D^i_aa
///                                   - 2 D^i_ab D^i_ad / (D^i_aa)^2 ]
///            + delta_ad delta_bc.
/// H_aaaa is exactly zero (scale indeterminacy of the criterion).
HessianTensor full_hessian(const TransformedSet& dset);

/// Gamma_ab = (1/n) sum_i D^i_bb / D^i_aa, plus the n x p array of
/// transformed diagonals it was built from. Gamma_aa is exactly 1, all
/// entries are positive, and Gamma_ab * Gamma_ba >= 1 (Cauchy-Schwarz, with
/// equality only for proportional diagonals).
class GammaMatrix {
 public:
  const Matrix& gamma() const { return gamma_; }
  /// Row i holds diag(D^i).
  const Matrix& diagonals() const { return diagonals_; }
  int dim() const { return static_cast<int>(gamma_.rows()); }

 private:
  GammaMatrix(Matrix g, Matrix diags)
      : gamma_(std::move(g)), diagonals_(std::move(diags)) {}
  friend GammaMatrix gamma(const TransformedSet& dset);

  Matrix gamma_;
  Matrix diagonals_;
};

/// Builds the Gamma matrix from a working set at cost O(n p^2).
/// Throws std::domain_error on a non-positive transformed diagonal.
GammaMatrix gamma(const TransformedSet& dset);

/// The sparse Hessian approximation as a dense tensor,
///   Ht_abcd = delta_ac delta_bd Gamma_ab + delta_ad delta_bc
///             - 2 delta_abcd.
/// Test/reference companion of the block operators below.
HessianTensor approx_hessian_tensor(const GammaMatrix& gm);

/// Applies the approximate Hessian: for each pair (a, b) the 2x2 block
///   [ Gamma_ab   1 - 2 delta_ab ]
///   [ 1 - 2 delta_ab   Gamma_ba ]
/// acts on (M_ab, M_ba). Diagonal entries map to exactly zero.
Matrix approx_hessian_apply(const GammaMatrix& gm, const Matrix& m);

struct ApproxHessianSolve {
  Matrix x;                   // pseudoinverse action, zero diagonal
  int degenerate_blocks = 0;  // pairs solved with the identity fallback
};

/// Moore-Penrose pseudoinverse action of the approximate Hessian,
///   X_ab = (Gamma_ba G_ab - G_ba) / (Gamma_ab Gamma_ba - 1), X_aa = 0,
/// at cost O(p^2). Blocks with Gamma_ab Gamma_ba - 1 < kDegenerateBlockTol
/// fall back to X_ab = G_ab, X_ba = G_ba and are counted.
ApproxHessianSolve approx_hessian_solve(const GammaMatrix& gm,
                                        const Matrix& g);

}  // namespace ajd
