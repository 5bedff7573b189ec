#include "ajd/criterion.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>
#include <string>

namespace ajd {

namespace {

// 2 * sum log L_kk from the Cholesky factor; false when the factorization
// fails (matrix not positive definite).
bool spd_log_det(const Matrix& m, double* out) {
  if (!m.allFinite()) return false;
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) return false;
  double sum = 0.0;
  for (int k = 0; k < m.rows(); ++k) {
    sum += std::log(llt.matrixLLT()(k, k));
  }
  *out = 2.0 * sum;
  return true;
}

void check_positive_diagonal(double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::domain_error(
        "criterion evaluated outside domain: non-positive transformed "
        "diagonal");
  }
}

}  // namespace

double loss(const TransformedSet& dset) {
  const int n = dset.size();
  const int p = dset.dim();
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const Matrix d = dset.matrix(i);
    double sum_log_diag = 0.0;
    for (int a = 0; a < p; ++a) {
      const double daa = d(a, a);
      if (!(daa > 0.0)) return kInfiniteLoss;
      sum_log_diag += std::log(daa);
    }
    double log_det = 0.0;
    if (!spd_log_det(d, &log_det)) return kInfiniteLoss;
    total += sum_log_diag - log_det;
  }
  if (!std::isfinite(total)) return kInfiniteLoss;
  return total / (2.0 * n);
}

double loss_at(const SymmetricMatrixSet& cset, const Diagonalizer& b) {
  return loss(transform_set(cset, b));
}

IncrementalLoss::IncrementalLoss(const SymmetricMatrixSet& cset)
    : n_(cset.size()) {
  log_det_inputs_.reserve(cset.size());
  for (int i = 0; i < cset.size(); ++i) {
    double log_det = 0.0;
    if (!spd_log_det(cset.matrix(i), &log_det)) {
      throw std::domain_error("input matrix " + std::to_string(i) +
                              " is not positive definite");
    }
    log_det_inputs_.push_back(log_det);
    sum_log_det_inputs_ += log_det;
  }
}

double IncrementalLoss::operator()(const TransformedSet& dset,
                                   double log_abs_det_b) const {
  if (dset.size() != n_) {
    throw std::invalid_argument("working set does not match the loss context");
  }
  const double two_log_det_b = 2.0 * log_abs_det_b;
  double total = 0.0;
  for (int i = 0; i < dset.size(); ++i) {
    const auto d = dset.matrix(i);
    double sum_log_diag = 0.0;
    for (int a = 0; a < dset.dim(); ++a) {
      const double daa = d(a, a);
      if (!(daa > 0.0)) return kInfiniteLoss;
      sum_log_diag += std::log(daa);
    }
    // This bracket is matrix i's own loss contribution, near zero close to a
    // joint diagonalizer, so the sum over i carries no large cancellations.
    total += sum_log_diag - log_det_inputs_[i] - two_log_det_b;
  }
  if (!std::isfinite(total)) return kInfiniteLoss;
  return total / (2.0 * n_);
}

Matrix relative_gradient(const TransformedSet& dset) {
  const int n = dset.size();
  const int p = dset.dim();
  Matrix g = Matrix::Zero(p, p);
  for (int i = 0; i < n; ++i) {
    const auto d = dset.matrix(i);
    for (int a = 0; a < p; ++a) {
      const double daa = d(a, a);
      check_positive_diagonal(daa);
      g.row(a) += d.row(a) / daa;
    }
  }
  g /= static_cast<double>(n);
  // The accumulated diagonal is n/n = 1 exactly; the subtraction of
  // delta_ab is realized by pinning the diagonal to zero bit-exactly.
  g.diagonal().setZero();
  return g;
}

Matrix HessianTensor::as_operator() const {
  Matrix op(p_ * p_, p_ * p_);
  for (int a = 0; a < p_; ++a)
    for (int b = 0; b < p_; ++b)
      for (int c = 0; c < p_; ++c)
        for (int d = 0; d < p_; ++d)
          op(a * p_ + b, c * p_ + d) = (*this)(a, b, c, d);
  return op;
}

double HessianTensor::bilinear(const Matrix& m, const Matrix& mp) const {
  double sum = 0.0;
  for (int a = 0; a < p_; ++a)
    for (int b = 0; b < p_; ++b)
      for (int c = 0; c < p_; ++c)
        for (int d = 0; d < p_; ++d)
          sum += (*this)(a, b, c, d) * m(a, b) * mp(c, d);
  return sum;
}

HessianTensor full_hessian(const TransformedSet& dset) {
  const int n = dset.size();
  const int p = dset.dim();
  const double nd = static_cast<double>(n);
  HessianTensor h(p);
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b) h(a, b, b, a) += 1.0;
  Matrix m1(p, p), m2(p, p);
  Vector u(p);
  for (int a = 0; a < p; ++a) {
    m1.setZero();
    m2.setZero();
    for (int i = 0; i < n; ++i) {
      const auto d = dset.matrix(i);
      const double daa = d(a, a);
      check_positive_diagonal(daa);
      u = d.row(a).transpose() / daa;
      m1 += d / daa;
      m2.noalias() += u * u.transpose();
    }
    // For a = b = c = d this contributes 1 - 2 = -1 exactly (each i-term is
    // 1 - 2*1), cancelling the +1 above: H_aaaa = 0 bit-exact.
    for (int b = 0; b < p; ++b)
      for (int c = 0; c < p; ++c)
        h(a, b, a, c) += m1(b, c) / nd - 2.0 * (m2(b, c) / nd);
  }
  return h;
}

GammaMatrix gamma(const TransformedSet& dset) {
  const int n = dset.size();
  const int p = dset.dim();
  Matrix diagonals(n, p);
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < p; ++a) {
      const double daa = dset.matrix(i)(a, a);
      check_positive_diagonal(daa);
      diagonals(i, a) = daa;
    }
  }
  Matrix g = Matrix::Zero(p, p);
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < p; ++a) {
      // Entry (a, b) accumulates D^i_bb / D^i_aa; the (a, a) term is exactly
      // 1 each round, so Gamma_aa = n/n = 1 exactly after the division.
      g.row(a) += diagonals.row(i) / diagonals(i, a);
    }
  }
  g /= static_cast<double>(n);
  return GammaMatrix(std::move(g), std::move(diagonals));
}

HessianTensor approx_hessian_tensor(const GammaMatrix& gm) {
  const int p = gm.dim();
  HessianTensor h(p);
  for (int a = 0; a < p; ++a) {
    for (int b = 0; b < p; ++b) {
      h(a, b, a, b) += gm.gamma()(a, b);
      h(a, b, b, a) += 1.0;
    }
    h(a, a, a, a) -= 2.0;
  }
  return h;
}

Matrix approx_hessian_apply(const GammaMatrix& gm, const Matrix& m) {
  if (m.rows() != gm.dim() || m.cols() != gm.dim()) {
    throw std::invalid_argument("matrix dimension does not match Gamma");
  }
  Matrix r = gm.gamma().cwiseProduct(m) + m.transpose();
  // Gamma_aa is exactly 1, so this is M_aa + M_aa - 2 M_aa = 0 bit-exact.
  r.diagonal() -= 2.0 * m.diagonal();
  return r;
}

ApproxHessianSolve approx_hessian_solve(const GammaMatrix& gm,
                                        const Matrix& g) {
  const int p = gm.dim();
  if (g.rows() != p || g.cols() != p) {
    throw std::invalid_argument("gradient dimension does not match Gamma");
  }
  ApproxHessianSolve result;
  result.x = Matrix::Zero(p, p);
  const Matrix& gamma = gm.gamma();
  for (int a = 0; a < p; ++a) {
    for (int b = a + 1; b < p; ++b) {
      const double gab = gamma(a, b);
      const double gba = gamma(b, a);
      const double denom = gab * gba - 1.0;
      if (denom < kDegenerateBlockTol) {
        result.x(a, b) = g(a, b);
        result.x(b, a) = g(b, a);
        ++result.degenerate_blocks;
      } else {
        result.x(a, b) = (gba * g(a, b) - g(b, a)) / denom;
        result.x(b, a) = (gab * g(b, a) - g(a, b)) / denom;
      }
    }
  }
  return result;
}

}  // namespace ajd
