#include "ajd/datasets.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <iostream>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace ajd {

namespace {

double condition_number(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const double smin = svd.singularValues()(m.rows() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return svd.singularValues()(0) / smin;
}

}  // namespace

SyntheticDataset gen_synthetic(const SynthConfig& config) {
  if (config.n < 1 || config.p < 1) {
    throw std::invalid_argument("synthetic set requires n >= 1 and p >= 1");
  }
  if (!(config.sigma >= 0.0)) {
    throw std::invalid_argument("sigma must be >= 0");
  }
  const int n = config.n;
  const int p = config.p;

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  GroundTruth truth;
  truth.diags.resize(n, p);
  for (int i = 0; i < n; ++i) {
    for (;;) {
      for (int j = 0; j < p; ++j) truth.diags(i, j) = uniform(rng);
      if (truth.diags.row(i).minCoeff() >= kMinDiagEntry) break;
      ++truth.diag_redraws;  // near-singular diagonal, redraw
    }
  }

  truth.a.resize(p, p);
  for (;;) {
    for (int r = 0; r < p; ++r)
      for (int c = 0; c < p; ++c) truth.a(r, c) = normal(rng);
    truth.mixing_condition = condition_number(truth.a);
    if (truth.mixing_condition <= kMaxMixingCondition) break;
    ++truth.mixing_redraws;
  }

  const double sigma_sq = config.sigma * config.sigma;
  std::vector<Matrix> mats;
  mats.reserve(n);
  Matrix noise(p, p);
  for (int i = 0; i < n; ++i) {
    // R^i is drawn even when sigma = 0 so a fixed seed produces the same
    // mixing and diagonals at every noise level.
    for (int r = 0; r < p; ++r)
      for (int c = 0; c < p; ++c) noise(r, c) = normal(rng);
    Matrix m = truth.a * truth.diags.row(i).asDiagonal() * truth.a.transpose();
    if (sigma_sq > 0.0) m.noalias() += sigma_sq * (noise * noise.transpose());
    mats.push_back(0.5 * (m + m.transpose()));
  }

  return SyntheticDataset{SymmetricMatrixSet::FromMatrices(mats),
                          std::move(truth)};
}

Diagonalizer whitener(const SymmetricMatrixSet& cset) {
  const int p = cset.dim();
  Matrix mean = Matrix::Zero(p, p);
  for (int i = 0; i < cset.size(); ++i) mean += cset.matrix(i);
  mean /= static_cast<double>(cset.size());
  mean = 0.5 * (mean + mean.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> es(mean);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition of the mean matrix failed");
  }
  const Vector& evals = es.eigenvalues();  // ascending
  if (!(evals(0) > 0.0)) {
    throw std::domain_error(
        "mean matrix is not positive definite: smallest eigenvalue = " +
        std::to_string(evals(0)));
  }

  Matrix b(p, p);
  double log_det = 0.0;
  for (int k = 0; k < p; ++k) {
    const int src = p - 1 - k;  // descending eigenvalue order
    Vector v = es.eigenvectors().col(src);
    int imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v(imax) < 0.0) v = -v;  // sign fixed for determinism
    b.row(k) = v.transpose() / std::sqrt(evals(src));
    log_det -= 0.5 * std::log(evals(src));
  }
  return Diagonalizer::FromMatrix(b, log_det);
}

SymmetricMatrixSet covariances_from_segments(
    const std::vector<Matrix>& segments) {
  if (segments.empty()) {
    throw std::invalid_argument("need at least one segment");
  }
  const int p = static_cast<int>(segments.front().rows());
  if (p < 1) throw std::invalid_argument("segments must have p >= 1 channels");

  int short_segments = 0;
  std::vector<Matrix> covs;
  covs.reserve(segments.size());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Matrix& x = segments[i];
    if (x.rows() != p) {
      throw std::invalid_argument("segment " + std::to_string(i) + " has " +
                                  std::to_string(x.rows()) +
                                  " channels, expected " + std::to_string(p));
    }
    const auto samples = x.cols();
    if (samples < 1) {
      throw std::invalid_argument("segment " + std::to_string(i) +
                                  " has no samples");
    }
    if (samples < p) ++short_segments;
    covs.push_back((x * x.transpose()) / static_cast<double>(samples));
  }
  if (short_segments > 0) {
    std::cerr << "warning: " << short_segments << " of " << segments.size()
              << " segments have fewer samples than channels; their "
                 "covariances are rank-deficient\n";
  }
  return SymmetricMatrixSet::FromMatrices(covs);
}

}  // namespace ajd
