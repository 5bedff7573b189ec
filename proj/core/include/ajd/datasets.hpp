#pragma once

#include <cstdint>
#include <vector>

#include "ajd/types.hpp"

namespace ajd {

/// Name of the random generator behind gen_synthetic, recorded in trace
/// metadata so experiments are reproducible within this artifact.
inline constexpr const char* kGeneratorName = "std::mt19937_64";

/// Diagonal matrices whose minimum entry falls below this are redrawn; it
/// keeps the generated sets comfortably positive definite.
inline constexpr double kMinDiagEntry = 1e-3;

/// Mixing matrices with a condition number above this are redrawn.
inline constexpr double kMaxMixingCondition = 1e6;

struct SynthConfig {
  int n = 1;
  int p = 1;
  double sigma = 0.0;  // noise level, >= 0
  std::uint64_t seed = 0;
};

struct GroundTruth {
  Matrix a;              // mixing matrix, invertible
  Matrix diags;          // n x p, row i = diagonal of the i-th generated D^i
  int diag_redraws = 0;  // draws rejected by the minimum-diagonal rule
  int mixing_redraws = 0;
  double mixing_condition = 0.0;  // condition number of the accepted a
};

struct SyntheticDataset {
  SymmetricMatrixSet set;
  GroundTruth truth;
};

/// Synthetic sets C^i = A D^i A^T + sigma^2 R^i (R^i)^T with diagonal entries
/// of D^i uniform in [0, 1], and A, R^i standard normal. The R^i are drawn
/// independently per matrix, and are drawn even at sigma = 0 so that the same
/// seed yields the same A and D^i across noise levels. With sigma = 0 the set
/// is exactly jointly diagonalizable by A^-1.
SyntheticDataset gen_synthetic(const SynthConfig& config);

/// Whitening initializer: with P D P^T the eigendecomposition of the mean
/// input matrix, returns B0 = D^(-1/2) P^T, so B0 mean(C) B0^T = I.
/// Eigenvalues are sorted descending and eigenvector signs are fixed
/// (largest-magnitude entry positive) to make B0 deterministic. Throws
/// std::domain_error naming the offending eigenvalue when the mean is not
/// positive definite.
Diagonalizer whitener(const SymmetricMatrixSet& cset);

/// Covariance set C^i = (1/T_i) X_i X_i^T from p x T_i signal segments.
/// All segments must share the channel count p; a segment with fewer samples
/// than channels yields a rank-deficient covariance (warned on stderr,
/// flagged later by validate_spd).
SymmetricMatrixSet covariances_from_segments(
    const std::vector<Matrix>& segments);

}  // namespace ajd
