#pragma once

#include <string>
#include <vector>

#include "ajd/criterion.hpp"
#include "ajd/types.hpp"

namespace ajd {

enum class Method { kQuasiNewton, kGradientDescent };
enum class SolveStatus { kConverged, kMaxIterReached, kLineSearchFailed };

std::string to_string(Method method);
std::string to_string(SolveStatus status);

struct SolverConfig {
  int max_iter = 1000;        // maximum number of accepted iterations
  double grad_tol = 1e-10;    // stop when ||G||_F < grad_tol
  int max_halvings = 30;      // candidates alpha = 1, 1/2, ..., 2^(1-max_halvings)
  Method method = Method::kQuasiNewton;
  bool record_trace = true;
};

/// One accepted iteration: the loss and gradient norm of the new iterate,
/// the accepted step (always 2^-halvings) and the cumulative solver-loop
/// wall time when the step was accepted.
struct TraceRecord {
  int iter = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  double step_size = 0.0;
  int halvings = 0;
  double wall_time_s = 0.0;
};

/// Per-run record. Loss values decrease strictly across accepted iterations,
/// starting from initial_loss. Wall times exclude initialization, which is
/// reported separately as init_time_s.
struct SolverTrace {
  double initial_loss = 0.0;
  double initial_grad_norm = 0.0;
  std::vector<TraceRecord> records;
  SolveStatus status = SolveStatus::kMaxIterReached;
  double init_time_s = 0.0;
};

struct SolveDiagnostics {
  long degenerate_blocks = 0;  // identity-fallback 2x2 blocks across the run
  long factorizations = 0;     // SPD/LU factorizations and eigendecompositions
};

struct SolveResult {
  Diagonalizer b;
  SolverTrace trace;
  SolveDiagnostics diagnostics;
};

/// Runs the relative quasi-Newton method (or the relative gradient-descent
/// baseline) from b0:
///   direction X = Ht^+ G   (quasi-Newton)   or   X = G   (baseline),
///   B <- (I - alpha X) B with alpha found by backtracking from alpha = 1.
/// The working set D^i is updated incrementally by the accepted congruence
/// and recomputed from scratch every 50 iterations to cap roundoff drift.
/// Requires validate_spd(cset) to pass (std::domain_error otherwise);
/// a failed line search ends the run with the last iterate, not an error.
SolveResult solve(const SymmetricMatrixSet& cset, const Diagonalizer& b0,
                  const SolverConfig& config);

struct LineSearchResult {
  bool success = false;
  double alpha = 0.0;
  double new_loss = kInfiniteLoss;
  int halvings = 0;              // accepted alpha = 2^-halvings
  int candidates_tried = 0;      // loss evaluations (one LU each)
  Matrix update;                 // I - alpha * direction
  double log_abs_det_update = 0.0;
  TransformedSet new_set{1, 1};  // working set after the accepted update
};

/// Backtracking line search: returns the largest alpha in
/// {1, 1/2, ..., 2^(1-max_halvings)} with
///   L((I - alpha * direction) B) < current_loss,
/// evaluating candidates through the incremental path with the infinite-loss
/// convention. The decrease is certified as a compensated difference, so it
/// stays decidable far below the noise of re-evaluating the loss from
/// scratch; new_loss is re-anchored to the direct incremental value whenever
/// that value certifies the decrease on its own. Failure (no candidate
/// qualifies) is a value, not an error.
LineSearchResult backtracking_search(const IncrementalLoss& loss_fn,
                                     const TransformedSet& dset,
                                     double log_abs_det_b,
                                     const Matrix& direction,
                                     double current_loss, int max_halvings);

/// Local convergence-order estimate from a trace: over consecutive gradient
/// norms with ||G_t|| < 1e-3, fits the slope of log||G_{t+1}|| against
/// log||G_t|| (the local order) and the smallest c with
/// ||G_{t+1}|| <= c ||G_t||^2 across those pairs. Inconclusive when fewer
/// than two pairs qualify or the norms do not vary enough to fit a slope.
struct RateReport {
  bool conclusive = false;
  int pairs = 0;
  double fitted_order = 0.0;
  double quadratic_constant = 0.0;
};

RateReport quadratic_rate_check(const SolverTrace& trace);

}  // namespace ajd
