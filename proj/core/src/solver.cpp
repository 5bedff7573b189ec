#include "ajd/solver.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ajd {

namespace {

// Working set recomputed from scratch this often to cap incremental-update
// roundoff drift; in between, updates cost the O(n p^2)-dominated path.
constexpr int kRefreshInterval = 50;

// Gradient norms below this enter the local-order fit.
constexpr double kRateWindow = 1e-3;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_config(const SolverConfig& config) {
  if (config.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
  if (!(config.grad_tol > 0.0))
    throw std::invalid_argument("grad_tol must be > 0");
  if (config.max_halvings < 1)
    throw std::invalid_argument("max_halvings must be >= 1");
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::kQuasiNewton:
      return "qn";
    case Method::kGradientDescent:
      return "gd";
  }
  return "unknown";
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged:
      return "converged";
    case SolveStatus::kMaxIterReached:
      return "max_iter_reached";
    case SolveStatus::kLineSearchFailed:
      return "line_search_failed";
  }
  return "unknown";
}

namespace {

// Compensated (Kahan) accumulator; the line-search decrease is a sum of many
// tiny log-ratios and must stay accurate long after naive summation drowns.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

LineSearchResult backtracking_search(const IncrementalLoss& loss_fn,
                                     const TransformedSet& dset,
                                     double log_abs_det_b,
                                     const Matrix& direction,
                                     double current_loss, int max_halvings) {
  const int n = dset.size();
  const int p = dset.dim();
  if (direction.rows() != p || direction.cols() != p) {
    throw std::invalid_argument("direction has mismatched dimensions");
  }
  if (max_halvings < 1) {
    throw std::invalid_argument("max_halvings must be >= 1");
  }

  // Candidate losses are evaluated as certified differences against
  // current_loss rather than as fresh absolute values: with
  //   Y = X D^i,  delta_a = alpha (alpha (Y X^T)_aa - 2 Y_aa),
  // the diagonal of the candidate is d_a (1 + delta_a / d_a) and
  //   L(candidate) - L(current)
  //     = 1/(2n) sum_{i,a} log1p(delta_a / d_a) - log|det(I - alpha X)|.
  // Every term scales with the step, so strict decrease stays decidable down
  // to increments of order 1e-20 where absolute re-evaluation drowns in
  // roundoff near 1e-14.
  std::vector<Matrix> xd(n);  // Y^i = X D^i, reused by every candidate
  Matrix y_diag(n, p), z_diag(n, p), d_diag(n, p);
  for (int i = 0; i < n; ++i) {
    xd[i].noalias() = direction * dset.matrix(i);
    y_diag.row(i) = xd[i].diagonal();
    z_diag.row(i) = xd[i].cwiseProduct(direction).rowwise().sum();
    d_diag.row(i) = dset.matrix(i).diagonal();
  }

  // |det(I - alpha X)| = prod_k |1 - alpha lambda_k| over the eigenvalues of
  // the direction, so the log det of every candidate is exact in the step.
  Eigen::EigenSolver<Matrix> es(direction, /*computeEigenvectors=*/false);
  const bool have_eigenvalues = (es.info() == Eigen::Success);

  LineSearchResult result;
  Matrix update(p, p);
  double alpha = 1.0;

  for (int k = 0; k < max_halvings; ++k, alpha *= 0.5) {
    ++result.candidates_tried;

    double log_det_update = 0.0;
    bool singular = false;
    if (have_eigenvalues) {
      for (int j = 0; j < p; ++j) {
        const double re = es.eigenvalues()(j).real();
        const double im = es.eigenvalues()(j).imag();
        // |1 - alpha lambda|^2 = 1 + w
        const double w = alpha * (alpha * (re * re + im * im) - 2.0 * re);
        if (w <= -1.0) {
          singular = true;
          break;
        }
        log_det_update += 0.5 * std::log1p(w);
      }
    } else {
      update = -alpha * direction;
      update.diagonal().array() += 1.0;
      log_det_update = log_abs_det(update);
      singular = !std::isfinite(log_det_update);
    }
    if (singular) continue;  // singular update: infinite loss

    KahanSum delta_log_diag;
    bool positive = true;
    for (int i = 0; i < n && positive; ++i) {
      for (int a = 0; a < p; ++a) {
        const double u = alpha * (alpha * z_diag(i, a) - 2.0 * y_diag(i, a)) /
                         d_diag(i, a);
        if (u <= -1.0) {
          positive = false;  // diagonal crosses zero: past the barrier
          break;
        }
        delta_log_diag.add(std::log1p(u));
      }
    }
    if (!positive) continue;

    const double decrease =
        delta_log_diag.sum / (2.0 * n) - log_det_update;
    const double candidate = current_loss + decrease;
    if (candidate < current_loss) {
      // Materialize D <- D - alpha (Y + Y^T) + alpha^2 Y X^T, symmetrized.
      TransformedSet next(n, p);
      Matrix prod(p, p);
      bool diag_ok = true;
      for (int i = 0; i < n; ++i) {
        prod.noalias() = xd[i] * direction.transpose();
        prod *= alpha * alpha;
        prod -= alpha * (xd[i] + xd[i].transpose());
        prod += dset.matrix(i);
        next.matrix(i) = 0.5 * (prod + prod.transpose());
        if (!(next.matrix(i).diagonal().minCoeff() > 0.0)) {
          diag_ok = false;
          break;
        }
      }
      if (!diag_ok) continue;  // materialized diagonal lost positivity

      update = -alpha * direction;
      update.diagonal().array() += 1.0;
      // For sizable updates the LU determinant is the more accurate value to
      // carry into log|det B| (the eigenvalue route is only signal-accurate);
      // for tiny updates it is the other way around.
      if (std::abs(log_det_update) > 1e-6) {
        log_det_update = log_abs_det(update);
      }

      // Re-anchor to the absolute incremental evaluation while it can still
      // certify the decrease itself; this keeps recorded losses free of
      // accumulated per-step roundoff. In the deep tail (decrease below the
      // absolute path's noise) fall back to the certified running value.
      const double absolute =
          loss_fn(next, log_abs_det_b + log_det_update);
      result.success = true;
      result.alpha = alpha;
      result.new_loss = absolute < current_loss ? absolute : candidate;
      result.halvings = k;
      result.update = update;
      result.log_abs_det_update = log_det_update;
      result.new_set = std::move(next);
      return result;
    }
  }
  return result;  // no candidate decreased the loss
}

SolveResult solve(const SymmetricMatrixSet& cset, const Diagonalizer& b0,
                  const SolverConfig& config) {
  check_config(config);
  if (b0.dim() != cset.dim()) {
    throw std::invalid_argument("initializer dimension does not match set");
  }

  const auto init_start = Clock::now();
  SolveDiagnostics diagnostics;

  const SpdReport spd = validate_spd(cset);
  diagnostics.factorizations += cset.size();
  if (!spd.all_positive_definite) {
    std::string indices;
    for (int i : spd.failures) {
      if (!indices.empty()) indices += ", ";
      indices += std::to_string(i);
    }
    throw std::domain_error("input matrices not positive definite: " +
                            indices);
  }

  Diagonalizer b = b0;
  TransformedSet d = transform_set(cset, b);

  // The loss context is rebased onto the initial working set: with
  // D^i = B C^i B^T and D0^i = B0 C^i B0^T,
  //   log det D^i = log det D0^i + 2 (log|det B| - log|det B0|),
  // which is the incremental identity with the better-conditioned D0^i in
  // place of C^i, so the factorized log dets carry far less roundoff.
  std::vector<Matrix> initial_set(d.size());
  for (int i = 0; i < d.size(); ++i) initial_set[i] = d.matrix(i);
  const IncrementalLoss loss_fn(SymmetricMatrixSet::FromMatrices(initial_set));
  diagnostics.factorizations += cset.size();
  const double base_log_abs_det = b.log_abs_det();
  const auto rebased_log_det = [&b, base_log_abs_det] {
    return b.log_abs_det() - base_log_abs_det;
  };
  double current_loss = loss_fn(d, rebased_log_det());

  SolverTrace trace;
  trace.initial_loss = current_loss;
  trace.init_time_s = seconds_since(init_start);

  const auto loop_start = Clock::now();
  int accepted = 0;

  for (;;) {
    const Matrix g = relative_gradient(d);
    const double grad_norm = g.norm();
    if (accepted == 0) {
      trace.initial_grad_norm = grad_norm;
    } else if (config.record_trace) {
      trace.records[accepted - 1].grad_norm = grad_norm;
    }

    if (grad_norm < config.grad_tol) {
      trace.status = SolveStatus::kConverged;
      break;
    }
    if (accepted == config.max_iter) {
      trace.status = SolveStatus::kMaxIterReached;
      break;
    }

    Matrix direction;
    if (config.method == Method::kQuasiNewton) {
      ApproxHessianSolve sol = approx_hessian_solve(gamma(d), g);
      diagnostics.degenerate_blocks += sol.degenerate_blocks;
      direction = std::move(sol.x);
    } else {
      direction = g;  // diagonal is already pinned to zero bit-exactly
    }

    LineSearchResult ls =
        backtracking_search(loss_fn, d, rebased_log_det(), direction,
                            current_loss, config.max_halvings);
    diagnostics.factorizations += 1;  // the line search's eigendecomposition
    if (!ls.success) {
      trace.status = SolveStatus::kLineSearchFailed;
      break;
    }

    b.apply_update(ls.update, ls.log_abs_det_update);
    d = std::move(ls.new_set);
    current_loss = ls.new_loss;
    ++accepted;

    if (config.record_trace) {
      trace.records.push_back({accepted, current_loss, 0.0, ls.alpha,
                               ls.halvings, seconds_since(loop_start)});
    }

    if (accepted % kRefreshInterval == 0) {
      // Recompute the working set from scratch to cap incremental drift.
      // The running loss and log|det B| are kept: recorded losses all come
      // from the one certified path, preserving strict decrease, and the
      // accumulated per-step log dets are more accurate than a fresh LU of
      // the full B.
      d = transform_set(cset, b);
    }
  }

  return SolveResult{std::move(b), std::move(trace), diagnostics};
}

RateReport quadratic_rate_check(const SolverTrace& trace) {
  std::vector<double> norms;
  norms.reserve(trace.records.size() + 1);
  norms.push_back(trace.initial_grad_norm);
  for (const TraceRecord& rec : trace.records) norms.push_back(rec.grad_norm);

  std::vector<double> xs, ys;
  for (std::size_t t = 0; t + 1 < norms.size(); ++t) {
    if (norms[t] < kRateWindow && norms[t] > 0.0 && norms[t + 1] > 0.0) {
      xs.push_back(std::log(norms[t]));
      ys.push_back(std::log(norms[t + 1]));
    }
  }

  RateReport report;
  report.pairs = static_cast<int>(xs.size());
  if (report.pairs < 2) return report;

  double x_min = xs.front(), x_max = xs.front();
  double x_bar = 0.0, y_bar = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    x_min = std::min(x_min, xs[k]);
    x_max = std::max(x_max, xs[k]);
    x_bar += xs[k];
    y_bar += ys[k];
  }
  x_bar /= xs.size();
  y_bar /= ys.size();
  if (x_max - x_min < 1e-3) return report;  // no spread: cannot fit a slope

  double sxx = 0.0, sxy = 0.0;
  double max_resid = ys.front() - 2.0 * xs.front();
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - x_bar) * (xs[k] - x_bar);
    sxy += (xs[k] - x_bar) * (ys[k] - y_bar);
    max_resid = std::max(max_resid, ys[k] - 2.0 * xs[k]);
  }

  report.conclusive = true;
  report.fitted_order = sxy / sxx;
  report.quadratic_constant = std::exp(max_resid);
  return report;
}

}  // namespace ajd
