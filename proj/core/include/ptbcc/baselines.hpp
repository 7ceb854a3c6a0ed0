#pragma once

#include <cstddef>
#include <vector>

#include "ptbcc/dataset.hpp"
#include "ptbcc/matrix.hpp"

namespace ptbcc {

struct BaselineResult {
  std::vector<std::size_t> predictions;
  Matrix posterior;  ///< |T| x |K|
  std::size_t iterations = 0;
  bool converged = true;
  /// Dawid-Skene only: objective after each M-step.
  std::vector<double> log_likelihood_trace;
  /// Dawid-Skene only: final class marginals and per-worker K x K
  /// confusion matrices (row = truth, column = label).
  std::vector<double> class_marginals;
  std::vector<Matrix> confusion;
};

/// Vote fractions per task, argmax with the lowest index on ties.
/// Tasks without votes get a uniform posterior and class 0.
BaselineResult majority_vote(const Dataset& dataset);

struct DawidSkeneOptions {
  double tol = 1e-3;
  std::size_t max_iter = 100;
  double smoothing = 1e-6;
};

/// Per-worker confusion matrices fitted by EM, initialized from MV vote
/// fractions. The traced objective is the observed-data log-likelihood plus
/// `smoothing` * (sum of log class marginals and log confusion entries), the
/// quantity smoothed EM increases monotonically.
BaselineResult dawid_skene(const Dataset& dataset, const DawidSkeneOptions& options = {});

/// Observed-data log-likelihood sum_i log sum_k p_k prod_{j in W_i} c_{j,k,y_ij}.
double dawid_skene_log_likelihood(const Dataset& dataset, const std::vector<double>& marginals,
                                  const std::vector<Matrix>& confusion);

}  // namespace ptbcc
