#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ptbcc/dataset.hpp"
#include "ptbcc/hyperparams.hpp"
#include "ptbcc/matrix.hpp"
#include "ptbcc/variational.hpp"

namespace ptbcc {

/// State handed to a sweep observer after each completed sweep.
struct SweepReport {
  std::size_t iteration;  ///< 1-based
  double elbo;
  double max_phi_change;
  const PriorState& prior;
  const ModelState& state;
  const Dataset& dataset;
};

struct FitOptions {
  std::function<void(const SweepReport&)> on_sweep;
};

/// Coordinate-ascent driver over one dataset. Every task of the dataset
/// takes part, including tasks without annotations; use fit() to exclude
/// those.
class VariationalEngine {
 public:
  VariationalEngine(const Dataset& dataset, const Hyperparams& hp);

  /// One block sweep nu -> eta -> mu -> (log-expectations) -> theta -> phi.
  /// Returns max_{i,k} |phi_ik(new) - phi_ik(old)|.
  double sweep();

  double elbo() const { return compute_elbo(prior_, state_, elog_, dataset_); }

  const PriorState& prior() const noexcept { return prior_; }
  const ModelState& state() const noexcept { return state_; }
  const ELogCache& elog() const noexcept { return elog_; }
  const PrototypeTensor& seed_prototypes() const noexcept { return seeds_; }

 private:
  const Dataset& dataset_;
  PriorState prior_;
  ModelState state_;
  ELogCache elog_;
  PrototypeTensor seeds_;
};

struct InferenceResult {
  std::vector<std::size_t> predictions;
  Matrix phi;
  PrototypeTensor expected_prototypes;
  Matrix expected_worker_mix;
  std::vector<double> elbo_trace;
  std::size_t iterations = 0;
  bool converged = false;
  double wall_seconds = 0.0;
};

/// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> row);

/// Runs initialization and sweeps until every phi entry moves by less than
/// hp.xi, or hp.max_iterations sweeps. Tasks without annotations are left
/// out of the updates and receive the prior-only posterior softmax(E[log tau]).
InferenceResult fit(const Dataset& dataset, const Hyperparams& hp, const FitOptions& options = {});

/// JSON document with expected_prototypes, expected_worker_mix, phi,
/// elbo_trace, iterations and converged, plus id lists for the axes.
nlohmann::json export_posteriors(const InferenceResult& result, const Dataset& dataset);

/// CSV variants, one matrix per file: (file name, contents).
std::vector<std::pair<std::string, std::string>> export_posterior_csvs(
    const InferenceResult& result, const Dataset& dataset);

}  // namespace ptbcc
