#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ptbcc/dataset.hpp"
#include "ptbcc/matrix.hpp"

namespace ptbcc {

struct SyntheticConfig {
  std::size_t num_tasks = 0;
  std::size_t num_workers = 0;
  std::size_t num_classes = 0;
  std::size_t num_prototypes = 0;
  std::size_t labels_per_task = 0;
  std::vector<double> u;  ///< truth prior, |K|
  std::vector<double> beta;  ///< prototype-mix prior shared by all workers, |S|
  PrototypeTensor a;  ///< per-(s,k) row priors

  /// Symmetric priors everywhere (u = beta = 1) with prototype rows given by
  /// `diagonal` / `off_diagonal` concentrations per prototype.
  static SyntheticConfig symmetric(std::size_t tasks, std::size_t workers, std::size_t classes,
                                   std::size_t labels_per_task,
                                   const std::vector<std::pair<double, double>>& prototype_diag_off);
};

struct SyntheticGroundTruth {
  std::vector<std::size_t> true_z;
  std::vector<double> true_tau;
  Matrix true_pi;           ///< |W| x |S|
  PrototypeTensor true_v;
  std::vector<std::size_t> true_x;  ///< per annotation, aligned with Dataset::annotations()
};

struct SyntheticData {
  Dataset dataset;
  SyntheticGroundTruth truth;
};

/// Samples a dataset from the generative process; output depends only on
/// `cfg` and `seed`. The dataset carries true_z as its truths.
SyntheticData generate_synthetic(const SyntheticConfig& cfg, std::uint64_t seed);

nlohmann::json to_json(const SyntheticGroundTruth& truth, const Dataset& dataset);

}  // namespace ptbcc
