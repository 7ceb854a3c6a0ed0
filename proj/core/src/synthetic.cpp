#include "ptbcc/synthetic.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "dirichlet_sampler.hpp"
#include "ptbcc/error.hpp"

namespace ptbcc {

namespace {

constexpr const char* kOrigin = "annotation-data";

void require_simplex_prior(std::span<const double> alpha, const char* what) {
  for (double x : alpha) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw Error(ErrorKind::Hyperparameter, kOrigin,
                  std::string(what) + " entries must be positive and finite");
    }
  }
}

}  // namespace

SyntheticConfig SyntheticConfig::symmetric(
    std::size_t tasks, std::size_t workers, std::size_t classes, std::size_t labels_per_task,
    const std::vector<std::pair<double, double>>& prototype_diag_off) {
  SyntheticConfig cfg;
  cfg.num_tasks = tasks;
  cfg.num_workers = workers;
  cfg.num_classes = classes;
  cfg.num_prototypes = prototype_diag_off.size();
  cfg.labels_per_task = labels_per_task;
  cfg.u.assign(classes, 1.0);
  cfg.beta.assign(cfg.num_prototypes, 1.0);
  cfg.a = PrototypeTensor(cfg.num_prototypes, classes);
  for (std::size_t s = 0; s < cfg.num_prototypes; ++s)
    for (std::size_t k = 0; k < classes; ++k)
      for (std::size_t l = 0; l < classes; ++l)
        cfg.a(s, k, l) = k == l ? prototype_diag_off[s].first : prototype_diag_off[s].second;
  return cfg;
}

SyntheticData generate_synthetic(const SyntheticConfig& cfg, std::uint64_t seed) {
  const std::size_t T = cfg.num_tasks;
  const std::size_t W = cfg.num_workers;
  const std::size_t K = cfg.num_classes;
  const std::size_t S = cfg.num_prototypes;
  if (T < 1 || W < 1 || K < 1 || S < 1 || cfg.labels_per_task < 1) {
    throw Error(ErrorKind::Hyperparameter, kOrigin, "all synthetic counts must be at least 1");
  }
  if (cfg.labels_per_task > W) {
    throw Error(ErrorKind::Hyperparameter, kOrigin, "labels_per_task exceeds the worker count");
  }
  if (cfg.u.size() != K || cfg.beta.size() != S || cfg.a.prototypes() != S ||
      cfg.a.classes() != K) {
    throw Error(ErrorKind::Hyperparameter, kOrigin, "prior shapes do not match the counts");
  }
  require_simplex_prior(cfg.u, "u");
  require_simplex_prior(cfg.beta, "beta");
  require_simplex_prior(cfg.a.flat().data(), "a");

  std::mt19937_64 rng(seed);
  SyntheticGroundTruth truth;

  truth.true_tau.assign(K, 0.0);
  detail::sample_dirichlet(cfg.u, rng, std::span<double>(truth.true_tau));

  truth.true_pi = Matrix(W, S);
  for (std::size_t j = 0; j < W; ++j) detail::sample_dirichlet(cfg.beta, rng, truth.true_pi.row(j));

  truth.true_v = PrototypeTensor(S, K);
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t k = 0; k < K; ++k)
      detail::sample_dirichlet(cfg.a.row(s, k), rng, truth.true_v.row(s, k));

  std::vector<Annotation> annotations;
  annotations.reserve(T * cfg.labels_per_task);
  truth.true_z.resize(T);
  std::vector<std::size_t> pool(W);
  for (std::size_t i = 0; i < T; ++i) {
    const std::size_t z = detail::sample_categorical(std::span<const double>(truth.true_tau), rng);
    truth.true_z[i] = z;

    // Partial Fisher-Yates: the first labels_per_task entries are a uniform
    // sample of distinct workers.
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t n = 0; n < cfg.labels_per_task; ++n) {
      std::uniform_int_distribution<std::size_t> pick(n, W - 1);
      std::swap(pool[n], pool[pick(rng)]);
      const std::size_t j = pool[n];
      const std::size_t x = detail::sample_categorical(truth.true_pi.row(j), rng);
      const std::size_t y = detail::sample_categorical(truth.true_v.row(x, z), rng);
      truth.true_x.push_back(x);
      annotations.push_back({i, j, y});
    }
  }

  std::vector<std::optional<std::size_t>> truths(truth.true_z.begin(), truth.true_z.end());
  auto dataset = Dataset::from_indices(T, W, K, std::move(annotations), std::move(truths));
  return {std::move(dataset), std::move(truth)};
}

nlohmann::json to_json(const SyntheticGroundTruth& truth, const Dataset& dataset) {
  auto pi = nlohmann::json::array();
  for (std::size_t j = 0; j < truth.true_pi.rows(); ++j) {
    const auto row = truth.true_pi.row(j);
    pi.push_back(std::vector<double>(row.begin(), row.end()));
  }
  auto v = nlohmann::json::array();
  for (std::size_t s = 0; s < truth.true_v.prototypes(); ++s) {
    auto rows = nlohmann::json::array();
    for (std::size_t k = 0; k < truth.true_v.classes(); ++k) {
      const auto row = truth.true_v.row(s, k);
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    v.push_back(std::move(rows));
  }
  return {
      {"classes", dataset.class_ids().names()},
      {"true_z", truth.true_z},
      {"true_tau", truth.true_tau},
      {"true_pi", std::move(pi)},
      {"true_v", std::move(v)},
      {"true_x", truth.true_x},
  };
}

}  // namespace ptbcc
