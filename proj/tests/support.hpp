#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "oracle/brute_force.hpp"
#include "ptbcc/dataset.hpp"
#include "ptbcc/synthetic.hpp"
#include "ptbcc/variational.hpp"

namespace ptbcc::testing {

/// Random dataset with every (task, worker) pair annotated with
/// probability `density`; each task keeps at least one annotation.
inline Dataset random_dataset(std::mt19937_64& rng, std::size_t tasks, std::size_t workers,
                              std::size_t classes, double density = 0.7) {
  std::bernoulli_distribution keep(density);
  std::uniform_int_distribution<std::size_t> label(0, classes - 1);
  std::uniform_int_distribution<std::size_t> who(0, workers - 1);
  std::vector<Annotation> ann;
  for (std::size_t i = 0; i < tasks; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < workers; ++j) {
      if (keep(rng)) {
        ann.push_back({i, j, label(rng)});
        any = true;
      }
    }
    if (!any) ann.push_back({i, who(rng), label(rng)});
  }
  return Dataset::from_indices(tasks, workers, classes, std::move(ann));
}

/// The two-prototype structure used throughout the recovery tests: one
/// accurate prototype and one close to uniform, with most annotators leaning
/// towards the accurate one and mixing little.
inline SyntheticConfig accurate_plus_random(std::size_t tasks = 200, std::size_t workers = 30,
                                            std::size_t classes = 5, std::size_t labels = 5) {
  auto cfg =
      SyntheticConfig::symmetric(tasks, workers, classes, labels, {{20.0, 1.0}, {10.0, 10.0}});
  cfg.beta = {0.3, 0.1};
  return cfg;
}

inline oracle::Problem to_problem(const Dataset& d, std::size_t prototypes) {
  oracle::Problem p{d.num_tasks(), d.num_workers(), d.num_classes(), prototypes,
                    oracle::LabelGrid(d.num_tasks(), std::vector<int>(d.num_workers(), -1))};
  for (const auto& y : d.annotations()) p.y[y.task][y.worker] = static_cast<int>(y.label);
  return p;
}

inline oracle::Mat to_mat(const Matrix& m) {
  oracle::Mat out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) out[r].assign(m.row(r).begin(), m.row(r).end());
  return out;
}

inline oracle::Cube to_cube(const PrototypeTensor& t) {
  oracle::Cube out(t.prototypes(), oracle::Mat(t.classes()));
  for (std::size_t s = 0; s < t.prototypes(); ++s)
    for (std::size_t k = 0; k < t.classes(); ++k)
      out[s][k].assign(t.row(s, k).begin(), t.row(s, k).end());
  return out;
}

inline oracle::Cube theta_to_cube(const Matrix& theta, const Dataset& d) {
  oracle::Cube out(d.num_workers(),
                   oracle::Mat(d.num_tasks(), oracle::Vec(theta.cols(), 0.0)));
  for (std::size_t a = 0; a < d.num_annotations(); ++a) {
    const auto& y = d.annotation(a);
    out[y.worker][y.task].assign(theta.row(a).begin(), theta.row(a).end());
  }
  return out;
}

inline oracle::Params to_params(const PriorState& prior, const ModelState& state,
                                const Dataset& d) {
  return {prior.u,         to_mat(prior.beta), to_cube(prior.a),          state.nu,
          to_mat(state.eta), to_cube(state.mu),  to_mat(state.phi),
          theta_to_cube(state.theta, d)};
}

/// Random strictly positive variational state consistent in shape with `d`,
/// with simplex phi / theta rows. Used to exercise the update rules away
/// from their fixed points.
inline std::pair<PriorState, ModelState> random_state(std::mt19937_64& rng, const Dataset& d,
                                                      std::size_t prototypes) {
  std::uniform_real_distribution<double> pos(0.2, 3.0);
  const std::size_t K = d.num_classes();
  PriorState prior;
  prior.u.resize(K);
  for (auto& x : prior.u) x = pos(rng);
  prior.beta = Matrix(d.num_workers(), prototypes);
  for (auto& x : prior.beta.data()) x = pos(rng);
  prior.a = PrototypeTensor(prototypes, K);
  for (auto& x : prior.a.flat().data()) x = pos(rng);

  ModelState state;
  state.nu.resize(K);
  for (auto& x : state.nu) x = pos(rng);
  state.eta = Matrix(d.num_workers(), prototypes);
  for (auto& x : state.eta.data()) x = pos(rng);
  state.mu = PrototypeTensor(prototypes, K);
  for (auto& x : state.mu.flat().data()) x = pos(rng);
  auto simplex_rows = [&](Matrix& m) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
      double z = 0.0;
      for (auto& x : m.row(r)) z += (x = pos(rng));
      for (auto& x : m.row(r)) x /= z;
    }
  };
  state.phi = Matrix(d.num_tasks(), K);
  simplex_rows(state.phi);
  state.theta = Matrix(d.num_annotations(), prototypes);
  simplex_rows(state.theta);
  return {prior, state};
}

}  // namespace ptbcc::testing
