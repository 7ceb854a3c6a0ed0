#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ptbcc/dataset.hpp"
#include "ptbcc/hyperparams.hpp"
#include "ptbcc/matrix.hpp"

namespace ptbcc {

/// Dirichlet hyperparameters of the generative model.
struct PriorState {
  std::vector<double> u;  ///< truth prior, |K|
  Matrix beta;            ///< per-worker prototype prior, |W| x |S|
  PrototypeTensor a;      ///< prototype row priors, |S| x |K| x |K|
};

/// Variational parameters. `theta` has one row per annotation (indexed like
/// Dataset::annotations()), so theta_{ji} for i outside N_j is never stored.
struct ModelState {
  std::vector<double> nu;  ///< q(tau) = Dir(nu)
  Matrix eta;              ///< q(pi_j) = Dir(eta_j)
  PrototypeTensor mu;      ///< q(v_sk) = Dir(mu_sk)
  Matrix phi;              ///< q(z_i), |T| x |K|
  Matrix theta;            ///< q(x_ji), |annotations| x |S|
};

/// Expectations of log-parameters under the current Dirichlet factors.
struct ELogCache {
  std::vector<double> elog_tau;
  Matrix elog_pi;
  PrototypeTensor elog_v;
};

struct Initialization {
  PriorState prior;
  ModelState state;
  /// The prototype matrices v_s used to seed theta, before any update.
  PrototypeTensor seed_prototypes;
};

/// Row-stochastic seed prototypes: v_1 diagonal-dominant (f vs e), v_2
/// off-diagonal-leaning (e vs m), the rest per `extra_prototype_mode`.
PrototypeTensor seed_prototypes(std::size_t num_classes, const Hyperparams& hp);

/// Majority-vote initialization followed by prior construction and the
/// first nu / eta / mu evaluation.
Initialization initialize(const Dataset& dataset, const Hyperparams& hp);

/// Sets each row of `logits` to its softmax in place, subtracting the row
/// max first. Throws Error(Numeric) on non-finite input.
void softmax_rows(Matrix& logits, const char* what);

ELogCache compute_elog(const ModelState& state);

std::vector<double> update_nu(const PriorState& prior, const Matrix& phi);
Matrix update_eta(const PriorState& prior, const Matrix& theta, const Dataset& dataset);
PrototypeTensor update_mu(const PriorState& prior, const Matrix& phi, const Matrix& theta,
                          const Dataset& dataset);
Matrix update_theta(const ELogCache& elog, const Matrix& phi, const Dataset& dataset);
Matrix update_phi(const ELogCache& elog, const Matrix& theta, const Dataset& dataset);

/// Evidence lower bound without its additive constant. `elog` must be the
/// cache computed from `state`.
double compute_elbo(const PriorState& prior, const ModelState& state, const ELogCache& elog,
                    const Dataset& dataset);

/// Row-normalized copy: E[v_skl] = mu_skl / sum_l mu_skl.
PrototypeTensor expected_prototypes(const PrototypeTensor& mu);
/// Row-normalized copy: E[pi_js] = eta_js / sum_s eta_js.
Matrix expected_worker_mix(const Matrix& eta);

}  // namespace ptbcc
