#include "ptbcc/variational.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "dirichlet_sampler.hpp"
#include "ptbcc/error.hpp"
#include "ptbcc/special_functions.hpp"

namespace ptbcc {

namespace {

constexpr const char* kOrigin = "ptbcc-core";
// Floor for prior entries that the data-driven initialization leaves at
// zero (classes or prototypes with no vote mass).
constexpr double kPriorFloor = 1e-6;

void require_positive_row(std::span<const double> row, const char* what) {
  for (double v : row) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::Domain, kOrigin,
                  std::string(what) + " has a non-positive or non-finite entry");
    }
  }
}

void elog_row(std::span<const double> alpha, std::span<double> out) {
  double total = 0.0;
  for (double a : alpha) total += a;
  const double psi_total = digamma(total);
  for (std::size_t k = 0; k < alpha.size(); ++k) out[k] = digamma(alpha[k]) - psi_total;
}

void check_theta_shape(const Matrix& theta, const Dataset& dataset) {
  if (theta.rows() != dataset.num_annotations()) {
    throw Error(ErrorKind::Input, kOrigin, "theta rows differ from annotation count");
  }
}

void check_phi_shape(const Matrix& phi, const Dataset& dataset) {
  if (phi.rows() != dataset.num_tasks() || phi.cols() != dataset.num_classes()) {
    throw Error(ErrorKind::Input, kOrigin, "phi shape differs from |T| x |K|");
  }
}

}  // namespace

PrototypeTensor seed_prototypes(std::size_t num_classes, const Hyperparams& hp) {
  const std::size_t K = num_classes;
  const std::size_t S = hp.num_prototypes;
  const double off = static_cast<double>(K - 1);
  PrototypeTensor v(S, K);

  const double accurate_norm = hp.f + off * hp.e;
  const double confused_norm = hp.e + off * hp.m;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t l = 0; l < K; ++l) {
      v(0, k, l) = (k == l ? hp.f : hp.e) / accurate_norm;
      if (S > 1) v(1, k, l) = (k == l ? hp.e : hp.m) / confused_norm;
    }
  }

  std::mt19937_64 rng(hp.seed);
  const std::vector<double> ones(K, 1.0);
  for (std::size_t s = 2; s < S; ++s) {
    for (std::size_t k = 0; k < K; ++k) {
      auto row = v.row(s, k);
      if (hp.extra_prototype_mode == ExtraPrototypeMode::FlatRan) {
        std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(K));
      } else {
        detail::sample_dirichlet(ones, rng, row);
      }
    }
  }
  return v;
}

Initialization initialize(const Dataset& dataset, const Hyperparams& hp) {
  hp.validate();
  if (dataset.num_annotations() == 0) {
    throw Error(ErrorKind::Input, kOrigin, "cannot initialize on a dataset without annotations");
  }
  const std::size_t T = dataset.num_tasks();
  const std::size_t W = dataset.num_workers();
  const std::size_t K = dataset.num_classes();
  const std::size_t S = hp.num_prototypes;
  const std::size_t A = dataset.num_annotations();

  Initialization init;
  auto& prior = init.prior;
  auto& state = init.state;

  // Fractional vote shares; tasks without votes start uniform.
  state.phi = Matrix(T, K);
  for (std::size_t i = 0; i < T; ++i) {
    const auto& ann = dataset.annotations_of_task(i);
    if (ann.empty()) {
      for (std::size_t k = 0; k < K; ++k) state.phi(i, k) = 1.0 / static_cast<double>(K);
      continue;
    }
    for (auto a : ann) state.phi(i, dataset.annotation(a).label) += 1.0;
    for (std::size_t k = 0; k < K; ++k) state.phi(i, k) /= static_cast<double>(ann.size());
  }

  init.seed_prototypes = seed_prototypes(K, hp);
  const auto& v = init.seed_prototypes;

  prior.u.assign(K, 0.0);
  for (std::size_t i = 0; i < T; ++i) {
    for (std::size_t k = 0; k < K; ++k) prior.u[k] += state.phi(i, k);
  }
  for (auto& u : prior.u) u = std::max(u, kPriorFloor);

  // Unnormalized theta_jis = sum_k phi_ik v_{s,k,y_ij}.
  Matrix raw_theta(A, S);
  for (std::size_t a = 0; a < A; ++a) {
    const auto& y = dataset.annotation(a);
    for (std::size_t s = 0; s < S; ++s) {
      double acc = 0.0;
      for (std::size_t k = 0; k < K; ++k) acc += state.phi(y.task, k) * v(s, k, y.label);
      raw_theta(a, s) = acc;
    }
  }

  prior.beta = Matrix(W, S);
  prior.a = PrototypeTensor(S, K);
  for (std::size_t a = 0; a < A; ++a) {
    const auto& y = dataset.annotation(a);
    for (std::size_t s = 0; s < S; ++s) {
      prior.beta(y.worker, s) += raw_theta(a, s);
      for (std::size_t k = 0; k < K; ++k) {
        prior.a(s, k, y.label) += raw_theta(a, s) * state.phi(y.task, k);
      }
    }
  }
  for (auto& b : prior.beta.data()) b = std::max(hp.beta_scale * b, kPriorFloor);
  for (auto& x : prior.a.flat().data()) x = std::max(hp.a_scale * x, kPriorFloor);

  state.theta = raw_theta;
  for (std::size_t a = 0; a < A; ++a) {
    auto row = state.theta.row(a);
    double total = 0.0;
    for (double t : row) total += t;
    for (auto& t : row) t /= total;
  }

  state.nu = update_nu(prior, state.phi);
  state.eta = update_eta(prior, state.theta, dataset);
  state.mu = update_mu(prior, state.phi, state.theta, dataset);
  return init;
}

void softmax_rows(Matrix& logits, const char* what) {
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto row = logits.row(r);
    double max_v = -INFINITY;
    for (double x : row) {
      if (!std::isfinite(x)) {
        throw Error(ErrorKind::Numeric, kOrigin,
                    std::string("non-finite logit in ") + what + " row " + std::to_string(r));
      }
      max_v = std::max(max_v, x);
    }
    double total = 0.0;
    for (auto& x : row) {
      x = std::exp(x - max_v);
      total += x;
    }
    for (auto& x : row) x /= total;
  }
}

ELogCache compute_elog(const ModelState& state) {
  ELogCache cache;
  require_positive_row(state.nu, "nu");
  cache.elog_tau.assign(state.nu.size(), 0.0);
  elog_row(state.nu, cache.elog_tau);

  cache.elog_pi = Matrix(state.eta.rows(), state.eta.cols());
  for (std::size_t j = 0; j < state.eta.rows(); ++j) {
    require_positive_row(state.eta.row(j), "eta");
    elog_row(state.eta.row(j), cache.elog_pi.row(j));
  }

  const auto& mu = state.mu;
  cache.elog_v = PrototypeTensor(mu.prototypes(), mu.classes());
  for (std::size_t r = 0; r < mu.flat().rows(); ++r) {
    require_positive_row(mu.flat().row(r), "mu");
    elog_row(mu.flat().row(r), cache.elog_v.flat().row(r));
  }
  return cache;
}

std::vector<double> update_nu(const PriorState& prior, const Matrix& phi) {
  if (phi.cols() != prior.u.size()) {
    throw Error(ErrorKind::Input, kOrigin, "phi columns differ from |K|");
  }
  std::vector<double> nu = prior.u;
  for (std::size_t i = 0; i < phi.rows(); ++i) {
    for (std::size_t k = 0; k < nu.size(); ++k) nu[k] += phi(i, k);
  }
  return nu;
}

Matrix update_eta(const PriorState& prior, const Matrix& theta, const Dataset& dataset) {
  check_theta_shape(theta, dataset);
  if (prior.beta.rows() != dataset.num_workers() || prior.beta.cols() != theta.cols()) {
    throw Error(ErrorKind::Input, kOrigin, "beta shape differs from |W| x |S|");
  }
  Matrix eta = prior.beta;
  for (std::size_t j = 0; j < dataset.num_workers(); ++j) {
    auto row = eta.row(j);
    for (auto a : dataset.annotations_of_worker(j)) {
      for (std::size_t s = 0; s < row.size(); ++s) row[s] += theta(a, s);
    }
  }
  return eta;
}

PrototypeTensor update_mu(const PriorState& prior, const Matrix& phi, const Matrix& theta,
                          const Dataset& dataset) {
  check_theta_shape(theta, dataset);
  check_phi_shape(phi, dataset);
  const std::size_t S = prior.a.prototypes();
  const std::size_t K = prior.a.classes();
  if (theta.cols() != S || K != dataset.num_classes()) {
    throw Error(ErrorKind::Input, kOrigin, "a shape differs from |S| x |K| x |K|");
  }
  PrototypeTensor mu = prior.a;
  for (std::size_t a = 0; a < dataset.num_annotations(); ++a) {
    const auto& y = dataset.annotation(a);
    const auto phi_i = phi.row(y.task);
    for (std::size_t s = 0; s < S; ++s) {
      const double t = theta(a, s);
      for (std::size_t k = 0; k < K; ++k) mu(s, k, y.label) += phi_i[k] * t;
    }
  }
  return mu;
}

Matrix update_theta(const ELogCache& elog, const Matrix& phi, const Dataset& dataset) {
  check_phi_shape(phi, dataset);
  const std::size_t S = elog.elog_v.prototypes();
  const std::size_t K = elog.elog_v.classes();
  Matrix theta(dataset.num_annotations(), S);
  for (std::size_t a = 0; a < dataset.num_annotations(); ++a) {
    const auto& y = dataset.annotation(a);
    const auto phi_i = phi.row(y.task);
    for (std::size_t s = 0; s < S; ++s) {
      double logit = elog.elog_pi(y.worker, s);
      for (std::size_t k = 0; k < K; ++k) logit += phi_i[k] * elog.elog_v(s, k, y.label);
      theta(a, s) = logit;
    }
  }
  softmax_rows(theta, "theta");
  return theta;
}

Matrix update_phi(const ELogCache& elog, const Matrix& theta, const Dataset& dataset) {
  check_theta_shape(theta, dataset);
  const std::size_t S = elog.elog_v.prototypes();
  const std::size_t K = elog.elog_v.classes();
  Matrix phi(dataset.num_tasks(), K);
  for (std::size_t i = 0; i < dataset.num_tasks(); ++i) {
    auto row = phi.row(i);
    for (std::size_t k = 0; k < K; ++k) row[k] = elog.elog_tau[k];
    for (auto a : dataset.annotations_of_task(i)) {
      const std::size_t l = dataset.annotation(a).label;
      for (std::size_t s = 0; s < S; ++s) {
        const double t = theta(a, s);
        for (std::size_t k = 0; k < K; ++k) row[k] += t * elog.elog_v(s, k, l);
      }
    }
  }
  softmax_rows(phi, "phi");
  return phi;
}

namespace {

double entropy_term(std::span<const double> p) {
  double acc = 0.0;
  for (double x : p) {
    if (x > 0.0) acc -= x * std::log(x);
  }
  return acc;
}

void check_term(long double value, const char* term) {
  if (!std::isfinite(static_cast<double>(value))) {
    throw Error(ErrorKind::Numeric, kOrigin, std::string("non-finite ELBO term: ") + term);
  }
}

}  // namespace

double compute_elbo(const PriorState& prior, const ModelState& state, const ELogCache& elog,
                    const Dataset& dataset) {
  const std::size_t T = dataset.num_tasks();
  const std::size_t W = dataset.num_workers();
  const std::size_t K = dataset.num_classes();
  const std::size_t S = state.eta.cols();

  // Truth block.
  long double tau_term = 0.0L;
  {
    std::vector<long double> coef(K);
    for (std::size_t k = 0; k < K; ++k) coef[k] = prior.u[k] - state.nu[k];
    for (std::size_t i = 0; i < T; ++i) {
      for (std::size_t k = 0; k < K; ++k) coef[k] += state.phi(i, k);
    }
    for (std::size_t k = 0; k < K; ++k) tau_term += coef[k] * elog.elog_tau[k];
    tau_term += log_beta(state.nu);
  }
  check_term(tau_term, "truth distribution");

  // Worker mixture block.
  long double pi_term = 0.0L;
  {
    std::vector<long double> coef(S);
    for (std::size_t j = 0; j < W; ++j) {
      for (std::size_t s = 0; s < S; ++s) coef[s] = prior.beta(j, s) - state.eta(j, s);
      for (auto a : dataset.annotations_of_worker(j)) {
        for (std::size_t s = 0; s < S; ++s) coef[s] += state.theta(a, s);
      }
      for (std::size_t s = 0; s < S; ++s) pi_term += coef[s] * elog.elog_pi(j, s);
      pi_term += log_beta(state.eta.row(j));
    }
  }
  check_term(pi_term, "annotator prototype distribution");

  // Prototype block.
  long double v_term = 0.0L;
  {
    std::vector<long double> coef(S * K * K);
    auto at = [&](std::size_t s, std::size_t k, std::size_t l) -> long double& {
      return coef[(s * K + k) * K + l];
    };
    for (std::size_t s = 0; s < S; ++s)
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = 0; l < K; ++l) at(s, k, l) = prior.a(s, k, l) - state.mu(s, k, l);
    for (std::size_t a = 0; a < dataset.num_annotations(); ++a) {
      const auto& y = dataset.annotation(a);
      for (std::size_t s = 0; s < S; ++s)
        for (std::size_t k = 0; k < K; ++k)
          at(s, k, y.label) += state.phi(y.task, k) * state.theta(a, s);
    }
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t l = 0; l < K; ++l) v_term += at(s, k, l) * elog.elog_v(s, k, l);
        v_term += log_beta(state.mu.row(s, k));
      }
    }
  }
  check_term(v_term, "prototype confusion matrices");

  long double entropy = 0.0L;
  for (std::size_t i = 0; i < T; ++i) entropy += entropy_term(state.phi.row(i));
  for (std::size_t a = 0; a < state.theta.rows(); ++a) entropy += entropy_term(state.theta.row(a));
  check_term(entropy, "entropy");

  return static_cast<double>(tau_term + pi_term + v_term + entropy);
}

PrototypeTensor expected_prototypes(const PrototypeTensor& mu) {
  PrototypeTensor out = mu;
  for (std::size_t r = 0; r < out.flat().rows(); ++r) {
    auto row = out.flat().row(r);
    double total = 0.0;
    for (double x : row) total += x;
    for (auto& x : row) x /= total;
  }
  return out;
}

Matrix expected_worker_mix(const Matrix& eta) {
  Matrix out = eta;
  for (std::size_t j = 0; j < out.rows(); ++j) {
    auto row = out.row(j);
    double total = 0.0;
    for (double x : row) total += x;
    for (auto& x : row) x /= total;
  }
  return out;
}

}  // namespace ptbcc
