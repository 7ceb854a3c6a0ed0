#include "ptbcc/baselines.hpp"

#include <cmath>
#include <string>

#include "ptbcc/error.hpp"
#include "ptbcc/inference.hpp"

namespace ptbcc {

namespace {

constexpr const char* kOrigin = "baselines";

struct DsParams {
  std::vector<double> marginals;
  std::vector<Matrix> confusion;  ///< per worker, K x K (truth, label)
};

DsParams m_step(const Dataset& dataset, const Matrix& posterior, double eps) {
  const std::size_t K = dataset.num_classes();
  DsParams p;
  p.marginals.assign(K, eps);
  for (std::size_t i = 0; i < dataset.num_tasks(); ++i) {
    if (dataset.annotations_of_task(i).empty()) continue;
    for (std::size_t k = 0; k < K; ++k) p.marginals[k] += posterior(i, k);
  }
  double total = 0.0;
  for (double x : p.marginals) total += x;
  for (auto& x : p.marginals) x /= total;

  p.confusion.assign(dataset.num_workers(), Matrix(K, K, eps));
  for (const auto& y : dataset.annotations()) {
    auto& c = p.confusion[y.worker];
    for (std::size_t k = 0; k < K; ++k) c(k, y.label) += posterior(y.task, k);
  }
  for (auto& c : p.confusion) {
    for (std::size_t k = 0; k < K; ++k) {
      auto row = c.row(k);
      double s = 0.0;
      for (double x : row) s += x;
      for (auto& x : row) x /= s;
    }
  }
  return p;
}

/// Fills `posterior` in the log domain; returns the observed-data
/// log-likelihood of `p`.
double e_step(const Dataset& dataset, const DsParams& p, Matrix& posterior) {
  const std::size_t K = dataset.num_classes();
  double loglik = 0.0;
  for (std::size_t i = 0; i < dataset.num_tasks(); ++i) {
    auto row = posterior.row(i);
    const auto& ann = dataset.annotations_of_task(i);
    if (ann.empty()) {
      for (auto& x : row) x = 1.0 / static_cast<double>(K);
      continue;
    }
    for (std::size_t k = 0; k < K; ++k) {
      double lp = std::log(p.marginals[k]);
      for (auto a : ann) {
        const auto& y = dataset.annotation(a);
        lp += std::log(p.confusion[y.worker](k, y.label));
      }
      row[k] = lp;
    }
    double max_v = -INFINITY;
    for (double x : row) max_v = std::max(max_v, x);
    if (!std::isfinite(max_v)) {
      throw Error(ErrorKind::Numeric, kOrigin, "non-finite E-step log posterior");
    }
    double total = 0.0;
    for (auto& x : row) {
      x = std::exp(x - max_v);
      total += x;
    }
    for (auto& x : row) x /= total;
    loglik += max_v + std::log(total);
  }
  return loglik;
}

double smoothing_penalty(const DsParams& p, double eps) {
  double acc = 0.0;
  for (double x : p.marginals) acc += std::log(x);
  for (const auto& c : p.confusion)
    for (double x : c.data()) acc += std::log(x);
  return eps * acc;
}

}  // namespace

BaselineResult majority_vote(const Dataset& dataset) {
  const std::size_t K = dataset.num_classes();
  BaselineResult r;
  r.posterior = Matrix(dataset.num_tasks(), K);
  r.predictions.assign(dataset.num_tasks(), 0);
  for (std::size_t i = 0; i < dataset.num_tasks(); ++i) {
    auto row = r.posterior.row(i);
    const auto& ann = dataset.annotations_of_task(i);
    if (ann.empty()) {
      for (auto& x : row) x = 1.0 / static_cast<double>(K);
      continue;
    }
    for (auto a : ann) row[dataset.annotation(a).label] += 1.0;
    for (auto& x : row) x /= static_cast<double>(ann.size());
    r.predictions[i] = argmax(row);
  }
  return r;
}

double dawid_skene_log_likelihood(const Dataset& dataset, const std::vector<double>& marginals,
                                  const std::vector<Matrix>& confusion) {
  Matrix scratch(dataset.num_tasks(), dataset.num_classes());
  return e_step(dataset, DsParams{marginals, confusion}, scratch);
}

BaselineResult dawid_skene(const Dataset& dataset, const DawidSkeneOptions& options) {
  if (dataset.num_annotations() == 0) {
    throw Error(ErrorKind::Input, kOrigin, "dataset has no annotations");
  }
  if (!(options.smoothing > 0.0) || !(options.tol > 0.0) || options.max_iter < 1) {
    throw Error(ErrorKind::Hyperparameter, kOrigin,
                "dawid_skene needs positive smoothing and tol and max_iter >= 1");
  }
  BaselineResult r = majority_vote(dataset);
  r.converged = false;
  Matrix next(dataset.num_tasks(), dataset.num_classes());
  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    const DsParams p = m_step(dataset, r.posterior, options.smoothing);
    const double loglik = e_step(dataset, p, next);
    r.log_likelihood_trace.push_back(loglik + smoothing_penalty(p, options.smoothing));
    double change = 0.0;
    for (std::size_t n = 0; n < next.data().size(); ++n) {
      change = std::max(change, std::abs(next.data()[n] - r.posterior.data()[n]));
    }
    r.posterior = next;
    r.iterations = it;
    r.class_marginals = p.marginals;
    r.confusion = p.confusion;
    if (change < options.tol) {
      r.converged = true;
      break;
    }
  }
  for (std::size_t i = 0; i < dataset.num_tasks(); ++i) {
    r.predictions[i] = dataset.annotations_of_task(i).empty() ? 0 : argmax(r.posterior.row(i));
  }
  return r;
}

}  // namespace ptbcc
