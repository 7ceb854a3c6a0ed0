#include "ptbcc/inference.hpp"

#include <chrono>
#include <cmath>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ptbcc/error.hpp"

namespace ptbcc {

VariationalEngine::VariationalEngine(const Dataset& dataset, const Hyperparams& hp)
    : dataset_(dataset) {
  auto init = initialize(dataset, hp);
  prior_ = std::move(init.prior);
  state_ = std::move(init.state);
  seeds_ = std::move(init.seed_prototypes);
  elog_ = compute_elog(state_);
}

double VariationalEngine::sweep() {
  state_.nu = update_nu(prior_, state_.phi);
  state_.eta = update_eta(prior_, state_.theta, dataset_);
  state_.mu = update_mu(prior_, state_.phi, state_.theta, dataset_);
  elog_ = compute_elog(state_);
  state_.theta = update_theta(elog_, state_.phi, dataset_);
  Matrix phi = update_phi(elog_, state_.theta, dataset_);

  double change = 0.0;
  const auto old_data = state_.phi.data();
  const auto new_data = phi.data();
  for (std::size_t n = 0; n < new_data.size(); ++n) {
    change = std::max(change, std::abs(new_data[n] - old_data[n]));
  }
  state_.phi = std::move(phi);
  return change;
}

std::size_t argmax(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < row.size(); ++k) {
    if (row[k] > row[best]) best = k;
  }
  return best;
}

InferenceResult fit(const Dataset& dataset, const Hyperparams& hp, const FitOptions& options) {
  hp.validate();
  if (dataset.num_annotations() == 0) {
    throw Error(ErrorKind::Input, "ptbcc-core", "dataset has no annotations");
  }
  const auto start = std::chrono::steady_clock::now();

  const bool compact = dataset.num_annotated_tasks() != dataset.num_tasks();
  std::optional<std::pair<Dataset, std::vector<std::size_t>>> subset;
  if (compact) subset = dataset.annotated_subset();
  const Dataset& active = subset ? subset->first : dataset;

  InferenceResult result;
  VariationalEngine engine(active, hp);
  std::size_t iteration = 0;
  try {
    while (iteration < hp.max_iterations) {
      ++iteration;
      const double change = engine.sweep();
      const double elbo = engine.elbo();
      result.elbo_trace.push_back(elbo);
      if (options.on_sweep) {
        options.on_sweep({iteration, elbo, change, engine.prior(), engine.state(), active});
      }
      if (change < hp.xi) {
        result.converged = true;
        break;
      }
    }
  } catch (const Error& err) {
    throw Error(err.kind(), err.origin(),
                err.message() + " (sweep " + std::to_string(iteration) + ")", err.line());
  }
  result.iterations = iteration;

  const std::size_t K = dataset.num_classes();
  const auto& state = engine.state();
  if (compact) {
    std::vector<double> prior_only = engine.elog().elog_tau;
    Matrix prior_row(1, K);
    for (std::size_t k = 0; k < K; ++k) prior_row(0, k) = prior_only[k];
    softmax_rows(prior_row, "phi");
    result.phi = Matrix(dataset.num_tasks(), K);
    for (std::size_t i = 0; i < dataset.num_tasks(); ++i) {
      for (std::size_t k = 0; k < K; ++k) result.phi(i, k) = prior_row(0, k);
    }
    const auto& to_parent = subset->second;
    for (std::size_t c = 0; c < to_parent.size(); ++c) {
      for (std::size_t k = 0; k < K; ++k) result.phi(to_parent[c], k) = state.phi(c, k);
    }
  } else {
    result.phi = state.phi;
  }

  result.predictions.resize(dataset.num_tasks());
  for (std::size_t i = 0; i < dataset.num_tasks(); ++i) {
    result.predictions[i] = argmax(result.phi.row(i));
  }
  result.expected_prototypes = expected_prototypes(state.mu);
  result.expected_worker_mix = expected_worker_mix(state.eta);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

namespace {

nlohmann::json matrix_json(const Matrix& m) {
  auto out = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    out.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return out;
}

std::string matrix_csv(const Matrix& m, const std::string& corner,
                       const std::vector<std::string>& row_labels,
                       const std::vector<std::string>& col_labels) {
  std::ostringstream out;
  out.precision(17);
  out << corner;
  for (const auto& c : col_labels) out << ',' << c;
  out << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out << row_labels[r];
    for (double x : m.row(r)) out << ',' << x;
    out << '\n';
  }
  return out.str();
}

std::vector<std::string> prototype_labels(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t s = 0; s < n; ++s) out.push_back("prototype_" + std::to_string(s + 1));
  return out;
}

}  // namespace

nlohmann::json export_posteriors(const InferenceResult& result, const Dataset& dataset) {
  const auto& v = result.expected_prototypes;
  auto prototypes = nlohmann::json::array();
  for (std::size_t s = 0; s < v.prototypes(); ++s) {
    auto rows = nlohmann::json::array();
    for (std::size_t k = 0; k < v.classes(); ++k) {
      const auto row = v.row(s, k);
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    prototypes.push_back(std::move(rows));
  }
  return {
      {"classes", dataset.class_ids().names()},
      {"workers", dataset.worker_ids().names()},
      {"tasks", dataset.task_ids().names()},
      {"expected_prototypes", std::move(prototypes)},
      {"expected_worker_mix", matrix_json(result.expected_worker_mix)},
      {"phi", matrix_json(result.phi)},
      {"elbo_trace", result.elbo_trace},
      {"iterations", result.iterations},
      {"converged", result.converged},
  };
}

std::vector<std::pair<std::string, std::string>> export_posterior_csvs(
    const InferenceResult& result, const Dataset& dataset) {
  std::vector<std::pair<std::string, std::string>> files;
  const auto& classes = dataset.class_ids().names();
  const auto& v = result.expected_prototypes;
  for (std::size_t s = 0; s < v.prototypes(); ++s) {
    Matrix m(v.classes(), v.classes());
    for (std::size_t k = 0; k < v.classes(); ++k)
      for (std::size_t l = 0; l < v.classes(); ++l) m(k, l) = v(s, k, l);
    files.emplace_back("prototype_" + std::to_string(s + 1) + ".csv",
                       matrix_csv(m, "truth", classes, classes));
  }
  files.emplace_back("worker_mix.csv",
                     matrix_csv(result.expected_worker_mix, "worker",
                                dataset.worker_ids().names(),
                                prototype_labels(result.expected_worker_mix.cols())));
  files.emplace_back("phi.csv",
                     matrix_csv(result.phi, "question", dataset.task_ids().names(), classes));
  return files;
}

}  // namespace ptbcc
