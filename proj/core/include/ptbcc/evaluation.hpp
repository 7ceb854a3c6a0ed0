#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ptbcc/dataset.hpp"
#include "ptbcc/hyperparams.hpp"

namespace ptbcc {

/// Fraction of truth-bearing tasks whose prediction matches. Tasks without
/// truth are excluded; a missing prediction on a truth-bearing task counts
/// as wrong. Throws Error(Evaluation) if no task carries a truth.
double accuracy(std::span<const std::optional<std::size_t>> predictions,
                std::span<const std::optional<std::size_t>> truths);
double accuracy(std::span<const std::size_t> predictions,
                std::span<const std::optional<std::size_t>> truths);
/// Accuracy against the dataset's truths on annotated tasks only.
double accuracy(const Dataset& dataset, std::span<const std::size_t> predictions);

struct WilcoxonReport {
  std::size_t n = 0;         ///< non-tied pairs
  double s_statistic = 0.0;  ///< rank sum over pairs where the method is worse
  double p_value = 1.0;      ///< P(W <= S) under the exact null
};

/// Exact P(W <= s) where W sums a random subset of `ranks`, each included
/// with probability 1/2. Ranks must be multiples of 0.5.
double signed_rank_cdf(std::span<const double> ranks, double s);

/// One-sided signed-rank test of method against reference, pairs given as
/// (method, reference). Differences within 1e-12 of zero are dropped; tied
/// magnitudes share their average rank.
WilcoxonReport wilcoxon_one_sided(std::span<const std::pair<double, double>> pairs);

struct MethodRun {
  std::string method_name;
  std::map<std::string, double> per_dataset_accuracy;
  std::map<std::string, double> per_dataset_runtime;
};

struct ComparisonRow {
  std::string method;
  double average_accuracy = 0.0;
  std::optional<WilcoxonReport> test;  ///< absent for the reference row
  std::string stars;
};

struct ComparisonReport {
  std::string reference;
  std::vector<std::string> datasets;
  std::vector<ComparisonRow> rows;  ///< declaration order
};

/// Significance stars: "**" for p < 0.01, "*" for p < 0.1.
std::string significance_stars(double p_value);

ComparisonReport compare_methods(const std::vector<MethodRun>& runs, const std::string& reference);
nlohmann::json to_json(const ComparisonReport& report);
std::string to_text(const ComparisonReport& report);

/// Reads `dataset,method,accuracy[,seconds]` rows into runs in order of
/// first appearance.
std::vector<MethodRun> parse_method_runs(std::istream& in);

/// Reads a `question,predicted` CSV, mapping ids through the dataset.
/// Unknown tasks or labels and repeated tasks raise Error(Row).
std::vector<std::optional<std::size_t>> load_external_predictions(std::istream& in,
                                                                  const Dataset& dataset);
std::vector<std::optional<std::size_t>> load_external_predictions(const std::string& path,
                                                                  const Dataset& dataset);

void write_predictions_csv(std::ostream& out, const Dataset& dataset,
                           std::span<const std::size_t> predictions);

/// Median wall time in seconds over `repetitions` calls of `run`.
double benchmark(const std::function<void()>& run, std::size_t repetitions);

/// Median seconds of a single inference sweep, excluding initialization.
double seconds_per_sweep(const Dataset& dataset, const Hyperparams& hp, std::size_t sweeps);

struct BenchmarkRow {
  std::string dataset;
  std::string method;
  double seconds;
};

void write_benchmark_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows);

}  // namespace ptbcc
