#include "ptbcc/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "ptbcc/error.hpp"
#include "ptbcc/inference.hpp"

namespace ptbcc {

namespace {

constexpr const char* kOrigin = "evaluation";
constexpr double kTieTolerance = 1e-12;

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

double accuracy(std::span<const std::optional<std::size_t>> predictions,
                std::span<const std::optional<std::size_t>> truths) {
  if (predictions.size() != truths.size()) {
    throw Error(ErrorKind::Evaluation, kOrigin, "prediction and truth lengths differ");
  }
  std::size_t total = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    if (!truths[i]) continue;
    ++total;
    if (predictions[i] && *predictions[i] == *truths[i]) ++correct;
  }
  if (total == 0) throw Error(ErrorKind::Evaluation, kOrigin, "no task carries a truth label");
  return static_cast<double>(correct) / static_cast<double>(total);
}

double accuracy(std::span<const std::size_t> predictions,
                std::span<const std::optional<std::size_t>> truths) {
  std::vector<std::optional<std::size_t>> wrapped(predictions.begin(), predictions.end());
  return accuracy(wrapped, truths);
}

double accuracy(const Dataset& dataset, std::span<const std::size_t> predictions) {
  return accuracy(predictions, dataset.evaluable_truths());
}

double signed_rank_cdf(std::span<const double> ranks, double s) {
  if (ranks.size() > 62) {
    throw Error(ErrorKind::Input, kOrigin, "exact signed-rank distribution limited to 62 pairs");
  }
  std::vector<std::size_t> doubled;
  doubled.reserve(ranks.size());
  std::size_t total = 0;
  for (double r : ranks) {
    const double twice = 2.0 * r;
    const auto rounded = std::llround(twice);
    if (rounded < 0 || std::abs(twice - static_cast<double>(rounded)) > 1e-9) {
      throw Error(ErrorKind::Input, kOrigin, "ranks must be non-negative multiples of 0.5");
    }
    doubled.push_back(static_cast<std::size_t>(rounded));
    total += static_cast<std::size_t>(rounded);
  }
  // counts[t] = number of subsets whose doubled rank sum is t
  std::vector<std::uint64_t> counts(total + 1, 0);
  counts[0] = 1;
  std::size_t reach = 0;
  for (auto r : doubled) {
    reach += r;
    for (std::size_t t = reach; t >= r && t <= reach; --t) {
      counts[t] += counts[t - r];
      if (t == 0) break;
    }
  }
  const double limit = std::floor(2.0 * s + 1e-9);
  if (limit < 0) return 0.0;
  std::uint64_t below = 0;
  const std::size_t upto = std::min<std::size_t>(total, static_cast<std::size_t>(limit));
  for (std::size_t t = 0; t <= upto; ++t) below += counts[t];
  return std::ldexp(static_cast<double>(below), -static_cast<int>(ranks.size()));
}

WilcoxonReport wilcoxon_one_sided(std::span<const std::pair<double, double>> pairs) {
  if (pairs.empty()) throw Error(ErrorKind::Input, kOrigin, "wilcoxon needs at least one pair");
  std::vector<double> diffs;
  for (const auto& [method, reference] : pairs) {
    const double d = method - reference;
    if (std::abs(d) > kTieTolerance) diffs.push_back(d);
  }
  WilcoxonReport report;
  report.n = diffs.size();
  if (diffs.empty()) return report;

  std::vector<std::size_t> order(diffs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::abs(diffs[a]) < std::abs(diffs[b]); });
  std::vector<double> ranks(diffs.size());
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start + 1;
    while (end < order.size() &&
           std::abs(std::abs(diffs[order[end]]) - std::abs(diffs[order[start]])) <= kTieTolerance) {
      ++end;
    }
    const double avg = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t n = start; n < end; ++n) ranks[order[n]] = avg;
    start = end;
  }
  for (std::size_t n = 0; n < diffs.size(); ++n) {
    if (diffs[n] < 0) report.s_statistic += ranks[n];
  }
  report.p_value = signed_rank_cdf(ranks, report.s_statistic);
  return report;
}

std::string significance_stars(double p_value) {
  if (p_value < 0.01) return "**";
  if (p_value < 0.1) return "*";
  return "";
}

ComparisonReport compare_methods(const std::vector<MethodRun>& runs, const std::string& reference) {
  if (runs.empty()) throw Error(ErrorKind::Input, kOrigin, "no runs to compare");
  const auto ref = std::find_if(runs.begin(), runs.end(),
                                [&](const MethodRun& r) { return r.method_name == reference; });
  if (ref == runs.end()) {
    throw Error(ErrorKind::Input, kOrigin, "reference method '" + reference + "' not among runs");
  }
  ComparisonReport report;
  report.reference = reference;
  for (const auto& [name, acc] : ref->per_dataset_accuracy) report.datasets.push_back(name);
  if (report.datasets.empty()) throw Error(ErrorKind::Input, kOrigin, "reference has no datasets");

  for (const auto& run : runs) {
    if (run.per_dataset_accuracy.size() != report.datasets.size() ||
        !std::equal(report.datasets.begin(), report.datasets.end(),
                    run.per_dataset_accuracy.begin(),
                    [](const std::string& d, const auto& kv) { return d == kv.first; })) {
      throw Error(ErrorKind::Input, kOrigin,
                  "method '" + run.method_name + "' covers a different dataset set");
    }
    ComparisonRow row;
    row.method = run.method_name;
    double sum = 0.0;
    for (const auto& [name, acc] : run.per_dataset_accuracy) {
      if (!(acc >= 0.0 && acc <= 1.0)) {
        throw Error(ErrorKind::Input, kOrigin, "accuracy outside [0, 1] for " + name);
      }
      sum += acc;
    }
    row.average_accuracy = sum / static_cast<double>(report.datasets.size());
    if (run.method_name != reference) {
      std::vector<std::pair<double, double>> pairs;
      for (const auto& d : report.datasets) {
        pairs.emplace_back(run.per_dataset_accuracy.at(d), ref->per_dataset_accuracy.at(d));
      }
      row.test = wilcoxon_one_sided(pairs);
      row.stars = significance_stars(row.test->p_value);
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

nlohmann::json to_json(const ComparisonReport& report) {
  auto rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    nlohmann::json row = {{"method", r.method}, {"average_accuracy", r.average_accuracy}};
    if (r.test) {
      row["n"] = r.test->n;
      row["s"] = r.test->s_statistic;
      row["p_value"] = r.test->p_value;
      row["significance"] = r.stars;
    }
    rows.push_back(std::move(row));
  }
  return {{"reference", report.reference}, {"datasets", report.datasets}, {"rows", rows}};
}

std::string to_text(const ComparisonReport& report) {
  std::size_t width = std::string("Method").size();
  for (const auto& r : report.rows) width = std::max(width, r.method.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width)) << "Method" << "  Avg.Accuracy"
      << "      S  Sig  p-value\n";
  out << std::fixed;
  for (const auto& r : report.rows) {
    out << std::left << std::setw(static_cast<int>(width)) << r.method << "  " << std::right
        << std::setw(12) << std::setprecision(4) << r.average_accuracy;
    if (r.test) {
      out << "  " << std::setw(5) << std::setprecision(1) << r.test->s_statistic << "  "
          << std::left << std::setw(3) << r.stars << std::right << "  " << std::setprecision(4)
          << r.test->p_value;
    }
    out << '\n';
  }
  return out.str();
}

std::vector<MethodRun> parse_method_runs(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  bool with_seconds = false;
  std::vector<MethodRun> runs;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_commas(line);
    if (!have_header) {
      const std::vector<std::string_view> base{"dataset", "method", "accuracy"};
      with_seconds = fields.size() == 4 && fields[3] == "seconds";
      if (!std::equal(base.begin(), base.end(), fields.begin(),
                      fields.begin() + std::min<std::size_t>(3, fields.size())) ||
          fields.size() != (with_seconds ? 4u : 3u)) {
        throw Error(ErrorKind::Format, kOrigin,
                    "malformed header, expected 'dataset,method,accuracy[,seconds]'", line_no);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != (with_seconds ? 4u : 3u)) {
      throw Error(ErrorKind::Row, kOrigin, "wrong field count", line_no);
    }
    auto number = [&](std::string_view f) {
      try {
        std::size_t used = 0;
        const double v = std::stod(std::string(f), &used);
        if (used != f.size()) throw std::invalid_argument("trailing");
        return v;
      } catch (const std::exception&) {
        throw Error(ErrorKind::Row, kOrigin, "not a number: '" + std::string(f) + "'", line_no);
      }
    };
    const std::string dataset(fields[0]);
    const std::string method(fields[1]);
    auto it = std::find_if(runs.begin(), runs.end(),
                           [&](const MethodRun& r) { return r.method_name == method; });
    if (it == runs.end()) {
      runs.push_back({method, {}, {}});
      it = std::prev(runs.end());
    }
    if (!it->per_dataset_accuracy.emplace(dataset, number(fields[2])).second) {
      throw Error(ErrorKind::Row, kOrigin, "repeated (dataset, method) row", line_no);
    }
    if (with_seconds) it->per_dataset_runtime[dataset] = number(fields[3]);
  }
  if (!have_header) throw Error(ErrorKind::Format, kOrigin, "missing header");
  if (runs.empty()) throw Error(ErrorKind::EmptyInput, kOrigin, "no data rows");
  return runs;
}

std::vector<std::optional<std::size_t>> load_external_predictions(std::istream& in,
                                                                  const Dataset& dataset) {
  const auto rows = detail::read_csv(in, {"question", "predicted"}, kOrigin);
  std::vector<std::optional<std::size_t>> out(dataset.num_tasks());
  for (const auto& [line, f] : rows) {
    const auto task = dataset.task_ids().find(f[0]);
    if (!task) throw Error(ErrorKind::Row, kOrigin, "unknown task '" + f[0] + "'", line);
    const auto label = dataset.class_ids().find(f[1]);
    if (!label) throw Error(ErrorKind::Row, kOrigin, "unknown class '" + f[1] + "'", line);
    if (out[*task]) throw Error(ErrorKind::Row, kOrigin, "repeated task '" + f[0] + "'", line);
    out[*task] = *label;
  }
  return out;
}

std::vector<std::optional<std::size_t>> load_external_predictions(const std::string& path,
                                                                  const Dataset& dataset) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, kOrigin, "cannot open '" + path + "'");
  return load_external_predictions(in, dataset);
}

void write_predictions_csv(std::ostream& out, const Dataset& dataset,
                           std::span<const std::size_t> predictions) {
  out << "question,predicted\n";
  for (std::size_t i = 0; i < dataset.num_tasks(); ++i) {
    if (dataset.annotations_of_task(i).empty()) continue;
    out << dataset.task_ids().name(i) << ',' << dataset.class_ids().name(predictions[i]) << '\n';
  }
}

double benchmark(const std::function<void()>& run, std::size_t repetitions) {
  if (repetitions < 1) throw Error(ErrorKind::Input, kOrigin, "repetitions must be at least 1");
  std::vector<double> times;
  times.reserve(repetitions);
  for (std::size_t r = 0; r < repetitions; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    run();
    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return median(std::move(times));
}

double seconds_per_sweep(const Dataset& dataset, const Hyperparams& hp, std::size_t sweeps) {
  if (sweeps < 1) throw Error(ErrorKind::Input, kOrigin, "sweeps must be at least 1");
  VariationalEngine engine(dataset, hp);
  std::vector<double> times;
  times.reserve(sweeps);
  for (std::size_t s = 0; s < sweeps; ++s) {
    const auto t0 = std::chrono::steady_clock::now();
    engine.sweep();
    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return median(std::move(times));
}

void write_benchmark_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows) {
  out << "dataset,method,seconds\n";
  out << std::setprecision(9);
  for (const auto& r : rows) out << r.dataset << ',' << r.method << ',' << r.seconds << '\n';
}

}  // namespace ptbcc
