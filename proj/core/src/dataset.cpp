#include "ptbcc/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "csv.hpp"
#include "ptbcc/error.hpp"

namespace ptbcc {

namespace {

constexpr const char* kOrigin = "annotation-data";

}  // namespace

IdMap::IdMap(std::vector<std::string> names) {
  for (auto& n : names) {
    if (find(n)) throw Error(ErrorKind::Input, kOrigin, "duplicate id '" + n + "'");
    intern(n);
  }
}

std::size_t IdMap::intern(std::string_view name) {
  auto it = index_.find(std::string(name));
  if (it != index_.end()) return it->second;
  const std::size_t idx = names_.size();
  names_.emplace_back(name);
  index_.emplace(names_.back(), idx);
  return idx;
}

std::optional<std::size_t> IdMap::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Dataset Dataset::from_indices(std::size_t num_tasks, std::size_t num_workers,
                              std::size_t num_classes,
                              std::vector<Annotation> annotations,
                              std::vector<std::optional<std::size_t>> truths) {
  auto make = [](char prefix, std::size_t n) {
    std::vector<std::string> names;
    names.reserve(n);
    for (std::size_t i = 0; i < n; ++i) names.push_back(prefix + std::to_string(i));
    return IdMap(std::move(names));
  };
  return from_indices(make('t', num_tasks), make('w', num_workers),
                      make('c', num_classes), std::move(annotations),
                      std::move(truths));
}

Dataset Dataset::from_indices(IdMap tasks, IdMap workers, IdMap classes,
                              std::vector<Annotation> annotations,
                              std::vector<std::optional<std::size_t>> truths) {
  if (classes.size() < 2) {
    throw Error(ErrorKind::Class, kOrigin, "at least two classes are required");
  }
  Dataset d;
  d.tasks_ = std::move(tasks);
  d.workers_ = std::move(workers);
  d.classes_ = std::move(classes);
  d.annotations_ = std::move(annotations);
  if (truths.empty()) truths.assign(d.tasks_.size(), std::nullopt);
  if (truths.size() != d.tasks_.size()) {
    throw Error(ErrorKind::Input, kOrigin, "truth vector length differs from task count");
  }
  for (const auto& t : truths) {
    if (t && *t >= d.classes_.size()) {
      throw Error(ErrorKind::Class, kOrigin, "truth class index out of range");
    }
  }
  d.truths_ = std::move(truths);
  d.index();
  return d;
}

void Dataset::index() {
  by_task_.assign(tasks_.size(), {});
  by_worker_.assign(workers_.size(), {});
  for (std::size_t a = 0; a < annotations_.size(); ++a) {
    const auto& y = annotations_[a];
    if (y.task >= tasks_.size() || y.worker >= workers_.size() ||
        y.label >= classes_.size()) {
      throw Error(ErrorKind::Input, kOrigin,
                  "annotation " + std::to_string(a) + " has an index out of range");
    }
    by_task_[y.task].push_back(a);
    by_worker_[y.worker].push_back(a);
  }
  for (std::size_t i = 0; i < by_task_.size(); ++i) {
    std::vector<std::size_t> seen;
    seen.reserve(by_task_[i].size());
    for (auto a : by_task_[i]) seen.push_back(annotations_[a].worker);
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
      throw Error(ErrorKind::Duplicate, kOrigin,
                  "task '" + tasks_.name(i) + "' has two annotations from one worker");
    }
  }
}

std::vector<std::size_t> Dataset::workers_of_task(std::size_t i) const {
  std::vector<std::size_t> out;
  out.reserve(by_task_[i].size());
  for (auto a : by_task_[i]) out.push_back(annotations_[a].worker);
  return out;
}

std::vector<std::size_t> Dataset::tasks_of_worker(std::size_t j) const {
  std::vector<std::size_t> out;
  out.reserve(by_worker_[j].size());
  for (auto a : by_worker_[j]) out.push_back(annotations_[a].task);
  return out;
}

bool Dataset::has_truths() const noexcept {
  return std::any_of(truths_.begin(), truths_.end(), [](const auto& t) { return t.has_value(); });
}

std::vector<std::optional<std::size_t>> Dataset::evaluable_truths() const {
  auto out = truths_;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (by_task_[i].empty()) out[i].reset();
  }
  return out;
}

std::size_t Dataset::num_annotated_tasks() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(by_task_.begin(), by_task_.end(), [](const auto& v) { return !v.empty(); }));
}

std::pair<Dataset, std::vector<std::size_t>> Dataset::annotated_subset() const {
  std::vector<std::size_t> to_parent;
  std::vector<std::size_t> to_child(tasks_.size(), 0);
  IdMap tasks;
  std::vector<std::optional<std::size_t>> truths;
  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    if (by_task_[i].empty()) continue;
    to_child[i] = to_parent.size();
    to_parent.push_back(i);
    tasks.intern(tasks_.name(i));
    truths.push_back(truths_[i]);
  }
  std::vector<Annotation> annotations = annotations_;
  for (auto& y : annotations) y.task = to_child[y.task];
  return {from_indices(std::move(tasks), workers_, classes_, std::move(annotations),
                       std::move(truths)),
          std::move(to_parent)};
}

std::vector<AnnotationRecord> parse_annotations(std::istream& source) {
  const auto rows = detail::read_csv(source, {"question", "worker", "answer"}, kOrigin);
  std::vector<AnnotationRecord> records;
  records.reserve(rows.size());
  for (const auto& [line, f] : rows) records.push_back({f[0], f[1], f[2]});
  return records;
}

std::vector<AnnotationRecord> parse_annotations_string(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_annotations(in);
}

std::vector<TruthRecord> parse_truths(std::istream& source) {
  const auto rows = detail::read_csv(source, {"question", "truth"}, kOrigin);
  std::vector<TruthRecord> records;
  records.reserve(rows.size());
  for (const auto& [line, f] : rows) records.push_back({f[0], f[1]});
  return records;
}

Dataset build_dataset(const std::vector<AnnotationRecord>& records,
                      const std::vector<TruthRecord>& truths,
                      const BuildOptions& options) {
  if (records.empty()) throw Error(ErrorKind::EmptyInput, kOrigin, "no annotation records");

  IdMap tasks;
  IdMap workers;
  IdMap classes;
  const bool explicit_universe = !options.class_universe.empty();
  if (explicit_universe) classes = IdMap(options.class_universe);

  auto class_index = [&](const std::string& label, const char* what) {
    if (!explicit_universe) return classes.intern(label);
    auto idx = classes.find(label);
    if (!idx) {
      throw Error(ErrorKind::Class, kOrigin,
                  std::string(what) + " label '" + label + "' is outside the class universe");
    }
    return *idx;
  };

  std::vector<Annotation> annotations;
  annotations.reserve(records.size());
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> slot;
  for (const auto& r : records) {
    const std::size_t i = tasks.intern(r.task_id);
    const std::size_t j = workers.intern(r.worker_id);
    const std::size_t k = class_index(r.label, "annotation");
    auto [it, inserted] = slot.try_emplace({i, j}, annotations.size());
    if (inserted) {
      annotations.push_back({i, j, k});
    } else if (options.duplicates == DuplicatePolicy::Reject) {
      throw Error(ErrorKind::Duplicate, kOrigin,
                  "duplicate annotation for (" + r.task_id + ", " + r.worker_id + ")");
    } else {
      annotations[it->second].label = k;
    }
  }

  // Truth-only tasks are kept in the index; truth labels may extend an
  // implicit class universe.
  std::vector<std::pair<std::size_t, std::size_t>> truth_pairs;
  for (const auto& t : truths) {
    if (options.reject_unknown_truth_tasks && !tasks.find(t.task_id)) {
      throw Error(ErrorKind::Input, kOrigin,
                  "truth names unknown task '" + t.task_id + "'");
    }
    const std::size_t i = tasks.intern(t.task_id);
    truth_pairs.emplace_back(i, class_index(t.label, "truth"));
  }
  std::vector<std::optional<std::size_t>> truth_vec(tasks.size());
  for (auto [i, k] : truth_pairs) truth_vec[i] = k;

  return Dataset::from_indices(std::move(tasks), std::move(workers), std::move(classes),
                               std::move(annotations), std::move(truth_vec));
}

Dataset load_dataset(const std::string& answers_path,
                     const std::optional<std::string>& truths_path,
                     const BuildOptions& options) {
  std::ifstream answers(answers_path);
  if (!answers) throw Error(ErrorKind::Io, kOrigin, "cannot open '" + answers_path + "'");
  const auto records = parse_annotations(answers);
  std::vector<TruthRecord> truths;
  if (truths_path) {
    std::ifstream tf(*truths_path);
    if (!tf) throw Error(ErrorKind::Io, kOrigin, "cannot open '" + *truths_path + "'");
    truths = parse_truths(tf);
  }
  return build_dataset(records, truths, options);
}

void write_answers_csv(std::ostream& out, const Dataset& dataset) {
  out << "question,worker,answer\n";
  for (const auto& y : dataset.annotations()) {
    out << dataset.task_ids().name(y.task) << ',' << dataset.worker_ids().name(y.worker)
        << ',' << dataset.class_ids().name(y.label) << '\n';
  }
}

void write_truths_csv(std::ostream& out, const Dataset& dataset) {
  out << "question,truth\n";
  for (std::size_t i = 0; i < dataset.num_tasks(); ++i) {
    if (const auto& t = dataset.truths()[i]) {
      out << dataset.task_ids().name(i) << ',' << dataset.class_ids().name(*t) << '\n';
    }
  }
}

}  // namespace ptbcc
