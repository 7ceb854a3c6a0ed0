#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ptbcc {

/// One raw row of an answers file.
struct AnnotationRecord {
  std::string task_id;
  std::string worker_id;
  std::string label;

  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

/// One raw row of a truth file.
struct TruthRecord {
  std::string task_id;
  std::string label;
};

/// A dense-indexed annotation y_ij.
struct Annotation {
  std::size_t task = 0;
  std::size_t worker = 0;
  std::size_t label = 0;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

/// Bidirectional string <-> dense index map, indices in insertion order.
class IdMap {
 public:
  IdMap() = default;
  explicit IdMap(std::vector<std::string> names);

  /// Returns the index of `name`, inserting it if new.
  std::size_t intern(std::string_view name);
  std::optional<std::size_t> find(std::string_view name) const;
  const std::string& name(std::size_t index) const { return names_.at(index); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::size_t size() const noexcept { return names_.size(); }

  friend bool operator==(const IdMap& a, const IdMap& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class DuplicatePolicy { Reject, KeepLast };

/// Immutable annotation set with per-task and per-worker adjacency.
///
/// `annotations_of_task(i)` and `annotations_of_worker(j)` hold indices into
/// `annotations()`, so W_i and N_j are recovered through the annotation's
/// worker and task fields.
class Dataset {
 public:
  /// Builds a dataset directly from dense indices. Ids are synthesized as
  /// t<i>, w<j>, c<k> unless maps are supplied.
  static Dataset from_indices(std::size_t num_tasks, std::size_t num_workers,
                              std::size_t num_classes,
                              std::vector<Annotation> annotations,
                              std::vector<std::optional<std::size_t>> truths = {});

  static Dataset from_indices(IdMap tasks, IdMap workers, IdMap classes,
                              std::vector<Annotation> annotations,
                              std::vector<std::optional<std::size_t>> truths = {});

  std::size_t num_tasks() const noexcept { return tasks_.size(); }
  std::size_t num_workers() const noexcept { return workers_.size(); }
  std::size_t num_classes() const noexcept { return classes_.size(); }
  std::size_t num_annotations() const noexcept { return annotations_.size(); }

  const std::vector<Annotation>& annotations() const noexcept { return annotations_; }
  const Annotation& annotation(std::size_t a) const { return annotations_[a]; }

  const std::vector<std::size_t>& annotations_of_task(std::size_t i) const {
    return by_task_[i];
  }
  const std::vector<std::size_t>& annotations_of_worker(std::size_t j) const {
    return by_worker_[j];
  }

  /// W_i as worker indices.
  std::vector<std::size_t> workers_of_task(std::size_t i) const;
  /// N_j as task indices.
  std::vector<std::size_t> tasks_of_worker(std::size_t j) const;

  const IdMap& task_ids() const noexcept { return tasks_; }
  const IdMap& worker_ids() const noexcept { return workers_; }
  const IdMap& class_ids() const noexcept { return classes_; }

  /// Per-task truth; nullopt where unknown. Always |T| entries.
  const std::vector<std::optional<std::size_t>>& truths() const noexcept { return truths_; }
  bool has_truths() const noexcept;

  /// Truths restricted to tasks that carry at least one annotation.
  std::vector<std::optional<std::size_t>> evaluable_truths() const;

  std::size_t num_annotated_tasks() const noexcept;

  /// Copy containing only annotated tasks, plus the mapping from the
  /// subset's task index to this dataset's task index.
  std::pair<Dataset, std::vector<std::size_t>> annotated_subset() const;

 private:
  Dataset() = default;
  void index();

  IdMap tasks_;
  IdMap workers_;
  IdMap classes_;
  std::vector<Annotation> annotations_;
  std::vector<std::vector<std::size_t>> by_task_;
  std::vector<std::vector<std::size_t>> by_worker_;
  std::vector<std::optional<std::size_t>> truths_;
};

/// Parses an answers CSV with header `question,worker,answer`.
std::vector<AnnotationRecord> parse_annotations(std::istream& source);
std::vector<AnnotationRecord> parse_annotations_string(std::string_view text);

/// Parses a truth CSV with header `question,truth`.
std::vector<TruthRecord> parse_truths(std::istream& source);

struct BuildOptions {
  DuplicatePolicy duplicates = DuplicatePolicy::Reject;
  /// Explicit class universe. When empty the universe is the union of
  /// annotation and truth labels in first-appearance order.
  std::vector<std::string> class_universe;
  /// Truth rows naming a task with no annotations are either kept as
  /// unannotated tasks (excluded from inference and accuracy) or rejected.
  bool reject_unknown_truth_tasks = false;
};

Dataset build_dataset(const std::vector<AnnotationRecord>& records,
                      const std::vector<TruthRecord>& truths = {},
                      const BuildOptions& options = {});

/// Convenience: read both files from disk.
Dataset load_dataset(const std::string& answers_path,
                     const std::optional<std::string>& truths_path,
                     const BuildOptions& options = {});

void write_answers_csv(std::ostream& out, const Dataset& dataset);
void write_truths_csv(std::ostream& out, const Dataset& dataset);

}  // namespace ptbcc
