#pragma once

// Human annotation of fake contexts: token diffs, the mechanical gates an
// annotation must pass, and a journaled task store with leasing.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "contraforge/squad.hpp"
#include "contraforge/text.hpp"

namespace contraforge {

// One changed region. Token ranges index the word_punct_tokens of each side;
// char spans also cover the whitespace between the region and the unchanged
// tokens around it, so replacing orig_span by new_text in the original, for
// every hunk, reproduces the modified text exactly.
struct Hunk {
  std::size_t orig_begin = 0;
  std::size_t orig_end = 0;
  std::size_t new_begin = 0;
  std::size_t new_end = 0;
  CharSpan orig_span;
  CharSpan new_span;
  std::vector<std::string> orig_tokens;
  std::vector<std::string> new_tokens;
  std::string orig_text;
  std::string new_text;

  // Only whitespace differs; not counted as an edit.
  bool layout_only() const { return orig_tokens.empty() && new_tokens.empty(); }
  bool operator==(const Hunk&) const = default;
};

// Token-level LCS diff. Unchanged runs shorter than both neighbouring hunks
// are folded into one hunk, so rewriting a clause that happens to reuse a
// word counts as one edit. Hunks are ordered and disjoint.
std::vector<Hunk> diff_hunks(std::string_view original, std::string_view modified);

// Applies hunks (as produced by diff_hunks) to the original text.
std::string apply_hunks(std::string_view original, const std::vector<Hunk>& hunks);

inline constexpr std::string_view kExpertReviewWarning =
    "no contradiction check performed — requires expert review";

struct ValidationResult {
  std::size_t edit_count = 0;
  std::size_t m_required = 0;
  std::vector<Hunk> hunks;  // content hunks only
  bool has_long_edit = false;
  bool valid = false;
  std::vector<std::string> warnings;
};

// Number of sentences plus one.
std::size_t required_edits(std::string_view original);

ValidationResult validate_annotation(std::string_view original, std::string_view modified);

OrderedJson to_json(const Hunk& hunk);
OrderedJson to_json(const ValidationResult& result);

enum class TaskStatus { open, submitted, accepted, rejected };
std::string_view to_string(TaskStatus s);
TaskStatus task_status_from_string(std::string_view s);

struct AnnotationTask {
  std::string task_id;
  std::string batch_id;
  Paragraph original;
  std::size_t m_required = 0;
  TaskStatus status = TaskStatus::open;
  std::optional<std::string> leased_to;
  std::int64_t lease_expires_ms = 0;
  // Set once a submission passed the gates.
  std::optional<Paragraph> fake;
  std::optional<std::string> annotator;
};

OrderedJson to_json(const AnnotationTask& task);

struct SubmitOutcome {
  bool accepted = false;
  ValidationResult validation;
  std::optional<Paragraph> fake;
};

// Thread-safe task store. Every state change is appended to the batch's
// journal (one JSONL file per batch under `dir`) before it becomes visible;
// the in-memory index is rebuilt from the journals on construction. A torn
// final line from a crash is ignored. Leases live in memory only.
class AnnotationStore {
 public:
  using Clock = std::function<std::int64_t()>;  // milliseconds

  explicit AnnotationStore(std::filesystem::path dir,
                           std::chrono::milliseconds lease_timeout = std::chrono::minutes(30),
                           Clock clock = {});

  // Creates one open task per paragraph, all in a new batch.
  std::vector<AnnotationTask> create_batch(const std::vector<Paragraph>& paragraphs);

  // The annotator's current lease if it still holds one, otherwise the
  // oldest open task with no live lease, which is then leased to it.
  std::optional<AnnotationTask> next_task(const std::string& annotator);

  AnnotationTask get_task(const std::string& task_id) const;

  // Dry run of the gates for a task. Throws NotFoundError.
  ValidationResult validate(const std::string& task_id, std::string_view modified) const;

  // Mechanical gate. A passing submission is journaled as a human_fake
  // paragraph and the task becomes submitted; a failing one leaves the task
  // open. Throws NotFoundError, or ConflictError when the task is no longer
  // open or is leased to another annotator.
  SubmitOutcome submit(const std::string& task_id, std::string_view modified,
                       const std::string& annotator);

  // Expert decision on a submitted task: accepted or rejected.
  AnnotationTask review(const std::string& task_id, bool accept);

  std::vector<AnnotationTask> tasks() const;

  // Fakes of accepted tasks, plus submitted ones when include_unreviewed.
  std::vector<std::pair<Paragraph, Paragraph>> export_fakes(bool include_unreviewed) const;

 private:
  struct Batch {
    std::filesystem::path journal;
  };

  void replay(const std::filesystem::path& journal);
  void apply_event(const Json& event);
  void append(const std::string& batch_id, const OrderedJson& event);
  AnnotationTask& find(const std::string& task_id);
  const AnnotationTask& find(const std::string& task_id) const;
  bool lease_live(const AnnotationTask& task, std::int64_t now) const;

  std::filesystem::path dir_;
  std::chrono::milliseconds lease_timeout_;
  Clock clock_;
  mutable std::mutex mutex_;
  std::map<std::string, Batch> batches_;
  std::vector<std::string> order_;  // task ids in creation order
  std::map<std::string, AnnotationTask> tasks_;
  std::size_t next_batch_ = 1;
  std::size_t next_task_ = 1;
};

inline constexpr std::string_view kJournalFormat = "contraforge.annotation_journal";
inline constexpr int kJournalSchemaVersion = 1;

}  // namespace contraforge
