#pragma once

// SQuAD-1.1 ingestion, contradicting-context sample assembly and the
// ContraQA JSONL dataset format.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "contraforge/jsonl.hpp"

namespace contraforge {

enum class ProvenanceKind { real, human_fake, model_fake, prefix_fake, distractor };

// Where a context paragraph came from. `k` is the iteration count used by the
// mask-and-fill rewriter and is only meaningful for model_fake.
struct Provenance {
  ProvenanceKind kind = ProvenanceKind::real;
  int k = 0;

  static Provenance real() { return {ProvenanceKind::real, 0}; }
  static Provenance human_fake() { return {ProvenanceKind::human_fake, 0}; }
  static Provenance model_fake(int k);
  static Provenance prefix_fake() { return {ProvenanceKind::prefix_fake, 0}; }
  // An unrelated real paragraph used by the random-context baseline.
  static Provenance distractor() { return {ProvenanceKind::distractor, 0}; }

  bool is_real() const { return kind == ProvenanceKind::real; }
  bool operator==(const Provenance&) const = default;
};

std::string_view to_string(ProvenanceKind kind);
ProvenanceKind provenance_kind_from_string(std::string_view s);

// Stable class label used for error attribution, e.g. "model_fake_k2".
std::string provenance_class(const Provenance& p);

// Identity of a paragraph: hash of its whitespace-collapsed text.
std::string paragraph_id(std::string_view text);

struct Paragraph {
  std::string id;
  std::string text;
  Provenance provenance;

  bool operator==(const Paragraph&) const = default;
};

// Builds a paragraph with a content-derived id. Throws ContractError for
// blank text.
Paragraph make_paragraph(std::string text, Provenance provenance);

struct QaPair {
  std::string question;
  std::vector<std::string> gold_answers;
  std::string source_paragraph_id;

  bool operator==(const QaPair&) const = default;
};

struct SquadParagraph {
  Paragraph paragraph;
  std::vector<QaPair> qas;
};

// One evaluation unit. `real_index` and the per-context provenance are kept
// for attribution; evaluation subjects only ever see context texts.
struct ContraSample {
  std::string question;
  std::vector<std::string> gold_answers;
  std::vector<Paragraph> contexts;
  std::size_t real_index = 0;
  std::uint64_t shuffle_seed = 0;

  bool operator==(const ContraSample&) const = default;
};

// Throws ContractError unless exactly one context is real and real_index
// points at it.
void check_sample(const ContraSample& sample);

std::vector<SquadParagraph> parse_squad(std::string_view json_text);
std::vector<SquadParagraph> load_squad(const std::filesystem::path& file);

// Permutation applied to [real, fakes...] for a given shuffle seed:
// contexts[j] = pool[order[j]].
std::vector<std::size_t> shuffle_order(std::uint64_t shuffle_seed, std::size_t n);

std::vector<ContraSample> assemble_contra(const Paragraph& real,
                                          const std::vector<Paragraph>& fakes,
                                          const std::vector<QaPair>& qas, std::uint64_t seed);

std::vector<Paragraph> sample_random_contexts(const std::vector<Paragraph>& pool, std::size_t n,
                                              std::string_view exclude_id, std::uint64_t seed);

// Keeps the real context plus the first `n_fakes` non-real contexts, in their
// stored order. Used by the fake-count sweep.
ContraSample truncate_fakes(const ContraSample& sample, std::size_t n_fakes);

inline constexpr std::string_view kDatasetFormat = "contraqa";
inline constexpr int kDatasetSchemaVersion = 1;

OrderedJson to_json(const Paragraph& p);
Paragraph paragraph_from_json(const Json& j);
OrderedJson to_json(const ContraSample& s);
ContraSample sample_from_json(const Json& j);

class DatasetWriter {
 public:
  DatasetWriter(std::ostream& out, OrderedJson meta = OrderedJson::object());
  void write(const ContraSample& sample);

 private:
  std::ostream& out_;
};

// Streaming reader: holds one record at a time.
class DatasetReader {
 public:
  explicit DatasetReader(std::istream& in);
  std::optional<ContraSample> next();
  const FileHeader& header() const { return header_; }

 private:
  JsonlReader lines_;
  FileHeader header_;
};

void write_dataset(const std::vector<ContraSample>& samples, const std::filesystem::path& path,
                   OrderedJson meta = OrderedJson::object());
std::vector<ContraSample> read_dataset(const std::filesystem::path& path);

}  // namespace contraforge
