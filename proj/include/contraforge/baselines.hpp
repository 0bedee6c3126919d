#pragma once

// Deterministic in-process implementations of the backend capabilities. They
// let every pipeline stage run and be tested without a neural model.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "contraforge/backend.hpp"
#include "contraforge/random.hpp"

namespace contraforge {

// Rule-based chunker producing shallow PTB trees: NP chunks (with nested
// possessives), PP = preposition + NP, a VP over the verb group and the
// chunks that follow it, all under S. A single chunk is returned as the root.
// Output always aligns with the input sentence.
class ShallowParser final : public Parser {
 public:
  std::string parse(std::string_view sentence) override;
};

// Canned trees keyed by exact sentence text; unknown sentences go to the
// fallback parser, or raise ContractError when there is none.
class TableParser final : public Parser {
 public:
  explicit TableParser(std::map<std::string, std::string> trees, Parser* fallback = nullptr)
      : trees_(std::move(trees)), fallback_(fallback) {}
  std::string parse(std::string_view sentence) override;

 private:
  std::map<std::string, std::string> trees_;
  Parser* fallback_;
};

// Replacement pools for the gazetteer filler. Phrase pools are keyed by the
// case-folded, whitespace-collapsed original text and take precedence over
// label pools. JSON form: {"phrases": {"Santa Clara": ["Atlanta"]},
// "labels": {"NP": ["..."]}}.
struct GazetteerTable {
  std::map<std::string, std::vector<std::string>> phrases;
  std::map<std::string, std::vector<std::string>> labels;

  static GazetteerTable from_json(const Json& j);
  static GazetteerTable load(const std::filesystem::path& path);
  void add_phrase(std::string_view original, std::vector<std::string> pool);
};

// Case-insensitive, whitespace-collapsed comparison key used for echo checks.
std::string echo_key(std::string_view s);

// One pool entry different from `original`, or nullopt (no fill) when the
// table has no pool for it or the pool only holds the original.
std::optional<std::string> gazetteer_fill(std::string_view masked_label, std::string_view original,
                                          const GazetteerTable& table, Rng& rng);

class GazetteerFiller final : public Filler {
 public:
  explicit GazetteerFiller(GazetteerTable table) : table_(std::move(table)) {}
  // Distinct draws (without replacement) from the matching pool, seeded by
  // call.seed.
  std::vector<std::string> fill(const FillCall& call) override;

 private:
  GazetteerTable table_;
};

// Picks the sentence with the most question-token occurrences (ties go to
// the earliest), then the longest run of tokens that do not occur in the
// question, capped at max_span_tokens. span_score = overlap / question tokens.
// Token matching is exact (case-sensitive) on alphanumeric runs.
ScoredAnswer overlap_read(std::string_view question, std::string_view paragraph,
                          std::size_t max_span_tokens = 10);

class OverlapReader final : public Reader {
 public:
  explicit OverlapReader(std::size_t max_span_tokens = 10) : max_span_tokens_(max_span_tokens) {}
  ScoredAnswer read(std::string_view question, std::string_view paragraph) override {
    return overlap_read(question, paragraph, max_span_tokens_);
  }

 private:
  std::size_t max_span_tokens_;
};

// 1.0 for real provenance, else 0.0. Requires provenance.
double oracle_detect(const ContextView& context);

class OracleDetector final : public Detector {
 public:
  double trust(const ContextView& context) override { return oracle_detect(context); }
  bool needs_provenance() const override { return true; }
};

class ConstantDetector final : public Detector {
 public:
  explicit ConstantDetector(double value);
  double trust(const ContextView&) override { return value_; }

 private:
  double value_;
};

// Word-bigram continuation model over a training corpus. Continues from the
// last prompt word; successors are drawn with a seeded rng. Stops at
// max_tokens or a word with no successors.
class MarkovCompleter final : public Completer {
 public:
  explicit MarkovCompleter(const std::vector<std::string>& corpus);
  std::string complete(std::string_view prompt, std::size_t max_tokens,
                       std::uint64_t seed) override;

 private:
  std::map<std::string, std::vector<std::string>> successors_;
  std::vector<std::string> starts_;
};

}  // namespace contraforge
