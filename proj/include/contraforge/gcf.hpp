#pragma once

// Gap constituency filling: self-supervised (context, masked span) pairs for
// training the span filler. For an article S_1..S_T, every interior sentence
// t = 2..T-1 with a maskable constituent yields one example whose input is
// (S_1, S_{t-1}, S_t with one constituent masked, S_{t+1}) and whose target
// is the masked text.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "contraforge/backend.hpp"
#include "contraforge/random.hpp"

namespace contraforge {

struct GcfConfig {
  std::string mask_token = std::string(kDefaultMaskToken);
  std::string separator = "</s>";
  bool exclude_whole_sentence = true;
  std::size_t min_sentences = 3;
  std::size_t max_sentence_tokens = 128;
};

struct GcfSegments {
  std::string s1;
  std::string s_prev;
  std::string masked_st;
  std::string s_next;

  bool operator==(const GcfSegments&) const = default;
};

struct GcfExample {
  std::string article_id;
  std::size_t t = 0;  // 1-based sentence index
  GcfSegments input;
  std::string target;
  // 1-based whitespace-token indices of the first and last word touched by
  // the masked span.
  std::size_t a = 0;
  std::size_t b = 0;

  bool operator==(const GcfExample&) const = default;
};

struct GcfArticleResult {
  std::vector<GcfExample> examples;
  std::size_t skipped_unmaskable = 0;
  std::size_t skipped_too_long = 0;
  bool skipped_short_article = false;
};

GcfArticleResult build_examples(const std::string& article_id,
                                const std::vector<std::string>& sentences, Parser& parser,
                                Rng& rng, const GcfConfig& config = {});

// Puts the target back at the mask position of masked_st.
std::string reconstruct_sentence(const GcfExample& example, std::string_view mask_token);

// One training record: {"input": s1 SEP s_prev SEP masked SEP s_next,
// "output": target, plus article_id, t, a, b}. Segments are joined with
// " SEP ".
OrderedJson training_record(const GcfExample& example, const GcfConfig& config);
GcfExample example_from_record(const Json& record, const GcfConfig& config);

struct SerializeReport {
  std::size_t written = 0;
  std::vector<std::string> rejected;  // one diagnostic per rejected example
};

// Writes one record per line. Examples whose target contains the mask token
// are rejected. When `header` is given it is written first.
SerializeReport serialize_training(const std::vector<GcfExample>& examples, std::ostream& out,
                                   const GcfConfig& config,
                                   const std::optional<FileHeader>& header = std::nullopt);
SerializeReport serialize_training(const std::vector<GcfExample>& examples,
                                   const std::filesystem::path& path, const GcfConfig& config,
                                   const std::optional<FileHeader>& header = std::nullopt);

std::vector<GcfExample> read_training(std::istream& in, const GcfConfig& config);

inline constexpr std::string_view kGcfFormat = "contraforge.gcf";

}  // namespace contraforge
