#pragma once

// Helpers shared by the unit tests and the acceptance runner.

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "contraforge/backend.hpp"
#include "contraforge/baselines.hpp"
#include "contraforge/squad.hpp"

namespace contraforge::testing {

std::filesystem::path fixture(const std::string& relative);
std::string read_text(const std::filesystem::path& path);

// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// (sentence, bracketed tree) pairs from a tab-separated corpus file.
std::vector<std::pair<std::string, std::string>> load_tree_corpus(const std::filesystem::path& path);

// Tree for a single-sentence paragraph whose only maskable constituent is
// the NP spanning `subject` (a prefix of the sentence).
std::string subject_only_tree(const std::string& sentence, const std::string& subject);

// Contradicting-context samples from the direction fixture: each paragraph
// gets `n_fakes` gazetteer fakes (one per seeded run) that replace the gold
// subject, then real + fakes are shuffled.
std::vector<ContraSample> direction_samples(std::uint64_t seed, int n_fakes = 4);

// Filler replaying a fixed script of candidate lists, one per call.
class ScriptedFiller final : public Filler {
 public:
  explicit ScriptedFiller(std::vector<std::vector<std::string>> script)
      : script_(std::move(script)) {}
  std::vector<std::string> fill(const FillCall& call) override;
  const std::vector<FillCall>& calls() const { return calls_; }

 private:
  std::vector<std::vector<std::string>> script_;
  std::vector<FillCall> calls_;
};

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

// Runs the command-line tool in-process with a private environment.
CliResult run_cli(const std::vector<std::string>& args,
                  const std::map<std::string, std::string>& env = {});

// Byte-identical file contents.
bool same_bytes(const std::filesystem::path& a, const std::filesystem::path& b);

// Hand-computed answer-metric table. F1 values are written as the fraction
// 2 * shared / (pred tokens + gold tokens) worked out by hand.
struct MetricCase {
  std::string prediction;
  std::vector<std::string> golds;
  int em;
  double f1;
};
const std::vector<MetricCase>& metric_cases();

// Plain recursive Levenshtein with a memo table, kept independent of the
// library's two-row implementation.
std::size_t levenshtein_oracle(const std::u32string& a, const std::u32string& b);

}  // namespace contraforge::testing
