#pragma once

// Shared plumbing for the subcommands.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "contraforge/backend.hpp"
#include "contraforge/cli.hpp"
#include "contraforge/error.hpp"
#include "contraforge/http_backend.hpp"
#include "contraforge/squad.hpp"

namespace contraforge::cli {

// Bad flag values detected after parsing. Exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct Globals {
  std::uint64_t seed = 0;
  std::string config_file;
  std::size_t jobs = 0;  // 0 = all cores
  std::string log_level = "warning";
  std::string parse_url, fill_url, read_url, detect_url, complete_url;
  long timeout_ms = -1;
  int retries = -1;
  long max_in_flight = -1;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  Getenv getenv;
  Globals globals;
  CLI::App* app = nullptr;
  CLI::App* sub = nullptr;

  std::size_t jobs() const;
  // Defaults < config file < environment < global URL flags.
  BackendConfig backend_config() const;
  // Metadata for output headers: tool, version, subcommand, flag values
  // (output paths and --jobs left out so reruns compare equal) and seed.
  OrderedJson metadata(const OrderedJson& backends = OrderedJson::object()) const;
};

using Command = std::function<int(Context&)>;

// Registration hooks, one per source file.
void add_data_commands(CLI::App& app, Context& ctx, Command& chosen);
void add_eval_commands(CLI::App& app, Context& ctx, Command& chosen);
void add_service_commands(CLI::App& app, Context& ctx, Command& chosen);

// Holds the implementation behind one capability and describes it for the
// metadata header.
template <typename T>
struct Resolved {
  std::unique_ptr<T> impl;
  std::string description;
};

// `choice` is a flag value: empty (fall back to configured endpoint, then
// the baseline), a URL, or a baseline name.
Resolved<Parser> resolve_parser(const Context& ctx, const std::string& choice);
Resolved<Filler> resolve_filler(const Context& ctx, const std::string& choice);
Resolved<Reader> resolve_reader(const Context& ctx, const std::string& choice);
Resolved<Detector> resolve_detector(const Context& ctx, const std::string& choice,
                                    bool send_provenance);
Resolved<Completer> resolve_completer(const Context& ctx, const std::string& choice,
                                      const std::vector<std::string>& corpus);

// SQuAD JSON, or JSONL records with a "text" field (header lines skipped).
std::vector<Paragraph> load_paragraphs(const std::filesystem::path& path);

// Opens an output file, creating parent directories.
std::ofstream open_output(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

inline constexpr std::string_view kFakesFormat = "contraforge.fakes";
inline constexpr std::string_view kReportFormat = "contraforge.eval_report";
inline constexpr std::string_view kOutcomesFormat = "contraforge.eval_outcomes";
inline constexpr std::string_view kEditMetricFormat = "contraforge.edit_metric";

}  // namespace contraforge::cli
