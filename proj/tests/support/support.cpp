#include "support.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "contraforge/cli.hpp"
#include "contraforge/rewrite.hpp"
#include "contraforge/text.hpp"

namespace contraforge::testing {

std::filesystem::path fixture(const std::string& relative) {
  return std::filesystem::path(CONTRAFORGE_FIXTURE_DIR) / relative;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

TempDir::TempDir() {
  std::random_device rd;
  const auto base = std::filesystem::temp_directory_path();
  for (;;) {
    path_ = base / ("contraforge-test-" + std::to_string(rd()));
    if (std::filesystem::create_directory(path_)) break;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::vector<std::pair<std::string, std::string>> load_tree_corpus(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    out.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return out;
}

std::string subject_only_tree(const std::string& sentence, const std::string& subject) {
  std::string tree = "(S (NP";
  for (const auto& t : text::whitespace_tokens(subject)) tree += " (NNP " + t.text + ")";
  tree += ")";
  const auto rest = text::whitespace_tokens(sentence.substr(subject.size()));
  for (std::size_t i = 0; i < rest.size(); ++i) {
    std::string w = rest[i].text;
    const bool stop = !w.empty() && w.back() == '.';
    if (stop) w.pop_back();
    if (!w.empty()) tree += std::string(" (") + (i == 0 ? "VBD " : w == "the" ? "DT " : "NN ") + w + ")";
    if (stop) tree += " (. .)";
  }
  return tree + ")";
}

std::vector<ContraSample> direction_samples(std::uint64_t seed, int n_fakes) {
  const auto squad = load_squad(fixture("direction/squad.json"));
  GazetteerFiller filler(GazetteerTable::load(fixture("direction/gazetteer.json")));
  std::vector<ContraSample> out;
  for (const auto& sp : squad) {
    const std::string& sentence = sp.paragraph.text;
    const std::string& gold = sp.qas.front().gold_answers.front();
    TableParser parser(std::map<std::string, std::string>{{sentence, subject_only_tree(sentence, gold)}});
    std::vector<Paragraph> fakes;
    for (int run = 0; run < n_fakes; ++run) {
      RewriteConfig config;
      config.seed = mix_seed(mix_seed(seed, sp.paragraph.id), static_cast<std::uint64_t>(run));
      Rng rng = make_rng(config.seed);
      auto result = rewrite_paragraph(sentence, filler, parser, config, rng);
      fakes.push_back(make_paragraph(result.fake_text, Provenance::model_fake(1)));
    }
    for (auto& s : assemble_contra(sp.paragraph, fakes, sp.qas, seed)) out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::string> ScriptedFiller::fill(const FillCall& call) {
  calls_.push_back(call);
  if (calls_.size() > script_.size()) return {};
  return script_[calls_.size() - 1];
}

CliResult run_cli(const std::vector<std::string>& args,
                  const std::map<std::string, std::string>& env) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err, [&env](const char* name) -> const char* {
    auto it = env.find(name);
    return it == env.end() ? nullptr : it->second.c_str();
  });
  return {code, out.str(), err.str()};
}

bool same_bytes(const std::filesystem::path& a, const std::filesystem::path& b) {
  return std::filesystem::exists(a) && std::filesystem::exists(b) && read_text(a) == read_text(b);
}

const std::vector<MetricCase>& metric_cases() {
  static const std::vector<MetricCase> cases = {
      {"Denver Broncos", {"Denver Broncos"}, 1, 1.0},
      {"denver broncos!", {"Denver Broncos"}, 1, 1.0},
      {"the Denver Broncos", {"Denver Broncos"}, 1, 1.0},
      {"Broncos", {"Denver Broncos"}, 0, 2.0 / 3.0},
      {"Santa Clara", {"Santa Clara, California"}, 0, 4.0 / 5.0},
      {"Levi's Stadium", {"Levis Stadium"}, 1, 1.0},
      {"", {"Denver"}, 0, 0.0},
      {"the", {"a"}, 1, 1.0},
      {"Santa Clara", {"Levi's Stadium", "Santa Clara, California"}, 0, 4.0 / 5.0},
      {"24\u201310", {"24\u201310"}, 1, 1.0},
      {"24-10", {"24\u201310"}, 0, 0.0},
      {"the the game game", {"game"}, 0, 2.0 / 3.0},
      {"Z\u00fcrich", {"Z\u00dcRICH"}, 1, 1.0},
      {"anthem", {"an them"}, 0, 0.0},
      {"February 7, 2016", {"February 7 2016"}, 1, 1.0},
      {"7 February 2016", {"February 7, 2016"}, 0, 1.0},
      {"Carolina Panthers defeated", {"Denver Broncos defeated Carolina"}, 0, 4.0 / 7.0},
      {"  Denver\tBroncos ", {"Denver Broncos"}, 1, 1.0},
      {"An American football game", {"American football game"}, 1, 1.0},
      {"A", {"B"}, 0, 0.0},
  };
  return cases;
}

std::size_t levenshtein_oracle(const std::u32string& a, const std::u32string& b) {
  std::vector<std::vector<std::size_t>> memo(a.size() + 1,
                                             std::vector<std::size_t>(b.size() + 1, SIZE_MAX));
  std::function<std::size_t(std::size_t, std::size_t)> d = [&](std::size_t i, std::size_t j) {
    if (i == 0) return j;
    if (j == 0) return i;
    std::size_t& m = memo[i][j];
    if (m != SIZE_MAX) return m;
    const std::size_t sub = d(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0 : 1);
    m = std::min({d(i - 1, j) + 1, d(i, j - 1) + 1, sub});
    return m;
  };
  return d(a.size(), b.size());
}

}  // namespace contraforge::testing
