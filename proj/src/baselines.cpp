#include "contraforge/baselines.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <unordered_set>

#include "contraforge/error.hpp"
#include "contraforge/ptb.hpp"
#include "contraforge/sentences.hpp"
#include "contraforge/text.hpp"

namespace contraforge {

namespace {

// ---------------------------------------------------------------- tokenizer

struct Tok {
  std::string leaf;  // escaped treebank token
  std::string tag;
};

const std::set<std::string, std::less<>> kDeterminers = {
    "the", "a", "an", "this", "that", "these", "those", "some", "any",
    "each", "every", "no", "another", "all", "both"};
const std::set<std::string, std::less<>> kPronouns = {"i",  "he", "she", "it",  "we",  "they",
                                                      "you", "me", "him", "us", "them"};
const std::set<std::string, std::less<>> kPossessives = {"his", "her", "its", "their",
                                                         "our", "my",  "your"};
const std::set<std::string, std::less<>> kPrepositions = {
    "of",     "in",      "on",    "at",     "by",      "for",    "with",  "from",
    "about",  "into",    "over",  "after",  "before",  "under",  "between", "through",
    "during", "without", "within", "since", "until",   "against", "among", "across",
    "toward", "towards", "upon",  "near",   "than",    "as",     "because", "although",
    "though", "while",   "if",    "whether", "despite"};
const std::set<std::string, std::less<>> kConjunctions = {"and", "or", "but", "nor", "yet"};
const std::set<std::string, std::less<>> kModals = {"can",   "could", "may",  "might", "must",
                                                    "shall", "should", "will", "would"};
const std::set<std::string, std::less<>> kVerbs = {
    "is",    "was",   "are",   "were",   "be",    "been",   "being", "am",    "has",
    "have",  "had",   "do",    "does",   "did",   "won",    "lost",  "made",  "became",
    "become", "began", "took",  "gave",   "went",  "came",   "held",  "led",   "built",
    "wrote", "found", "known", "said",   "saw",   "left",   "got",   "ran",   "met",
    "sold",  "paid",  "told",  "brought", "thought", "grew", "fell",  "beat",  "won",
    "returned", "wins", "plays", "makes", "takes", "gives", "holds", "leads", "remains"};
const std::set<std::string, std::less<>> kAdverbs = {"not",   "also",  "very", "often", "still",
                                                     "never", "then",  "later", "soon", "only",
                                                     "just",  "again", "now",  "already"};
const std::set<std::string, std::less<>> kNumbers = {
    "one",   "two",     "three",    "four",    "five",    "six",    "seven",
    "eight", "nine",    "ten",      "hundred", "thousand", "million", "billion"};
const std::set<std::string, std::less<>> kAdjectives = {
    "first", "second", "third", "new", "old", "large", "small", "major", "early", "late",
    "great", "high",   "low",   "long", "short", "good", "best", "former", "latter"};

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string tag_word(std::string_view word) {
  const std::string lower = text::ascii_lower(word);
  if (lower == "'s" || lower == "\xE2\x80\x99s") return "POS";
  if (lower == "n't") return "RB";
  if (lower == "to") return "TO";
  if (kDeterminers.contains(lower)) return "DT";
  if (kPronouns.contains(lower)) return "PRP";
  if (kPossessives.contains(lower)) return "PRP$";
  if (kPrepositions.contains(lower)) return "IN";
  if (kConjunctions.contains(lower)) return "CC";
  if (kModals.contains(lower)) return "MD";
  if (lower == "which" || lower == "that") return "WDT";
  if (lower == "who" || lower == "whom" || lower == "what" || lower == "whose") return "WP";
  if (lower == "when" || lower == "where" || lower == "why" || lower == "how") return "WRB";
  if (kVerbs.contains(lower)) return "VBD";
  if (kAdverbs.contains(lower)) return "RB";
  if (kNumbers.contains(lower)) return "CD";
  if (kAdjectives.contains(lower)) return "JJ";
  const auto first = static_cast<unsigned char>(word.front());
  if (std::isdigit(first)) return "CD";
  if (std::isupper(first)) return "NNP";
  if (lower.size() > 4 && ends_with(lower, "ly")) return "RB";
  if (lower.size() > 4 && ends_with(lower, "ed")) return "VBD";
  if (lower.size() > 5 && ends_with(lower, "ing")) return "VBG";
  for (auto suffix : {"ous", "ful", "ive", "able", "ible", "ical", "ic"}) {
    if (lower.size() > 5 && ends_with(lower, suffix)) return "JJ";
  }
  if (lower.size() > 3 && ends_with(lower, "s") && !ends_with(lower, "ss")) return "NNS";
  return "NN";
}

std::string punct_tag(std::string_view p) {
  if (p == ",") return ",";
  if (p == "." || p == "!" || p == "?") return ".";
  if (p == ":" || p == ";" || p == "-" || p == "--") return ":";
  if (p == "$") return "$";
  if (p == "#") return "#";
  if (p == "&") return "CC";
  if (p == "%") return "NN";
  return "SYM";
}

bool is_bracket(char c) {
  return c == '(' || c == ')' || c == '[' || c == ']' || c == '{' || c == '}';
}

std::string bracket_leaf(char c) {
  switch (c) {
    case '(':
      return "-LRB-";
    case ')':
      return "-RRB-";
    case '[':
      return "-LSB-";
    case ']':
      return "-RSB-";
    case '{':
      return "-LCB-";
    default:
      return "-RCB-";
  }
}

bool is_word_char(unsigned char c) { return c >= 0x80 || std::isalnum(c); }

class ShallowTokenizer {
 public:
  std::vector<Tok> run(std::string_view sentence) {
    for (const auto& w : text::whitespace_tokens(sentence)) {
      std::string_view rest = w.text;
      std::size_t piece_start = 0;
      for (std::size_t i = 0; i < rest.size(); ++i) {
        if (!is_bracket(rest[i])) continue;
        piece(rest.substr(piece_start, i - piece_start));
        const std::string leaf = bracket_leaf(rest[i]);
        out_.push_back({leaf, leaf});
        piece_start = i + 1;
      }
      piece(rest.substr(piece_start));
    }
    return std::move(out_);
  }

 private:
  void quote(bool opening, bool double_quote) {
    const std::string leaf = double_quote ? (opening ? "``" : "''") : (opening ? "`" : "'");
    out_.push_back({leaf, leaf});
  }

  void piece(std::string_view p) {
    // Leading quotes.
    while (!p.empty()) {
      if (p.front() == '"') {
        quote(true, true);
        p.remove_prefix(1);
      } else if (p.front() == '\'' && p.size() > 1 && is_word_char(p[1])) {
        quote(true, false);
        p.remove_prefix(1);
      } else if (p.starts_with("\xE2\x80\x9C")) {
        quote(true, true);
        p.remove_prefix(3);
      } else if (p.starts_with("\xE2\x80\x98")) {
        quote(true, false);
        p.remove_prefix(3);
      } else {
        break;
      }
    }
    // Trailing punctuation, collected in reverse.
    std::vector<Tok> tail;
    while (!p.empty()) {
      const char c = p.back();
      if (c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?') {
        const std::string s(1, c);
        tail.push_back({s, punct_tag(s)});
        p.remove_suffix(1);
      } else if (c == '"') {
        tail.push_back({"''", "''"});
        p.remove_suffix(1);
      } else if (p.ends_with("\xE2\x80\x9D")) {
        tail.push_back({"''", "''"});
        p.remove_suffix(3);
      } else if ((p.ends_with("\xE2\x80\x99") || c == '\'') && !p.ends_with("s'") &&
                 !p.ends_with("s\xE2\x80\x99")) {
        tail.push_back({"'", "''"});
        p.remove_suffix(c == '\'' ? 1 : 3);
      } else {
        break;
      }
    }
    // Clitics.
    std::optional<Tok> clitic;
    for (std::string_view cl : {"'s", "\xE2\x80\x99s", "n't"}) {
      if (p.size() > cl.size() && p.ends_with(cl)) {
        clitic = Tok{std::string(cl), cl == "n't" ? "RB" : "POS"};
        p.remove_suffix(cl.size());
        break;
      }
    }
    if (!clitic && p.size() > 2 && p.ends_with("s'")) {
      clitic = Tok{"'", "POS"};
      p.remove_suffix(1);
    }
    if (!p.empty()) {
      const bool has_word = std::any_of(p.begin(), p.end(),
                                        [](char c) { return is_word_char(static_cast<unsigned char>(c)); });
      const std::string s(p);
      out_.push_back({s, has_word ? tag_word(s) : punct_tag(s)});
    }
    if (clitic) out_.push_back(*clitic);
    out_.insert(out_.end(), tail.rbegin(), tail.rend());
  }

  std::vector<Tok> out_;
};

// ---------------------------------------------------------------- chunker

ParseTree leaf(const Tok& t) {
  ParseTree n;
  n.label = t.tag;
  n.token = t.leaf;
  return n;
}

ParseTree node(std::string label, std::vector<ParseTree> kids) {
  ParseTree n;
  n.label = std::move(label);
  n.children = std::move(kids);
  return n;
}

bool is_np_tag(std::string_view tag) {
  return tag == "DT" || tag == "PRP$" || tag == "JJ" || tag == "CD" || tag == "NN" ||
         tag == "NNS" || tag == "NNP" || tag == "PRP";
}

bool is_noun_tag(std::string_view tag) {
  return tag == "NN" || tag == "NNS" || tag == "NNP" || tag == "CD" || tag == "PRP";
}

bool is_verb_tag(std::string_view tag) {
  return tag == "VBD" || tag == "VBG" || tag == "MD";
}

std::vector<ParseTree> chunk_noun_phrases(const std::vector<Tok>& toks) {
  std::vector<ParseTree> out;
  std::size_t i = 0;
  while (i < toks.size()) {
    if (!is_np_tag(toks[i].tag)) {
      out.push_back(leaf(toks[i]));
      ++i;
      continue;
    }
    std::vector<ParseTree> run;
    bool has_noun = false;
    bool all_adj = true;
    auto close_run = [&] {
      out.push_back(node(all_adj ? "ADJP" : "NP", std::move(run)));
      run.clear();
    };
    while (i < toks.size()) {
      const auto& t = toks[i];
      const bool starts_new = (t.tag == "DT" || t.tag == "PRP$") && has_noun;
      if (t.tag == "POS" && !run.empty()) {
        run.push_back(leaf(t));
        auto possessor = node("NP", std::move(run));
        run.clear();
        run.push_back(std::move(possessor));
        all_adj = false;
        has_noun = false;
        ++i;
        continue;
      }
      if (t.leaf == "," && !run.empty() && i + 1 < toks.size()) {
        const auto& prev = toks[i - 1].tag;
        const auto& next = toks[i + 1].tag;
        if ((next == "CD" && (prev == "NNP" || prev == "CD")) || (prev == "NNP" && next == "NNP")) {
          run.push_back(leaf(t));
          ++i;
          continue;
        }
      }
      if (!is_np_tag(t.tag) || starts_new) break;
      run.push_back(leaf(t));
      has_noun = has_noun || is_noun_tag(t.tag);
      all_adj = all_adj && t.tag == "JJ";
      ++i;
      if (t.tag == "PRP") break;
    }
    close_run();
  }
  return out;
}

bool is_phrase(const ParseTree& t, std::string_view label) {
  return !t.is_leaf() && t.label == label;
}

std::vector<ParseTree> chunk_modifiers(std::vector<ParseTree> items) {
  // WH phrases and adverb runs.
  std::vector<ParseTree> pass;
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto& t = items[i];
    if (t.is_leaf() && (t.label == "WDT" || t.label == "WP")) {
      std::vector<ParseTree> kids{std::move(t)};
      if (i + 1 < items.size() && is_phrase(items[i + 1], "NP")) kids.push_back(std::move(items[++i]));
      pass.push_back(node("WHNP", std::move(kids)));
    } else if (t.is_leaf() && t.label == "RB") {
      std::vector<ParseTree> kids{std::move(t)};
      while (i + 1 < items.size() && items[i + 1].is_leaf() && items[i + 1].label == "RB") {
        kids.push_back(std::move(items[++i]));
      }
      pass.push_back(node("ADVP", std::move(kids)));
    } else {
      pass.push_back(std::move(t));
    }
  }
  // Prepositional phrases.
  std::vector<ParseTree> out;
  for (std::size_t i = 0; i < pass.size(); ++i) {
    auto& t = pass[i];
    const bool prep = t.is_leaf() && (t.label == "IN" || t.label == "TO");
    if (prep && i + 1 < pass.size() &&
        (is_phrase(pass[i + 1], "NP") || is_phrase(pass[i + 1], "WHNP"))) {
      const bool wh = is_phrase(pass[i + 1], "WHNP");
      std::vector<ParseTree> kids{std::move(t), std::move(pass[++i])};
      out.push_back(node(wh ? "WHPP" : "PP", std::move(kids)));
    } else {
      out.push_back(std::move(t));
    }
  }
  return out;
}

bool ends_clause(const ParseTree& t) {
  return t.is_leaf() && (t.label == "." || t.label == ":");
}

// Builds a VP from items[begin, end), nesting one level per extra verb in the
// leading verb group.
ParseTree build_vp(std::vector<ParseTree>& items, std::size_t begin, std::size_t end) {
  std::vector<ParseTree> kids;
  kids.push_back(std::move(items[begin]));
  std::size_t i = begin + 1;
  while (i < end && is_phrase(items[i], "ADVP")) kids.push_back(std::move(items[i++]));
  if (i < end && items[i].is_leaf() && is_verb_tag(items[i].label)) {
    kids.push_back(build_vp(items, i, end));
    return node("VP", std::move(kids));
  }
  for (; i < end; ++i) kids.push_back(std::move(items[i]));
  return node("VP", std::move(kids));
}

std::vector<ParseTree> chunk_verb_phrases(std::vector<ParseTree> items) {
  std::vector<ParseTree> out;
  std::size_t i = 0;
  while (i < items.size()) {
    if (!(items[i].is_leaf() && is_verb_tag(items[i].label))) {
      out.push_back(std::move(items[i++]));
      continue;
    }
    std::size_t end = i;
    while (end < items.size() && !ends_clause(items[end])) ++end;
    out.push_back(build_vp(items, i, end));
    i = end;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- parsers

std::string ShallowParser::parse(std::string_view sentence) {
  const auto toks = ShallowTokenizer().run(sentence);
  if (toks.empty()) throw ContractError("cannot parse an empty sentence");
  auto items = chunk_verb_phrases(chunk_modifiers(chunk_noun_phrases(toks)));
  if (items.size() == 1 && !items.front().is_leaf()) return serialize(items.front());
  const bool fragment = items.size() == 1;
  return serialize(node(fragment ? "FRAG" : "S", std::move(items)));
}

std::string TableParser::parse(std::string_view sentence) {
  if (auto it = trees_.find(std::string(sentence)); it != trees_.end()) return it->second;
  if (fallback_ != nullptr) return fallback_->parse(sentence);
  throw ContractError("no canned tree for sentence: " + std::string(sentence));
}

// ---------------------------------------------------------------- gazetteer

std::string echo_key(std::string_view s) {
  return text::ascii_lower(text::collapse_whitespace(s));
}

GazetteerTable GazetteerTable::from_json(const Json& j) {
  GazetteerTable t;
  if (j.contains("phrases")) {
    for (const auto& [k, v] : j.at("phrases").items()) {
      t.add_phrase(k, v.get<std::vector<std::string>>());
    }
  }
  if (j.contains("labels")) {
    for (const auto& [k, v] : j.at("labels").items()) {
      t.labels[k] = v.get<std::vector<std::string>>();
    }
  }
  return t;
}

GazetteerTable GazetteerTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open gazetteer table " + path.string());
  try {
    return from_json(Json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("gazetteer table: ") + e.what(), e.byte > 0 ? e.byte - 1 : 0);
  }
}

void GazetteerTable::add_phrase(std::string_view original, std::vector<std::string> pool) {
  auto& slot = phrases[echo_key(original)];
  slot.insert(slot.end(), pool.begin(), pool.end());
}

namespace {

std::vector<std::string> usable_pool(std::string_view label, std::string_view original,
                                     const GazetteerTable& table) {
  const std::vector<std::string>* pool = nullptr;
  if (auto it = table.phrases.find(echo_key(original)); it != table.phrases.end()) {
    pool = &it->second;
  } else if (auto lt = table.labels.find(std::string(label)); lt != table.labels.end()) {
    pool = &lt->second;
  }
  std::vector<std::string> out;
  if (pool == nullptr) return out;
  const std::string key = echo_key(original);
  for (const auto& entry : *pool) {
    if (echo_key(entry) != key && std::find(out.begin(), out.end(), entry) == out.end()) {
      out.push_back(entry);
    }
  }
  return out;
}

}  // namespace

std::optional<std::string> gazetteer_fill(std::string_view masked_label, std::string_view original,
                                          const GazetteerTable& table, Rng& rng) {
  const auto pool = usable_pool(masked_label, original, table);
  if (pool.empty()) return std::nullopt;
  return pool[uniform_index(rng, pool.size())];
}

std::vector<std::string> GazetteerFiller::fill(const FillCall& call) {
  auto pool = usable_pool(call.label, call.original, table_);
  Rng rng = make_rng(call.seed);
  std::vector<std::string> out;
  const auto n = std::min<std::size_t>(pool.size(), static_cast<std::size_t>(std::max(call.n_candidates, 0)));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + uniform_index(rng, pool.size() - i);
    std::swap(pool[i], pool[j]);
    out.push_back(pool[i]);
  }
  return out;
}

// ---------------------------------------------------------------- reader

ScoredAnswer overlap_read(std::string_view question, std::string_view paragraph,
                          std::size_t max_span_tokens) {
  ScoredAnswer answer;
  const auto sentences = sentence_split(paragraph);
  if (sentences.empty()) return answer;

  const auto q_tokens = text::word_tokens(question);
  std::unordered_set<std::string> q_set;
  for (const auto& t : q_tokens) q_set.insert(t.text);

  std::size_t best = 0;
  std::size_t best_overlap = 0;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    std::unordered_set<std::string> s_set;
    for (const auto& t : text::word_tokens(sentences[s].text)) s_set.insert(t.text);
    std::size_t overlap = 0;
    for (const auto& q : q_tokens) overlap += s_set.contains(q.text) ? 1 : 0;
    if (overlap > best_overlap) {
      best_overlap = overlap;
      best = s;
    }
  }

  const auto& sentence = sentences[best];
  const auto tokens = text::word_tokens(sentence.text);
  std::size_t run_begin = 0;
  std::size_t run_len = 0;
  for (std::size_t i = 0; i < tokens.size();) {
    if (q_set.contains(tokens[i].text)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < tokens.size() && !q_set.contains(tokens[j].text)) ++j;
    if (j - i > run_len) {
      run_begin = i;
      run_len = j - i;
    }
    i = j;
  }
  run_len = std::min(run_len, max_span_tokens);
  if (run_len > 0) {
    const CharSpan local{tokens[run_begin].span.start, tokens[run_begin + run_len - 1].span.end};
    answer.char_span = {sentence.span.start + local.start, sentence.span.start + local.end};
    answer.text = text::substr(paragraph, answer.char_span);
  } else {
    answer.char_span = {sentence.span.start, sentence.span.start};
  }
  const double denom = static_cast<double>(q_tokens.size());
  answer.span_score = denom > 0 ? std::clamp(static_cast<double>(best_overlap) / denom, 0.0, 1.0) : 0.0;
  return answer;
}

// ---------------------------------------------------------------- detectors

double oracle_detect(const ContextView& context) {
  if (!context.provenance) throw ContractError("oracle detector requires provenance");
  return context.provenance->is_real() ? 1.0 : 0.0;
}

ConstantDetector::ConstantDetector(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) throw ContractError("trust must be in [0, 1]");
}

// ---------------------------------------------------------------- completer

MarkovCompleter::MarkovCompleter(const std::vector<std::string>& corpus) {
  for (const auto& doc : corpus) {
    const auto toks = text::whitespace_tokens(doc);
    if (toks.empty()) continue;
    starts_.push_back(toks.front().text);
    for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
      successors_[toks[i].text].push_back(toks[i + 1].text);
    }
  }
}

std::string MarkovCompleter::complete(std::string_view prompt, std::size_t max_tokens,
                                      std::uint64_t seed) {
  Rng rng = make_rng(seed);
  const auto toks = text::whitespace_tokens(prompt);
  std::string current;
  if (!toks.empty() && successors_.contains(toks.back().text)) {
    current = toks.back().text;
  } else if (!starts_.empty()) {
    current = starts_[uniform_index(rng, starts_.size())];
    if (max_tokens == 0) return "";
    std::string out = current;
    for (std::size_t n = 1; n < max_tokens; ++n) {
      auto it = successors_.find(current);
      if (it == successors_.end()) break;
      current = it->second[uniform_index(rng, it->second.size())];
      out += " " + current;
    }
    return out;
  } else {
    return "";
  }
  std::string out;
  for (std::size_t n = 0; n < max_tokens; ++n) {
    auto it = successors_.find(current);
    if (it == successors_.end()) break;
    current = it->second[uniform_index(rng, it->second.size())];
    if (!out.empty()) out.push_back(' ');
    out += current;
  }
  return out;
}

}  // namespace contraforge
