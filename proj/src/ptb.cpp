#include "contraforge/ptb.hpp"

#include <algorithm>

#include "contraforge/error.hpp"

namespace contraforge {

namespace {

struct Lexeme {
  enum Kind { open, close, atom } kind;
  std::string text;
  std::size_t position;
};

std::vector<Lexeme> lex(std::string_view s) {
  std::vector<Lexeme> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (text::is_space(c)) {
      ++i;
    } else if (c == '(') {
      out.push_back({Lexeme::open, "(", i++});
    } else if (c == ')') {
      out.push_back({Lexeme::close, ")", i++});
    } else {
      const std::size_t b = i;
      while (i < s.size() && !text::is_space(s[i]) && s[i] != '(' && s[i] != ')') ++i;
      out.push_back({Lexeme::atom, std::string(s.substr(b, i - b)), b});
    }
  }
  return out;
}

class TreeReader {
 public:
  TreeReader(std::vector<Lexeme> lexemes, std::size_t input_size)
      : lex_(std::move(lexemes)), input_size_(input_size) {}

  ParseTree read_root() {
    if (lex_.empty()) throw ParseError("empty tree string", 0);
    ParseTree t = read_node();
    if (pos_ != lex_.size()) throw ParseError("unexpected content after tree", lex_[pos_].position);
    return t;
  }

 private:
  const Lexeme& peek() {
    if (pos_ >= lex_.size()) throw ParseError("unbalanced brackets: missing ')'", input_size_);
    return lex_[pos_];
  }

  ParseTree read_node() {
    const Lexeme& open = peek();
    if (open.kind != Lexeme::open) throw ParseError("expected '('", open.position);
    ++pos_;
    ParseTree node;
    if (peek().kind == Lexeme::atom) {
      node.label = peek().text;
      ++pos_;
    }
    if (peek().kind == Lexeme::atom) {
      node.token = peek().text;
      ++pos_;
      const Lexeme& close = peek();
      if (close.kind != Lexeme::close) {
        throw ParseError("leaf node must hold exactly one token", close.position);
      }
      ++pos_;
      return node;
    }
    while (peek().kind == Lexeme::open) node.children.push_back(read_node());
    const Lexeme& close = peek();
    if (close.kind != Lexeme::close) {
      throw ParseError("token mixed with subtrees", close.position);
    }
    if (node.children.empty()) throw ParseError("empty constituent", close.position);
    ++pos_;
    return node;
  }

  std::vector<Lexeme> lex_;
  std::size_t input_size_;
  std::size_t pos_ = 0;
};

// Walks leaves left to right, consuming the sentence.
class Aligner {
 public:
  explicit Aligner(std::string_view sentence) : s_(sentence) {}

  void align(ParseTree& node) {
    if (node.is_leaf()) {
      skip_space();
      if (node.label == "-NONE-") {
        node.char_span = {cp_, cp_};
        return;
      }
      for (const auto& form : surface_forms(*node.token)) {
        if (s_.substr(byte_).starts_with(form)) {
          const std::size_t n = text::length(form);
          node.char_span = {cp_, cp_ + n};
          byte_ += form.size();
          cp_ += n;
          return;
        }
      }
      throw AlignmentError(*node.token, cp_);
    }
    for (auto& child : node.children) align(child);
    std::optional<CharSpan> cover;
    for (const auto& child : node.children) {
      if (child.char_span.empty()) continue;
      if (!cover) {
        cover = child.char_span;
      } else {
        cover->end = child.char_span.end;
      }
    }
    node.char_span = cover ? *cover : node.children.front().char_span;
  }

  void finish() {
    skip_space();
    if (byte_ != s_.size()) {
      throw AlignmentError("<end of tree>", cp_);
    }
  }

 private:
  void skip_space() {
    while (byte_ < s_.size() && text::is_space(s_[byte_])) {
      ++byte_;
      ++cp_;
    }
  }

  std::string_view s_;
  std::size_t byte_ = 0;
  std::size_t cp_ = 0;
};

void serialize_into(const ParseTree& t, std::string& out) {
  out.push_back('(');
  out += t.label;
  if (t.is_leaf()) {
    if (!t.label.empty()) out.push_back(' ');
    out += *t.token;
  } else {
    for (std::size_t i = 0; i < t.children.size(); ++i) {
      if (i > 0 || !t.label.empty()) out.push_back(' ');
      serialize_into(t.children[i], out);
    }
  }
  out.push_back(')');
}

void collect(const ParseTree& t, std::string_view sentence, const CharSpan& root,
             bool exclude_root, std::vector<ConstituentSpan>& out) {
  if (t.is_leaf()) return;
  const bool whole = t.char_span == root;
  if (!t.char_span.empty() && is_eligible_label(base_label(t.label)) && !(exclude_root && whole)) {
    out.push_back({base_label(t.label), t.char_span, text::substr(sentence, t.char_span)});
  }
  for (const auto& c : t.children) collect(c, sentence, root, exclude_root, out);
}

}  // namespace

const std::vector<std::string>& eligible_labels() {
  static const std::vector<std::string> labels = {"ADJP", "ADVP", "NP",  "PP",   "SBAR", "SBARQ",
                                                  "SINV", "VP",   "SQ",  "WHNP", "WHPP"};
  return labels;
}

bool is_eligible_label(std::string_view label) {
  const auto& l = eligible_labels();
  return std::find(l.begin(), l.end(), label) != l.end();
}

std::string base_label(std::string_view label) {
  if (label.empty() || label.front() == '-') return std::string(label);
  const auto cut = label.find_first_of("-=");
  return std::string(label.substr(0, cut));
}

std::vector<std::string> surface_forms(std::string_view token) {
  std::vector<std::string> forms{std::string(token)};
  auto add = [&](std::initializer_list<const char*> alts) {
    for (const char* a : alts) forms.emplace_back(a);
  };
  if (token == "-LRB-") add({"(", "[", "{"});
  else if (token == "-RRB-") add({")", "]", "}"});
  else if (token == "-LSB-") add({"["});
  else if (token == "-RSB-") add({"]"});
  else if (token == "-LCB-") add({"{"});
  else if (token == "-RCB-") add({"}"});
  else if (token == "``") add({"\"", "“"});
  else if (token == "''") add({"\"", "”"});
  else if (token == "`") add({"'", "‘"});
  else if (token == "'") add({"’"});
  else if (token == "--") add({"–", "—"});
  // Treebank escapes "/" and "*" inside tokens: "3\/4", "\*\*".
  if (token.find('\\') != std::string_view::npos) {
    std::string plain;
    for (std::size_t i = 0; i < token.size(); ++i) {
      if (token[i] == '\\' && i + 1 < token.size() && (token[i + 1] == '/' || token[i + 1] == '*')) {
        continue;
      }
      plain.push_back(token[i]);
    }
    if (plain != token) forms.push_back(std::move(plain));
  }
  return forms;
}

ParseTree parse_bracketed(std::string_view tree_string, std::string_view sentence) {
  ParseTree tree = TreeReader(lex(tree_string), tree_string.size()).read_root();
  Aligner aligner(sentence);
  aligner.align(tree);
  aligner.finish();
  return tree;
}

std::string serialize(const ParseTree& tree) {
  std::string out;
  serialize_into(tree, out);
  return out;
}

std::string canonical_bracketing(std::string_view tree_string) {
  std::string out;
  Lexeme::Kind prev = Lexeme::open;
  bool first = true;
  for (const auto& l : lex(tree_string)) {
    const bool need_space = !first && l.kind != Lexeme::close && prev != Lexeme::open;
    if (need_space) out.push_back(' ');
    out += l.text;
    prev = l.kind;
    first = false;
  }
  return out;
}

std::vector<ConstituentSpan> eligible_constituents(const ParseTree& tree, std::string_view sentence,
                                                   bool exclude_root) {
  std::vector<ConstituentSpan> out;
  collect(tree, sentence, tree.char_span, exclude_root, out);
  return out;
}

std::string splice(std::string_view sentence, CharSpan span, std::string_view replacement) {
  const std::size_t n = text::length(sentence);
  if (span.start > span.end || span.end > n) {
    throw ContractError("splice span [" + std::to_string(span.start) + ", " +
                        std::to_string(span.end) + ") is out of range for length " +
                        std::to_string(n));
  }
  const std::size_t b = text::byte_offset(sentence, span.start);
  const std::size_t e = text::byte_offset(sentence, span.end);
  std::string out;
  out.reserve(sentence.size() - (e - b) + replacement.size());
  out.append(sentence.substr(0, b));
  out.append(replacement);
  out.append(sentence.substr(e));
  return out;
}

}  // namespace contraforge
