#include "contraforge/squad.hpp"

#include <cstdio>
#include <iterator>
#include <map>
#include <sstream>
#include <unordered_map>

#include "contraforge/error.hpp"
#include "contraforge/random.hpp"
#include "contraforge/text.hpp"

namespace contraforge {

Provenance Provenance::model_fake(int k) {
  if (k < 1) throw ContractError("model_fake provenance needs k >= 1");
  return {ProvenanceKind::model_fake, k};
}

std::string_view to_string(ProvenanceKind kind) {
  switch (kind) {
    case ProvenanceKind::real:
      return "real";
    case ProvenanceKind::human_fake:
      return "human_fake";
    case ProvenanceKind::model_fake:
      return "model_fake";
    case ProvenanceKind::prefix_fake:
      return "prefix_fake";
    case ProvenanceKind::distractor:
      return "distractor";
  }
  return "unknown";
}

ProvenanceKind provenance_kind_from_string(std::string_view s) {
  for (auto kind : {ProvenanceKind::real, ProvenanceKind::human_fake, ProvenanceKind::model_fake,
                    ProvenanceKind::prefix_fake, ProvenanceKind::distractor}) {
    if (to_string(kind) == s) return kind;
  }
  throw FormatError("unknown provenance '" + std::string(s) + "'", 0);
}

std::string provenance_class(const Provenance& p) {
  std::string out(to_string(p.kind));
  if (p.kind == ProvenanceKind::model_fake) out += "_k" + std::to_string(p.k);
  return out;
}

std::string paragraph_id(std::string_view text) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "p%016llx",
                static_cast<unsigned long long>(hash_string(text::collapse_whitespace(text))));
  return buf;
}

Paragraph make_paragraph(std::string text, Provenance provenance) {
  if (text::trim(text).empty()) throw ContractError("paragraph text is blank");
  if (provenance.kind == ProvenanceKind::model_fake && provenance.k < 1) {
    throw ContractError("model_fake provenance needs k >= 1");
  }
  Paragraph p;
  p.id = paragraph_id(text);
  p.text = std::move(text);
  p.provenance = provenance;
  return p;
}

void check_sample(const ContraSample& sample) {
  std::size_t n_real = 0;
  for (const auto& c : sample.contexts) n_real += c.provenance.is_real() ? 1 : 0;
  if (n_real != 1) {
    throw ContractError("sample has " + std::to_string(n_real) + " real contexts, expected 1");
  }
  if (sample.real_index >= sample.contexts.size() ||
      !sample.contexts[sample.real_index].provenance.is_real()) {
    throw ContractError("real_index does not point at the real context");
  }
}

std::vector<SquadParagraph> parse_squad(std::string_view json_text) {
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("malformed SQuAD JSON: ") + e.what(),
                      e.byte > 0 ? e.byte - 1 : 0);
  }

  std::vector<SquadParagraph> out;
  std::unordered_map<std::string, std::size_t> by_id;
  try {
    for (const auto& article : doc.at("data")) {
      for (const auto& para : article.at("paragraphs")) {
        std::string context = para.at("context").get<std::string>();
        if (text::trim(context).empty()) throw FormatError("blank SQuAD context", 0);
        const std::string id = paragraph_id(context);
        auto [it, inserted] = by_id.try_emplace(id, out.size());
        if (inserted) out.push_back({make_paragraph(std::move(context), Provenance::real()), {}});
        auto& slot = out[it->second];
        if (!para.contains("qas")) continue;
        for (const auto& qa : para.at("qas")) {
          QaPair pair;
          pair.question = qa.at("question").get<std::string>();
          pair.source_paragraph_id = id;
          for (const auto& ans : qa.value("answers", Json::array())) {
            pair.gold_answers.push_back(ans.at("text").get<std::string>());
          }
          // Unanswerable (SQuAD 2.0 style) questions are not supported.
          if (pair.gold_answers.empty() || text::trim(pair.question).empty()) continue;
          slot.qas.push_back(std::move(pair));
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("unexpected SQuAD schema: ") + e.what(), 0);
  }
  return out;
}

std::vector<SquadParagraph> load_squad(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("cannot open " + file.string());
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_squad(content);
}

std::vector<std::size_t> shuffle_order(std::uint64_t shuffle_seed, std::size_t n) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng = make_rng(shuffle_seed);
  shuffle_in_place(order, rng);
  return order;
}

std::vector<ContraSample> assemble_contra(const Paragraph& real,
                                          const std::vector<Paragraph>& fakes,
                                          const std::vector<QaPair>& qas, std::uint64_t seed) {
  if (!real.provenance.is_real()) {
    throw ContractError("assemble_contra: paragraph " + real.id + " does not have real provenance");
  }
  for (const auto& f : fakes) {
    if (f.provenance.is_real()) {
      throw ContractError("assemble_contra: fake " + f.id + " has real provenance");
    }
  }
  std::vector<Paragraph> pool;
  pool.reserve(fakes.size() + 1);
  pool.push_back(real);
  pool.insert(pool.end(), fakes.begin(), fakes.end());

  std::vector<ContraSample> out;
  out.reserve(qas.size());
  const std::uint64_t paragraph_seed = mix_seed(seed, real.id);
  for (std::size_t q = 0; q < qas.size(); ++q) {
    ContraSample s;
    s.question = qas[q].question;
    s.gold_answers = qas[q].gold_answers;
    s.shuffle_seed = mix_seed(paragraph_seed, q);
    const auto order = shuffle_order(s.shuffle_seed, pool.size());
    s.contexts.reserve(pool.size());
    for (std::size_t j = 0; j < order.size(); ++j) {
      s.contexts.push_back(pool[order[j]]);
      if (order[j] == 0) s.real_index = j;
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Paragraph> sample_random_contexts(const std::vector<Paragraph>& pool, std::size_t n,
                                              std::string_view exclude_id, std::uint64_t seed) {
  bool found = false;
  std::vector<const Paragraph*> candidates;
  std::map<std::string, bool> seen;
  for (const auto& p : pool) {
    if (p.id == exclude_id) {
      found = true;
      continue;
    }
    if (seen.emplace(p.id, true).second) candidates.push_back(&p);
  }
  if (!found) {
    throw ContractError("sample_random_contexts: excluded id " + std::string(exclude_id) +
                        " is not in the pool");
  }
  if (candidates.size() < n) {
    throw ContractError("sample_random_contexts: pool has " + std::to_string(candidates.size()) +
                        " eligible paragraphs, need " + std::to_string(n));
  }
  Rng rng = make_rng(mix_seed(seed, exclude_id));
  std::vector<Paragraph> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + uniform_index(rng, candidates.size() - i);
    std::swap(candidates[i], candidates[j]);
    Paragraph p = *candidates[i];
    p.provenance = Provenance::distractor();
    out.push_back(std::move(p));
  }
  return out;
}

ContraSample truncate_fakes(const ContraSample& sample, std::size_t n_fakes) {
  ContraSample out = sample;
  out.contexts.clear();
  std::size_t kept_fakes = 0;
  for (std::size_t i = 0; i < sample.contexts.size(); ++i) {
    const auto& c = sample.contexts[i];
    if (c.provenance.is_real()) {
      out.real_index = out.contexts.size();
      out.contexts.push_back(c);
    } else if (kept_fakes < n_fakes) {
      ++kept_fakes;
      out.contexts.push_back(c);
    }
  }
  return out;
}

OrderedJson to_json(const Paragraph& p) {
  OrderedJson j;
  j["id"] = p.id;
  j["text"] = p.text;
  j["provenance"] = to_string(p.provenance.kind);
  if (p.provenance.kind == ProvenanceKind::model_fake) {
    j["k"] = p.provenance.k;
  } else {
    j["k"] = nullptr;
  }
  return j;
}

Paragraph paragraph_from_json(const Json& j) {
  Paragraph p;
  p.text = j.at("text").get<std::string>();
  p.id = j.contains("id") ? j.at("id").get<std::string>() : paragraph_id(p.text);
  p.provenance.kind = provenance_kind_from_string(j.at("provenance").get<std::string>());
  if (p.provenance.kind == ProvenanceKind::model_fake) {
    if (!j.contains("k") || j.at("k").is_null()) throw FormatError("model_fake context without k", 0);
    p.provenance.k = j.at("k").get<int>();
    if (p.provenance.k < 1) throw FormatError("model_fake context with k < 1", 0);
  }
  return p;
}

OrderedJson to_json(const ContraSample& s) {
  OrderedJson j;
  j["question"] = s.question;
  j["golds"] = s.gold_answers;
  OrderedJson contexts = OrderedJson::array();
  for (const auto& c : s.contexts) contexts.push_back(to_json(c));
  j["contexts"] = std::move(contexts);
  j["real_index"] = s.real_index;
  j["shuffle_seed"] = s.shuffle_seed;
  return j;
}

ContraSample sample_from_json(const Json& j) {
  ContraSample s;
  s.question = j.at("question").get<std::string>();
  s.gold_answers = j.at("golds").get<std::vector<std::string>>();
  for (const auto& c : j.at("contexts")) s.contexts.push_back(paragraph_from_json(c));
  s.real_index = j.at("real_index").get<std::size_t>();
  s.shuffle_seed = j.at("shuffle_seed").get<std::uint64_t>();
  return s;
}

DatasetWriter::DatasetWriter(std::ostream& out, OrderedJson meta) : out_(out) {
  write_line(out_, header_json({std::string(kDatasetFormat), kDatasetSchemaVersion, std::move(meta)}));
}

void DatasetWriter::write(const ContraSample& sample) {
  check_sample(sample);
  write_line(out_, to_json(sample));
}

DatasetReader::DatasetReader(std::istream& in) : lines_(in) {
  auto first = lines_.next();
  if (!first) throw FormatError("dataset file has no header line", 0);
  auto header = parse_header(*first);
  if (!header || header->format != kDatasetFormat) {
    throw FormatError("first line is not a contraqa dataset header", 0);
  }
  if (header->schema_version != kDatasetSchemaVersion) {
    throw VersionError("dataset schema version " + std::to_string(header->schema_version) +
                       " is not supported (expected " + std::to_string(kDatasetSchemaVersion) + ")");
  }
  header_ = std::move(*header);
}

std::optional<ContraSample> DatasetReader::next() {
  auto line = lines_.next();
  if (!line) return std::nullopt;
  try {
    ContraSample s = sample_from_json(*line);
    check_sample(s);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("line " + std::to_string(lines_.line_number()) + ": " + e.what(), 0);
  }
}

void write_dataset(const std::vector<ContraSample>& samples, const std::filesystem::path& path,
                   OrderedJson meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  DatasetWriter writer(out, std::move(meta));
  for (const auto& s : samples) writer.write(s);
  if (!out) throw Error("write failed for " + path.string());
}

std::vector<ContraSample> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  DatasetReader reader(in);
  std::vector<ContraSample> out;
  while (auto s = reader.next()) out.push_back(std::move(*s));
  return out;
}

}  // namespace contraforge
