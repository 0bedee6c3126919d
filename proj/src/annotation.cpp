#include "contraforge/annotation.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "contraforge/error.hpp"
#include "contraforge/sentences.hpp"

namespace contraforge {

namespace {

// Matched token pairs of an LCS alignment, framed by sentinels (-1, -1)
// and (n, m).
using Match = std::pair<long, long>;

std::vector<Match> lcs_alignment(const std::vector<text::Token>& a,
                                 const std::vector<text::Token>& b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  // suffix[i][j] = LCS length of a[i..] and b[j..].
  std::vector<std::uint32_t> suffix((n + 1) * (m + 1), 0);
  auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& { return suffix[i * (m + 1) + j]; };
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      at(i, j) = a[i].text == b[j].text ? at(i + 1, j + 1) + 1 : std::max(at(i + 1, j), at(i, j + 1));
    }
  }
  std::vector<Match> out{{-1, -1}};
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < n && j < m) {
    if (a[i].text == b[j].text) {
      out.emplace_back(static_cast<long>(i), static_cast<long>(j));
      ++i;
      ++j;
    } else if (at(i + 1, j) >= at(i, j + 1)) {
      ++i;
    } else {
      ++j;
    }
  }
  out.emplace_back(static_cast<long>(n), static_cast<long>(m));
  return out;
}

std::size_t gap_orig(const std::vector<Match>& kept, std::size_t k) {
  return static_cast<std::size_t>(kept[k + 1].first - kept[k].first - 1);
}
std::size_t gap_new(const std::vector<Match>& kept, std::size_t k) {
  return static_cast<std::size_t>(kept[k + 1].second - kept[k].second - 1);
}
std::size_t gap_size(const std::vector<Match>& kept, std::size_t k) {
  return std::max(gap_orig(kept, k), gap_new(kept, k));
}

// Drops the first unchanged run that is shorter than both hunks around it.
bool absorb_short_equality(std::vector<Match>& kept) {
  const std::size_t gaps = kept.size() - 1;
  std::size_t k = 0;
  while (k < gaps) {
    if (gap_size(kept, k) == 0) {
      ++k;
      continue;
    }
    // Hunk at gap k; the equality run is matches k+1 .. e.
    std::size_t e = k + 1;
    while (e < gaps && gap_size(kept, e) == 0) ++e;
    if (e >= gaps) return false;
    const std::size_t run = e - k;
    if (run < gap_size(kept, k) && run < gap_size(kept, e)) {
      kept.erase(kept.begin() + static_cast<long>(k + 1), kept.begin() + static_cast<long>(e + 1));
      return true;
    }
    k = e;
  }
  return false;
}

std::string_view status_names[] = {"open", "submitted", "accepted", "rejected"};

std::int64_t steady_now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::size_t numeric_suffix(std::string_view id) {
  const auto dash = id.rfind('-');
  if (dash == std::string_view::npos) return 0;
  std::size_t v = 0;
  for (char c : id.substr(dash + 1)) {
    if (c < '0' || c > '9') return 0;
    v = v * 10 + static_cast<std::size_t>(c - '0');
  }
  return v;
}

std::string numbered(std::string_view prefix, std::size_t n) {
  std::string digits = std::to_string(n);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return std::string(prefix) + "-" + digits;
}

}  // namespace

std::vector<Hunk> diff_hunks(std::string_view original, std::string_view modified) {
  const auto a = text::word_punct_tokens(original);
  const auto b = text::word_punct_tokens(modified);
  std::vector<Match> kept = lcs_alignment(a, b);
  while (absorb_short_equality(kept)) {
  }

  const std::size_t orig_len = text::length(original);
  const std::size_t new_len = text::length(modified);
  std::vector<Hunk> hunks;
  for (std::size_t k = 0; k + 1 < kept.size(); ++k) {
    const auto [pi, pj] = kept[k];
    const auto [ni, nj] = kept[k + 1];
    Hunk h;
    h.orig_begin = static_cast<std::size_t>(pi + 1);
    h.orig_end = static_cast<std::size_t>(ni);
    h.new_begin = static_cast<std::size_t>(pj + 1);
    h.new_end = static_cast<std::size_t>(nj);
    h.orig_span = {pi < 0 ? 0 : a[static_cast<std::size_t>(pi)].span.end,
                   h.orig_end == a.size() ? orig_len : a[h.orig_end].span.start};
    h.new_span = {pj < 0 ? 0 : b[static_cast<std::size_t>(pj)].span.end,
                  h.new_end == b.size() ? new_len : b[h.new_end].span.start};
    h.orig_text = text::substr(original, h.orig_span);
    h.new_text = text::substr(modified, h.new_span);
    for (std::size_t i = h.orig_begin; i < h.orig_end; ++i) h.orig_tokens.push_back(a[i].text);
    for (std::size_t j = h.new_begin; j < h.new_end; ++j) h.new_tokens.push_back(b[j].text);
    if (h.layout_only() && h.orig_text == h.new_text) continue;
    hunks.push_back(std::move(h));
  }
  return hunks;
}

std::string apply_hunks(std::string_view original, const std::vector<Hunk>& hunks) {
  std::string out;
  std::size_t pos = 0;
  for (const auto& h : hunks) {
    if (h.orig_span.start < pos || h.orig_span.end < h.orig_span.start) {
      throw ContractError("apply_hunks: hunks overlap or are out of order");
    }
    if (text::substr(original, h.orig_span) != h.orig_text) {
      throw ContractError("apply_hunks: hunk does not match the original text");
    }
    out += text::substr(original, {pos, h.orig_span.start});
    out += h.new_text;
    pos = h.orig_span.end;
  }
  out += text::substr(original, {pos, text::length(original)});
  return out;
}

std::size_t required_edits(std::string_view original) {
  return sentence_split(original).size() + 1;
}

ValidationResult validate_annotation(std::string_view original, std::string_view modified) {
  ValidationResult r;
  r.m_required = required_edits(original);
  for (auto& h : diff_hunks(original, modified)) {
    if (!h.layout_only()) r.hunks.push_back(std::move(h));
  }
  r.edit_count = r.hunks.size();

  const auto tokens = text::word_punct_tokens(original);
  for (const auto& sentence : sentence_split(original)) {
    std::size_t total = 0;
    for (const auto& t : tokens) {
      if (t.span.start >= sentence.span.start && t.span.end <= sentence.span.end) ++total;
    }
    if (total == 0) continue;
    for (const auto& h : r.hunks) {
      std::size_t covered = 0;
      for (std::size_t i = h.orig_begin; i < h.orig_end; ++i) {
        if (tokens[i].span.start >= sentence.span.start && tokens[i].span.end <= sentence.span.end) {
          ++covered;
        }
      }
      if (2 * covered >= total) r.has_long_edit = true;
    }
  }

  const bool changed = original != modified;
  r.valid = changed && r.edit_count >= r.m_required && r.has_long_edit;
  r.warnings.emplace_back(kExpertReviewWarning);
  if (!changed) r.warnings.emplace_back("modified text is identical to the original");
  if (r.edit_count < r.m_required) {
    r.warnings.push_back(std::to_string(r.edit_count) + " edits at different places, " +
                         std::to_string(r.m_required) + " required");
  }
  if (!r.has_long_edit) r.warnings.emplace_back("no edit rewrites at least half of a sentence");
  return r;
}

OrderedJson to_json(const Hunk& h) {
  OrderedJson j;
  j["orig_span"] = {h.orig_span.start, h.orig_span.end};
  j["new_span"] = {h.new_span.start, h.new_span.end};
  j["orig_tokens"] = h.orig_tokens;
  j["new_tokens"] = h.new_tokens;
  return j;
}

OrderedJson to_json(const ValidationResult& r) {
  OrderedJson j;
  j["edit_count"] = r.edit_count;
  j["m_required"] = r.m_required;
  j["hunks"] = OrderedJson::array();
  for (const auto& h : r.hunks) j["hunks"].push_back(to_json(h));
  j["has_long_edit"] = r.has_long_edit;
  j["valid"] = r.valid;
  j["warnings"] = r.warnings;
  return j;
}

std::string_view to_string(TaskStatus s) { return status_names[static_cast<int>(s)]; }

TaskStatus task_status_from_string(std::string_view s) {
  for (int i = 0; i < 4; ++i) {
    if (status_names[i] == s) return static_cast<TaskStatus>(i);
  }
  throw ContractError("unknown task status '" + std::string(s) + "'");
}

OrderedJson to_json(const AnnotationTask& t) {
  OrderedJson j;
  j["task_id"] = t.task_id;
  j["batch_id"] = t.batch_id;
  j["original"] = to_json(t.original);
  j["m_required"] = t.m_required;
  j["status"] = to_string(t.status);
  j["leased_to"] = t.leased_to ? OrderedJson(*t.leased_to) : OrderedJson(nullptr);
  j["annotator"] = t.annotator ? OrderedJson(*t.annotator) : OrderedJson(nullptr);
  j["fake"] = t.fake ? to_json(*t.fake) : OrderedJson(nullptr);
  return j;
}

AnnotationStore::AnnotationStore(std::filesystem::path dir, std::chrono::milliseconds lease_timeout,
                                 Clock clock)
    : dir_(std::move(dir)), lease_timeout_(lease_timeout), clock_(std::move(clock)) {
  if (!clock_) clock_ = steady_now_ms;
  std::filesystem::create_directories(dir_);
  std::vector<std::filesystem::path> journals;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("batch-", 0) == 0 && entry.path().extension() == ".jsonl") {
      journals.push_back(entry.path());
    }
  }
  std::sort(journals.begin(), journals.end());
  for (const auto& j : journals) replay(j);
}

void AnnotationStore::replay(const std::filesystem::path& journal) {
  std::ifstream in(journal, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();
  const std::string batch_id = journal.stem().string();
  batches_[batch_id] = {journal};
  next_batch_ = std::max(next_batch_, numeric_suffix(batch_id) + 1);

  std::size_t pos = 0;
  bool first = true;
  while (pos < content.size()) {
    const auto nl = content.find('\n', pos);
    if (nl == std::string::npos) break;  // torn write
    const std::string_view line(content.data() + pos, nl - pos);
    const std::size_t line_start = pos;
    pos = nl + 1;
    if (text::trim(line).empty()) continue;
    Json event;
    try {
      event = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw FormatError(journal.string() + ": " + e.what(), line_start + e.byte);
    }
    if (first) {
      first = false;
      auto header = parse_header(event);
      if (!header || header->format != kJournalFormat) {
        throw FormatError(journal.string() + ": missing journal header", line_start);
      }
      if (header->schema_version != kJournalSchemaVersion) {
        throw VersionError(journal.string() + ": unsupported journal version " +
                           std::to_string(header->schema_version));
      }
      continue;
    }
    try {
      apply_event(event);
    } catch (const Json::exception& e) {
      throw FormatError(journal.string() + ": bad event: " + e.what(), line_start);
    }
  }
}

void AnnotationStore::apply_event(const Json& event) {
  const std::string kind = event.at("event").get<std::string>();
  const std::string task_id = event.at("task_id").get<std::string>();
  if (kind == "create") {
    AnnotationTask t;
    t.task_id = task_id;
    t.batch_id = event.at("batch_id").get<std::string>();
    t.original = paragraph_from_json(event.at("paragraph"));
    t.m_required = required_edits(t.original.text);
    next_task_ = std::max(next_task_, numeric_suffix(task_id) + 1);
    order_.push_back(task_id);
    tasks_[task_id] = std::move(t);
    return;
  }
  AnnotationTask& t = find(task_id);
  if (kind == "submit") {
    Paragraph fake = paragraph_from_json(event.at("fake"));
    if (!validate_annotation(t.original.text, fake.text).valid) {
      throw FormatError("journaled submission for " + task_id + " fails validation", 0);
    }
    t.fake = std::move(fake);
    t.annotator = event.at("annotator").get<std::string>();
    t.status = TaskStatus::submitted;
    t.leased_to.reset();
  } else if (kind == "review") {
    t.status = task_status_from_string(event.at("status").get<std::string>());
  } else {
    throw FormatError("unknown journal event '" + kind + "'", 0);
  }
}

void AnnotationStore::append(const std::string& batch_id, const OrderedJson& event) {
  std::ofstream out(batches_.at(batch_id).journal, std::ios::binary | std::ios::app);
  write_line(out, event);
  out.flush();
  if (!out) throw Error("cannot append to journal of " + batch_id);
}

AnnotationTask& AnnotationStore::find(const std::string& task_id) {
  auto it = tasks_.find(task_id);
  if (it == tasks_.end()) throw NotFoundError("no task '" + task_id + "'");
  return it->second;
}

const AnnotationTask& AnnotationStore::find(const std::string& task_id) const {
  auto it = tasks_.find(task_id);
  if (it == tasks_.end()) throw NotFoundError("no task '" + task_id + "'");
  return it->second;
}

bool AnnotationStore::lease_live(const AnnotationTask& t, std::int64_t now) const {
  return t.leased_to.has_value() && now < t.lease_expires_ms;
}

std::vector<AnnotationTask> AnnotationStore::create_batch(const std::vector<Paragraph>& paragraphs) {
  std::lock_guard lock(mutex_);
  const std::string batch_id = numbered("batch", next_batch_++);
  const auto path = dir_ / (batch_id + ".jsonl");
  {
    std::ofstream out(path, std::ios::binary);
    FileHeader header{std::string(kJournalFormat), kJournalSchemaVersion, {{"batch_id", batch_id}}};
    write_line(out, header_json(header));
    if (!out) throw Error("cannot create journal " + path.string());
  }
  batches_[batch_id] = {path};
  std::vector<AnnotationTask> created;
  for (const auto& p : paragraphs) {
    OrderedJson event;
    event["event"] = "create";
    event["task_id"] = numbered("task", next_task_);
    event["batch_id"] = batch_id;
    event["paragraph"] = to_json(p);
    append(batch_id, event);
    apply_event(Json::parse(event.dump()));
    created.push_back(tasks_.at(event["task_id"].get<std::string>()));
  }
  return created;
}

std::optional<AnnotationTask> AnnotationStore::next_task(const std::string& annotator) {
  std::lock_guard lock(mutex_);
  const std::int64_t now = clock_();
  for (const auto& id : order_) {
    AnnotationTask& t = tasks_.at(id);
    if (t.status == TaskStatus::open && lease_live(t, now) && *t.leased_to == annotator) return t;
  }
  for (const auto& id : order_) {
    AnnotationTask& t = tasks_.at(id);
    if (t.status != TaskStatus::open || lease_live(t, now)) continue;
    t.leased_to = annotator;
    t.lease_expires_ms = now + lease_timeout_.count();
    return t;
  }
  return std::nullopt;
}

AnnotationTask AnnotationStore::get_task(const std::string& task_id) const {
  std::lock_guard lock(mutex_);
  return find(task_id);
}

ValidationResult AnnotationStore::validate(const std::string& task_id,
                                           std::string_view modified) const {
  std::string original;
  {
    std::lock_guard lock(mutex_);
    original = find(task_id).original.text;
  }
  return validate_annotation(original, modified);
}

SubmitOutcome AnnotationStore::submit(const std::string& task_id, std::string_view modified,
                                      const std::string& annotator) {
  std::lock_guard lock(mutex_);
  AnnotationTask& t = find(task_id);
  if (t.status != TaskStatus::open) {
    throw ConflictError("task " + task_id + " is " + std::string(to_string(t.status)));
  }
  if (lease_live(t, clock_()) && *t.leased_to != annotator) {
    throw ConflictError("task " + task_id + " is leased to another annotator");
  }
  SubmitOutcome outcome;
  outcome.validation = validate_annotation(t.original.text, modified);
  if (!outcome.validation.valid) return outcome;

  Paragraph fake = make_paragraph(std::string(modified), Provenance::human_fake());
  OrderedJson event;
  event["event"] = "submit";
  event["task_id"] = task_id;
  event["annotator"] = annotator;
  event["fake"] = to_json(fake);
  append(t.batch_id, event);
  apply_event(Json::parse(event.dump()));
  outcome.accepted = true;
  outcome.fake = std::move(fake);
  return outcome;
}

AnnotationTask AnnotationStore::review(const std::string& task_id, bool accept) {
  std::lock_guard lock(mutex_);
  AnnotationTask& t = find(task_id);
  if (t.status != TaskStatus::submitted) {
    throw ConflictError("task " + task_id + " is " + std::string(to_string(t.status)) +
                        ", only submitted tasks can be reviewed");
  }
  OrderedJson event;
  event["event"] = "review";
  event["task_id"] = task_id;
  event["status"] = accept ? "accepted" : "rejected";
  append(t.batch_id, event);
  t.status = accept ? TaskStatus::accepted : TaskStatus::rejected;
  return t;
}

std::vector<AnnotationTask> AnnotationStore::tasks() const {
  std::lock_guard lock(mutex_);
  std::vector<AnnotationTask> out;
  for (const auto& id : order_) out.push_back(tasks_.at(id));
  return out;
}

std::vector<std::pair<Paragraph, Paragraph>> AnnotationStore::export_fakes(
    bool include_unreviewed) const {
  std::lock_guard lock(mutex_);
  std::vector<std::pair<Paragraph, Paragraph>> out;
  for (const auto& id : order_) {
    const AnnotationTask& t = tasks_.at(id);
    const bool take = t.status == TaskStatus::accepted ||
                      (include_unreviewed && t.status == TaskStatus::submitted);
    if (take && t.fake) out.emplace_back(t.original, *t.fake);
  }
  return out;
}

}  // namespace contraforge
