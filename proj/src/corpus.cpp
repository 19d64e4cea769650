#include "arsent/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "arsent/error.hpp"
#include "arsent/random.hpp"
#include "arsent/utf8.hpp"

namespace arsent {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

struct Record {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

// Delimited-text reader honoring RFC 4180 quoting: a quoted field may contain
// the delimiter, newlines and doubled quotes.
class DelimitedReader {
 public:
  DelimitedReader(std::string_view content, char delim, std::string_view name)
      : s_(content), delim_(delim), name_(name) {}

  std::optional<Record> next() {
    // Skip blank lines between records.
    while (pos_ < s_.size() && (s_[pos_] == '\n' || s_[pos_] == '\r')) {
      if (s_[pos_] == '\n') ++line_;
      ++pos_;
    }
    if (pos_ >= s_.size()) return std::nullopt;

    Record rec;
    rec.line = line_;
    std::string field;
    bool quoted = false;
    bool field_started_quoted = false;
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (quoted) {
        if (c == '"') {
          if (pos_ + 1 < s_.size() && s_[pos_ + 1] == '"') {
            field.push_back('"');
            pos_ += 2;
            continue;
          }
          quoted = false;
          ++pos_;
          continue;
        }
        if (c == '\n') ++line_;
        field.push_back(c);
        ++pos_;
        continue;
      }
      if (c == '"' && field.empty() && !field_started_quoted) {
        quoted = true;
        field_started_quoted = true;
        ++pos_;
        continue;
      }
      if (c == delim_) {
        rec.fields.push_back(std::move(field));
        field.clear();
        field_started_quoted = false;
        ++pos_;
        continue;
      }
      if (c == '\r' || c == '\n') {
        if (c == '\r' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '\n') ++pos_;
        ++pos_;
        ++line_;
        rec.fields.push_back(std::move(field));
        return rec;
      }
      if (c == '"') {
        throw DataError(name_ + ":" + std::to_string(line_) + ": malformed row: stray quote");
      }
      field.push_back(c);
      ++pos_;
    }
    if (quoted) {
      throw DataError(name_ + ":" + std::to_string(rec.line) +
                      ": malformed row: unterminated quoted field");
    }
    rec.fields.push_back(std::move(field));
    return rec;
  }

 private:
  std::string_view s_;
  char delim_;
  std::string name_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

std::string where(const CorpusSource& src, std::size_t line) {
  return (src.path.empty() ? std::string("<input>") : src.path) + ":" + std::to_string(line);
}

Polarity map_label(const CorpusSource& src, std::size_t line, const std::string& label) {
  if (src.label_map.empty()) {
    if (const auto p = parse_polarity(label)) return *p;
    throw DataError(where(src, line) + ": unrecognized label '" + label + "'");
  }
  const auto it = src.label_map.find(label);
  if (it == src.label_map.end()) {
    throw DataError(where(src, line) + ": label '" + label + "' not in label map");
  }
  return it->second;
}

void check_text(const CorpusSource& src, std::size_t line, const std::string& text) {
  if (!utf8::valid(text)) throw DataError(where(src, line) + ": text is not valid UTF-8");
  const bool blank = std::all_of(text.begin(), text.end(),
                                 [](unsigned char c) { return std::isspace(c) != 0; });
  if (blank) throw DataError(where(src, line) + ": empty text");
}

std::vector<Document> parse_delimited(std::string_view content, const CorpusSource& src,
                                      char delim) {
  DelimitedReader reader(content, delim, src.path.empty() ? "<input>" : src.path);
  auto header = reader.next();
  if (!header) throw DataError("empty corpus");

  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto& f = header->fields;
    const auto it = std::find(f.begin(), f.end(), name);
    if (it == f.end()) return std::nullopt;
    return static_cast<std::size_t>(it - f.begin());
  };
  const auto text_col = column(src.text_field);
  const auto label_col = column(src.label_field);
  const auto id_col = column(src.id_field);
  if (!text_col) throw DataError(where(src, header->line) + ": missing column '" + src.text_field + "'");
  if (!label_col) throw DataError(where(src, header->line) + ": missing column '" + src.label_field + "'");

  std::vector<Document> docs;
  while (auto rec = reader.next()) {
    if (rec->fields.size() != header->fields.size()) {
      throw DataError(where(src, rec->line) + ": malformed row: expected " +
                      std::to_string(header->fields.size()) + " fields, got " +
                      std::to_string(rec->fields.size()));
    }
    Document d;
    d.text = rec->fields[*text_col];
    check_text(src, rec->line, d.text);
    d.label = map_label(src, rec->line, rec->fields[*label_col]);
    d.id = id_col ? rec->fields[*id_col] : std::to_string(docs.size());
    docs.push_back(std::move(d));
  }
  return docs;
}

std::string scalar_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::vector<Document> parse_jsonl(std::string_view content, const CorpusSource& src) {
  std::vector<Document> docs;
  std::size_t line = 0;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    std::string_view raw = content.substr(start, end - start);
    start = end + 1;
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    if (raw.find_first_not_of(" \t") == std::string_view::npos) continue;

    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(where(src, line) + ": malformed row: " + e.what());
    }
    if (!obj.is_object()) throw DataError(where(src, line) + ": malformed row: expected a JSON object");
    if (!obj.contains(src.text_field) || !obj[src.text_field].is_string()) {
      throw DataError(where(src, line) + ": malformed row: missing string field '" + src.text_field + "'");
    }
    if (!obj.contains(src.label_field) || obj[src.label_field].is_null()) {
      throw DataError(where(src, line) + ": malformed row: missing field '" + src.label_field + "'");
    }
    Document d;
    d.text = obj[src.text_field].get<std::string>();
    check_text(src, line, d.text);
    d.label = map_label(src, line, scalar_string(obj[src.label_field]));
    d.id = obj.contains(src.id_field) ? scalar_string(obj[src.id_field]) : std::to_string(docs.size());
    docs.push_back(std::move(d));
  }
  if (docs.empty()) throw DataError("empty corpus");
  return docs;
}

}  // namespace

std::string_view to_string(Polarity p) {
  return p == Polarity::Positive ? "positive" : "negative";
}

std::optional<Polarity> parse_polarity(std::string_view text) {
  const std::string s = lower(text);
  if (s == "positive" || s == "pos" || s == "+1" || s == "1") return Polarity::Positive;
  if (s == "negative" || s == "neg" || s == "-1") return Polarity::Negative;
  return std::nullopt;
}

LabeledCorpus::LabeledCorpus(std::vector<Document> documents) : documents_(std::move(documents)) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(documents_.size());
  for (const auto& d : documents_) {
    if (!seen.insert(d.id).second) throw DataError("duplicate document id '" + d.id + "'");
    if (d.text.empty()) throw DataError("document '" + d.id + "' has empty text");
    (d.label == Polarity::Positive ? positives_ : negatives_)++;
  }
}

std::vector<Polarity> LabeledCorpus::labels() const {
  std::vector<Polarity> out;
  out.reserve(documents_.size());
  for (const auto& d : documents_) out.push_back(d.label);
  return out;
}

CorpusFormat parse_format(std::string_view name) {
  const std::string s = lower(name);
  if (s == "csv") return CorpusFormat::Csv;
  if (s == "tsv") return CorpusFormat::Tsv;
  if (s == "jsonl") return CorpusFormat::Jsonl;
  throw ValidationError("unknown corpus format '" + std::string(name) + "' (expected csv, tsv or jsonl)");
}

std::string_view to_string(CorpusFormat f) {
  switch (f) {
    case CorpusFormat::Csv: return "csv";
    case CorpusFormat::Tsv: return "tsv";
    case CorpusFormat::Jsonl: return "jsonl";
  }
  return "csv";
}

LabeledCorpus parse_corpus(std::string_view content, const CorpusSource& source) {
  if (content.starts_with("\xEF\xBB\xBF")) content.remove_prefix(3);
  if (content.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw DataError("empty corpus");
  }
  std::vector<Document> docs;
  switch (source.format) {
    case CorpusFormat::Csv: docs = parse_delimited(content, source, ','); break;
    case CorpusFormat::Tsv: docs = parse_delimited(content, source, '\t'); break;
    case CorpusFormat::Jsonl: docs = parse_jsonl(content, source); break;
  }
  if (docs.empty()) throw DataError("empty corpus");
  return LabeledCorpus(std::move(docs));
}

LabeledCorpus load_corpus(const CorpusSource& source) {
  std::ifstream in(source.path, std::ios::binary);
  if (!in) throw DataError("cannot read corpus file '" + source.path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_corpus(buf.str(), source);
}

LabeledCorpus balance_sample(const LabeledCorpus& corpus, std::size_t n_per_class,
                             std::uint64_t seed) {
  for (Polarity p : {Polarity::Positive, Polarity::Negative}) {
    if (corpus.count(p) < n_per_class) {
      throw DataError("balance_sample: requested " + std::to_string(n_per_class) + " " +
                      std::string(to_string(p)) + " documents but only " +
                      std::to_string(corpus.count(p)) + " available");
    }
  }
  Rng rng(seed);
  std::vector<std::size_t> keep;
  keep.reserve(2 * n_per_class);
  for (Polarity p : {Polarity::Positive, Polarity::Negative}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (corpus[i].label == p) idx.push_back(i);
    }
    // Partial Fisher-Yates: the first n slots end up a uniform sample.
    for (std::size_t i = 0; i < n_per_class; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
      std::swap(idx[i], idx[j]);
    }
    keep.insert(keep.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_per_class));
  }
  std::sort(keep.begin(), keep.end());
  std::vector<Document> docs;
  docs.reserve(keep.size());
  for (std::size_t i : keep) docs.push_back(corpus[i]);
  return LabeledCorpus(std::move(docs));
}

FoldPlan::FoldPlan(std::size_t k, std::uint64_t seed, std::vector<std::size_t> assignment)
    : k_(k), seed_(seed), assignment_(std::move(assignment)) {
  if (k_ < 2) throw ValidationError("fold count must be at least 2");
  for (std::size_t f : assignment_) {
    if (f >= k_) throw ValidationError("fold index out of range");
  }
}

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment_.size(); ++i) {
    if (assignment_[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment_.size(); ++i) {
    if (assignment_[i] != fold) out.push_back(i);
  }
  return out;
}

FoldPlan stratified_kfold(std::span<const Polarity> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("stratified_kfold: k must be at least 2, got " + std::to_string(k));
  Rng rng(seed);
  std::vector<std::size_t> assignment(labels.size(), 0);
  std::size_t offset = 0;
  for (Polarity p : {Polarity::Positive, Polarity::Negative}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == p) idx.push_back(i);
    }
    if (idx.size() < k) {
      throw DataError("stratified_kfold: class " + std::string(to_string(p)) + " has " +
                      std::to_string(idx.size()) + " documents, fewer than k=" + std::to_string(k));
    }
    rng.shuffle(std::span<std::size_t>(idx));
    for (std::size_t i = 0; i < idx.size(); ++i) assignment[idx[i]] = (offset + i) % k;
    // Continue dealing where this class stopped so total fold sizes stay even.
    offset = (offset + idx.size()) % k;
  }
  return FoldPlan(k, seed, std::move(assignment));
}

FoldPlan stratified_kfold(const LabeledCorpus& corpus, std::size_t k, std::uint64_t seed) {
  const auto labels = corpus.labels();
  return stratified_kfold(std::span<const Polarity>(labels), k, seed);
}

}  // namespace arsent
