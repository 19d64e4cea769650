#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace arsent {

enum class Polarity { Negative, Positive };

/// Class encoding used by the learners: Positive -> +1, Negative -> -1.
constexpr int sign(Polarity p) { return p == Polarity::Positive ? 1 : -1; }

std::string_view to_string(Polarity p);

/// Accepts "positive"/"negative" (any case), "pos"/"neg", "+1"/"1"/"-1".
std::optional<Polarity> parse_polarity(std::string_view text);

struct Document {
  std::string id;
  std::string text;
  Polarity label = Polarity::Negative;

  bool operator==(const Document&) const = default;
};

/// Documents in load order with per-class counts. Immutable once built.
class LabeledCorpus {
 public:
  LabeledCorpus() = default;

  /// Throws DataError on duplicated ids or empty text.
  explicit LabeledCorpus(std::vector<Document> documents);

  const std::vector<Document>& documents() const { return documents_; }
  const Document& operator[](std::size_t i) const { return documents_[i]; }
  std::size_t size() const { return documents_.size(); }
  bool empty() const { return documents_.empty(); }
  std::size_t count(Polarity p) const { return p == Polarity::Positive ? positives_ : negatives_; }
  std::vector<Polarity> labels() const;

  auto begin() const { return documents_.begin(); }
  auto end() const { return documents_.end(); }

 private:
  std::vector<Document> documents_;
  std::size_t positives_ = 0;
  std::size_t negatives_ = 0;
};

enum class CorpusFormat { Csv, Tsv, Jsonl };

/// "csv", "tsv" or "jsonl"; throws ValidationError otherwise.
CorpusFormat parse_format(std::string_view name);
std::string_view to_string(CorpusFormat f);

struct CorpusSource {
  std::string path;
  CorpusFormat format = CorpusFormat::Csv;
  std::string text_field = "text";
  std::string label_field = "label";
  // Used when the column/key exists; otherwise ids are 0-based record indices.
  std::string id_field = "id";
  // Exact label strings. When empty, labels go through parse_polarity.
  std::map<std::string, Polarity, std::less<>> label_map;
};

/// Reads a corpus file. CSV/TSV need a header row; fields may be quoted with
/// "" escapes. JSONL takes one object per line (blank lines skipped).
/// Errors (DataError) carry the 1-based line number of the offending record.
LabeledCorpus load_corpus(const CorpusSource& source);

/// Same as load_corpus, reading from an in-memory buffer. `source.path` only
/// labels error messages.
LabeledCorpus parse_corpus(std::string_view content, const CorpusSource& source);

/// Exactly `n_per_class` documents of each polarity drawn uniformly without
/// replacement; survivors keep their original relative order.
LabeledCorpus balance_sample(const LabeledCorpus& corpus, std::size_t n_per_class,
                             std::uint64_t seed);

/// Fold assignment for k-fold cross-validation. `assignment()[i]` is the fold
/// of the i-th corpus document.
class FoldPlan {
 public:
  FoldPlan(std::size_t k, std::uint64_t seed, std::vector<std::size_t> assignment);

  std::size_t k() const { return k_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t size() const { return assignment_.size(); }
  std::size_t fold_of(std::size_t doc) const { return assignment_.at(doc); }
  const std::vector<std::size_t>& assignment() const { return assignment_; }

  std::vector<std::size_t> test_indices(std::size_t fold) const;
  std::vector<std::size_t> train_indices(std::size_t fold) const;

  bool operator==(const FoldPlan&) const = default;

 private:
  std::size_t k_;
  std::uint64_t seed_;
  std::vector<std::size_t> assignment_;
};

/// Stratified folds: each class is shuffled with `seed` and dealt round-robin,
/// so per-fold class counts differ by at most one.
FoldPlan stratified_kfold(std::span<const Polarity> labels, std::size_t k, std::uint64_t seed);
FoldPlan stratified_kfold(const LabeledCorpus& corpus, std::size_t k, std::uint64_t seed);

}  // namespace arsent
