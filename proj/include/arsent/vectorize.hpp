#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "arsent/corpus.hpp"
#include "arsent/textprep.hpp"

namespace arsent {

/// Which n-gram orders to emit: {1}, {2} or {1, 2}.
struct NgramSpec {
  bool unigrams = true;
  bool bigrams = false;

  /// "1", "2" or "1+2" (also "uni", "bi", "uni+bi").
  static NgramSpec parse(std::string_view text);
  std::string key() const;   // "1", "2", "1+2"
  std::string name() const;  // "Uni-gram", "Bi-gram", "Uni-gram+Bi-gram"
  bool valid() const { return unigrams || bigrams; }

  bool operator==(const NgramSpec&) const = default;
};

/// All order-1 terms in position order, then all order-2 terms ("a b").
std::vector<std::string> extract_ngrams(const TokenStream& tokens, const NgramSpec& spec);

enum class Scheme { TF, TFIDF, BTP };

/// "tf", "tfidf"/"tf-idf", "btp"/"bto" (case-insensitive).
Scheme parse_scheme(std::string_view name);
std::string_view to_string(Scheme s);  // "TF", "TF-IDF", "BTP"
std::string_view scheme_key(Scheme s);  // "tf", "tfidf", "btp"

/// Term index with document frequencies, fitted on a set of documents.
/// Indices follow first occurrence during fitting.
class Vocabulary {
 public:
  Vocabulary() = default;

  std::size_t size() const { return terms_.size(); }
  std::size_t n_docs() const { return n_docs_; }
  const NgramSpec& ngrams() const { return spec_; }

  const std::string& term(std::size_t index) const { return terms_.at(index); }
  const std::vector<std::string>& terms() const { return terms_; }
  std::size_t df(std::size_t index) const { return df_.at(index); }
  const std::vector<std::size_t>& dfs() const { return df_; }
  std::optional<std::size_t> find(std::string_view term) const;

  /// 1 + ln(n_docs / df); always >= 1.
  double idf(std::size_t index) const;

  friend Vocabulary build_vocab(std::span<const TokenStream> docs, const NgramSpec& spec,
                                std::size_t min_df);

 private:
  std::vector<std::string> terms_;
  std::vector<std::size_t> df_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t n_docs_ = 0;
  NgramSpec spec_;
};

/// Keeps terms present in at least `min_df` documents. Throws DataError on
/// an empty document list and ValidationError on min_df == 0.
Vocabulary build_vocab(std::span<const TokenStream> docs, const NgramSpec& spec,
                       std::size_t min_df = 1);

/// A borrowed sparse row. `indices` ascend; values are non-zero.
struct SparseRow {
  std::size_t dim = 0;
  std::span<const std::uint32_t> indices;
  std::span<const double> values;
};

/// Sparse document-term matrix in CSR layout with aligned class labels.
///
/// `column_origin()[j]` is the vocabulary index that column j came from; it
/// is the identity for freshly vectorized matrices and survives projection.
class DocTermMatrix {
 public:
  DocTermMatrix() = default;
  DocTermMatrix(std::size_t rows, std::size_t cols, Scheme scheme, std::vector<std::size_t> row_ptr,
                std::vector<std::uint32_t> col_idx, std::vector<double> values,
                std::vector<Polarity> labels, std::vector<std::size_t> column_origin = {});

  /// Builds from per-row (column, weight) lists; zeros are dropped and
  /// columns sorted. Duplicate columns within a row are summed.
  static DocTermMatrix from_rows(std::size_t cols, Scheme scheme,
                                 std::vector<std::vector<std::pair<std::uint32_t, double>>> rows,
                                 std::vector<Polarity> labels);

  /// Dense convenience constructor (tests and bindings).
  static DocTermMatrix from_dense(const std::vector<std::vector<double>>& dense,
                                  std::vector<Polarity> labels, Scheme scheme = Scheme::TF);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }
  Scheme scheme() const { return scheme_; }

  const std::vector<Polarity>& labels() const { return labels_; }
  Polarity label(std::size_t row) const { return labels_.at(row); }

  SparseRow row(std::size_t r) const;
  double at(std::size_t r, std::size_t c) const;
  std::vector<double> dense_column(std::size_t c) const;

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::uint32_t>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<std::size_t>& column_origin() const { return column_origin_; }
  std::size_t origin(std::size_t col) const { return column_origin_.at(col); }

  bool operator==(const DocTermMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Scheme scheme_ = Scheme::TF;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::uint32_t> col_idx_;
  std::vector<double> values_;
  std::vector<Polarity> labels_;
  std::vector<std::size_t> column_origin_;
};

/// Weights each document over `vocab`:
///   TF    raw in-document count
///   TFIDF count * (1 + ln(n_docs / df)) with the vocabulary's fit-time stats
///   BTP   1 when present
/// Terms outside the vocabulary are ignored.
DocTermMatrix vectorize(std::span<const TokenStream> docs, const Vocabulary& vocab, Scheme scheme,
                        std::span<const Polarity> labels);

/// Row subset in the given order; columns and origins unchanged.
DocTermMatrix select_rows(const DocTermMatrix& matrix, std::span<const std::size_t> rows);

/// Triplet dump: header "rows cols nnz scheme", then one "row col weight" line
/// per stored entry.
void write_matrix(std::ostream& out, const DocTermMatrix& matrix);

/// Parses write_matrix output. Labels are not part of the dump.
DocTermMatrix read_matrix(std::istream& in, std::vector<Polarity> labels);

}  // namespace arsent
