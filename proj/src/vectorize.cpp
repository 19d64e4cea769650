#include "arsent/vectorize.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "arsent/error.hpp"

namespace arsent {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

NgramSpec NgramSpec::parse(std::string_view text) {
  const std::string s = lower(text);
  if (s == "1" || s == "uni" || s == "unigram") return {true, false};
  if (s == "2" || s == "bi" || s == "bigram") return {false, true};
  if (s == "1+2" || s == "uni+bi" || s == "1,2" || s == "12") return {true, true};
  throw ValidationError("unknown n-gram spec '" + std::string(text) + "' (expected 1, 2 or 1+2)");
}

std::string NgramSpec::key() const {
  if (unigrams && bigrams) return "1+2";
  return bigrams ? "2" : "1";
}

std::string NgramSpec::name() const {
  if (unigrams && bigrams) return "Uni-gram+Bi-gram";
  return bigrams ? "Bi-gram" : "Uni-gram";
}

std::vector<std::string> extract_ngrams(const TokenStream& tokens, const NgramSpec& spec) {
  std::vector<std::string> terms;
  if (spec.unigrams) terms.insert(terms.end(), tokens.begin(), tokens.end());
  if (spec.bigrams) {
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
      std::string t;
      t.reserve(tokens[i].size() + 1 + tokens[i + 1].size());
      t.append(tokens[i]).append(" ").append(tokens[i + 1]);
      terms.push_back(std::move(t));
    }
  }
  return terms;
}

Scheme parse_scheme(std::string_view name) {
  const std::string s = lower(name);
  if (s == "tf") return Scheme::TF;
  if (s == "tfidf" || s == "tf-idf") return Scheme::TFIDF;
  // "BTO" appears as an alternate spelling of binary term presence.
  if (s == "btp" || s == "bto" || s == "binary") return Scheme::BTP;
  throw ValidationError("unknown weighting scheme '" + std::string(name) + "' (expected tf, tfidf or btp)");
}

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::TF: return "TF";
    case Scheme::TFIDF: return "TF-IDF";
    case Scheme::BTP: return "BTP";
  }
  return "TF";
}

std::string_view scheme_key(Scheme s) {
  switch (s) {
    case Scheme::TF: return "tf";
    case Scheme::TFIDF: return "tfidf";
    case Scheme::BTP: return "btp";
  }
  return "tf";
}

std::optional<std::size_t> Vocabulary::find(std::string_view term) const {
  const auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double Vocabulary::idf(std::size_t index) const {
  return 1.0 + std::log(static_cast<double>(n_docs_) / static_cast<double>(df_.at(index)));
}

Vocabulary build_vocab(std::span<const TokenStream> docs, const NgramSpec& spec, std::size_t min_df) {
  if (docs.empty()) throw DataError("build_vocab: empty document list");
  if (min_df == 0) throw ValidationError("build_vocab: min_df must be at least 1");
  if (!spec.valid()) throw ValidationError("build_vocab: n-gram spec selects no order");

  // First pass over all terms in first-occurrence order.
  std::vector<std::string> order;
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::size_t> df;
  std::unordered_set<std::size_t> seen_in_doc;
  for (const auto& doc : docs) {
    seen_in_doc.clear();
    for (auto& term : extract_ngrams(doc, spec)) {
      auto [it, inserted] = slot.try_emplace(term, order.size());
      if (inserted) {
        order.push_back(std::move(term));
        df.push_back(0);
      }
      if (seen_in_doc.insert(it->second).second) ++df[it->second];
    }
  }

  Vocabulary v;
  v.n_docs_ = docs.size();
  v.spec_ = spec;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (df[i] < min_df) continue;
    v.index_.emplace(order[i], v.terms_.size());
    v.terms_.push_back(std::move(order[i]));
    v.df_.push_back(df[i]);
  }
  return v;
}

DocTermMatrix::DocTermMatrix(std::size_t rows, std::size_t cols, Scheme scheme,
                             std::vector<std::size_t> row_ptr, std::vector<std::uint32_t> col_idx,
                             std::vector<double> values, std::vector<Polarity> labels,
                             std::vector<std::size_t> column_origin)
    : rows_(rows),
      cols_(cols),
      scheme_(scheme),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)),
      labels_(std::move(labels)),
      column_origin_(std::move(column_origin)) {
  if (row_ptr_.size() != rows_ + 1 || row_ptr_.front() != 0 || row_ptr_.back() != values_.size() ||
      col_idx_.size() != values_.size()) {
    throw std::invalid_argument("DocTermMatrix: inconsistent CSR arrays");
  }
  if (labels_.size() != rows_) {
    throw DataError("DocTermMatrix: " + std::to_string(labels_.size()) + " labels for " +
                    std::to_string(rows_) + " rows");
  }
  if (column_origin_.empty()) {
    column_origin_.resize(cols_);
    for (std::size_t j = 0; j < cols_; ++j) column_origin_[j] = j;
  } else if (column_origin_.size() != cols_) {
    throw std::invalid_argument("DocTermMatrix: column origin size mismatch");
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    if (row_ptr_[r] > row_ptr_[r + 1]) throw std::invalid_argument("DocTermMatrix: row_ptr not monotone");
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      if (col_idx_[k] >= cols_) throw std::invalid_argument("DocTermMatrix: column index out of range");
      if (k > row_ptr_[r] && col_idx_[k] <= col_idx_[k - 1]) {
        throw std::invalid_argument("DocTermMatrix: columns not strictly ascending within a row");
      }
      if (values_[k] == 0.0 || !std::isfinite(values_[k])) {
        throw std::invalid_argument("DocTermMatrix: stored weights must be finite and non-zero");
      }
      if (scheme_ == Scheme::BTP && values_[k] != 1.0) {
        throw std::invalid_argument("DocTermMatrix: BTP weights must be 1");
      }
    }
  }
}

DocTermMatrix DocTermMatrix::from_rows(std::size_t cols, Scheme scheme,
                                       std::vector<std::vector<std::pair<std::uint32_t, double>>> rows,
                                       std::vector<Polarity> labels) {
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::uint32_t> col_idx;
  std::vector<double> values;
  for (auto& r : rows) {
    std::sort(r.begin(), r.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 0; k < r.size();) {
      const auto col = r[k].first;
      double sum = 0.0;
      for (; k < r.size() && r[k].first == col; ++k) sum += r[k].second;
      if (sum != 0.0) {
        col_idx.push_back(col);
        values.push_back(sum);
      }
    }
    row_ptr.push_back(values.size());
  }
  return DocTermMatrix(rows.size(), cols, scheme, std::move(row_ptr), std::move(col_idx),
                       std::move(values), std::move(labels));
}

DocTermMatrix DocTermMatrix::from_dense(const std::vector<std::vector<double>>& dense,
                                        std::vector<Polarity> labels, Scheme scheme) {
  const std::size_t cols = dense.empty() ? 0 : dense.front().size();
  std::vector<std::vector<std::pair<std::uint32_t, double>>> rows;
  rows.reserve(dense.size());
  for (const auto& d : dense) {
    if (d.size() != cols) throw std::invalid_argument("from_dense: ragged rows");
    auto& r = rows.emplace_back();
    for (std::size_t j = 0; j < cols; ++j) {
      if (d[j] != 0.0) r.emplace_back(static_cast<std::uint32_t>(j), d[j]);
    }
  }
  return from_rows(cols, scheme, std::move(rows), std::move(labels));
}

SparseRow DocTermMatrix::row(std::size_t r) const {
  if (r >= rows_) throw std::out_of_range("DocTermMatrix::row");
  const std::size_t begin = row_ptr_[r];
  const std::size_t len = row_ptr_[r + 1] - begin;
  return SparseRow{cols_, std::span<const std::uint32_t>(col_idx_.data() + begin, len),
                   std::span<const double>(values_.data() + begin, len)};
}

double DocTermMatrix::at(std::size_t r, std::size_t c) const {
  const SparseRow sr = row(r);
  const auto it = std::lower_bound(sr.indices.begin(), sr.indices.end(), c);
  if (it == sr.indices.end() || *it != c) return 0.0;
  return sr.values[static_cast<std::size_t>(it - sr.indices.begin())];
}

std::vector<double> DocTermMatrix::dense_column(std::size_t c) const {
  std::vector<double> out(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = at(r, c);
  return out;
}

DocTermMatrix vectorize(std::span<const TokenStream> docs, const Vocabulary& vocab, Scheme scheme,
                        std::span<const Polarity> labels) {
  if (docs.size() != labels.size()) {
    throw DataError("vectorize: " + std::to_string(labels.size()) + " labels for " +
                    std::to_string(docs.size()) + " documents");
  }
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::uint32_t> col_idx;
  std::vector<double> values;
  std::vector<std::pair<std::uint32_t, double>> counts;
  for (const auto& doc : docs) {
    counts.clear();
    for (const auto& term : extract_ngrams(doc, vocab.ngrams())) {
      if (const auto idx = vocab.find(term)) counts.emplace_back(static_cast<std::uint32_t>(*idx), 1.0);
    }
    std::sort(counts.begin(), counts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 0; k < counts.size();) {
      const auto col = counts[k].first;
      double tf = 0.0;
      for (; k < counts.size() && counts[k].first == col; ++k) tf += 1.0;
      double w = tf;
      if (scheme == Scheme::TFIDF) w = tf * vocab.idf(col);
      if (scheme == Scheme::BTP) w = 1.0;
      col_idx.push_back(col);
      values.push_back(w);
    }
    row_ptr.push_back(values.size());
  }
  return DocTermMatrix(docs.size(), vocab.size(), scheme, std::move(row_ptr), std::move(col_idx),
                       std::move(values), std::vector<Polarity>(labels.begin(), labels.end()));
}

DocTermMatrix select_rows(const DocTermMatrix& matrix, std::span<const std::size_t> rows) {
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::uint32_t> col_idx;
  std::vector<double> values;
  std::vector<Polarity> labels;
  labels.reserve(rows.size());
  for (std::size_t r : rows) {
    const SparseRow sr = matrix.row(r);
    col_idx.insert(col_idx.end(), sr.indices.begin(), sr.indices.end());
    values.insert(values.end(), sr.values.begin(), sr.values.end());
    row_ptr.push_back(values.size());
    labels.push_back(matrix.label(r));
  }
  return DocTermMatrix(rows.size(), matrix.cols(), matrix.scheme(), std::move(row_ptr),
                       std::move(col_idx), std::move(values), std::move(labels),
                       matrix.column_origin());
}

void write_matrix(std::ostream& out, const DocTermMatrix& m) {
  out << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << ' ' << scheme_key(m.scheme()) << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const SparseRow sr = m.row(r);
    for (std::size_t k = 0; k < sr.indices.size(); ++k) {
      out << r << ' ' << sr.indices[k] << ' ' << format_double(sr.values[k]) << '\n';
    }
  }
}

DocTermMatrix read_matrix(std::istream& in, std::vector<Polarity> labels) {
  std::size_t rows = 0, cols = 0, nnz = 0;
  std::string scheme;
  if (!(in >> rows >> cols >> nnz >> scheme)) throw DataError("read_matrix: bad header");
  std::vector<std::vector<std::pair<std::uint32_t, double>>> entries(rows);
  for (std::size_t k = 0; k < nnz; ++k) {
    std::size_t r = 0, c = 0;
    double w = 0.0;
    if (!(in >> r >> c >> w) || r >= rows || c >= cols) {
      throw DataError("read_matrix: bad entry " + std::to_string(k + 1));
    }
    entries[r].emplace_back(static_cast<std::uint32_t>(c), w);
  }
  return DocTermMatrix::from_rows(cols, parse_scheme(scheme), std::move(entries), std::move(labels));
}

}  // namespace arsent
