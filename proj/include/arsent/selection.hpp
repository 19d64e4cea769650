#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "arsent/linsvm.hpp"
#include "arsent/vectorize.hpp"

namespace arsent {

enum class Method { IG, Correlation, ChiSquare, Gini, SvmWeight };

inline constexpr Method kAllMethods[] = {Method::IG, Method::Correlation, Method::ChiSquare,
                                         Method::Gini, Method::SvmWeight};

/// "ig", "correlation"/"corr", "chi2"/"chi-square", "gini", "svm".
Method parse_method(std::string_view name);
std::string_view method_key(Method m);   // "ig", "correlation", "chi2", "gini", "svm"
std::string_view method_name(Method m);  // "IG", "Correlation", "Chi-Square", "Gini Index", "SVM"

/// Document counts for one term t against the positive class c.
struct ContingencyTable {
  std::uint64_t a = 0;  // t present, class c
  std::uint64_t b = 0;  // t present, other class
  std::uint64_t c = 0;  // t absent, class c
  std::uint64_t d = 0;  // t absent, other class
  std::uint64_t n = 0;

  bool operator==(const ContingencyTable&) const = default;
};

/// Per-column tables; presence means a stored weight > 0.
std::vector<ContingencyTable> contingency(const DocTermMatrix& matrix,
                                          Polarity positive_class = Polarity::Positive);

struct FeatureScores {
  Method method = Method::IG;
  std::vector<double> scores;  // aligned with matrix columns; finite, >= 0
};

/// Information gain in bits, H(C) - [P(t) H(C|t) + P(~t) H(C|~t)], 0 log 0 = 0.
FeatureScores score_ig(std::span<const ContingencyTable> tables);

/// |Pearson r| between each column (zeros included) and the +1/-1 class
/// vector. Zero-variance columns score 0.
FeatureScores score_correlation(const DocTermMatrix& matrix);

/// N (AD - BC)^2 / ((A+C)(B+D)(A+B)(C+D)); a zero marginal scores 0.
FeatureScores score_chi2(std::span<const ContingencyTable> tables);

/// sum_j p(t|C_j)^2 p(C_j|t)^2 over both classes; absent terms score 0.
FeatureScores score_gini(std::span<const ContingencyTable> tables);

/// |w_j| of a linear SVM trained on the whole matrix.
FeatureScores score_svm(const DocTermMatrix& matrix, const SvmParams& params = {});

/// Dispatches to the scorer for `method`.
FeatureScores score(const DocTermMatrix& matrix, Method method, const SvmParams& params = {});

struct SelectorStage {
  Method method = Method::IG;
  std::size_t k = 1;

  bool operator==(const SelectorStage&) const = default;
};

/// "method:k", e.g. "svm:1500".
SelectorStage parse_stage(std::string_view text);
std::string to_string(const SelectorStage& stage);

/// Selected feature indices, best first (descending score, ties by index).
struct FeatureSet {
  std::vector<std::size_t> indices;

  std::size_t size() const { return indices.size(); }
  bool operator==(const FeatureSet&) const = default;
};

/// The min(k, |scores|) best indices. Throws ValidationError on k == 0.
FeatureSet select_top_k(const FeatureScores& scores, std::size_t k);

/// Keeps the listed columns in ascending index order; labels and column
/// origins carry over. Throws std::out_of_range on a bad or repeated index.
DocTermMatrix project(const DocTermMatrix& matrix, const FeatureSet& features);

/// Memo of intermediate selection results over one fixed matrix, so grids
/// that share stage prefixes score each prefix once. Not thread-safe.
class SelectionCache {
 public:
  void clear();

 private:
  friend FeatureSet sequential_select(const DocTermMatrix&, std::span<const SelectorStage>,
                                      const SvmParams&, SelectionCache*);
  std::map<std::string, FeatureScores> scores_;  // key: surviving-prefix + method
  std::map<std::string, FeatureSet> selections_;  // key: stage prefix
};

/// Sequence mode: stage 1 ranks every column and keeps its top k; each later
/// stage re-scores only the survivors and keeps its own top k. Indices refer
/// to the columns of `matrix`.
FeatureSet sequential_select(const DocTermMatrix& matrix, std::span<const SelectorStage> stages,
                             const SvmParams& params = {}, SelectionCache* cache = nullptr);

/// CSV "feature_index,term,score", best first. `matrix` maps score positions
/// to vocabulary indices through its column origins.
void write_scores_csv(std::ostream& out, const FeatureScores& scores, const DocTermMatrix& matrix,
                      const Vocabulary& vocab);

}  // namespace arsent
