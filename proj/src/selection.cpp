#include "arsent/selection.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <ostream>

#include "arsent/error.hpp"

namespace arsent {
namespace {

double entropy2(double p, double q) {
  double h = 0.0;
  if (p > 0) h -= p * std::log2(p);
  if (q > 0) h -= q * std::log2(q);
  return h;
}

double clamp_score(double v, double hi) {
  if (!std::isfinite(v) || v < 0) return 0.0;
  return std::min(v, hi);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

Method parse_method(std::string_view name) {
  std::string s(name);
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "ig" || s == "infogain" || s == "information_gain") return Method::IG;
  if (s == "correlation" || s == "corr") return Method::Correlation;
  if (s == "chi2" || s == "chi-square" || s == "chisquare" || s == "chi_square") return Method::ChiSquare;
  if (s == "gini" || s == "gini_index") return Method::Gini;
  if (s == "svm" || s == "svm_weight" || s == "svmweight") return Method::SvmWeight;
  throw ValidationError("unknown selection method '" + std::string(name) +
                        "' (expected ig, correlation, chi2, gini or svm)");
}

std::string_view method_key(Method m) {
  switch (m) {
    case Method::IG: return "ig";
    case Method::Correlation: return "correlation";
    case Method::ChiSquare: return "chi2";
    case Method::Gini: return "gini";
    case Method::SvmWeight: return "svm";
  }
  return "ig";
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::IG: return "IG";
    case Method::Correlation: return "Correlation";
    case Method::ChiSquare: return "Chi-Square";
    case Method::Gini: return "Gini Index";
    case Method::SvmWeight: return "SVM";
  }
  return "IG";
}

std::vector<ContingencyTable> contingency(const DocTermMatrix& matrix, Polarity positive_class) {
  const std::size_t n = matrix.rows();
  std::uint64_t n_pos = 0;
  std::vector<std::uint64_t> with_pos(matrix.cols(), 0), with_neg(matrix.cols(), 0);
  for (std::size_t r = 0; r < n; ++r) {
    const bool pos = matrix.label(r) == positive_class;
    n_pos += pos ? 1 : 0;
    const SparseRow x = matrix.row(r);
    for (std::size_t k = 0; k < x.indices.size(); ++k) {
      if (x.values[k] > 0) ++(pos ? with_pos : with_neg)[x.indices[k]];
    }
  }
  const std::uint64_t n_neg = n - n_pos;
  std::vector<ContingencyTable> tables(matrix.cols());
  for (std::size_t j = 0; j < matrix.cols(); ++j) {
    auto& t = tables[j];
    t.a = with_pos[j];
    t.b = with_neg[j];
    t.c = n_pos - t.a;
    t.d = n_neg - t.b;
    t.n = n;
  }
  return tables;
}

FeatureScores score_ig(std::span<const ContingencyTable> tables) {
  FeatureScores out{Method::IG, std::vector<double>(tables.size(), 0.0)};
  for (std::size_t j = 0; j < tables.size(); ++j) {
    const auto& t = tables[j];
    if (t.n == 0) continue;
    const double n = static_cast<double>(t.n);
    const double h_class = entropy2(static_cast<double>(t.a + t.c) / n, static_cast<double>(t.b + t.d) / n);
    double h_cond = 0.0;
    if (const auto present = t.a + t.b; present > 0) {
      const double p = static_cast<double>(present);
      h_cond += (p / n) * entropy2(static_cast<double>(t.a) / p, static_cast<double>(t.b) / p);
    }
    if (const auto absent = t.c + t.d; absent > 0) {
      const double p = static_cast<double>(absent);
      h_cond += (p / n) * entropy2(static_cast<double>(t.c) / p, static_cast<double>(t.d) / p);
    }
    out.scores[j] = clamp_score(h_class - h_cond, 1.0);
  }
  return out;
}

FeatureScores score_correlation(const DocTermMatrix& matrix) {
  const std::size_t n = matrix.rows();
  const std::size_t cols = matrix.cols();
  FeatureScores out{Method::Correlation, std::vector<double>(cols, 0.0)};
  if (n < 2) return out;

  double y_sum = 0.0;
  for (Polarity p : matrix.labels()) y_sum += sign(p);
  const double y_mean = y_sum / static_cast<double>(n);
  double syy = 0.0;
  for (Polarity p : matrix.labels()) syy += (sign(p) - y_mean) * (sign(p) - y_mean);
  if (syy == 0.0) return out;

  std::vector<double> sum(cols, 0.0), vmin(cols, INFINITY), vmax(cols, -INFINITY);
  std::vector<std::size_t> nnz(cols, 0);
  for (std::size_t r = 0; r < n; ++r) {
    const SparseRow x = matrix.row(r);
    for (std::size_t k = 0; k < x.indices.size(); ++k) {
      const auto j = x.indices[k];
      sum[j] += x.values[k];
      ++nnz[j];
      vmin[j] = std::min(vmin[j], x.values[k]);
      vmax[j] = std::max(vmax[j], x.values[k]);
    }
  }
  std::vector<double> mean(cols);
  for (std::size_t j = 0; j < cols; ++j) mean[j] = sum[j] / static_cast<double>(n);

  // Centered sums over stored entries; implicit zeros are folded in below.
  std::vector<double> sxx(cols, 0.0), sxy(cols, 0.0), sy_nz(cols, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const double dy = sign(matrix.label(r)) - y_mean;
    const SparseRow x = matrix.row(r);
    for (std::size_t k = 0; k < x.indices.size(); ++k) {
      const auto j = x.indices[k];
      const double dx = x.values[k] - mean[j];
      sxx[j] += dx * dx;
      sxy[j] += dx * dy;
      sy_nz[j] += dy;
    }
  }
  for (std::size_t j = 0; j < cols; ++j) {
    if (nnz[j] == 0) continue;
    if (nnz[j] == n && vmin[j] == vmax[j]) continue;  // constant column
    const double zeros = static_cast<double>(n - nnz[j]);
    const double var = sxx[j] + zeros * mean[j] * mean[j];
    const double cov = sxy[j] + mean[j] * sy_nz[j];
    if (!(var > 0.0)) continue;
    out.scores[j] = clamp_score(std::abs(cov) / std::sqrt(var * syy), 1.0);
  }
  return out;
}

FeatureScores score_chi2(std::span<const ContingencyTable> tables) {
  FeatureScores out{Method::ChiSquare, std::vector<double>(tables.size(), 0.0)};
  for (std::size_t j = 0; j < tables.size(); ++j) {
    const auto& t = tables[j];
    const double a = static_cast<double>(t.a), b = static_cast<double>(t.b);
    const double c = static_cast<double>(t.c), d = static_cast<double>(t.d);
    const double denom = (a + c) * (b + d) * (a + b) * (c + d);
    if (denom == 0.0) continue;
    const double diff = a * d - b * c;
    out.scores[j] = clamp_score(static_cast<double>(t.n) * diff * diff / denom, static_cast<double>(t.n));
  }
  return out;
}

FeatureScores score_gini(std::span<const ContingencyTable> tables) {
  FeatureScores out{Method::Gini, std::vector<double>(tables.size(), 0.0)};
  for (std::size_t j = 0; j < tables.size(); ++j) {
    const auto& t = tables[j];
    const double present = static_cast<double>(t.a + t.b);
    if (present == 0.0) continue;
    const auto term = [&](std::uint64_t with, std::uint64_t class_size) {
      if (class_size == 0) return 0.0;
      const double t_given_c = static_cast<double>(with) / static_cast<double>(class_size);
      const double c_given_t = static_cast<double>(with) / present;
      return t_given_c * t_given_c * c_given_t * c_given_t;
    };
    out.scores[j] = clamp_score(term(t.a, t.a + t.c) + term(t.b, t.b + t.d), 1.0);
  }
  return out;
}

FeatureScores score_svm(const DocTermMatrix& matrix, const SvmParams& params) {
  if (matrix.rows() == 0) throw DataError("score_svm: empty matrix");
  const SvmModel model = train(matrix, params);
  FeatureScores out{Method::SvmWeight, std::vector<double>(model.w.size())};
  for (std::size_t j = 0; j < model.w.size(); ++j) out.scores[j] = std::abs(model.w[j]);
  return out;
}

FeatureScores score(const DocTermMatrix& matrix, Method method, const SvmParams& params) {
  switch (method) {
    case Method::IG: return score_ig(contingency(matrix));
    case Method::Correlation: return score_correlation(matrix);
    case Method::ChiSquare: return score_chi2(contingency(matrix));
    case Method::Gini: return score_gini(contingency(matrix));
    case Method::SvmWeight: return score_svm(matrix, params);
  }
  throw std::logic_error("unhandled selection method");
}

SelectorStage parse_stage(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ValidationError("selector stage '" + std::string(text) + "' must look like method:k");
  }
  SelectorStage stage;
  stage.method = parse_method(text.substr(0, colon));
  const auto digits = text.substr(colon + 1);
  const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), stage.k);
  if (res.ec != std::errc() || res.ptr != digits.data() + digits.size() || stage.k == 0) {
    throw ValidationError("selector stage '" + std::string(text) + "': k must be a positive integer");
  }
  return stage;
}

std::string to_string(const SelectorStage& stage) {
  return std::string(method_key(stage.method)) + ":" + std::to_string(stage.k);
}

FeatureSet select_top_k(const FeatureScores& scores, std::size_t k) {
  if (k == 0) throw ValidationError("select_top_k: k must be at least 1");
  const auto& s = scores.scores;
  std::vector<std::size_t> idx(s.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const std::size_t keep = std::min(k, idx.size());
  const auto better = [&](std::size_t a, std::size_t b) { return s[a] > s[b] || (s[a] == s[b] && a < b); };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep), idx.end(), better);
  idx.resize(keep);
  return FeatureSet{std::move(idx)};
}

DocTermMatrix project(const DocTermMatrix& matrix, const FeatureSet& features) {
  std::vector<std::size_t> keep = features.indices;
  std::sort(keep.begin(), keep.end());
  if (std::adjacent_find(keep.begin(), keep.end()) != keep.end()) {
    throw std::out_of_range("project: repeated feature index");
  }
  if (!keep.empty() && keep.back() >= matrix.cols()) {
    throw std::out_of_range("project: feature index " + std::to_string(keep.back()) +
                            " out of range for " + std::to_string(matrix.cols()) + " columns");
  }
  constexpr auto kDropped = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> remap(matrix.cols(), kDropped);
  std::vector<std::size_t> origin(keep.size());
  for (std::size_t j = 0; j < keep.size(); ++j) {
    remap[keep[j]] = static_cast<std::uint32_t>(j);
    origin[j] = matrix.origin(keep[j]);
  }

  std::vector<std::size_t> row_ptr{0};
  std::vector<std::uint32_t> col_idx;
  std::vector<double> values;
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    const SparseRow x = matrix.row(r);
    for (std::size_t k = 0; k < x.indices.size(); ++k) {
      const auto to = remap[x.indices[k]];
      if (to == kDropped) continue;
      col_idx.push_back(to);
      values.push_back(x.values[k]);
    }
    row_ptr.push_back(values.size());
  }
  return DocTermMatrix(matrix.rows(), keep.size(), matrix.scheme(), std::move(row_ptr), std::move(col_idx),
                       std::move(values), matrix.labels(), std::move(origin));
}

void SelectionCache::clear() {
  scores_.clear();
  selections_.clear();
}

FeatureSet sequential_select(const DocTermMatrix& matrix, std::span<const SelectorStage> stages,
                             const SvmParams& params, SelectionCache* cache) {
  if (stages.empty()) throw ValidationError("sequential_select: no stages");
  for (const auto& st : stages) {
    if (st.k == 0) throw ValidationError("sequential_select: stage k must be at least 1");
  }

  FeatureSet current;
  std::string prefix;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const SelectorStage& stage = stages[s];
    const std::string sel_key = prefix + to_string(stage);
    if (cache) {
      if (auto it = cache->selections_.find(sel_key); it != cache->selections_.end()) {
        current = it->second;
        prefix = sel_key + "|";
        continue;
      }
    }

    const std::string score_key = prefix + std::string(method_key(stage.method));
    const FeatureScores* scores = nullptr;
    FeatureScores local_scores;
    if (cache) {
      if (auto it = cache->scores_.find(score_key); it != cache->scores_.end()) scores = &it->second;
    }
    if (scores == nullptr) {
      local_scores = s == 0 ? score(matrix, stage.method, params)
                            : score(project(matrix, current), stage.method, params);
      if (cache) {
        scores = &cache->scores_.emplace(score_key, std::move(local_scores)).first->second;
      } else {
        scores = &local_scores;
      }
    }

    FeatureSet chosen = select_top_k(*scores, stage.k);
    if (s > 0) {
      // Local positions index the ascending list of surviving columns.
      std::vector<std::size_t> survivors = current.indices;
      std::sort(survivors.begin(), survivors.end());
      for (auto& idx : chosen.indices) idx = survivors[idx];
    }
    current = std::move(chosen);
    if (cache) cache->selections_.emplace(sel_key, current);
    prefix = sel_key + "|";
  }
  return current;
}

void write_scores_csv(std::ostream& out, const FeatureScores& scores, const DocTermMatrix& matrix,
                      const Vocabulary& vocab) {
  if (scores.scores.size() != matrix.cols()) {
    throw std::invalid_argument("write_scores_csv: scores do not match matrix columns");
  }
  out << "feature_index,term,score\n";
  if (scores.scores.empty()) return;
  const FeatureSet order = select_top_k(scores, scores.scores.size());
  char buf[32];
  for (std::size_t j : order.indices) {
    const std::size_t origin = matrix.origin(j);
    const auto res = std::to_chars(buf, buf + sizeof buf, scores.scores[j]);
    out << origin << ',' << csv_field(vocab.term(origin)) << ',' << std::string_view(buf, res.ptr) << '\n';
  }
}

}  // namespace arsent
