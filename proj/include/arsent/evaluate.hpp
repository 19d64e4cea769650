#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "arsent/corpus.hpp"
#include "arsent/linsvm.hpp"
#include "arsent/selection.hpp"
#include "arsent/textprep.hpp"
#include "arsent/vectorize.hpp"

namespace arsent {

/// Polarity::Positive is the positive class.
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + tn + fp + fn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o);
  bool operator==(const ConfusionCounts&) const = default;
};

/// Throws DataError on mismatched lengths or empty input.
ConfusionCounts confusion(std::span<const Polarity> predictions, std::span<const Polarity> truth);

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  // Set when TP + FP (resp. TP + FN) is zero; the value is then 0.
  bool precision_undefined = false;
  bool recall_undefined = false;
};

/// Accuracy, precision and recall. Throws DataError on all-zero counts.
Metrics metrics(const ConfusionCounts& c);

/// strict: vocabulary, IDF statistics and feature selection are fitted on the
/// training folds only. paper: fitted once on the whole corpus; only the
/// classifier is refit per fold.
enum class EvalMode { Strict, Paper };

EvalMode parse_mode(std::string_view name);
std::string_view to_string(EvalMode mode);

/// Everything downstream of tokenization.
struct FeaturePipeline {
  NgramSpec ngrams;
  Scheme scheme = Scheme::TFIDF;
  std::size_t min_df = 1;
  // Empty means no selection.
  std::vector<SelectorStage> stages;
  SvmParams svm;
};

/// The full configuration: preprocessing plus the feature pipeline.
struct PipelineConfig {
  PrepConfig prep;
  FeaturePipeline features;
};

nlohmann::json to_json(const PrepConfig& prep);
nlohmann::json to_json(const FeaturePipeline& pipeline);
nlohmann::json to_json(const PipelineConfig& config);

/// Preprocessed documents aligned with their labels and ids.
struct TokenizedCorpus {
  std::vector<std::string> ids;
  std::vector<TokenStream> docs;
  std::vector<Polarity> labels;

  std::size_t size() const { return docs.size(); }
};

TokenizedCorpus tokenize_corpus(const LabeledCorpus& corpus, const Preprocessor& prep);

/// A fitted classifier's prediction function plus any training warning.
struct TrainedClassifier {
  std::function<Polarity(const SparseRow&)> predict;
  std::string warning;
};

/// Fits a classifier on a training matrix.
using Learner = std::function<TrainedClassifier(const DocTermMatrix&)>;

/// The default learner: a linear SVM.
Learner svm_learner(const SvmParams& params);

/// Vocabulary and matrices fitted for one fold before selection. In strict
/// mode the vocabulary sees training documents only.
struct FoldData {
  Vocabulary vocab;
  DocTermMatrix train;
  DocTermMatrix test;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

FoldData fit_fold(const TokenizedCorpus& corpus, const FeaturePipeline& pipeline, const FoldPlan& plan,
                  std::size_t fold);

struct FoldResult {
  std::size_t fold = 0;
  ConfusionCounts counts;
  Metrics metrics;
  std::size_t vocab_size = 0;
  std::size_t n_features = 0;
  std::vector<std::string> warnings;
};

struct MetricsReport {
  std::vector<FoldResult> folds;
  double mean_accuracy = 0.0;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  EvalMode mode = EvalMode::Strict;
  nlohmann::json config;  // echo of the evaluated configuration

  /// Recomputes the means from the per-fold values.
  void finalize();
};

struct CrossValidateOptions {
  EvalMode mode = EvalMode::Strict;
  std::size_t workers = 1;
  // Defaults to svm_learner(pipeline.svm) when empty.
  Learner learner;
};

/// Runs one cross-validation per entry of `selections`, sharing fold
/// preparation and selection prefixes between them. Every other setting comes
/// from `pipeline` (its own `stages` are ignored). Results are independent of
/// `workers`.
std::vector<MetricsReport> cross_validate_grid(const TokenizedCorpus& corpus, const FeaturePipeline& pipeline,
                                               std::span<const std::vector<SelectorStage>> selections,
                                               const FoldPlan& plan, const CrossValidateOptions& options = {});

MetricsReport cross_validate(const TokenizedCorpus& corpus, const FeaturePipeline& pipeline,
                             const FoldPlan& plan, const CrossValidateOptions& options = {});

/// Preprocesses `corpus` with `config.prep`, then cross-validates.
MetricsReport cross_validate(const LabeledCorpus& corpus, const PipelineConfig& config, const FoldPlan& plan,
                             const CrossValidateOptions& options = {});

/// Cross-validates a fixed, already selected matrix whose rows align with
/// `plan`: only the classifier is refit per fold. Paper mode reduces to this.
MetricsReport evaluate_matrix(const DocTermMatrix& matrix, const FoldPlan& plan, const SvmParams& svm = {},
                              const CrossValidateOptions& options = {});

nlohmann::json to_json(const MetricsReport& report);

/// "fold,accuracy,precision,recall" rows plus a final "mean" row.
void write_report_csv(std::ostream& out, const MetricsReport& report);

}  // namespace arsent
