#include "arsent/evaluate.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <ostream>

#include "arsent/error.hpp"
#include "parallel.hpp"

namespace arsent {
namespace {

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void require_two_classes(const DocTermMatrix& train, std::size_t fold) {
  const auto pos = std::count(train.labels().begin(), train.labels().end(), Polarity::Positive);
  if (pos == 0 || static_cast<std::size_t>(pos) == train.rows()) {
    throw DataError("fold " + std::to_string(fold) + ": training data contains a single class");
  }
}

FoldResult evaluate_fold(const DocTermMatrix& train, const DocTermMatrix& test, const Learner& learner,
                         std::size_t fold) {
  require_two_classes(train, fold);
  const TrainedClassifier clf = learner(train);
  std::vector<Polarity> predicted;
  predicted.reserve(test.rows());
  for (std::size_t r = 0; r < test.rows(); ++r) predicted.push_back(clf.predict(test.row(r)));

  FoldResult res;
  res.fold = fold;
  res.counts = confusion(predicted, test.labels());
  res.metrics = metrics(res.counts);
  res.n_features = train.cols();
  if (!clf.warning.empty()) res.warnings.push_back(clf.warning);
  return res;
}

std::vector<FoldResult> evaluate_folds(const DocTermMatrix& matrix, const FoldPlan& plan, const Learner& learner,
                                      std::size_t workers) {
  std::vector<FoldResult> out(plan.k());
  detail::parallel_for(plan.k(), workers, [&](std::size_t f) {
    const auto train_rows = plan.train_indices(f);
    const auto test_rows = plan.test_indices(f);
    out[f] = evaluate_fold(select_rows(matrix, train_rows), select_rows(matrix, test_rows), learner, f);
    out[f].vocab_size = matrix.cols();
  });
  return out;
}

std::vector<Polarity> gather(std::span<const Polarity> labels, std::span<const std::size_t> rows) {
  std::vector<Polarity> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(labels[r]);
  return out;
}

std::vector<TokenStream> gather(const std::vector<TokenStream>& docs, std::span<const std::size_t> rows) {
  std::vector<TokenStream> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(docs[r]);
  return out;
}

nlohmann::json stages_json(std::span<const SelectorStage> stages) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : stages) arr.push_back({{"method", method_key(s.method)}, {"k", s.k}});
  return arr;
}

}  // namespace

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  tn += o.tn;
  fp += o.fp;
  fn += o.fn;
  return *this;
}

ConfusionCounts confusion(std::span<const Polarity> predictions, std::span<const Polarity> truth) {
  if (predictions.size() != truth.size()) {
    throw DataError("confusion: " + std::to_string(predictions.size()) + " predictions for " +
                    std::to_string(truth.size()) + " labels");
  }
  if (truth.empty()) throw DataError("confusion: empty input");
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool pred_pos = predictions[i] == Polarity::Positive;
    const bool true_pos = truth[i] == Polarity::Positive;
    if (pred_pos && true_pos) ++c.tp;
    else if (!pred_pos && !true_pos) ++c.tn;
    else if (pred_pos) ++c.fp;
    else ++c.fn;
  }
  return c;
}

Metrics metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw DataError("metrics: no evaluated documents");
  Metrics m;
  m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  if (c.tp + c.fp == 0) {
    m.precision_undefined = true;
  } else {
    m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  }
  if (c.tp + c.fn == 0) {
    m.recall_undefined = true;
  } else {
    m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  }
  return m;
}

EvalMode parse_mode(std::string_view name) {
  if (name == "strict") return EvalMode::Strict;
  if (name == "paper") return EvalMode::Paper;
  throw ValidationError("unknown evaluation mode '" + std::string(name) + "' (expected strict or paper)");
}

std::string_view to_string(EvalMode mode) { return mode == EvalMode::Paper ? "paper" : "strict"; }

nlohmann::json to_json(const PrepConfig& prep) {
  nlohmann::json j;
  j["remove_stopwords"] = prep.remove_stopwords;
  j["stoplist"] = prep.stoplist_path ? nlohmann::json(*prep.stoplist_path) : nlohmann::json(nullptr);
  j["stemmer"] = to_string(prep.stemmer);
  j["stem_table"] = prep.stem_table_path ? nlohmann::json(*prep.stem_table_path) : nlohmann::json(nullptr);
  j["collapse_repeats"] = prep.collapse_repeats;
  return j;
}

nlohmann::json to_json(const FeaturePipeline& p) {
  return {
      {"ngrams", p.ngrams.key()},
      {"scheme", scheme_key(p.scheme)},
      {"min_df", p.min_df},
      {"stages", stages_json(p.stages)},
      {"svm",
       {{"C", p.svm.C}, {"tolerance", p.svm.tolerance}, {"max_epochs", p.svm.max_epochs}, {"seed", p.svm.seed}}},
  };
}

nlohmann::json to_json(const PipelineConfig& config) {
  return {{"prep", to_json(config.prep)}, {"features", to_json(config.features)}};
}

TokenizedCorpus tokenize_corpus(const LabeledCorpus& corpus, const Preprocessor& prep) {
  TokenizedCorpus out;
  out.ids.reserve(corpus.size());
  out.docs.reserve(corpus.size());
  out.labels.reserve(corpus.size());
  for (const auto& d : corpus) {
    out.ids.push_back(d.id);
    out.docs.push_back(prep(d.text));
    out.labels.push_back(d.label);
  }
  return out;
}

Learner svm_learner(const SvmParams& params) {
  return [params](const DocTermMatrix& train) {
    auto model = std::make_shared<SvmModel>(arsent::train(train, params));
    TrainedClassifier clf;
    if (!model->converged) {
      clf.warning = "svm did not converge within " + std::to_string(model->iterations) + " iterations";
    }
    clf.predict = [model](const SparseRow& x) { return predict(*model, x); };
    return clf;
  };
}

FoldData fit_fold(const TokenizedCorpus& corpus, const FeaturePipeline& pipeline, const FoldPlan& plan,
                  std::size_t fold) {
  if (plan.size() != corpus.size()) throw DataError("fold plan does not cover the corpus");
  if (fold >= plan.k()) throw std::out_of_range("fit_fold: fold index out of range");
  FoldData fd;
  fd.train_rows = plan.train_indices(fold);
  fd.test_rows = plan.test_indices(fold);
  const auto train_docs = gather(corpus.docs, fd.train_rows);
  const auto test_docs = gather(corpus.docs, fd.test_rows);
  const auto train_labels = gather(corpus.labels, fd.train_rows);
  const auto test_labels = gather(corpus.labels, fd.test_rows);
  fd.vocab = build_vocab(train_docs, pipeline.ngrams, pipeline.min_df);
  fd.train = vectorize(train_docs, fd.vocab, pipeline.scheme, train_labels);
  fd.test = vectorize(test_docs, fd.vocab, pipeline.scheme, test_labels);
  return fd;
}

void MetricsReport::finalize() {
  mean_accuracy = mean_precision = mean_recall = 0.0;
  if (folds.empty()) return;
  for (const auto& f : folds) {
    mean_accuracy += f.metrics.accuracy;
    mean_precision += f.metrics.precision;
    mean_recall += f.metrics.recall;
  }
  const auto n = static_cast<double>(folds.size());
  mean_accuracy /= n;
  mean_precision /= n;
  mean_recall /= n;
}

std::vector<MetricsReport> cross_validate_grid(const TokenizedCorpus& corpus, const FeaturePipeline& pipeline,
                                               std::span<const std::vector<SelectorStage>> selections,
                                               const FoldPlan& plan, const CrossValidateOptions& options) {
  if (plan.size() != corpus.size()) {
    throw DataError("fold plan covers " + std::to_string(plan.size()) + " documents, corpus has " +
                    std::to_string(corpus.size()));
  }
  pipeline.svm.validate();
  const Learner learner = options.learner ? options.learner : svm_learner(pipeline.svm);
  const std::size_t k = plan.k();
  const std::size_t n_sel = selections.size();
  std::vector<std::vector<FoldResult>> results(n_sel, std::vector<FoldResult>(k));

  if (options.mode == EvalMode::Paper) {
    const Vocabulary vocab = build_vocab(corpus.docs, pipeline.ngrams, pipeline.min_df);
    const DocTermMatrix full = vectorize(corpus.docs, vocab, pipeline.scheme, corpus.labels);
    SelectionCache cache;
    std::vector<DocTermMatrix> projected;
    projected.reserve(n_sel);
    for (const auto& sel : selections) {
      projected.push_back(sel.empty() ? full : project(full, sequential_select(full, sel, pipeline.svm, &cache)));
    }
    for (std::size_t s = 0; s < n_sel; ++s) {
      results[s] = evaluate_folds(projected[s], plan, learner, options.workers);
      for (auto& r : results[s]) r.vocab_size = vocab.size();
    }
  } else {
    detail::parallel_for(k, options.workers, [&](std::size_t f) {
      const FoldData fd = fit_fold(corpus, pipeline, plan, f);
      require_two_classes(fd.train, f);
      SelectionCache cache;
      for (std::size_t s = 0; s < n_sel; ++s) {
        FoldResult r;
        if (selections[s].empty()) {
          r = evaluate_fold(fd.train, fd.test, learner, f);
        } else {
          const FeatureSet feats = sequential_select(fd.train, selections[s], pipeline.svm, &cache);
          r = evaluate_fold(project(fd.train, feats), project(fd.test, feats), learner, f);
        }
        r.vocab_size = fd.vocab.size();
        results[s][f] = std::move(r);
      }
    });
  }

  std::vector<MetricsReport> reports(n_sel);
  for (std::size_t s = 0; s < n_sel; ++s) {
    auto& rep = reports[s];
    rep.folds = std::move(results[s]);
    rep.mode = options.mode;
    FeaturePipeline echo = pipeline;
    echo.stages = selections[s];
    rep.config = to_json(echo);
    rep.config["mode"] = to_string(options.mode);
    rep.config["k_folds"] = k;
    rep.config["fold_seed"] = plan.seed();
    rep.finalize();
  }
  return reports;
}

MetricsReport cross_validate(const TokenizedCorpus& corpus, const FeaturePipeline& pipeline, const FoldPlan& plan,
                             const CrossValidateOptions& options) {
  const std::vector<std::vector<SelectorStage>> one{pipeline.stages};
  return std::move(cross_validate_grid(corpus, pipeline, one, plan, options).front());
}

MetricsReport cross_validate(const LabeledCorpus& corpus, const PipelineConfig& config, const FoldPlan& plan,
                             const CrossValidateOptions& options) {
  const Preprocessor prep(config.prep);
  MetricsReport rep = cross_validate(tokenize_corpus(corpus, prep), config.features, plan, options);
  rep.config["prep"] = to_json(config.prep);
  return rep;
}

MetricsReport evaluate_matrix(const DocTermMatrix& matrix, const FoldPlan& plan, const SvmParams& svm,
                              const CrossValidateOptions& options) {
  if (plan.size() != matrix.rows()) {
    throw DataError("fold plan covers " + std::to_string(plan.size()) + " documents, matrix has " +
                    std::to_string(matrix.rows()));
  }
  svm.validate();
  const Learner learner = options.learner ? options.learner : svm_learner(svm);
  MetricsReport rep;
  rep.folds = evaluate_folds(matrix, plan, learner, options.workers);
  rep.mode = options.mode;
  rep.config = {{"scheme", scheme_key(matrix.scheme())},
                {"n_features", matrix.cols()},
                {"svm", {{"C", svm.C}, {"tolerance", svm.tolerance}, {"max_epochs", svm.max_epochs}, {"seed", svm.seed}}},
                {"mode", to_string(options.mode)},
                {"k_folds", plan.k()},
                {"fold_seed", plan.seed()}};
  rep.finalize();
  return rep;
}

nlohmann::json to_json(const MetricsReport& report) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : report.folds) {
    folds.push_back({
        {"fold", f.fold},
        {"tp", f.counts.tp},
        {"tn", f.counts.tn},
        {"fp", f.counts.fp},
        {"fn", f.counts.fn},
        {"accuracy", f.metrics.accuracy},
        {"precision", f.metrics.precision},
        {"recall", f.metrics.recall},
        {"precision_undefined", f.metrics.precision_undefined},
        {"recall_undefined", f.metrics.recall_undefined},
        {"vocab_size", f.vocab_size},
        {"n_features", f.n_features},
        {"warnings", f.warnings},
    });
  }
  return {
      {"mode", to_string(report.mode)},
      {"config", report.config},
      {"folds", folds},
      {"mean", {{"accuracy", report.mean_accuracy}, {"precision", report.mean_precision}, {"recall", report.mean_recall}}},
  };
}

void write_report_csv(std::ostream& out, const MetricsReport& report) {
  out << "fold,accuracy,precision,recall\n";
  for (const auto& f : report.folds) {
    out << f.fold << ',' << fmt(f.metrics.accuracy) << ',' << fmt(f.metrics.precision) << ','
        << fmt(f.metrics.recall) << '\n';
  }
  out << "mean," << fmt(report.mean_accuracy) << ',' << fmt(report.mean_precision) << ','
      << fmt(report.mean_recall) << '\n';
}

}  // namespace arsent
