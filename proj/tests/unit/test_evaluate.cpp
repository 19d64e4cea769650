#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "arsent/error.hpp"
#include "arsent/evaluate.hpp"
#include "synthetic.hpp"

using namespace arsent;

namespace {

constexpr Polarity P = Polarity::Positive;
constexpr Polarity N = Polarity::Negative;

Learner constant(Polarity p) {
  return [p](const DocTermMatrix&) { return TrainedClassifier{[p](const SparseRow&) { return p; }, {}}; };
}

TokenizedCorpus tokenized(const LabeledCorpus& c) {
  PrepConfig prep;
  prep.remove_stopwords = false;
  return tokenize_corpus(c, Preprocessor(prep));
}

}  // namespace

TEST_CASE("confusion counts") {
  const std::vector<Polarity> truth{P, P, P, P, P, N, N, N, N, N};
  const std::vector<Polarity> pred{P, P, P, N, N, P, N, N, N, N};
  const auto c = confusion(pred, truth);
  CHECK(c == ConfusionCounts{3, 4, 1, 2});
  CHECK(c.total() == 10);

  const std::vector<Polarity> six{P, P, P, P, P, P, N, N, N, N};
  CHECK(confusion(six, six) == ConfusionCounts{6, 4, 0, 0});
  const std::vector<Polarity> all_pos(10, P);
  CHECK(confusion(all_pos, truth) == ConfusionCounts{5, 0, 5, 0});

  CHECK_THROWS_AS(confusion(pred, std::span<const Polarity>(six).subspan(0, 3)), DataError);
  CHECK_THROWS_AS(confusion(std::span<const Polarity>{}, std::span<const Polarity>{}), DataError);
}

TEST_CASE("metrics") {
  const Metrics m = metrics({3, 4, 1, 2});
  CHECK(std::abs(m.accuracy - 0.7) < 1e-12);
  CHECK(std::abs(m.precision - 0.75) < 1e-12);
  CHECK(std::abs(m.recall - 0.6) < 1e-12);
  CHECK_FALSE(m.precision_undefined);

  const Metrics perfect = metrics({6, 4, 0, 0});
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);

  const Metrics none = metrics({0, 5, 0, 5});
  CHECK(none.precision == 0.0);
  CHECK(none.precision_undefined);
  CHECK_FALSE(none.recall_undefined);
  CHECK_THROWS_AS(metrics({}), DataError);
}

TEST_CASE("metrics equal exact rationals on every small table") {
  for (std::size_t tp = 0; tp < 6; ++tp)
    for (std::size_t tn = 0; tn < 6; ++tn)
      for (std::size_t fp = 0; fp < 6; ++fp)
        for (std::size_t fn = 0; fn < 6; ++fn) {
          const std::size_t total = tp + tn + fp + fn;
          if (total == 0) continue;
          const Metrics m = metrics({tp, tn, fp, fn});
          CHECK(std::abs(m.accuracy - double(tp + tn) / double(total)) < 1e-12);
          if (tp + fp) CHECK(std::abs(m.precision - double(tp) / double(tp + fp)) < 1e-12);
          if (tp + fn) CHECK(std::abs(m.recall - double(tp) / double(tp + fn)) < 1e-12);
        }
}

TEST_CASE("mode names") {
  CHECK(parse_mode("paper") == EvalMode::Paper);
  CHECK(to_string(EvalMode::Strict) == "strict");
  CHECK_THROWS_AS(parse_mode("loose"), ValidationError);
}

TEST_CASE("constant classifier scores the base rate") {
  synth::Options o;
  o.docs = 100;
  const auto s = synth::make(o);
  const auto corpus = tokenized(s.corpus);
  FeaturePipeline fp;
  const auto plan = stratified_kfold(s.corpus, 5, 1);
  CrossValidateOptions opts;
  opts.learner = constant(P);
  const auto rep = cross_validate(corpus, fp, plan, opts);
  CHECK(rep.mean_accuracy == doctest::Approx(0.5));
  CHECK(rep.mean_recall == doctest::Approx(1.0));
  opts.learner = constant(N);
  const auto neg = cross_validate(corpus, fp, plan, opts);
  CHECK(neg.mean_accuracy == doctest::Approx(0.5));
  CHECK(neg.folds[0].metrics.precision_undefined);
}

TEST_CASE("strict folds never see test-only terms") {
  synth::Options o;
  o.docs = 60;
  o.hapax = true;
  const auto s = synth::make(o);
  const auto corpus = tokenized(s.corpus);
  const auto plan = stratified_kfold(s.corpus, 5, 2);
  FeaturePipeline fp;
  fp.ngrams = NgramSpec::parse("1+2");
  for (std::size_t f = 0; f < 5; ++f) {
    const FoldData d = fit_fold(corpus, fp, plan, f);
    std::set<std::string> train_terms;
    for (std::size_t r : d.train_rows) {
      for (const auto& t : extract_ngrams(corpus.docs[r], fp.ngrams)) train_terms.insert(t);
    }
    for (const auto& t : d.vocab.terms()) CHECK(train_terms.count(t) == 1);
    CHECK(d.vocab.n_docs() == d.train_rows.size());
    CHECK(d.train_rows.size() + d.test_rows.size() == 60);
    CHECK(d.test.cols() == d.vocab.size());
    // Each test document's hapax word is absent from the fold vocabulary.
    for (std::size_t r : d.test_rows) {
      CHECK_FALSE(d.vocab.find(synth::word(10000 + r, 5)).has_value());
    }
  }
}

TEST_CASE("cross_validate report") {
  const auto s = synth::make({});
  const auto plan = stratified_kfold(s.corpus, 5, 3);
  PipelineConfig pc;
  pc.prep.remove_stopwords = false;
  pc.features.stages = {{Method::Correlation, 20}, {Method::SvmWeight, 10}};
  const auto rep = cross_validate(s.corpus, pc, plan);
  REQUIRE(rep.folds.size() == 5);
  std::size_t evaluated = 0;
  double acc = 0;
  for (const auto& f : rep.folds) {
    evaluated += f.counts.total();
    acc += f.metrics.accuracy;
    CHECK(f.n_features == 10);
  }
  CHECK(evaluated == 200);
  CHECK(std::abs(rep.mean_accuracy - acc / 5) < 1e-12);
  CHECK(rep.mean_accuracy >= 0.95);
  CHECK(rep.config["stages"].size() == 2);

  CrossValidateOptions par;
  par.workers = 3;
  const auto rep3 = cross_validate(s.corpus, pc, plan, par);
  CHECK(to_json(rep3).dump() == to_json(rep).dump());

  CrossValidateOptions paper;
  paper.mode = EvalMode::Paper;
  const auto prep = cross_validate(s.corpus, pc, plan, paper);
  CHECK(prep.mode == EvalMode::Paper);
  CHECK(prep.folds.size() == 5);

  std::ostringstream os;
  write_report_csv(os, rep);
  CHECK(os.str().rfind("fold,accuracy,precision,recall\n", 0) == 0);
  CHECK(os.str().find("\nmean,") != std::string::npos);
}

TEST_CASE("grid shares folds and matches single runs") {
  const auto s = synth::make({});
  const auto corpus = tokenized(s.corpus);
  const auto plan = stratified_kfold(s.corpus, 4, 1);
  FeaturePipeline fp;
  const std::vector<std::vector<SelectorStage>> grid{{{Method::IG, 5}}, {{Method::IG, 10}}, {}};
  const auto reps = cross_validate_grid(corpus, fp, grid, plan);
  REQUIRE(reps.size() == 3);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    FeaturePipeline single = fp;
    single.stages = grid[i];
    CHECK(to_json(cross_validate(corpus, single, plan)).dump() == to_json(reps[i]).dump());
  }
}

TEST_CASE("single-class training fold is reported with its index") {
  std::vector<Document> docs;
  for (int i = 0; i < 4; ++i) docs.push_back({std::to_string(i), "بيت جميل", i == 0 ? P : N});
  const LabeledCorpus c(docs);
  const FoldPlan plan(2, 0, {0, 1, 1, 1});
  PipelineConfig pc;
  pc.prep.remove_stopwords = false;
  try {
    cross_validate(c, pc, plan);
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("fold 0") != std::string::npos);
  }
}

TEST_CASE("evaluate_matrix equals paper mode") {
  const auto s = synth::make({});
  const auto corpus = tokenized(s.corpus);
  const auto plan = stratified_kfold(s.corpus, 5, 4);
  FeaturePipeline fp;
  fp.stages = {{Method::Gini, 8}};
  CrossValidateOptions paper;
  paper.mode = EvalMode::Paper;
  const auto rep = cross_validate(corpus, fp, plan, paper);

  const Vocabulary v = build_vocab(corpus.docs, fp.ngrams, fp.min_df);
  const auto full = vectorize(corpus.docs, v, fp.scheme, corpus.labels);
  const auto x = project(full, sequential_select(full, fp.stages, fp.svm));
  const auto direct = evaluate_matrix(x, plan, fp.svm);
  CHECK(direct.mean_accuracy == rep.mean_accuracy);
  CHECK(direct.mean_precision == rep.mean_precision);
  CHECK(direct.mean_recall == rep.mean_recall);
}
