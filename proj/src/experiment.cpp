#include "arsent/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "arsent/error.hpp"

#ifndef ARSENT_VERSION
#define ARSENT_VERSION "0.0.0"
#endif

namespace arsent {
namespace {

constexpr const char* kStageNames[kStageCount] = {"stage1_weighting", "stage2_prep", "stage3_ngrams",
                                                  "stage4_selection", "stage5_combination"};

LabeledCorpus stage_corpus(const ExperimentConfig& c, const LabeledCorpus& corpus, std::size_t stage) {
  const std::size_t n = c.stages[stage - 1].sample_per_class;
  return n ? balance_sample(corpus, n, c.seed) : corpus;
}

FeaturePipeline base_pipeline(const ExperimentConfig& c) {
  FeaturePipeline p;
  p.ngrams = c.ngram;
  p.scheme = c.scheme;
  p.min_df = c.min_df;
  p.svm = c.svm;
  p.svm.seed = c.seed;
  return p;
}

CrossValidateOptions cv_options(const ExperimentConfig& c) {
  CrossValidateOptions o;
  o.mode = c.mode;
  o.workers = c.workers;
  return o;
}

std::size_t vocab_size(const TokenizedCorpus& tc, const NgramSpec& spec, std::size_t min_df) {
  return build_vocab(tc.docs, spec, min_df).size();
}

void add_row(StageOutput& out, std::string label, std::size_t features, const MetricsReport& rep) {
  out.table.add(label, features, rep.mean_accuracy, rep.mean_precision, rep.mean_recall);
  nlohmann::json d = to_json(rep);
  d["row"] = std::move(label);
  out.details.push_back(std::move(d));
}

StageOutput begin(std::size_t stage, const ExperimentConfig& c, const LabeledCorpus& corpus) {
  StageOutput out;
  out.stage = stage;
  out.name = kStageNames[stage - 1];
  out.k_folds = c.folds_for(stage);
  out.n_docs = corpus.size();
  return out;
}

StageOutput stage1(const ExperimentConfig& c, const LabeledCorpus& corpus) {
  StageOutput out = begin(1, c, corpus);
  out.table.title = c.ngram.name() + " weighting schemes cross validation results";
  out.table.key_header = "Weighting Schemes";
  PrepConfig prep = c.prep;
  prep.remove_stopwords = false;
  prep.stemmer = StemmerKind::None;
  const TokenizedCorpus tc = tokenize_corpus(corpus, Preprocessor(prep));
  const FoldPlan plan = stratified_kfold(tc.labels, out.k_folds, c.seed);
  const std::size_t features = vocab_size(tc, c.ngram, c.min_df);
  for (Scheme s : c.schemes) {
    FeaturePipeline p = base_pipeline(c);
    p.scheme = s;
    add_row(out, std::string(to_string(s)), features, cross_validate(tc, p, plan, cv_options(c)));
  }
  return out;
}

StageOutput stage2(const ExperimentConfig& c, const LabeledCorpus& corpus) {
  StageOutput out = begin(2, c, corpus);
  out.table.title = "Cross validation results of pre-processing techniques on " + c.ngram.name() + " features";
  out.table.key_header = "Pre-Process";
  out.table.show_feature_count = true;
  const FoldPlan plan = stratified_kfold(corpus.labels(), out.k_folds, c.seed);

  std::vector<std::pair<std::string, StemmerKind>> rows{
      {"Stop words removal", StemmerKind::None},
      {"Stop words removal+Light stemming", StemmerKind::Light},
  };
  if (c.prep.stem_table_path) rows.emplace_back("Stop words removal+Root stemming", StemmerKind::External);

  for (const auto& [label, stemmer] : rows) {
    PrepConfig prep = c.prep;
    prep.remove_stopwords = true;
    prep.stemmer = stemmer;
    const TokenizedCorpus tc = tokenize_corpus(corpus, Preprocessor(prep));
    add_row(out, label, vocab_size(tc, c.ngram, c.min_df), cross_validate(tc, base_pipeline(c), plan, cv_options(c)));
  }
  return out;
}

StageOutput stage3(const ExperimentConfig& c, const LabeledCorpus& corpus) {
  StageOutput out = begin(3, c, corpus);
  out.table.title = "Cross validation results of n-gram models";
  out.table.key_header = "N-gram Model";
  out.table.show_feature_count = true;
  const TokenizedCorpus tc = tokenize_corpus(corpus, Preprocessor(c.prep));
  const FoldPlan plan = stratified_kfold(tc.labels, out.k_folds, c.seed);
  for (const auto& spec : c.ngrams) {
    FeaturePipeline p = base_pipeline(c);
    p.ngrams = spec;
    add_row(out, spec.name(), vocab_size(tc, spec, c.min_df), cross_validate(tc, p, plan, cv_options(c)));
  }
  return out;
}

void run_selection_grid(StageOutput& out, const ExperimentConfig& c, const LabeledCorpus& corpus,
                        const std::vector<std::vector<SelectorStage>>& selections) {
  const TokenizedCorpus tc = tokenize_corpus(corpus, Preprocessor(c.prep));
  const FoldPlan plan = stratified_kfold(tc.labels, out.k_folds, c.seed);
  const std::size_t full = vocab_size(tc, c.ngram, c.min_df);
  const auto reports = cross_validate_grid(tc, base_pipeline(c), selections, plan, cv_options(c));
  for (std::size_t i = 0; i < selections.size(); ++i) {
    std::size_t features = full;
    for (const auto& st : selections[i]) features = std::min(features, st.k);
    add_row(out, selection_label(selections[i]), features, reports[i]);
  }
}

std::vector<std::size_t> ascending(std::vector<std::size_t> ks) {
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  return ks;
}

StageOutput stage4(const ExperimentConfig& c, const LabeledCorpus& corpus) {
  StageOutput out = begin(4, c, corpus);
  out.table.title = "Cross validation results of feature selection methods on " + c.ngram.name() + " features";
  out.table.key_header = "FSM/Top-K";
  std::vector<std::vector<SelectorStage>> selections;
  for (const auto& e : c.selector_grid) {
    if (!e.method) {
      selections.emplace_back();
      continue;
    }
    for (std::size_t k : ascending(e.k)) selections.push_back({{*e.method, k}});
  }
  run_selection_grid(out, c, corpus, selections);
  return out;
}

StageOutput stage5(const ExperimentConfig& c, const LabeledCorpus& corpus) {
  StageOutput out = begin(5, c, corpus);
  out.table.title = "Cross validation results of feature selection methods combined in sequence";
  out.table.key_header = "Combination/Top-K";
  std::vector<std::vector<SelectorStage>> selections;
  for (const auto& p : c.pipelines) {
    for (std::size_t k : ascending(p.second_k)) selections.push_back({p.first, {p.second, k}});
  }
  run_selection_grid(out, c, corpus, selections);
  return out;
}

std::string timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << content;
  f.close();
  if (!f) throw DataError(path.string() + ": write failed");
}

void require_file(const std::string& path, const char* field) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) throw ValidationError(std::string(field) + ": no such file '" + path + "'");
}

}  // namespace

std::string selection_label(std::span<const SelectorStage> stages) {
  if (stages.empty()) return "None";
  std::string out;
  for (std::size_t i = 0; i + 1 < stages.size(); ++i) {
    out += std::string(method_name(stages[i].method)) + "(" + std::to_string(stages[i].k) + ")+";
  }
  return out + std::string(method_name(stages.back().method)) + "/" + std::to_string(stages.back().k);
}

StageOutput run_stage(std::size_t stage, const ExperimentConfig& config, const LabeledCorpus& corpus) {
  if (stage < 1 || stage > kStageCount) throw ValidationError("stage must be between 1 and 5");
  const auto start = std::chrono::steady_clock::now();
  const LabeledCorpus data = stage_corpus(config, corpus, stage);
  StageOutput out;
  switch (stage) {
    case 1: out = stage1(config, data); break;
    case 2: out = stage2(config, data); break;
    case 3: out = stage3(config, data); break;
    case 4: out = stage4(config, data); break;
    default: out = stage5(config, data); break;
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

ReportTable run_stage1_weighting(const ExperimentConfig& c, const LabeledCorpus& corpus) {
  return run_stage(1, c, corpus).table;
}
ReportTable run_stage2_prep(const ExperimentConfig& c, const LabeledCorpus& corpus) {
  return run_stage(2, c, corpus).table;
}
ReportTable run_stage3_ngrams(const ExperimentConfig& c, const LabeledCorpus& corpus) {
  return run_stage(3, c, corpus).table;
}
ReportTable run_stage4_selection(const ExperimentConfig& c, const LabeledCorpus& corpus) {
  return run_stage(4, c, corpus).table;
}
ReportTable run_stage5_combination(const ExperimentConfig& c, const LabeledCorpus& corpus) {
  return run_stage(5, c, corpus).table;
}

ExperimentResult run_experiment(const ExperimentConfig& config, bool write_outputs) {
  validate(config);
  require_file(config.corpus.path, "corpus.path");
  if (config.prep.stoplist_path) require_file(*config.prep.stoplist_path, "prep.stoplist");
  if (config.prep.stem_table_path) require_file(*config.prep.stem_table_path, "prep.stem_table");

  const auto start = std::chrono::steady_clock::now();
  const std::string started_at = timestamp();
  LabeledCorpus corpus = load_corpus(config.corpus);
  if (config.sample_per_class) corpus = balance_sample(corpus, config.sample_per_class, config.seed);

  ExperimentResult result;
  for (std::size_t s = 1; s <= kStageCount; ++s) {
    if (config.stages[s - 1].enabled) result.stages.push_back(run_stage(s, config, corpus));
  }

  nlohmann::json stages = nlohmann::json::array();
  for (const auto& st : result.stages) {
    stages.push_back({{"stage", st.stage},
                      {"name", st.name},
                      {"csv", st.name + ".csv"},
                      {"json", st.name + ".json"},
                      {"rows", st.table.rows.size()},
                      {"k_folds", st.k_folds},
                      {"n_docs", st.n_docs},
                      {"seconds", st.seconds}});
  }
  result.manifest = {
      {"tool", "arsent"},
      {"version", ARSENT_VERSION},
      {"started_at", started_at},
      {"seed", config.seed},
      {"mode", to_string(config.mode)},
      {"config", to_json(config)},
      {"corpus",
       {{"path", config.corpus.path},
        {"documents", corpus.size()},
        {"positive", corpus.count(Polarity::Positive)},
        {"negative", corpus.count(Polarity::Negative)}}},
      {"stages", stages},
      {"total_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()},
      {"build", {{"compiler", __VERSION__}, {"cplusplus", __cplusplus}}},
  };

  if (write_outputs) {
    const std::filesystem::path dir(config.out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError(dir.string() + ": cannot create output directory: " + ec.message());
    for (const auto& st : result.stages) {
      std::ostringstream csv;
      write_table_csv(csv, st.table);
      write_file(dir / (st.name + ".csv"), csv.str());
      nlohmann::json j = to_json(st.table);
      j["stage"] = st.stage;
      j["k_folds"] = st.k_folds;
      j["n_docs"] = st.n_docs;
      j["details"] = st.details;
      write_file(dir / (st.name + ".json"), j.dump(2) + "\n");
    }
    write_file(dir / "manifest.json", result.manifest.dump(2) + "\n");
    write_file(dir / "resolved_config.toml", to_toml(config));
  }
  return result;
}

}  // namespace arsent
