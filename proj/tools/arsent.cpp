// arsent: command-line front end for the sentiment pipeline.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "arsent/corpus.hpp"
#include "arsent/error.hpp"
#include "arsent/evaluate.hpp"
#include "arsent/experiment.hpp"
#include "arsent/linsvm.hpp"
#include "arsent/report.hpp"
#include "arsent/selection.hpp"
#include "arsent/textprep.hpp"
#include "arsent/vectorize.hpp"

#ifndef ARSENT_VERSION
#define ARSENT_VERSION "0.0.0"
#endif

namespace {

using namespace arsent;

// Flags shared by the single-step subcommands. Unset flags fall back to the
// config file, then to the built-in defaults.
struct CommonOptions {
  std::string config;
  std::string corpus;
  std::string format;
  std::string text_field;
  std::string label_field;
  std::string id_field;
  std::vector<std::string> label_map;
  std::optional<std::size_t> sample_per_class;
  std::optional<bool> stopwords;
  std::string stoplist;
  std::string stemmer;
  std::string stem_table;
  bool no_collapse = false;
  std::string scheme;
  std::string ngrams;
  std::optional<std::size_t> min_df;
  std::optional<double> C;
  std::optional<double> tolerance;
  std::optional<std::size_t> max_epochs;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_vectorize = true, bool with_svm = true) {
  cmd->add_option("--config", o.config, "TOML experiment config supplying defaults")->check(CLI::ExistingFile);
  cmd->add_option("--corpus", o.corpus, "corpus file");
  cmd->add_option("--format", o.format, "csv, tsv or jsonl");
  cmd->add_option("--text-field", o.text_field, "text column or key");
  cmd->add_option("--label-field", o.label_field, "label column or key");
  cmd->add_option("--id-field", o.id_field, "id column or key");
  cmd->add_option("--label-map", o.label_map, "LABEL=positive|negative (repeatable)");
  cmd->add_option("--sample-per-class", o.sample_per_class, "balanced sample size per class");
  cmd->add_flag("--stopwords,!--no-stopwords", o.stopwords, "remove stop words");
  cmd->add_option("--stoplist", o.stoplist, "stop word file replacing the bundled list");
  cmd->add_option("--stemmer", o.stemmer, "none, light or external");
  cmd->add_option("--stem-table", o.stem_table, "token<TAB>stem table for the external stemmer");
  cmd->add_flag("--no-collapse", o.no_collapse, "keep runs of repeated letters");
  if (with_vectorize) {
    cmd->add_option("--scheme", o.scheme, "tf, tfidf or btp");
    cmd->add_option("--ngrams", o.ngrams, "1, 2 or 1+2");
    cmd->add_option("--min-df", o.min_df, "minimum document frequency");
  }
  if (with_svm) {
    cmd->add_option("--C", o.C, "SVM penalty");
    cmd->add_option("--tolerance", o.tolerance, "SVM stopping tolerance");
    cmd->add_option("--max-epochs", o.max_epochs, "SVM iteration budget per training example");
  }
  cmd->add_option("--seed", o.seed, "seed for sampling, folds and the solver");
}

ExperimentConfig resolve(const CommonOptions& o) {
  ExperimentConfig c = o.config.empty() ? default_experiment() : load_experiment(o.config);
  if (!o.corpus.empty()) c.corpus.path = o.corpus;
  if (!o.format.empty()) c.corpus.format = parse_format(o.format);
  if (!o.text_field.empty()) c.corpus.text_field = o.text_field;
  if (!o.label_field.empty()) c.corpus.label_field = o.label_field;
  if (!o.id_field.empty()) c.corpus.id_field = o.id_field;
  if (!o.label_map.empty()) {
    c.corpus.label_map.clear();
    for (const auto& entry : o.label_map) {
      const auto eq = entry.find('=');
      const auto p = eq == std::string::npos ? std::nullopt : parse_polarity(entry.substr(eq + 1));
      if (!p) throw ValidationError("--label-map: expected LABEL=positive|negative, got '" + entry + "'");
      c.corpus.label_map[entry.substr(0, eq)] = *p;
    }
  }
  if (o.sample_per_class) c.sample_per_class = *o.sample_per_class;
  if (o.stopwords) c.prep.remove_stopwords = *o.stopwords;
  if (!o.stoplist.empty()) c.prep.stoplist_path = o.stoplist;
  if (!o.stemmer.empty()) c.prep.stemmer = parse_stemmer(o.stemmer);
  if (!o.stem_table.empty()) c.prep.stem_table_path = o.stem_table;
  if (o.no_collapse) c.prep.collapse_repeats = false;
  if (!o.scheme.empty()) c.scheme = parse_scheme(o.scheme);
  if (!o.ngrams.empty()) c.ngram = NgramSpec::parse(o.ngrams);
  if (o.min_df) c.min_df = *o.min_df;
  if (o.C) c.svm.C = *o.C;
  if (o.tolerance) c.svm.tolerance = *o.tolerance;
  if (o.max_epochs) c.svm.max_epochs = *o.max_epochs;
  if (o.seed) c.seed = *o.seed;
  if (c.corpus.path.empty()) throw ValidationError("corpus.path: required (--corpus or --config)");
  if (c.min_df == 0) throw ValidationError("--min-df: must be positive");
  c.svm.seed = c.seed;
  c.svm.validate();
  return c;
}

LabeledCorpus load(const ExperimentConfig& c) {
  LabeledCorpus corpus = load_corpus(c.corpus);
  if (c.sample_per_class) corpus = balance_sample(corpus, c.sample_per_class, c.seed);
  return corpus;
}

// Writes to `path`, or to stdout when it is empty or "-".
template <class F>
void emit(const std::string& path, F&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError(path + ": cannot open for writing");
  write(f);
  f.close();
  if (!f) throw DataError(path + ": write failed");
}

std::vector<SelectorStage> parse_stages(const std::vector<std::string>& specs) {
  std::vector<SelectorStage> out;
  for (const auto& s : specs) out.push_back(parse_stage(s));
  return out;
}

struct Prepared {
  TokenizedCorpus tokens;
  Vocabulary vocab;
  DocTermMatrix matrix;
};

Prepared prepare(const ExperimentConfig& c, const LabeledCorpus& corpus) {
  Prepared p;
  p.tokens = tokenize_corpus(corpus, Preprocessor(c.prep));
  p.vocab = build_vocab(p.tokens.docs, c.ngram, c.min_df);
  p.matrix = vectorize(p.tokens.docs, p.vocab, c.scheme, p.tokens.labels);
  return p;
}

std::size_t default_workers() {
  const char* env = std::getenv("ARSENT_WORKERS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const unsigned long v = std::strtoul(env, &end, 10);
  if (*end != '\0' || v == 0) throw ValidationError(std::string("ARSENT_WORKERS: expected a positive integer, got '") + env + "'");
  return v;
}

// Feature terms listed by `select` (its "term" column).
FeatureSet read_feature_terms(const std::string& path, const Vocabulary& vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open feature list");
  std::string line;
  std::getline(in, line);
  if (line != "rank,feature_index,term") throw DataError(path + ": not a feature list written by 'select'");
  FeatureSet fs;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto a = line.find(',');
    const auto b = a == std::string::npos ? a : line.find(',', a + 1);
    if (b == std::string::npos) throw DataError(path + ":" + std::to_string(lineno) + ": malformed row");
    const std::string term = line.substr(b + 1);
    const auto idx = vocab.find(term);
    if (!idx) throw DataError(path + ":" + std::to_string(lineno) + ": term '" + term + "' is not in the vocabulary");
    fs.indices.push_back(*idx);
  }
  return fs;
}

void run_preprocess(const CommonOptions& o, const std::string& out) {
  const ExperimentConfig c = resolve(o);
  const LabeledCorpus corpus = load(c);
  const TokenizedCorpus tc = tokenize_corpus(corpus, Preprocessor(c.prep));
  emit(out, [&](std::ostream& os) {
    for (std::size_t i = 0; i < tc.size(); ++i) {
      const nlohmann::json j = {{"id", tc.ids[i]}, {"label", to_string(tc.labels[i])}, {"tokens", tc.docs[i]}};
      os << j.dump() << '\n';
    }
  });
}

void run_vectorize(const CommonOptions& o, const std::string& out, const std::string& vocab_out) {
  const ExperimentConfig c = resolve(o);
  const Prepared p = prepare(c, load(c));
  emit(out, [&](std::ostream& os) { write_matrix(os, p.matrix); });
  if (!vocab_out.empty()) {
    emit(vocab_out, [&](std::ostream& os) {
      os << "index\tterm\tdf\n";
      for (std::size_t i = 0; i < p.vocab.size(); ++i) os << i << '\t' << p.vocab.term(i) << '\t' << p.vocab.df(i) << '\n';
    });
  }
  std::cerr << p.matrix.rows() << " documents, " << p.matrix.cols() << " features, " << p.matrix.nnz()
            << " non-zeros\n";
}

void run_select(const CommonOptions& o, const std::vector<std::string>& specs, const std::string& out,
                const std::string& scores_out) {
  const ExperimentConfig c = resolve(o);
  const auto stages = parse_stages(specs);
  const Prepared p = prepare(c, load(c));
  const FeatureSet fs = sequential_select(p.matrix, stages, c.svm);
  emit(out, [&](std::ostream& os) {
    os << "rank,feature_index,term\n";
    for (std::size_t r = 0; r < fs.size(); ++r) {
      os << r + 1 << ',' << fs.indices[r] << ',' << p.vocab.term(fs.indices[r]) << '\n';
    }
  });
  if (!scores_out.empty()) {
    // Scores of the last stage over the previous stage's survivors.
    DocTermMatrix pool = p.matrix;
    if (stages.size() > 1) {
      const std::span<const SelectorStage> prefix(stages.data(), stages.size() - 1);
      pool = project(p.matrix, sequential_select(p.matrix, prefix, c.svm));
    }
    const FeatureScores scores = score(pool, stages.back().method, c.svm);
    emit(scores_out, [&](std::ostream& os) { write_scores_csv(os, scores, pool, p.vocab); });
  }
}

void run_train(const CommonOptions& o, const std::vector<std::string>& specs, const std::string& model_out) {
  const ExperimentConfig c = resolve(o);
  const auto stages = parse_stages(specs);
  const Prepared p = prepare(c, load(c));
  const DocTermMatrix m = stages.empty() ? p.matrix : project(p.matrix, sequential_select(p.matrix, stages, c.svm));
  const SvmModel model = train(m, c.svm);
  emit(model_out, [&](std::ostream& os) { write_model(os, model); });
  std::cerr << "trained on " << m.rows() << " documents x " << m.cols() << " features; objective "
            << model.objective << (model.converged ? "" : " (not converged)") << '\n';
}

struct EvaluateArgs {
  std::vector<std::string> select;
  std::string features;
  std::optional<std::size_t> folds;
  std::string mode;
  std::optional<std::size_t> workers;
  std::string json_out;
  std::string out;
};

void run_evaluate(const CommonOptions& o, const EvaluateArgs& a) {
  ExperimentConfig c = resolve(o);
  if (!a.mode.empty()) c.mode = parse_mode(a.mode);
  const std::size_t k = a.folds ? *a.folds : c.k_folds.value_or(5);
  if (k < 2) throw ValidationError("--folds: must be at least 2");
  if (!a.features.empty() && !a.select.empty()) throw ValidationError("--features and --select are exclusive");
  CrossValidateOptions opts;
  opts.mode = c.mode;
  opts.workers = a.workers ? *a.workers : default_workers();
  if (opts.workers == 0) throw ValidationError("--workers: must be positive");

  const LabeledCorpus corpus = load(c);
  MetricsReport rep;
  if (!a.features.empty()) {
    // A fixed feature list is a whole-corpus selection, so only the SVM is
    // refit per fold.
    const Prepared p = prepare(c, corpus);
    const FoldPlan plan = stratified_kfold(p.tokens.labels, k, c.seed);
    opts.mode = EvalMode::Paper;
    rep = evaluate_matrix(project(p.matrix, read_feature_terms(a.features, p.vocab)), plan, c.svm, opts);
    rep.config["features"] = a.features;
  } else {
    PipelineConfig pc;
    pc.prep = c.prep;
    pc.features.ngrams = c.ngram;
    pc.features.scheme = c.scheme;
    pc.features.min_df = c.min_df;
    pc.features.svm = c.svm;
    pc.features.stages = parse_stages(a.select);
    rep = cross_validate(corpus, pc, stratified_kfold(corpus, k, c.seed), opts);
  }
  emit(a.out, [&](std::ostream& os) { write_report_csv(os, rep); });
  if (!a.json_out.empty()) emit(a.json_out, [&](std::ostream& os) { os << to_json(rep).dump(2) << '\n'; });
  for (const auto& f : rep.folds) {
    for (const auto& w : f.warnings) std::cerr << "warning: fold " << f.fold << ": " << w << '\n';
  }
}

struct ExperimentArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::optional<std::size_t> workers;
  std::optional<std::size_t> folds;
  std::vector<std::size_t> stages;
};

void run_experiment_cmd(const ExperimentArgs& a) {
  ExperimentConfig c = load_experiment(a.config);
  if (!a.out.empty()) c.out = a.out;
  if (a.seed) c.seed = *a.seed;
  if (!a.mode.empty()) c.mode = parse_mode(a.mode);
  if (a.workers) {
    c.workers = *a.workers;
  } else if (std::getenv("ARSENT_WORKERS")) {
    c.workers = default_workers();
  }
  if (a.folds) {
    c.k_folds = *a.folds;
    for (auto& s : c.stages) s.k_folds.reset();
  }
  if (!a.stages.empty()) {
    for (auto& s : c.stages) s.enabled = false;
    for (std::size_t s : a.stages) {
      if (s < 1 || s > kStageCount) throw ValidationError("--stages: stage numbers run from 1 to 5");
      c.stages[s - 1].enabled = true;
    }
  }
  const ExperimentResult r = run_experiment(c);
  for (const auto& st : r.stages) {
    std::cerr << st.name << ": " << st.table.rows.size() << " rows, " << st.k_folds << " folds, " << st.seconds
              << " s\n";
  }
  std::cerr << "outputs written to " << c.out << '\n';
}

std::vector<ReportTable> load_tables(const std::string& input) {
  namespace fs = std::filesystem;
  std::vector<ReportTable> tables;
  auto read_json = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError(p.string() + ": cannot open");
    try {
      return table_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(p.string() + ": " + e.what());
    }
  };
  const fs::path path(input);
  if (fs::is_directory(path)) {
    std::ifstream in(path / "manifest.json", std::ios::binary);
    if (!in) throw DataError(input + ": no manifest.json in directory");
    nlohmann::json manifest;
    try {
      manifest = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(input + "/manifest.json: " + e.what());
    }
    for (const auto& st : manifest.at("stages")) tables.push_back(read_json(path / st.at("json").get<std::string>()));
  } else if (path.extension() == ".json") {
    tables.push_back(read_json(path));
  } else {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(input + ": cannot open");
    ReportTable t = read_table_csv(in);
    t.title = path.stem().string();
    t.show_feature_count = true;
    tables.push_back(std::move(t));
  }
  return tables;
}

void run_report(const std::vector<std::string>& inputs, const std::string& format) {
  bool first = true;
  for (const auto& input : inputs) {
    for (const auto& t : load_tables(input)) {
      if (!first && format != "csv") std::cout << '\n';
      first = false;
      if (format == "markdown") {
        render_markdown(std::cout, t);
      } else if (format == "csv") {
        write_table_csv(std::cout, t);
      } else {
        render_table(std::cout, t);
      }
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dialectal Arabic sentiment classification: preprocessing, n-gram weighting, feature selection, "
               "linear SVM and cross-validated experiments."};
  app.set_version_flag("--version", std::string("arsent ") + ARSENT_VERSION);
  app.require_subcommand(1);

  CommonOptions common;
  std::string out;
  std::string vocab_out;
  std::string scores_out;
  std::string model_out;
  std::vector<std::string> select;
  EvaluateArgs eval;
  ExperimentArgs exp;
  std::vector<std::string> report_inputs;
  std::string report_format = "text";

  auto* pre = app.add_subcommand("preprocess", "clean and tokenize a corpus into JSONL");
  add_common(pre, common, false, false);
  pre->add_option("--out,-o", out, "output file (default stdout)");

  auto* vec = app.add_subcommand("vectorize", "build a document-term matrix");
  add_common(vec, common, true, false);
  vec->add_option("--out,-o", out, "matrix triplet file (default stdout)");
  vec->add_option("--vocab-out", vocab_out, "vocabulary TSV");

  auto* sel = app.add_subcommand("select", "rank features on the whole corpus");
  add_common(sel, common);
  sel->add_option("--select,-s", select, "METHOD:K stage, repeat for a sequence")->required();
  sel->add_option("--out,-o", out, "feature list CSV (default stdout)");
  sel->add_option("--scores-out", scores_out, "per-feature scores of the last stage");

  auto* trn = app.add_subcommand("train", "train a linear SVM on the whole corpus");
  add_common(trn, common);
  trn->add_option("--select,-s", select, "METHOD:K stage applied before training");
  trn->add_option("--model-out,-o", model_out, "model dump (default stdout)");

  auto* ev = app.add_subcommand("evaluate", "stratified k-fold cross-validation of one configuration");
  add_common(ev, common);
  ev->add_option("--select,-s", eval.select, "METHOD:K stage, repeat for a sequence");
  ev->add_option("--features", eval.features, "fixed feature list written by 'select'")->check(CLI::ExistingFile);
  ev->add_option("--folds,-k", eval.folds, "number of folds (default 5)");
  ev->add_option("--mode", eval.mode, "strict or paper");
  ev->add_option("--workers,-j", eval.workers, "parallel folds (default $ARSENT_WORKERS or 1)");
  ev->add_option("--json-out", eval.json_out, "full JSON report");
  ev->add_option("--out,-o", eval.out, "per-fold CSV (default stdout)");

  auto* ex = app.add_subcommand("experiment", "run the five-stage experiment from a config file");
  ex->add_option("--config,-c", exp.config, "TOML config")->required()->check(CLI::ExistingFile);
  ex->add_option("--out,-o", exp.out, "output directory");
  ex->add_option("--seed", exp.seed, "run seed");
  ex->add_option("--mode", exp.mode, "strict or paper");
  ex->add_option("--workers,-j", exp.workers, "parallel folds (default $ARSENT_WORKERS or config)");
  ex->add_option("--folds,-k", exp.folds, "folds for every stage");
  ex->add_option("--stages", exp.stages, "subset of stages to run, e.g. --stages 1 4")->delimiter(',');

  auto* rep = app.add_subcommand("report", "render result tables");
  rep->add_option("inputs", report_inputs, "table CSV/JSON files or experiment output directories")->required();
  rep->add_option("--format,-f", report_format, "text, markdown or csv")
      ->check(CLI::IsMember({"text", "markdown", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*pre) run_preprocess(common, out);
    else if (*vec) run_vectorize(common, out, vocab_out);
    else if (*sel) run_select(common, select, out, scores_out);
    else if (*trn) run_train(common, select, model_out);
    else if (*ev) run_evaluate(common, eval);
    else if (*ex) run_experiment_cmd(exp);
    else if (*rep) run_report(report_inputs, report_format);
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
