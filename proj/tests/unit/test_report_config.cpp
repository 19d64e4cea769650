#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "arsent/error.hpp"
#include "arsent/experiment.hpp"
#include "arsent/report.hpp"
#include "synthetic.hpp"

using namespace arsent;

namespace {

std::string validation_message(const ExperimentConfig& c) {
  try {
    validate(c);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

ExperimentConfig small_config() {
  ExperimentConfig c = default_experiment();
  c.corpus.path = "unused.csv";
  c.prep.remove_stopwords = false;
  return c;
}

}  // namespace

TEST_CASE("percent rounding") {
  CHECK(to_percent(0.87625) == 87.63);
  CHECK(to_percent(0.5) == 50.0);
  CHECK(to_percent(1.0) == 100.0);
  CHECK(to_percent(0.0) == 0.0);
  CHECK(to_percent(2.0 / 3.0) == 66.67);
  CHECK(to_percent(0.12344) == 12.34);
  CHECK(to_percent(0.12345) == 12.35);
  CHECK(format_percent(to_percent(0.9)) == "90.00");
}

TEST_CASE("table csv and json round trip") {
  ReportTable t;
  t.title = "FSM/Top-K";
  t.show_feature_count = true;
  t.add("IG/1000", 1000, 0.87625, 0.9, 2.0 / 3.0);
  t.add("Correlation(3500)+SVM/1500, \"quoted\"", 1500, 1.0, 0.0, 0.5);

  std::ostringstream os;
  write_table_csv(os, t);
  CHECK(os.str().rfind(std::string(kTableCsvHeader) + "\n", 0) == 0);
  CHECK(os.str().find("IG/1000,1000,87.63,90.00,66.67") != std::string::npos);
  std::istringstream is(os.str());
  const ReportTable back = read_table_csv(is);
  CHECK(back.rows == t.rows);

  CHECK(table_from_json(to_json(t)) == t);

  std::istringstream bad("a,b\n1,2\n");
  CHECK_THROWS_AS(read_table_csv(bad), DataError);

  std::ostringstream text, md;
  render_table(text, t);
  render_markdown(md, t);
  CHECK(text.str().find("87.63") != std::string::npos);
  CHECK(md.str().find("| IG/1000 |") != std::string::npos);
}

TEST_CASE("default experiment") {
  const ExperimentConfig c = default_experiment();
  CHECK(c.schemes.size() == 3);
  CHECK(c.ngrams.size() == 3);
  std::size_t cells = 0;
  for (const auto& e : c.selector_grid) cells += e.k.size();
  CHECK(c.selector_grid.size() == 5);
  CHECK(cells == 40);
  REQUIRE(c.pipelines.size() == 2);
  CHECK(c.pipelines[0].first == SelectorStage{Method::Correlation, 3500});
  CHECK(c.pipelines[0].second_k.size() == 6);
  CHECK(c.pipelines[1].first == SelectorStage{Method::SvmWeight, 4000});
  CHECK(c.pipelines[1].second_k.size() == 7);
  CHECK(c.folds_for(1) == 5);
  CHECK(c.folds_for(5) == 10);
}

TEST_CASE("validation names the offending field") {
  ExperimentConfig c = small_config();
  CHECK(validation_message(c).empty());
  c.selector_grid[0].k = {0};
  CHECK(validation_message(c).find("selector_grid[0].k") != std::string::npos);

  c = small_config();
  c.pipelines[1].second_k.push_back(0);
  CHECK(validation_message(c).find("pipelines[1].second_k") != std::string::npos);

  c = small_config();
  c.corpus.path.clear();
  CHECK(validation_message(c).find("corpus.path") != std::string::npos);

  c = small_config();
  c.k_folds = 1;
  CHECK_FALSE(validation_message(c).empty());

  c = small_config();
  c.svm.C = -1;
  CHECK_FALSE(validation_message(c).empty());
}

TEST_CASE("toml parsing") {
  const auto c = parse_experiment(R"(
seed = 7
mode = "paper"
k_folds = 3

[corpus]
path = "/data/reviews.tsv"
format = "tsv"
label_map = { "1" = "positive", "0" = "negative" }

[prep]
remove_stopwords = false
stemmer = "light"

[vectorize]
schemes = ["tf", "btp"]
ngrams = ["1", "1+2"]

[[selector_grid]]
method = "chi2"
k = [200, 100, 100]

[[selector_grid]]
method = "none"

[[pipelines]]
first = "svm"
first_k = 40
second = "gini"
second_k = [10, 20]

[stage5]
k_folds = 4
)",
                                  "run.toml", "/base");
  CHECK(c.seed == 7);
  CHECK(c.mode == EvalMode::Paper);
  CHECK(c.corpus.format == CorpusFormat::Tsv);
  CHECK(c.corpus.label_map.at("1") == Polarity::Positive);
  CHECK_FALSE(c.prep.remove_stopwords);
  CHECK(c.prep.stemmer == StemmerKind::Light);
  CHECK(c.schemes == std::vector<Scheme>{Scheme::TF, Scheme::BTP});
  REQUIRE(c.selector_grid.size() == 2);
  CHECK(c.selector_grid[0].method == Method::ChiSquare);
  CHECK_FALSE(c.selector_grid[1].method.has_value());
  CHECK(c.pipelines[0].first == SelectorStage{Method::SvmWeight, 40});
  CHECK(c.folds_for(1) == 3);
  CHECK(c.folds_for(5) == 4);

  // Relative paths resolve against the config's directory.
  const auto rel = parse_experiment("[corpus]\npath = \"data.csv\"\n", "x.toml", "/base");
  CHECK(std::filesystem::path(rel.corpus.path) == std::filesystem::path("/base/data.csv"));

  CHECK_THROWS_AS(parse_experiment("[corpus]\npaht = \"x\"\n"), ValidationError);
  CHECK_THROWS_AS(parse_experiment("seed = \n"), ValidationError);
  CHECK_THROWS_AS(parse_experiment("mode = \"loose\"\n"), ValidationError);
  try {
    validate(parse_experiment("[corpus]\npath = \"c.csv\"\n[[selector_grid]]\nmethod = \"ig\"\nk = 0\n"));
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("selector_grid[0].k") != std::string::npos);
  }
}

TEST_CASE("to_toml round trips") {
  ExperimentConfig c = small_config();
  c.corpus.path = "/data/reviews.csv";
  c.seed = 99;
  c.mode = EvalMode::Paper;
  c.stages[2].sample_per_class = 600;
  c.stages[4].enabled = false;
  c.prep.stemmer = StemmerKind::Light;
  const std::string text = to_toml(c);
  const ExperimentConfig back = parse_experiment(text, "resolved", "/");
  CHECK(to_toml(back) == text);
  CHECK(to_json(back) == to_json(c));
}

TEST_CASE("stage tables have the declared shapes") {
  const auto s = synth::make({});
  ExperimentConfig c = small_config();
  c.selector_grid.clear();
  for (Method m : kAllMethods) c.selector_grid.push_back({m, {1000, 1500, 2000, 2500, 3000, 3500, 4000, 4500}});

  const auto t1 = run_stage1_weighting(c, s.corpus);
  REQUIRE(t1.rows.size() == 3);
  CHECK(t1.rows[0].config == "TF-IDF");
  CHECK(t1.rows[2].config == "BTP");
  for (const auto& r : t1.rows) {
    CHECK(r.accuracy_pct >= 0.0);
    CHECK(r.accuracy_pct <= 100.0);
  }
  ExperimentConfig one = c;
  one.schemes = {Scheme::TF};
  CHECK(run_stage1_weighting(one, s.corpus).rows.size() == 1);

  const auto t2 = run_stage2_prep(c, s.corpus);
  CHECK(t2.rows.size() == 2);
  CHECK(t2.show_feature_count);
  CHECK(t2.rows[0].feature_count <= t1.rows[0].feature_count);

  const auto t3 = run_stage3_ngrams(c, s.corpus);
  REQUIRE(t3.rows.size() == 3);
  CHECK(t3.rows[2].feature_count == t3.rows[0].feature_count + t3.rows[1].feature_count);

  const auto t4 = run_stage4_selection(c, s.corpus);
  REQUIRE(t4.rows.size() == 40);
  CHECK(t4.rows[0].config == "IG/1000");
  CHECK(t4.rows[7].config == "IG/4500");
  CHECK(t4.rows[8].config == "Correlation/1000");

  const auto t5 = run_stage5_combination(c, s.corpus);
  REQUIRE(t5.rows.size() == 13);
  CHECK(t5.rows[0].config == "Correlation(3500)+SVM/1000");
  CHECK(t5.rows[5].config == "Correlation(3500)+SVM/3500");
  CHECK(t5.rows[6].config == "SVM(4000)+Correlation/1000");
  CHECK(run_stage(5, c, s.corpus).k_folds == 10);
}

TEST_CASE("stemming plug-in adds a row") {
  const auto dir = std::filesystem::temp_directory_path() / "arsent_stage2_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "stems.tsv") << synth::word(0) << "\t" << synth::word(1) << "\n";
  const auto s = synth::make({});
  ExperimentConfig c = small_config();
  c.prep.stem_table_path = (dir / "stems.tsv").string();
  const auto t2 = run_stage2_prep(c, s.corpus);
  REQUIRE(t2.rows.size() == 3);
  CHECK(t2.rows[2].config == "Stop words removal+Root stemming");
  std::filesystem::remove_all(dir);
}

TEST_CASE("experiment writes tables and a manifest") {
  const auto dir = std::filesystem::temp_directory_path() / "arsent_experiment_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto s = synth::make({});
  {
    std::ofstream out(dir / "corpus.csv");
    out << "id,text,label\n";
    for (const auto& d : s.corpus) out << d.id << "," << d.text << "," << to_string(d.label) << "\n";
  }
  ExperimentConfig c = small_config();
  c.corpus.path = (dir / "corpus.csv").string();
  c.corpus.label_map.clear();
  c.selector_grid = {{Method::IG, {5, 10}}};
  c.pipelines = {{{Method::Correlation, 20}, Method::SvmWeight, {5}}};
  c.out = (dir / "out").string();
  c.workers = 2;
  const auto r = run_experiment(c);
  CHECK(r.stages.size() == 5);
  for (const char* f : {"stage1_weighting.csv", "stage2_prep.csv", "stage3_ngrams.csv", "stage4_selection.csv",
                        "stage5_combination.csv", "stage1_weighting.json", "manifest.json", "resolved_config.toml"}) {
    CHECK_MESSAGE(std::filesystem::exists(dir / "out" / f), f);
  }
  CHECK(r.manifest["seed"] == 1);
  CHECK(r.manifest["corpus"]["documents"] == 200);

  // The resolved config reruns to the same tables.
  ExperimentConfig again = load_experiment(dir / "out" / "resolved_config.toml");
  again.out = (dir / "out2").string();
  run_experiment(again);
  for (const char* f : {"stage1_weighting.csv", "stage4_selection.csv", "stage5_combination.csv"}) {
    std::ifstream a(dir / "out" / f), b(dir / "out2" / f);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());
  }

  c.corpus.path = (dir / "missing.csv").string();
  CHECK_THROWS_AS(run_experiment(c, false), ValidationError);
  std::filesystem::remove_all(dir);
}
