#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "arsent/corpus.hpp"
#include "arsent/evaluate.hpp"
#include "arsent/report.hpp"

namespace arsent {

/// One `[[selector_grid]]` entry. An empty method means "no selection".
struct SelectorGridEntry {
  std::optional<Method> method;
  std::vector<std::size_t> k;
};

/// A two-stage sequential pipeline swept over the second stage's K.
struct CombinationSpec {
  SelectorStage first;
  Method second = Method::SvmWeight;
  std::vector<std::size_t> second_k;
};

struct StageSettings {
  bool enabled = true;
  std::optional<std::size_t> k_folds;
  // 0 keeps the whole corpus.
  std::size_t sample_per_class = 0;
};

inline constexpr std::size_t kStageCount = 5;

struct ExperimentConfig {
  CorpusSource corpus;
  // Applied to the whole corpus before any stage.
  std::size_t sample_per_class = 0;

  PrepConfig prep;

  std::vector<Scheme> schemes{Scheme::TFIDF, Scheme::TF, Scheme::BTP};
  std::vector<NgramSpec> ngrams{NgramSpec{true, false}, NgramSpec{false, true}, NgramSpec{true, true}};
  Scheme scheme = Scheme::TFIDF;
  NgramSpec ngram{true, false};
  std::size_t min_df = 1;

  std::vector<SelectorGridEntry> selector_grid;
  std::vector<CombinationSpec> pipelines;

  SvmParams svm;

  std::optional<std::size_t> k_folds;
  std::array<StageSettings, kStageCount> stages;

  EvalMode mode = EvalMode::Strict;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::string out = "results";

  /// Folds used by stage `stage` (1-based): the stage's own setting, else the
  /// global one, else 5 (10 for stage 5).
  std::size_t folds_for(std::size_t stage) const;
};

/// All five stages, the eight Top-K values 1000..4500 for each selector, and
/// the two combination sweeps.
ExperimentConfig default_experiment();

/// Parses a TOML config on top of default_experiment(). Relative paths are
/// resolved against `base_dir`. Throws ValidationError naming the field.
ExperimentConfig parse_experiment(std::string_view toml_text, const std::string& source_name = "config",
                                  const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment(const std::filesystem::path& path);

/// Throws ValidationError naming the offending field, e.g. `selector_grid[0].k`.
void validate(const ExperimentConfig& config);

/// A complete TOML rendering; parsing it back yields the same config.
std::string to_toml(const ExperimentConfig& config);

nlohmann::json to_json(const ExperimentConfig& config);

/// Row labels used in the tables.
std::string selection_label(std::span<const SelectorStage> stages);

ReportTable run_stage1_weighting(const ExperimentConfig& config, const LabeledCorpus& corpus);
ReportTable run_stage2_prep(const ExperimentConfig& config, const LabeledCorpus& corpus);
ReportTable run_stage3_ngrams(const ExperimentConfig& config, const LabeledCorpus& corpus);
ReportTable run_stage4_selection(const ExperimentConfig& config, const LabeledCorpus& corpus);
ReportTable run_stage5_combination(const ExperimentConfig& config, const LabeledCorpus& corpus);

struct StageOutput {
  std::size_t stage = 0;
  std::string name;  // file stem, e.g. "stage1_weighting"
  ReportTable table;
  std::size_t k_folds = 0;
  std::size_t n_docs = 0;
  // Per-row cross-validation reports, aligned with table.rows.
  nlohmann::json details = nlohmann::json::array();
  double seconds = 0.0;
};

/// Runs stage `stage` (1-based) on an already loaded corpus.
StageOutput run_stage(std::size_t stage, const ExperimentConfig& config, const LabeledCorpus& corpus);

struct ExperimentResult {
  std::vector<StageOutput> stages;
  nlohmann::json manifest;
};

/// Validates, loads the corpus, runs the enabled stages and, when
/// `write_outputs` is set, writes `<stem>.csv`, `<stem>.json`,
/// `manifest.json` and `resolved_config.toml` under `config.out`.
ExperimentResult run_experiment(const ExperimentConfig& config, bool write_outputs = true);

}  // namespace arsent
