#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ecotext/classifiers.hpp"
#include "ecotext/corpus.hpp"
#include "ecotext/energymeter.hpp"
#include "ecotext/explain.hpp"
#include "ecotext/features.hpp"
#include "ecotext/pipeline.hpp"

namespace ecotext {

struct ImportanceConfig {
  FeatureCombo combo;
  std::size_t classifier_index = 0;
  ImportanceOptions options;
  std::size_t top_n = 20;
};

struct ExperimentConfig {
  std::filesystem::path corpus_path;
  CorpusFormat corpus_format = CorpusFormat::jsonl;
  std::optional<std::filesystem::path> embeddings;
  std::optional<std::filesystem::path> emotion_lexicon;
  std::optional<std::filesystem::path> doc_vectors;
  std::optional<std::filesystem::path> stoplist;
  std::string language = "en";

  double test_fraction = 0.33;
  std::uint64_t split_seed = 7;
  bool stratified = true;

  PipelineOptions pipeline;
  std::vector<FeatureCombo> combos;
  std::vector<ClassifierSpec> classifiers;
  EnergyConfig energy;
  std::optional<ExternalVectorCost> external_vectors_cost;
  std::optional<ImportanceConfig> importance;

  std::filesystem::path output_dir = "out";
  std::optional<std::filesystem::path> cache_dir;

  // Relative paths resolve against `base_dir`.
  static ExperimentConfig from_json_string(const std::string& text,
                                           const std::filesystem::path& base_dir = {});
  static ExperimentConfig from_json_file(const std::filesystem::path& path);
  std::string to_json_string() const;

  // Throws ValidationError: missing files, empty combos or classifiers,
  // fraction outside (0,1), invalid combos or hyperparameters.
  void validate() const;
};

// The default four classifiers with the declared hyperparameters.
std::vector<ClassifierSpec> default_classifiers(std::uint64_t seed);

struct ResultRow {
  std::string combo;
  std::string extractor;
  bool emotions = false;
  std::string topics;          // "0", "64", "all"
  std::size_t topic_count = 0; // actual k used (0 when none)
  std::string classifier;
  std::string status = "ok";   // ok | error
  std::string error;
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
  double accuracy = 0.0;
  std::vector<double> per_class_f1;  // in ResultsTable::classes order
  CostSample train_cost;
  CostSample predict_cost;
  NormalizedCost train_normalized;
  NormalizedCost predict_normalized;

  bool ok() const noexcept { return status == "ok"; }
};

struct ResultsTable {
  std::vector<std::string> classes;
  std::vector<ResultRow> rows;

  std::string csv_header() const;
  std::string csv_row(const ResultRow& row) const;
  std::string to_csv() const;
  std::string to_json_string() const;
  static ResultsTable from_json_string(const std::string& text);
};

struct ParetoRow {
  std::string combo;
  std::string best_classifier;
  double best_macro_f1 = 0.0;
  double predict_energy_per_text_j = 0.0;
  double predict_energy_per_text_kwh = 0.0;
  bool pareto_optimal = false;
};

// Per combo: best macro F1 over classifiers against that cell's prediction
// energy per text. A row is optimal when no other row has F1 >= and energy <=
// with at least one strict. Failed cells are skipped.
std::vector<ParetoRow> pareto_report(const ResultsTable& results);
void write_pareto_csv(const std::vector<ParetoRow>& rows, const std::filesystem::path& path);

struct GridOutput {
  ResultsTable results;
  std::vector<CostSample> costs;
  std::vector<ParetoRow> pareto;
  std::optional<ImportanceReport> importance;
  std::string metadata_json;
  std::size_t cache_hits = 0;
};

// Writes results.csv (incrementally), results.json, costs.csv, pareto.csv,
// run_metadata.json and, when configured, importance.csv/json into
// config.output_dir. Cell failures are recorded, never fatal.
GridOutput run_grid(const ExperimentConfig& config);

// Loads inputs named by the config.
LabeledCorpus load_config_corpus(const ExperimentConfig& config);
Resources load_resources(const ExperimentConfig& config);

}  // namespace ecotext
