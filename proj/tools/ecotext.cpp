#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "ecotext/classifiers.hpp"
#include "ecotext/corpus.hpp"
#include "ecotext/energymeter.hpp"
#include "ecotext/error.hpp"
#include "ecotext/experiment.hpp"
#include "ecotext/lexicons.hpp"
#include "ecotext/metrics.hpp"
#include "ecotext/pipeline.hpp"
#include "ecotext/synthetic.hpp"
#include "ecotext/topics.hpp"

namespace fs = std::filesystem;
using namespace ecotext;

namespace {

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> energy_backend;
  std::optional<double> watts;
  std::optional<std::string> out_dir;
  std::string log_level = "info";
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

// Loads the config and applies command-line overrides. The seed override
// reaches every seeded stage so one flag reproduces a whole run.
ExperimentConfig load_config(const GlobalOptions& g) {
  if (g.config.empty()) throw ValidationError("--config is required for this command");
  auto config = ExperimentConfig::from_json_file(g.config);
  if (g.seed) {
    config.split_seed = *g.seed;
    config.pipeline.topics.seed = *g.seed;
    for (auto& spec : config.classifiers) spec.seed = *g.seed;
    if (config.importance) config.importance->options.seed = *g.seed;
  }
  if (g.energy_backend) config.energy.backend = parse_energy_backend(*g.energy_backend);
  if (g.watts) config.energy.watts = *g.watts;
  if (g.out_dir) config.output_dir = *g.out_dir;
  config.validate();
  fs::create_directories(config.output_dir);
  return config;
}

// Everything a single-combo command needs: the split, the shared resources
// and a pipeline fitted on the training half.
struct Session {
  explicit Session(ExperimentConfig cfg)
      : config(std::move(cfg)),
        resources(load_resources(config)),
        meter(config.energy),
        split_pair(split(load_config_corpus(config), config.test_fraction, config.split_seed, config.stratified)),
        train_docs(TokenizedDocs::from(split_pair.train)),
        test_docs(TokenizedDocs::from(split_pair.test)),
        pipeline(resources, config.pipeline, train_docs, test_docs, meter, config.external_vectors_cost) {
    spdlog::info("split: {} train, {} test documents", train_docs.size(), test_docs.size());
  }

  fs::path out(const std::string& name) const { return config.output_dir / name; }

  ExperimentConfig config;
  Resources resources;
  EnergyMeter meter;
  SplitPair split_pair;
  TokenizedDocs train_docs;
  TokenizedDocs test_docs;
  FeaturePipeline pipeline;
};

std::vector<CostSample> block_costs(const ComboMatrices& m) {
  std::vector<CostSample> costs;
  for (const auto* block : m.blocks) {
    costs.push_back(block->train_cost);
    costs.push_back(block->predict_cost);
  }
  return costs;
}

FeatureCombo pick_combo(const ExperimentConfig& config, const std::string& name) {
  if (!name.empty()) {
    auto combo = FeatureCombo::parse(name);
    combo.validate();
    return combo;
  }
  return config.combos.front();
}

const ClassifierSpec& pick_classifier(const ExperimentConfig& config, std::size_t index) {
  if (index >= config.classifiers.size()) {
    throw ValidationError(fmt::format("--classifier {} out of range (config lists {})", index,
                                      config.classifiers.size()));
  }
  return config.classifiers[index];
}

std::string file_stem(const FeatureCombo& combo) {
  std::string s = combo.name();
  for (char& c : s) {
    if (c == ':' || c == '+') c = '_';
  }
  return s;
}

int cmd_induce_lexicon(const GlobalOptions& g, std::optional<std::size_t> size) {
  auto config = load_config(g);
  if (size) config.pipeline.lexicon.size = *size;
  const auto resources = load_resources(config);
  const auto pair = split(load_config_corpus(config), config.test_fraction, config.split_seed, config.stratified);
  const auto train_docs = TokenizedDocs::from(pair.train);
  auto options = config.pipeline.lexicon;
  if (options.stoplist.empty()) options.stoplist = resources.stoplist;
  const auto lexicon = induce_domain_lexicon(train_docs.tokens, options);
  const auto path = config.output_dir / "lexicon.tsv";
  save_domain_lexicon(lexicon, path);
  spdlog::info("wrote {} lexicon words to {}", lexicon.size(), path.string());
  return 0;
}

int cmd_fit_topics(const GlobalOptions& g, std::optional<std::size_t> k, const std::vector<std::size_t>& reduce) {
  auto config = load_config(g);
  if (k) config.pipeline.topics.k = *k;
  Session s(std::move(config));
  std::vector<CostSample> costs;
  const auto& all = s.pipeline.block("topics:all");
  costs.push_back(all.train_cost);
  costs.push_back(all.predict_cost);
  const auto* model = s.pipeline.topic_model(TopicSetting::all());
  model->save(s.out("topics_all.json"));
  std::string labels;
  for (std::size_t t = 0; t < model->k(); ++t) labels += model->label(t) + "\n";
  write_text(s.out("topics_all.txt"), labels);
  spdlog::info("fitted {} topics", model->k());

  for (std::size_t n : reduce) {
    const auto setting = TopicSetting::of(n);
    const auto& block = s.pipeline.block("topics:" + to_string(setting));
    costs.push_back(block.train_cost);
    costs.push_back(block.predict_cost);
    const auto* reduced = s.pipeline.topic_model(setting);
    reduced->save(s.out(fmt::format("topics_{}.json", n)));
    spdlog::info("reduced to {} topics", reduced->k());
  }
  write_cost_csv(costs, s.out("topic_costs.csv"));
  return 0;
}

int cmd_featurize(const GlobalOptions& g, const std::string& combo_name) {
  Session s(load_config(g));
  const auto combo = pick_combo(s.config, combo_name);
  const auto m = s.pipeline.assemble(combo);
  const auto stem = file_stem(combo);
  write_feature_tsv(m.train, s.train_docs.ids, s.train_docs.labels, s.out(stem + "_train.tsv"));
  write_feature_tsv(m.test, s.test_docs.ids, s.test_docs.labels, s.out(stem + "_test.tsv"));
  write_cost_csv(block_costs(m), s.out(stem + "_feature_costs.csv"));
  spdlog::info("{}: {} columns", combo.name(), m.train.cols());
  return 0;
}

int cmd_train(const GlobalOptions& g, const std::string& combo_name, std::size_t classifier_index,
              const std::string& model_path) {
  Session s(load_config(g));
  const auto combo = pick_combo(s.config, combo_name);
  const auto& spec = pick_classifier(s.config, classifier_index);
  const auto m = s.pipeline.assemble(combo);
  std::unique_ptr<TrainedClassifier> model;
  auto costs = block_costs(m);
  costs.push_back(measure_stage(s.meter, combo.name() + "/" + spec.name(), Phase::train, s.train_docs.size(),
                                [&] { model = train(spec, m.train.values, s.train_docs.labels); }));
  const fs::path path = model_path.empty() ? s.out(fmt::format("model_{}_{}.json", file_stem(combo), spec.name()))
                                           : fs::path(model_path);
  model->save(path);
  write_cost_csv(costs, s.out(fmt::format("train_costs_{}_{}.csv", file_stem(combo), spec.name())));
  spdlog::info("trained {} on {} ({} features), saved to {}", spec.name(), combo.name(), model->num_features(),
               path.string());
  return 0;
}

int cmd_evaluate(const GlobalOptions& g, const std::string& combo_name, const std::string& model_path) {
  Session s(load_config(g));
  const auto combo = pick_combo(s.config, combo_name);
  const auto model = load_classifier(model_path);
  const auto m = s.pipeline.assemble(combo);
  if (m.test.cols() != model->num_features()) {
    throw ValidationError(fmt::format("model expects {} features but combo {} yields {}", model->num_features(),
                                      combo.name(), m.test.cols()));
  }
  std::vector<std::string> predictions;
  auto costs = block_costs(m);
  costs.push_back(measure_stage(s.meter, combo.name() + "/" + model->spec().name(), Phase::predict,
                                s.test_docs.size(), [&] { predictions = model->predict(m.test.values); }));
  const auto report = evaluate(s.test_docs.labels, predictions, model->classes());
  const auto stem = fmt::format("{}_{}", file_stem(combo), model->spec().name());
  write_text(s.out("evaluation_" + stem + ".json"), to_json_string(report));
  write_cost_csv(costs, s.out("evaluate_costs_" + stem + ".csv"));
  std::cout << classification_report(report);
  return 0;
}

int cmd_grid(const GlobalOptions& g) {
  const auto config = load_config(g);
  const auto output = run_grid(config);
  std::size_t failed = 0;
  for (const auto& row : output.results.rows) failed += row.ok() ? 0 : 1;
  spdlog::info("{} cells ({} failed, {} from cache) written to {}", output.results.rows.size(), failed,
               output.cache_hits, config.output_dir.string());
  return 0;
}

int cmd_report(const GlobalOptions& g, std::string results_path) {
  if (results_path.empty()) {
    fs::path dir = g.out_dir ? fs::path(*g.out_dir) : fs::path("out");
    if (!g.out_dir && !g.config.empty()) dir = ExperimentConfig::from_json_file(g.config).output_dir;
    results_path = (dir / "results.json").string();
  }
  std::ifstream in(results_path, std::ios::binary);
  if (!in) throw Error("cannot read " + results_path);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto results = ResultsTable::from_json_string(text);
  const auto pareto = pareto_report(results);
  write_pareto_csv(pareto, fs::path(results_path).parent_path() / "pareto.csv");

  std::cout << fmt::format("{:<42} {:<14} {:>9} {:>14}  {}\n", "combo", "classifier", "macro_f1", "J/text",
                           "pareto");
  for (const auto& row : pareto) {
    std::cout << fmt::format("{:<42} {:<14} {:>9.4f} {:>14.6g}  {}\n", row.combo, row.best_classifier,
                             row.best_macro_f1, row.predict_energy_per_text_j, row.pareto_optimal ? "*" : "");
  }
  std::size_t failed = 0;
  for (const auto& row : results.rows) {
    if (!row.ok()) {
      ++failed;
      std::cout << fmt::format("failed: {} / {}: {}\n", row.combo, row.classifier, row.error);
    }
  }
  if (failed) std::cout << fmt::format("{} of {} cells failed\n", failed, results.rows.size());
  return 0;
}

struct SynthOptions {
  std::size_t docs = 600;
  std::size_t classes = 3;
  std::size_t planted = 10;
  std::size_t noise = 300;
  std::size_t dim = 50;
  std::size_t doc_vector_dim = 32;
  double signal = 0.5;
};

int cmd_synth(const GlobalOptions& g, const SynthOptions& o) {
  const fs::path dir = g.out_dir ? fs::path(*g.out_dir) : fs::path("synth");
  const std::uint64_t seed = g.seed.value_or(42);
  fs::create_directories(dir);
  const auto spec = make_synth_spec(o.docs, o.classes, o.planted, o.noise, seed);
  const auto corpus = synth_corpus(spec);
  save_corpus(corpus, dir / "corpus.jsonl", CorpusFormat::jsonl);
  synth_embeddings(spec, o.dim, o.signal, seed + 1).save(dir / "embeddings.txt");
  synth_emotion_lexicon(spec, {"anger", "anticipation", "disgust", "fear", "joy", "sadness", "surprise", "trust"},
                        seed + 2)
      .save(dir / "emotions.tsv");
  synth_doc_vectors(corpus, o.doc_vector_dim, o.signal, seed + 3).save(dir / "doc_vectors.tsv");

  nlohmann::json config;
  config["corpus"] = {{"path", "corpus.jsonl"}, {"format", "jsonl"}};
  config["resources"] = {{"embeddings", "embeddings.txt"},
                         {"emotion_lexicon", "emotions.tsv"},
                         {"doc_vectors", "doc_vectors.tsv"},
                         {"language", "en"}};
  config["split"] = {{"test_fraction", 0.33}, {"seed", seed}, {"stratified", true}};
  config["pipeline"] = {{"lexicon_size", 128},
                        {"min_df", 2},
                        {"topics", {{"k", std::min<std::size_t>(32, o.docs / 4)}, {"reduced_dim", 5}, {"seed", seed}}}};
  config["grid"] = {{"baseline", true},
                    {"extractors", {"simon", "external_vectors"}},
                    {"emotions", {false, true}},
                    {"topics", {"0", "8", "all"}}};
  config["energy"] = {{"backend", g.energy_backend.value_or("power-model")}, {"watts", g.watts.value_or(45.0)}};
  config["output_dir"] = "out";
  write_text(dir / "config.json", config.dump(2));
  spdlog::info("wrote a {}-document workspace to {}", corpus.size(), dir.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-aware text classification experiments"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config, "Experiment config JSON")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Override every seed in the config");
  app.add_option("--energy-backend", g.energy_backend, "Energy backend")
      ->check(CLI::IsMember({"rapl", "power-model", "manual"}));
  app.add_option("--watts", g.watts, "Constant draw for the power-model backend")->check(CLI::PositiveNumber);
  app.add_option("--out-dir", g.out_dir, "Output directory (overrides output_dir)");
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  std::optional<std::size_t> lexicon_size;
  auto* induce = app.add_subcommand("induce-lexicon", "Induce the domain lexicon from the training split");
  induce->add_option("--size", lexicon_size, "Lexicon size (default from config)");

  std::optional<std::size_t> topic_k;
  std::vector<std::size_t> reduce_to;
  auto* topics = app.add_subcommand("fit-topics", "Fit the topic model and optional reductions");
  topics->add_option("--k", topic_k, "Number of topics (default from config)");
  topics->add_option("--reduce", reduce_to, "Reduced topic counts to derive");

  std::string combo;
  std::size_t classifier_index = 0;
  std::string model_path;
  auto* featurize = app.add_subcommand("featurize", "Write train and test feature matrices for one combo");
  featurize->add_option("--combo", combo, "Feature combo, e.g. simon+emotions+topics:64");

  auto* train_cmd = app.add_subcommand("train", "Train one classifier on one combo and save it");
  train_cmd->add_option("--combo", combo, "Feature combo");
  train_cmd->add_option("--classifier", classifier_index, "Index into the config's classifier list");
  train_cmd->add_option("--model", model_path, "Where to save the model");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate a saved model on the test split");
  evaluate_cmd->add_option("--combo", combo, "Feature combo the model was trained on");
  evaluate_cmd->add_option("--model", model_path, "Saved model JSON")->required()->check(CLI::ExistingFile);

  auto* grid = app.add_subcommand("grid", "Run the full combo x classifier grid");

  std::string results_path;
  auto* report = app.add_subcommand("report", "Summarize a grid run as a Pareto table");
  report->add_option("--results", results_path, "results.json of a grid run")->check(CLI::ExistingFile);

  SynthOptions synth_opts;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic workspace with a ready config");
  synth->add_option("--docs", synth_opts.docs, "Documents")->check(CLI::PositiveNumber);
  synth->add_option("--classes", synth_opts.classes, "Classes")->check(CLI::Range(2, 64));
  synth->add_option("--planted", synth_opts.planted, "Planted words per class")->check(CLI::PositiveNumber);
  synth->add_option("--noise", synth_opts.noise, "Noise vocabulary size")->check(CLI::PositiveNumber);
  synth->add_option("--dim", synth_opts.dim, "Word vector dimension")->check(CLI::PositiveNumber);
  synth->add_option("--signal", synth_opts.signal, "Class signal in word vectors")->check(CLI::Range(0.0, 1.0));

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(g.log_level));

  try {
    if (*induce) return cmd_induce_lexicon(g, lexicon_size);
    if (*topics) return cmd_fit_topics(g, topic_k, reduce_to);
    if (*featurize) return cmd_featurize(g, combo);
    if (*train_cmd) return cmd_train(g, combo, classifier_index, model_path);
    if (*evaluate_cmd) return cmd_evaluate(g, combo, model_path);
    if (*grid) return cmd_grid(g);
    if (*report) return cmd_report(g, results_path);
    if (*synth) return cmd_synth(g, synth_opts);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
