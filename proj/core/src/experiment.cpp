#include "ecotext/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "ecotext/error.hpp"
#include "ecotext/hashing.hpp"
#include "ecotext/metrics.hpp"
#include "json.hpp"

namespace ecotext {
namespace {

using json = nlohmann::json;

constexpr const char* kCellCacheVersion = "ecotext-cell-v1";

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ValidationError("unknown key '" + key + "' in " + where);
    }
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path.lexically_normal();
}

std::optional<std::filesystem::path> optional_path(const json& obj, const char* key, const std::filesystem::path& base) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return resolve(base, obj.at(key).get<std::string>());
}

json path_or_null(const std::optional<std::filesystem::path>& p) {
  return p ? json(p->string()) : json(nullptr);
}

TopicSetting topic_from_json(const json& j) {
  if (j.is_number_unsigned() || j.is_number_integer()) {
    const auto v = j.get<long long>();
    if (v < 0) throw ValidationError("topic counts must be >= 0");
    return TopicSetting::of(static_cast<std::size_t>(v));
  }
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    return s == "none" ? TopicSetting::none() : parse_topic_setting(s);
  }
  throw ValidationError("topic setting must be a count or \"all\"");
}

json pipeline_to_json(const PipelineOptions& p) {
  std::vector<std::string> stop(p.lexicon.stoplist.begin(), p.lexicon.stoplist.end());
  std::sort(stop.begin(), stop.end());
  return {{"lexicon_size", p.lexicon.size},
          {"lexicon_min_len", p.lexicon.min_len},
          {"simon_pooling", p.simon.pooling == SimonPooling::max ? "max" : "mean"},
          {"simon_clamp_negative", p.simon.clamp_negative},
          {"min_df", p.min_df},
          {"binary_unigrams", p.binary_unigrams},
          {"topics",
           {{"k", p.topics.k},
            {"reduced_dim", p.topics.reduced_dim},
            {"seed", p.topics.seed},
            {"top_n", p.topics.top_n},
            {"max_iterations", p.topics.max_iterations},
            {"tolerance", p.topics.tolerance}}}};
}

PipelineOptions pipeline_from_json(const json& j) {
  check_keys(j, {"lexicon_size", "lexicon_min_len", "simon_pooling", "simon_clamp_negative", "min_df",
                 "binary_unigrams", "topics"},
             "pipeline");
  PipelineOptions p;
  p.lexicon.size = j.value("lexicon_size", p.lexicon.size);
  p.lexicon.min_len = j.value("lexicon_min_len", p.lexicon.min_len);
  const auto pooling = j.value("simon_pooling", std::string("max"));
  if (pooling != "max" && pooling != "mean") throw ValidationError("simon_pooling must be max or mean");
  p.simon.pooling = pooling == "max" ? SimonPooling::max : SimonPooling::mean;
  p.simon.clamp_negative = j.value("simon_clamp_negative", p.simon.clamp_negative);
  p.min_df = j.value("min_df", p.min_df);
  p.binary_unigrams = j.value("binary_unigrams", p.binary_unigrams);
  if (j.contains("topics")) {
    const auto& t = j.at("topics");
    check_keys(t, {"k", "reduced_dim", "seed", "top_n", "max_iterations", "tolerance"}, "pipeline.topics");
    p.topics.k = t.value("k", p.topics.k);
    p.topics.reduced_dim = t.value("reduced_dim", p.topics.reduced_dim);
    p.topics.seed = t.value("seed", p.topics.seed);
    p.topics.top_n = t.value("top_n", p.topics.top_n);
    p.topics.max_iterations = t.value("max_iterations", p.topics.max_iterations);
    p.topics.tolerance = t.value("tolerance", p.topics.tolerance);
  }
  return p;
}

json spec_to_json(const ClassifierSpec& s) {
  return {{"kind", to_string(s.kind)}, {"hyperparams", s.hyperparams}, {"seed", s.seed}};
}

ClassifierSpec spec_from_json(const json& j) {
  check_keys(j, {"kind", "hyperparams", "seed"}, "classifier");
  ClassifierSpec s;
  s.kind = parse_classifier_kind(j.at("kind").get<std::string>());
  if (j.contains("hyperparams")) s.hyperparams = j.at("hyperparams").get<std::map<std::string, double>>();
  s.seed = j.value("seed", std::uint64_t{0});
  return s;
}

json cost_to_json(const CostSample& c) {
  return {{"stage", c.stage},
          {"phase", to_string(c.phase)},
          {"duration_s", c.duration_s},
          {"energy_j", c.energy_j},
          {"backend", to_string(c.backend)},
          {"n_instances", c.n_instances}};
}

CostSample cost_from_json(const json& j) {
  CostSample c;
  c.stage = j.at("stage").get<std::string>();
  c.phase = parse_phase(j.at("phase").get<std::string>());
  c.duration_s = j.at("duration_s").get<double>();
  c.energy_j = j.at("energy_j").get<double>();
  c.backend = parse_energy_backend(j.at("backend").get<std::string>());
  c.n_instances = j.at("n_instances").get<std::size_t>();
  return c;
}

json row_to_json(const ResultRow& r) {
  return {{"combo", r.combo},
          {"extractor", r.extractor},
          {"emotions", r.emotions},
          {"topics", r.topics},
          {"topic_count", r.topic_count},
          {"classifier", r.classifier},
          {"status", r.status},
          {"error", r.error},
          {"macro_f1", r.macro_f1},
          {"weighted_f1", r.weighted_f1},
          {"accuracy", r.accuracy},
          {"per_class_f1", r.per_class_f1},
          {"train_cost", cost_to_json(r.train_cost)},
          {"predict_cost", cost_to_json(r.predict_cost)}};
}

ResultRow row_from_json(const json& j) {
  ResultRow r;
  r.combo = j.at("combo").get<std::string>();
  r.extractor = j.at("extractor").get<std::string>();
  r.emotions = j.at("emotions").get<bool>();
  r.topics = j.at("topics").get<std::string>();
  r.topic_count = j.at("topic_count").get<std::size_t>();
  r.classifier = j.at("classifier").get<std::string>();
  r.status = j.at("status").get<std::string>();
  r.error = j.at("error").get<std::string>();
  r.macro_f1 = j.at("macro_f1").get<double>();
  r.weighted_f1 = j.at("weighted_f1").get<double>();
  r.accuracy = j.at("accuracy").get<double>();
  r.per_class_f1 = j.at("per_class_f1").get<std::vector<double>>();
  r.train_cost = cost_from_json(j.at("train_cost"));
  r.predict_cost = cost_from_json(j.at("predict_cost"));
  r.train_normalized = normalize(r.train_cost);
  r.predict_normalized = normalize(r.predict_cost);
  return r;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::optional<std::string> read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ResultRow failed_row(ResultRow row, const std::string& what, const EnergyConfig& energy, std::size_t n_train,
                     std::size_t n_test) {
  row.status = "error";
  row.error = what;
  row.train_cost = {row.combo + "/" + row.classifier, Phase::train, 0.0, 0.0, energy.backend,
                    std::max<std::size_t>(n_train, 1)};
  row.predict_cost = {row.combo + "/" + row.classifier, Phase::predict, 0.0, 0.0, energy.backend,
                      std::max<std::size_t>(n_test, 1)};
  row.train_normalized = normalize(row.train_cost);
  row.predict_normalized = normalize(row.predict_cost);
  return row;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

ExperimentConfig ExperimentConfig::from_json_string(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError("<config>", 1, e.what());
  }
  try {
    check_keys(j, {"corpus", "resources", "split", "pipeline", "grid", "combos", "classifiers", "energy",
                   "external_vectors_cost", "importance", "output_dir", "cache_dir"},
               "config");
    ExperimentConfig c;
    const auto& corpus = j.at("corpus");
    check_keys(corpus, {"path", "format"}, "corpus");
    c.corpus_path = resolve(base_dir, corpus.at("path").get<std::string>());
    c.corpus_format = parse_corpus_format(corpus.value("format", std::string("jsonl")));

    if (j.contains("resources")) {
      const auto& r = j.at("resources");
      check_keys(r, {"embeddings", "emotion_lexicon", "doc_vectors", "stoplist", "language"}, "resources");
      c.embeddings = optional_path(r, "embeddings", base_dir);
      c.emotion_lexicon = optional_path(r, "emotion_lexicon", base_dir);
      c.doc_vectors = optional_path(r, "doc_vectors", base_dir);
      c.stoplist = optional_path(r, "stoplist", base_dir);
      c.language = r.value("language", c.language);
    }
    if (j.contains("split")) {
      const auto& s = j.at("split");
      check_keys(s, {"test_fraction", "seed", "stratified"}, "split");
      c.test_fraction = s.value("test_fraction", c.test_fraction);
      c.split_seed = s.value("seed", c.split_seed);
      c.stratified = s.value("stratified", c.stratified);
    }
    if (j.contains("pipeline")) c.pipeline = pipeline_from_json(j.at("pipeline"));

    if (j.contains("grid") && j.contains("combos")) throw ValidationError("config may set grid or combos, not both");
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      check_keys(g, {"baseline", "extractors", "emotions", "topics"}, "grid");
      GridAxes axes;
      axes.baseline = g.value("baseline", true);
      axes.extractors.clear();
      axes.emotions.clear();
      axes.topics.clear();
      for (const auto& e : g.value("extractors", json::array({"simon"}))) {
        axes.extractors.push_back(parse_extractor(e.get<std::string>()));
      }
      for (const auto& e : g.value("emotions", json::array({false, true}))) axes.emotions.push_back(e.get<bool>());
      for (const auto& t : g.value("topics", json::array({0}))) axes.topics.push_back(topic_from_json(t));
      c.combos = enumerate_combos(axes);
    }
    if (j.contains("combos")) {
      for (const auto& name : j.at("combos")) c.combos.push_back(FeatureCombo::parse(name.get<std::string>()));
    }

    if (j.contains("classifiers")) {
      for (const auto& s : j.at("classifiers")) c.classifiers.push_back(spec_from_json(s));
    } else {
      c.classifiers = default_classifiers(0);
    }

    if (j.contains("energy")) {
      const auto& e = j.at("energy");
      check_keys(e, {"backend", "watts", "rapl_root"}, "energy");
      c.energy.backend = parse_energy_backend(e.value("backend", std::string("power-model")));
      c.energy.watts = e.value("watts", c.energy.watts);
      if (e.contains("rapl_root")) c.energy.rapl_root = e.at("rapl_root").get<std::string>();
    }
    if (j.contains("external_vectors_cost") && !j.at("external_vectors_cost").is_null()) {
      const auto& e = j.at("external_vectors_cost");
      check_keys(e, {"train_seconds_per_text", "predict_seconds_per_text", "train_joules_per_text",
                     "predict_joules_per_text"},
                 "external_vectors_cost");
      ExternalVectorCost cost;
      cost.train_seconds_per_text = e.value("train_seconds_per_text", 0.0);
      cost.predict_seconds_per_text = e.value("predict_seconds_per_text", 0.0);
      cost.train_joules_per_text = e.value("train_joules_per_text", 0.0);
      cost.predict_joules_per_text = e.value("predict_joules_per_text", 0.0);
      c.external_vectors_cost = cost;
    }
    if (j.contains("importance") && !j.at("importance").is_null()) {
      const auto& im = j.at("importance");
      check_keys(im, {"combo", "classifier", "repeats", "seed", "target_class", "group_by_kind", "top_n"}, "importance");
      ImportanceConfig ic;
      ic.combo = FeatureCombo::parse(im.at("combo").get<std::string>());
      ic.classifier_index = im.value("classifier", std::size_t{0});
      ic.options.repeats = im.value("repeats", ic.options.repeats);
      ic.options.seed = im.value("seed", ic.options.seed);
      if (im.contains("target_class") && !im.at("target_class").is_null()) {
        ic.options.target_class = im.at("target_class").get<std::string>();
      }
      ic.options.group_by_kind = im.value("group_by_kind", false);
      ic.top_n = im.value("top_n", ic.top_n);
      c.importance = ic;
    }
    if (j.contains("output_dir")) c.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
    c.cache_dir = optional_path(j, "cache_dir", base_dir);
    return c;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid config: ") + e.what());
  }
}

ExperimentConfig ExperimentConfig::from_json_file(const std::filesystem::path& path) {
  const auto text = read_text(path);
  if (!text) throw Error("cannot open config " + path.string());
  return from_json_string(*text, path.parent_path());
}

std::string ExperimentConfig::to_json_string() const {
  json j;
  j["corpus"] = {{"path", corpus_path.string()}, {"format", corpus_format == CorpusFormat::jsonl ? "jsonl" : "tsv"}};
  j["resources"] = {{"embeddings", path_or_null(embeddings)},
                    {"emotion_lexicon", path_or_null(emotion_lexicon)},
                    {"doc_vectors", path_or_null(doc_vectors)},
                    {"stoplist", path_or_null(stoplist)},
                    {"language", language}};
  j["split"] = {{"test_fraction", test_fraction}, {"seed", split_seed}, {"stratified", stratified}};
  j["pipeline"] = pipeline_to_json(pipeline);
  json combo_names = json::array();
  for (const auto& c : combos) combo_names.push_back(c.name());
  j["combos"] = combo_names;
  json specs = json::array();
  for (const auto& s : classifiers) specs.push_back(spec_to_json(s));
  j["classifiers"] = specs;
  j["energy"] = {{"backend", to_string(energy.backend)}, {"watts", energy.watts}, {"rapl_root", energy.rapl_root.string()}};
  if (external_vectors_cost) {
    j["external_vectors_cost"] = {{"train_seconds_per_text", external_vectors_cost->train_seconds_per_text},
                                  {"predict_seconds_per_text", external_vectors_cost->predict_seconds_per_text},
                                  {"train_joules_per_text", external_vectors_cost->train_joules_per_text},
                                  {"predict_joules_per_text", external_vectors_cost->predict_joules_per_text}};
  }
  if (importance) {
    j["importance"] = {{"combo", importance->combo.name()},
                       {"classifier", importance->classifier_index},
                       {"repeats", importance->options.repeats},
                       {"seed", importance->options.seed},
                       {"target_class", importance->options.target_class ? json(*importance->options.target_class)
                                                                         : json(nullptr)},
                       {"group_by_kind", importance->options.group_by_kind},
                       {"top_n", importance->top_n}};
  }
  j["output_dir"] = output_dir.string();
  j["cache_dir"] = path_or_null(cache_dir);
  return j.dump(2);
}

void ExperimentConfig::validate() const {
  auto require_file = [](const std::filesystem::path& p, const std::string& what) {
    if (!std::filesystem::is_regular_file(p)) throw ValidationError(what + " file not found: " + p.string());
  };
  require_file(corpus_path, "corpus");
  if (embeddings) require_file(*embeddings, "embeddings");
  if (emotion_lexicon) require_file(*emotion_lexicon, "emotion lexicon");
  if (doc_vectors) require_file(*doc_vectors, "document vectors");
  if (stoplist) require_file(*stoplist, "stoplist");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ValidationError("test_fraction must lie in (0, 1)");
  if (combos.empty()) throw ValidationError("config has no feature combos");
  if (classifiers.empty()) throw ValidationError("config has no classifiers");
  for (const auto& s : classifiers) s.validate();
  if (pipeline.lexicon.size < 1) throw ValidationError("lexicon_size must be >= 1");
  if (pipeline.min_df < 1) throw ValidationError("min_df must be >= 1");

  auto check_combo = [&](const FeatureCombo& combo) {
    combo.validate();
    const bool needs_embeddings = combo.extractor == Extractor::simon || combo.topics.enabled();
    if (needs_embeddings && !embeddings) throw ValidationError("combo '" + combo.name() + "' needs embeddings");
    if (combo.emotions && !emotion_lexicon) {
      throw ValidationError("combo '" + combo.name() + "' needs an emotion lexicon");
    }
    if (combo.extractor == Extractor::external_vectors && !doc_vectors) {
      throw ValidationError("combo '" + combo.name() + "' needs a document-vector file");
    }
  };
  std::set<std::string> seen;
  for (const auto& combo : combos) {
    check_combo(combo);
    if (!seen.insert(combo.name()).second) throw ValidationError("duplicate combo '" + combo.name() + "'");
  }
  if (energy.backend == EnergyBackend::power_model && !(energy.watts > 0.0)) {
    throw ValidationError("power-model backend needs watts > 0");
  }
  if (importance) {
    check_combo(importance->combo);
    if (importance->classifier_index >= classifiers.size()) {
      throw ValidationError("importance.classifier index is out of range");
    }
    if (importance->options.repeats < 1) throw ValidationError("importance.repeats must be >= 1");
  }
}

std::vector<ClassifierSpec> default_classifiers(std::uint64_t seed) {
  std::vector<ClassifierSpec> out;
  for (auto kind : {ClassifierKind::random_forest, ClassifierKind::knn, ClassifierKind::linear_svm,
                    ClassifierKind::poly_svm}) {
    ClassifierSpec s;
    s.kind = kind;
    s.seed = seed;
    out.push_back(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Results

std::string ResultsTable::csv_header() const {
  std::string out = "combo,extractor,emotions,topics,topic_count,classifier,status,macro_f1,weighted_f1,accuracy";
  for (const auto& c : classes) out += "," + csv_field("f1:" + c);
  out +=
      ",train_time_per_text_s,train_energy_per_text_J,train_energy_per_text_kWh,"
      "predict_time_per_text_s,predict_energy_per_text_J,predict_energy_per_text_kWh,"
      "train_duration_s,train_energy_J,predict_duration_s,predict_energy_J,backend,error";
  return out;
}

std::string ResultsTable::csv_row(const ResultRow& r) const {
  std::string out = fmt::format("{},{},{},{},{},{},{},{},{},{}", csv_field(r.combo), r.extractor,
                                r.emotions ? "true" : "false", r.topics, r.topic_count, r.classifier, r.status,
                                r.macro_f1, r.weighted_f1, r.accuracy);
  for (std::size_t i = 0; i < classes.size(); ++i) {
    out += fmt::format(",{}", i < r.per_class_f1.size() ? r.per_class_f1[i] : 0.0);
  }
  out += fmt::format(",{},{},{},{},{},{},{},{},{},{},{},{}", r.train_normalized.time_per_instance_s,
                     r.train_normalized.energy_per_instance_j, r.train_normalized.energy_per_instance_kwh,
                     r.predict_normalized.time_per_instance_s, r.predict_normalized.energy_per_instance_j,
                     r.predict_normalized.energy_per_instance_kwh, r.train_cost.duration_s, r.train_cost.energy_j,
                     r.predict_cost.duration_s, r.predict_cost.energy_j, to_string(r.train_cost.backend),
                     csv_field(r.error));
  return out;
}

std::string ResultsTable::to_csv() const {
  std::string out = csv_header() + "\n";
  for (const auto& r : rows) out += csv_row(r) + "\n";
  return out;
}

std::string ResultsTable::to_json_string() const {
  json rows_json = json::array();
  for (const auto& r : rows) rows_json.push_back(row_to_json(r));
  return json{{"classes", classes}, {"rows", rows_json}}.dump(2);
}

ResultsTable ResultsTable::from_json_string(const std::string& text) {
  try {
    const auto j = json::parse(text);
    ResultsTable t;
    t.classes = j.at("classes").get<std::vector<std::string>>();
    for (const auto& r : j.at("rows")) t.rows.push_back(row_from_json(r));
    return t;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed results: ") + e.what());
  }
}

std::vector<ParetoRow> pareto_report(const ResultsTable& results) {
  std::vector<ParetoRow> out;
  std::map<std::string, std::size_t> index;
  for (const auto& r : results.rows) {
    if (!r.ok()) continue;
    const auto it = index.find(r.combo);
    if (it == index.end()) {
      index.emplace(r.combo, out.size());
      out.push_back({r.combo, r.classifier, r.macro_f1, r.predict_normalized.energy_per_instance_j,
                     r.predict_normalized.energy_per_instance_kwh, false});
    } else if (r.macro_f1 > out[it->second].best_macro_f1) {
      out[it->second] = {r.combo, r.classifier, r.macro_f1, r.predict_normalized.energy_per_instance_j,
                         r.predict_normalized.energy_per_instance_kwh, false};
    }
  }
  for (auto& a : out) {
    a.pareto_optimal = std::none_of(out.begin(), out.end(), [&](const ParetoRow& b) {
      const bool no_worse = b.best_macro_f1 >= a.best_macro_f1 &&
                            b.predict_energy_per_text_j <= a.predict_energy_per_text_j;
      const bool better = b.best_macro_f1 > a.best_macro_f1 ||
                          b.predict_energy_per_text_j < a.predict_energy_per_text_j;
      return no_worse && better;
    });
  }
  return out;
}

void write_pareto_csv(const std::vector<ParetoRow>& rows, const std::filesystem::path& path) {
  std::string text = "combo,best_classifier,best_macro_f1,predict_energy_per_text_J,predict_energy_per_text_kWh,pareto_optimal\n";
  for (const auto& r : rows) {
    text += fmt::format("{},{},{},{},{},{}\n", csv_field(r.combo), r.best_classifier, r.best_macro_f1,
                        r.predict_energy_per_text_j, r.predict_energy_per_text_kwh, r.pareto_optimal ? "true" : "false");
  }
  write_text(path, text);
}

// ---------------------------------------------------------------------------
// Grid

LabeledCorpus load_config_corpus(const ExperimentConfig& config) {
  return load_corpus(config.corpus_path, config.corpus_format);
}

Resources load_resources(const ExperimentConfig& config) {
  Resources r;
  if (config.embeddings) r.embeddings = load_embeddings(*config.embeddings);
  if (config.emotion_lexicon) r.emotions = load_emotion_lexicon(*config.emotion_lexicon);
  if (config.doc_vectors) r.doc_vectors = load_doc_vectors(*config.doc_vectors);
  r.stoplist = config.stoplist ? load_stoplist(*config.stoplist) : default_stoplist(config.language);
  return r;
}

GridOutput run_grid(const ExperimentConfig& config) {
  config.validate();
  EnergyMeter meter(config.energy);
  if (config.energy.backend == EnergyBackend::manual) {
    spdlog::warn("manual energy backend: in-process stages report 0 J; only supplied external costs carry energy");
  }
  const auto corpus = load_config_corpus(config);
  const auto resources = load_resources(config);
  const auto split_pair = split(corpus, config.test_fraction, config.split_seed, config.stratified);
  const auto train_docs = TokenizedDocs::from(split_pair.train);
  const auto test_docs = TokenizedDocs::from(split_pair.test);
  FeaturePipeline pipeline(resources, config.pipeline, train_docs, test_docs, meter, config.external_vectors_cost);

  std::filesystem::create_directories(config.output_dir);
  const auto cache_dir = config.cache_dir.value_or(config.output_dir / "cache");
  std::filesystem::create_directories(cache_dir);

  // File hashes anchor cache keys and metadata.
  json file_hashes;
  file_hashes["corpus"] = sha256_file(config.corpus_path);
  if (config.embeddings) file_hashes["embeddings"] = sha256_file(*config.embeddings);
  if (config.emotion_lexicon) file_hashes["emotion_lexicon"] = sha256_file(*config.emotion_lexicon);
  if (config.doc_vectors) file_hashes["doc_vectors"] = sha256_file(*config.doc_vectors);
  if (config.stoplist) file_hashes["stoplist"] = sha256_file(*config.stoplist);

  json shared_key{{"version", kCellCacheVersion},
                  {"files", file_hashes},
                  {"format", config.corpus_format == CorpusFormat::jsonl ? "jsonl" : "tsv"},
                  {"language", config.language},
                  {"split", {config.test_fraction, config.split_seed, config.stratified}},
                  {"pipeline", pipeline_to_json(config.pipeline)},
                  {"energy", {to_string(config.energy.backend), config.energy.watts}}};
  if (config.external_vectors_cost) {
    const auto& e = *config.external_vectors_cost;
    shared_key["external"] = {e.train_seconds_per_text, e.predict_seconds_per_text, e.train_joules_per_text,
                              e.predict_joules_per_text};
  }
  auto cell_key = [&](const FeatureCombo& combo, const ClassifierSpec& spec) {
    json key = shared_key;
    key["combo"] = combo.name();
    key["classifier"] = {{"kind", to_string(spec.kind)}, {"hyperparams", spec.resolved()}, {"seed", spec.seed}};
    return sha256_hex(key.dump());
  };
  auto block_key = [&](const std::string& block) {
    json key = shared_key;
    key["block"] = block;
    return sha256_hex(key.dump());
  };

  GridOutput output;
  output.results.classes = corpus.classes();
  const std::size_t n_train = train_docs.size();
  const std::size_t n_test = test_docs.size();

  std::ofstream results_csv(config.output_dir / "results.csv", std::ios::binary);
  if (!results_csv) throw Error("cannot write " + (config.output_dir / "results.csv").string());
  results_csv << output.results.csv_header() << '\n' << std::flush;

  std::map<std::string, std::pair<CostSample, CostSample>> block_costs;
  for (const auto& combo : config.combos) {
    ResultRow base;
    base.combo = combo.name();
    base.extractor = to_string(combo.extractor);
    base.emotions = combo.emotions;
    base.topics = to_string(combo.topics);

    std::vector<std::optional<ResultRow>> cached(config.classifiers.size());
    bool all_cached = true;
    for (std::size_t c = 0; c < config.classifiers.size(); ++c) {
      if (const auto text = read_text(cache_dir / (cell_key(combo, config.classifiers[c]) + ".json"))) {
        try {
          cached[c] = row_from_json(json::parse(*text));
        } catch (const std::exception& e) {
          spdlog::warn("ignoring unreadable cache entry for {}: {}", combo.name(), e.what());
        }
      }
      all_cached = all_cached && cached[c].has_value();
    }

    std::optional<ComboMatrices> matrices;
    std::string combo_error;
    if (!all_cached) {
      try {
        matrices = pipeline.assemble(combo);
        for (const auto* b : matrices->blocks) {
          if (block_costs.contains(b->name)) continue;
          block_costs.emplace(b->name, std::make_pair(b->train_cost, b->predict_cost));
          write_text(cache_dir / ("block-" + block_key(b->name) + ".json"),
                     json{{"train", cost_to_json(b->train_cost)}, {"predict", cost_to_json(b->predict_cost)}}.dump());
        }
      } catch (const std::exception& e) {
        combo_error = e.what();
        spdlog::error("combo {} failed: {}", combo.name(), combo_error);
      }
    }
    for (const auto& name : blocks_for(combo)) {
      if (block_costs.contains(name)) continue;
      if (const auto text = read_text(cache_dir / ("block-" + block_key(name) + ".json"))) {
        const auto j = json::parse(*text);
        block_costs.emplace(name, std::make_pair(cost_from_json(j.at("train")), cost_from_json(j.at("predict"))));
      }
    }

    for (std::size_t c = 0; c < config.classifiers.size(); ++c) {
      const auto& spec = config.classifiers[c];
      ResultRow row = base;
      row.classifier = spec.name();
      if (cached[c]) {
        row = *cached[c];
        ++output.cache_hits;
      } else if (!matrices) {
        row = failed_row(row, combo_error, config.energy, n_train, n_test);
      } else {
        try {
          if (const auto* model = pipeline.topic_model(combo.topics)) row.topic_count = model->k();
          const std::string stage = row.combo + "/" + row.classifier;
          std::vector<CostSample> train_parts, predict_parts;
          for (const auto* b : matrices->blocks) {
            train_parts.push_back(b->train_cost);
            predict_parts.push_back(b->predict_cost);
          }
          std::unique_ptr<TrainedClassifier> model;
          train_parts.push_back(measure_stage(meter, stage, Phase::train, n_train, [&] {
            model = train(spec, matrices->train.values, train_docs.labels);
          }));
          std::vector<std::string> predictions;
          predict_parts.push_back(measure_stage(meter, stage, Phase::predict, n_test, [&] {
            predictions = model->predict(matrices->test.values);
          }));
          const auto report = evaluate(test_docs.labels, predictions, corpus.classes());
          row.macro_f1 = report.macro_f1;
          row.weighted_f1 = report.weighted_f1;
          row.accuracy = report.accuracy;
          for (const auto& s : report.per_class) row.per_class_f1.push_back(s.f1);
          row.train_cost = combine(stage, Phase::train, std::max<std::size_t>(n_train, 1), train_parts);
          row.predict_cost = combine(stage, Phase::predict, std::max<std::size_t>(n_test, 1), predict_parts);
          row.train_normalized = normalize(row.train_cost);
          row.predict_normalized = normalize(row.predict_cost);
        } catch (const std::exception& e) {
          spdlog::error("cell {}/{} failed: {}", row.combo, row.classifier, e.what());
          row = failed_row(base, e.what(), config.energy, n_train, n_test);
          row.classifier = spec.name();
        }
        write_text(cache_dir / (cell_key(combo, spec) + ".json"), row_to_json(row).dump());
      }
      results_csv << output.results.csv_row(row) << '\n' << std::flush;
      output.results.rows.push_back(std::move(row));
    }
  }
  results_csv.close();

  for (const auto& [name, costs] : block_costs) {
    output.costs.push_back(costs.first);
    output.costs.push_back(costs.second);
  }
  for (const auto& r : output.results.rows) {
    if (!r.ok()) continue;
    output.costs.push_back(r.train_cost);
    output.costs.push_back(r.predict_cost);
  }
  write_cost_csv(output.costs, config.output_dir / "costs.csv");
  write_text(config.output_dir / "results.json", output.results.to_json_string());
  output.pareto = pareto_report(output.results);
  write_pareto_csv(output.pareto, config.output_dir / "pareto.csv");

  if (config.importance) {
    const auto& ic = *config.importance;
    try {
      const auto matrices = pipeline.assemble(ic.combo);
      const auto model = train(config.classifiers[ic.classifier_index], matrices.train.values, train_docs.labels);
      output.importance = permutation_importance(*model, matrices.test, test_docs.labels, ic.options);
      write_importance_csv(*output.importance, config.output_dir / "importance.csv", ic.top_n);
      write_text(config.output_dir / "importance.json", to_json_string(*output.importance, ic.top_n));
    } catch (const std::exception& e) {
      spdlog::error("importance analysis failed: {}", e.what());
    }
  }

  json meta;
  meta["tool"] = {{"name", "ecotext"}, {"version", "0.1.0"}};
  meta["started_at"] = utc_now();
  meta["config"] = json::parse(config.to_json_string());
  meta["file_hashes"] = file_hashes;
  meta["seeds"] = {{"split", config.split_seed},
                   {"topics", config.pipeline.topics.seed},
                   {"importance", config.importance ? json(config.importance->options.seed) : json(nullptr)}};
  json specs = json::array();
  for (const auto& s : config.classifiers) {
    specs.push_back({{"kind", to_string(s.kind)}, {"hyperparams", s.resolved()}, {"seed", s.seed}});
  }
  meta["classifiers"] = specs;
  meta["energy"] = {{"backend", to_string(config.energy.backend)},
                    {"watts", config.energy.backend == EnergyBackend::power_model ? json(config.energy.watts)
                                                                                  : json(nullptr)},
                    {"rapl_root", config.energy.backend == EnergyBackend::rapl ? json(config.energy.rapl_root.string())
                                                                               : json(nullptr)}};
  meta["split"] = {{"train", n_train}, {"test", n_test}, {"classes", corpus.classes()}};
  meta["artifact_digests"] = pipeline.artifact_digests();
  meta["rows"] = output.results.rows.size();
  meta["failed_rows"] = std::count_if(output.results.rows.begin(), output.results.rows.end(),
                                      [](const ResultRow& r) { return !r.ok(); });
  meta["cache_hits"] = output.cache_hits;
  output.metadata_json = meta.dump(2);
  write_text(config.output_dir / "run_metadata.json", output.metadata_json);
  return output;
}

}  // namespace ecotext
