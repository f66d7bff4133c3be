#include "ecotext/pipeline.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "ecotext/emofeat.hpp"
#include "ecotext/error.hpp"
#include "ecotext/hashing.hpp"

namespace ecotext {
namespace {

Eigen::MatrixXd stack_rows(const std::vector<Eigen::VectorXd>& rows, std::size_t cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
  return out;
}

const EmbeddingStore& need_embeddings(const Resources& resources, const std::string& block) {
  if (!resources.embeddings) throw ValidationError("block '" + block + "' needs word embeddings");
  return *resources.embeddings;
}

}  // namespace

TokenizedDocs TokenizedDocs::from(const LabeledCorpus& corpus) {
  TokenizedDocs out;
  out.ids.reserve(corpus.size());
  out.labels.reserve(corpus.size());
  out.tokens.reserve(corpus.size());
  for (const auto& doc : corpus.documents()) {
    out.ids.push_back(doc.id);
    out.labels.push_back(doc.label);
    out.tokens.push_back(tokenize(doc.text));
  }
  return out;
}

std::vector<std::string> blocks_for(const FeatureCombo& combo) {
  combo.validate();
  std::vector<std::string> out{to_string(combo.extractor)};
  if (combo.emotions) out.emplace_back("emotions");
  if (combo.topics.enabled()) out.push_back("topics:" + to_string(combo.topics));
  return out;
}

FeaturePipeline::FeaturePipeline(const Resources& resources, PipelineOptions options, const TokenizedDocs& train,
                                 const TokenizedDocs& test, EnergyMeter& meter,
                                 std::optional<ExternalVectorCost> external_cost)
    : resources_(resources),
      options_(std::move(options)),
      train_(train),
      test_(test),
      meter_(meter),
      external_cost_(external_cost) {
  if (train_.size() == 0) throw ValidationError("feature pipeline needs a non-empty training split");
  if (options_.lexicon.stoplist.empty()) options_.lexicon.stoplist = resources_.stoplist;
}

const FeatureBlock& FeaturePipeline::block(const std::string& name) {
  if (const auto it = blocks_.find(name); it != blocks_.end()) return it->second;
  if (const auto it = failures_.find(name); it != failures_.end()) std::rethrow_exception(it->second);
  try {
    auto built = build(name);
    return blocks_.emplace(name, std::move(built)).first->second;
  } catch (...) {
    failures_.emplace(name, std::current_exception());
    throw;
  }
}

ComboMatrices FeaturePipeline::assemble(const FeatureCombo& combo) {
  ComboMatrices out;
  std::size_t cols = 0;
  for (const auto& name : blocks_for(combo)) {
    out.blocks.push_back(&block(name));
    cols += out.blocks.back()->names.size();
  }
  const auto c = static_cast<Eigen::Index>(cols);
  out.train.values.resize(static_cast<Eigen::Index>(train_.size()), c);
  out.test.values.resize(static_cast<Eigen::Index>(test_.size()), c);
  std::size_t offset = 0;
  for (const auto* b : out.blocks) {
    const auto start = static_cast<Eigen::Index>(offset);
    const auto width = static_cast<Eigen::Index>(b->names.size());
    out.train.values.middleCols(start, width) = b->train;
    out.test.values.middleCols(start, width) = b->test;
    const FeatureSpan span{b->name, b->kind, offset, b->names.size()};
    out.train.spans.push_back(span);
    out.test.spans.push_back(span);
    out.train.names.insert(out.train.names.end(), b->names.begin(), b->names.end());
    offset += b->names.size();
  }
  out.test.names = out.train.names;
  validate_layout(out.train);
  return out;
}

const TopicModel* FeaturePipeline::topic_model(const TopicSetting& setting) const {
  if (setting.mode == TopicSetting::Mode::none) return nullptr;
  if (setting.mode == TopicSetting::Mode::count) {
    if (const auto it = reduced_topics_.find(setting.count); it != reduced_topics_.end()) return &it->second;
    if (base_topics_ && setting.count >= base_topics_->k()) return &*base_topics_;
    return nullptr;
  }
  return base_topics_ ? &*base_topics_ : nullptr;
}

std::map<std::string, std::string> FeaturePipeline::artifact_digests() const {
  std::map<std::string, std::string> out;
  if (lexicon_) {
    std::string text;
    for (const auto& w : lexicon_->words) text += fmt::format("{}\t{}\n", w, lexicon_->source_stats.at(w));
    out["lexicon"] = sha256_hex(text);
  }
  if (vocab_) {
    std::string text;
    for (std::size_t i = 0; i < vocab_->size(); ++i) {
      text += fmt::format("{}\t{}\n", vocab_->terms[i], vocab_->document_frequency[i]);
    }
    out["vocab"] = sha256_hex(text);
  }
  if (base_topics_) out["topics:all"] = sha256_hex(base_topics_->to_json_string());
  for (const auto& [k, model] : reduced_topics_) out["topics:" + std::to_string(k)] = sha256_hex(model.to_json_string());
  return out;
}

FeatureBlock FeaturePipeline::build(const std::string& name) {
  if (name == "unigram") return build_unigram();
  if (name == "simon") return build_simon();
  if (name == "external_vectors") return build_external();
  if (name == "emotions") return build_emotions();
  if (name.rfind("topics:", 0) == 0) {
    const auto setting = parse_topic_setting(name.substr(7));
    if (!setting.enabled()) throw ValidationError("topic block with zero topics");
    return build_topics(setting);
  }
  throw ValidationError("unknown feature block '" + name + "'");
}

FeatureBlock FeaturePipeline::build_unigram() {
  FeatureBlock b;
  b.name = "unigram";
  b.kind = FeatureKind::semantic;
  std::vector<Eigen::VectorXd> train_rows, test_rows;
  std::optional<UnigramIndex> index;
  b.train_cost = measure_stage(meter_, "unigram", Phase::train, train_.size(), [&] {
    vocab_ = fit_vocab(train_.tokens, options_.min_df);
    index.emplace(*vocab_);
    for (const auto& t : train_.tokens) train_rows.push_back(index->encode(t, options_.binary_unigrams));
  });
  b.predict_cost = measure_stage(meter_, "unigram", Phase::predict, test_.size(), [&] {
    for (const auto& t : test_.tokens) test_rows.push_back(index->encode(t, options_.binary_unigrams));
  });
  for (const auto& term : vocab_->terms) b.names.push_back("uni:" + term);
  b.train = stack_rows(train_rows, b.names.size());
  b.test = stack_rows(test_rows, b.names.size());
  return b;
}

FeatureBlock FeaturePipeline::build_simon() {
  const auto& store = need_embeddings(resources_, "simon");
  FeatureBlock b;
  b.name = "simon";
  b.kind = FeatureKind::semantic;
  std::vector<Eigen::VectorXd> train_rows, test_rows;
  std::optional<SimonProjector> projector;
  b.train_cost = measure_stage(meter_, "simon", Phase::train, train_.size(), [&] {
    lexicon_ = induce_domain_lexicon(train_.tokens, options_.lexicon);
    projector.emplace(*lexicon_, store, options_.simon);
    for (const auto& t : train_.tokens) train_rows.push_back(projector->project(t));
  });
  b.predict_cost = measure_stage(meter_, "simon", Phase::predict, test_.size(), [&] {
    for (const auto& t : test_.tokens) test_rows.push_back(projector->project(t));
  });
  for (const auto& w : projector->axis_words()) b.names.push_back("sem:" + w);
  b.train = stack_rows(train_rows, b.names.size());
  b.test = stack_rows(test_rows, b.names.size());
  return b;
}

FeatureBlock FeaturePipeline::build_external() {
  if (!resources_.doc_vectors) throw ValidationError("block 'external_vectors' needs a document-vector file");
  const auto& table = *resources_.doc_vectors;
  table.require_ids(train_.ids);
  table.require_ids(test_.ids);
  if (!external_cost_) {
    spdlog::warn("no external vector cost configured; external_vectors costs cover only the lookup");
  }
  const ExternalVectorCost ext = external_cost_.value_or(ExternalVectorCost{});
  const auto dim = table.dim();
  FeatureBlock b;
  b.name = "external_vectors";
  b.kind = FeatureKind::semantic;
  auto lookup = [&](const TokenizedDocs& docs, Eigen::MatrixXd& out) {
    out.resize(static_cast<Eigen::Index>(docs.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < docs.size(); ++r) {
      const auto& v = table.at(docs.ids[r]);
      for (std::size_t c = 0; c < dim; ++c) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[c];
    }
  };
  const double n_train = static_cast<double>(train_.size());
  const double n_test = static_cast<double>(test_.size());
  b.train_cost = measure_stage(meter_, "external_vectors", Phase::train, train_.size(), [&] { lookup(train_, b.train); },
                       ext.train_joules_per_text * n_train);
  b.predict_cost = measure_stage(meter_, "external_vectors", Phase::predict, test_.size(), [&] { lookup(test_, b.test); },
                         ext.predict_joules_per_text * n_test);
  // Add the upstream vector production cost measured outside this process.
  b.train_cost.duration_s += ext.train_seconds_per_text * n_train;
  b.predict_cost.duration_s += ext.predict_seconds_per_text * n_test;
  if (meter_.config().backend != EnergyBackend::manual) {
    b.train_cost.energy_j += ext.train_joules_per_text * n_train;
    b.predict_cost.energy_j += ext.predict_joules_per_text * n_test;
  }
  for (std::size_t i = 0; i < dim; ++i) b.names.push_back(fmt::format("vec:{}", i));
  return b;
}

FeatureBlock FeaturePipeline::build_emotions() {
  if (!resources_.emotions) throw ValidationError("block 'emotions' needs an emotion lexicon");
  const auto& lexicon = *resources_.emotions;
  FeatureBlock b;
  b.name = "emotions";
  b.kind = FeatureKind::emotion;
  std::vector<Eigen::VectorXd> train_rows, test_rows;
  b.train_cost = measure_stage(meter_, "emotions", Phase::train, train_.size(), [&] {
    for (const auto& t : train_.tokens) train_rows.push_back(emofeat_features(t, lexicon).values);
  });
  b.predict_cost = measure_stage(meter_, "emotions", Phase::predict, test_.size(), [&] {
    for (const auto& t : test_.tokens) test_rows.push_back(emofeat_features(t, lexicon).values);
  });
  for (const auto& e : lexicon.emotions()) {
    b.names.push_back("emo:" + e + ":max");
    b.names.push_back("emo:" + e + ":mean");
  }
  b.train = stack_rows(train_rows, b.names.size());
  b.test = stack_rows(test_rows, b.names.size());
  return b;
}

const TopicModel& FeaturePipeline::base_topic_model(CostSample& fit_cost) {
  if (!base_topics_) {
    const auto& store = need_embeddings(resources_, "topics");
    base_topics_cost_ = measure_stage(meter_, "topics_fit", Phase::train, train_.size(), [&] {
      base_topics_ = fit_topic_model(train_.ids, train_.tokens, store, options_.topics);
    });
  }
  fit_cost = base_topics_cost_;
  return *base_topics_;
}

FeatureBlock FeaturePipeline::build_topics(const TopicSetting& setting) {
  const auto& store = need_embeddings(resources_, "topics");
  CostSample fit_cost;
  const TopicModel& base = base_topic_model(fit_cost);
  const std::string name = "topics:" + to_string(setting);

  // The base fit is part of every topic block's training cost; reduction is
  // added on top for counted settings.
  std::vector<CostSample> train_parts{fit_cost};
  const TopicModel* model = &base;
  if (setting.mode == TopicSetting::Mode::count) {
    if (setting.count >= base.k()) {
      spdlog::warn("{} requested but the base model has only {} topics; using it unreduced", name, base.k());
    } else {
      train_parts.push_back(measure_stage(meter_, name, Phase::train, train_.size(), [&] {
        reduced_topics_.insert_or_assign(setting.count, reduce_topics(base, setting.count));
      }));
      model = &reduced_topics_.at(setting.count);
    }
  }

  FeatureBlock b;
  b.name = name;
  b.kind = FeatureKind::topic;
  std::vector<Eigen::VectorXd> train_rows, test_rows;
  train_parts.push_back(measure_stage(meter_, name, Phase::train, train_.size(), [&] {
    for (const auto& t : train_.tokens) train_rows.push_back(topic_features(t, *model, store));
  }));
  b.train_cost = combine(name, Phase::train, std::max<std::size_t>(train_.size(), 1), train_parts);
  b.predict_cost = measure_stage(meter_, name, Phase::predict, test_.size(), [&] {
    for (const auto& t : test_.tokens) test_rows.push_back(topic_features(t, *model, store));
  });
  for (std::size_t t = 0; t < model->k(); ++t) b.names.push_back("topic:" + model->label(t));
  b.train = stack_rows(train_rows, b.names.size());
  b.test = stack_rows(test_rows, b.names.size());
  return b;
}

}  // namespace ecotext
