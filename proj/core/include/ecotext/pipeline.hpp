#pragma once

#include <cstddef>
#include <exception>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ecotext/corpus.hpp"
#include "ecotext/embeddings.hpp"
#include "ecotext/energymeter.hpp"
#include "ecotext/features.hpp"
#include "ecotext/lexicons.hpp"
#include "ecotext/simon.hpp"
#include "ecotext/textproc.hpp"
#include "ecotext/topics.hpp"

namespace ecotext {

struct TokenizedDocs {
  std::vector<std::string> ids;
  std::vector<std::string> labels;
  std::vector<TokenSeq> tokens;

  static TokenizedDocs from(const LabeledCorpus& corpus);
  std::size_t size() const noexcept { return ids.size(); }
};

// Read-only inputs shared by every combo.
struct Resources {
  std::optional<EmbeddingStore> embeddings;
  std::optional<EmotionLexicon> emotions;
  std::optional<DocVectorTable> doc_vectors;
  Stoplist stoplist;
};

struct PipelineOptions {
  LexiconInduction lexicon;
  SimonConfig simon;
  std::size_t min_df = 2;
  bool binary_unigrams = false;
  TopicOptions topics{291, 5, 0, 4, 50, 1e-6};
};

// Externally measured per-text cost of producing the ingested document
// vectors (the transformer pass happens outside this tool).
struct ExternalVectorCost {
  double train_seconds_per_text = 0.0;
  double predict_seconds_per_text = 0.0;
  double train_joules_per_text = 0.0;
  double predict_joules_per_text = 0.0;
};

// One extractor's columns for both splits plus what it cost to produce them.
struct FeatureBlock {
  std::string name;
  FeatureKind kind = FeatureKind::semantic;
  std::vector<std::string> names;
  Eigen::MatrixXd train;
  Eigen::MatrixXd test;
  CostSample train_cost;
  CostSample predict_cost;
};

struct ComboMatrices {
  FeatureMatrix train;
  FeatureMatrix test;
  std::vector<const FeatureBlock*> blocks;
};

// Builds feature blocks on demand and memoizes them (failures included).
// Everything fitted (lexicon, vocabulary, topic models) sees the training
// split only. Train-phase cost covers fitting plus transforming the training
// split; predict-phase cost covers transforming the test split.
class FeaturePipeline {
 public:
  FeaturePipeline(const Resources& resources, PipelineOptions options, const TokenizedDocs& train,
                  const TokenizedDocs& test, EnergyMeter& meter,
                  std::optional<ExternalVectorCost> external_cost = std::nullopt);

  // Block names: unigram, simon, external_vectors, emotions, topics:all, topics:<n>.
  const FeatureBlock& block(const std::string& name);
  ComboMatrices assemble(const FeatureCombo& combo);

  const DomainLexicon* lexicon() const noexcept { return lexicon_ ? &*lexicon_ : nullptr; }
  const Vocab* vocab() const noexcept { return vocab_ ? &*vocab_ : nullptr; }
  const TopicModel* topic_model(const TopicSetting& setting) const;

  // SHA-256 of every artifact fitted so far, keyed by artifact name.
  std::map<std::string, std::string> artifact_digests() const;

  const PipelineOptions& options() const noexcept { return options_; }

 private:
  FeatureBlock build(const std::string& name);
  FeatureBlock build_unigram();
  FeatureBlock build_simon();
  FeatureBlock build_external();
  FeatureBlock build_emotions();
  FeatureBlock build_topics(const TopicSetting& setting);
  const TopicModel& base_topic_model(CostSample& fit_cost);

  const Resources& resources_;
  PipelineOptions options_;
  const TokenizedDocs& train_;
  const TokenizedDocs& test_;
  EnergyMeter& meter_;
  std::optional<ExternalVectorCost> external_cost_;

  std::map<std::string, FeatureBlock> blocks_;
  std::map<std::string, std::exception_ptr> failures_;
  std::optional<DomainLexicon> lexicon_;
  std::optional<Vocab> vocab_;
  std::optional<TopicModel> base_topics_;
  CostSample base_topics_cost_;
  std::map<std::size_t, TopicModel> reduced_topics_;
};

// Names every block a combo needs, in assembly order.
std::vector<std::string> blocks_for(const FeatureCombo& combo);

}  // namespace ecotext
