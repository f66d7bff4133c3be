#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "ecotext/textproc.hpp"

namespace ecotext {

// Unigram baseline vocabulary; ordered by descending document frequency,
// ties lexicographic.
struct Vocab {
  std::vector<std::string> terms;
  std::vector<std::size_t> document_frequency;
  std::size_t min_df = 1;

  std::size_t size() const noexcept { return terms.size(); }
};

Vocab fit_vocab(std::span<const TokenSeq> train_docs, std::size_t min_df);
void save_vocab(const Vocab& vocab, const std::filesystem::path& path);

// Term counts (or 0/1 presence when `binary`). OOV tokens are ignored.
Eigen::VectorXd unigram_features(const TokenSeq& tokens, const Vocab& vocab, bool binary = false);

// Term -> column lookup for featurizing many documents against one vocab.
class UnigramIndex {
 public:
  explicit UnigramIndex(const Vocab& vocab);
  Eigen::VectorXd encode(const TokenSeq& tokens, bool binary = false) const;

 private:
  std::size_t size_ = 0;
  std::unordered_map<std::string, Eigen::Index> index_;
};

enum class FeatureKind { semantic, emotion, topic };

std::string to_string(FeatureKind kind);
FeatureKind parse_feature_kind(const std::string& name);

struct FeatureSpan {
  std::string name;
  FeatureKind kind = FeatureKind::semantic;
  std::size_t start = 0;
  std::size_t length = 0;

  friend bool operator==(const FeatureSpan&, const FeatureSpan&) = default;
};

// One extractor's output for assembly. names.size() must equal values.size().
struct FeaturePart {
  std::string span_name;
  FeatureKind kind = FeatureKind::semantic;
  Eigen::VectorXd values;
  std::vector<std::string> names;
};

struct FeatureVector {
  Eigen::VectorXd values;
  std::vector<FeatureSpan> spans;
  std::vector<std::string> names;
};

// Concatenates parts grouped semantic, emotion, topic (stable within a kind).
FeatureVector assemble(std::vector<FeaturePart> parts);

// Row-per-document matrix sharing one span layout.
struct FeatureMatrix {
  Eigen::MatrixXd values;
  std::vector<FeatureSpan> spans;
  std::vector<std::string> names;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(values.cols()); }
};

// Throws unless spans are contiguous, cover every column, and names are unique.
void validate_layout(const FeatureMatrix& matrix);

// Header: id, label, then feature names.
void write_feature_tsv(const FeatureMatrix& matrix, const std::vector<std::string>& ids,
                       const std::vector<std::string>& labels, const std::filesystem::path& path);

enum class Extractor { unigram, simon, external_vectors };

std::string to_string(Extractor extractor);
Extractor parse_extractor(const std::string& name);

// Topic block of a combo: none, a reduced count, or the full fitted model.
struct TopicSetting {
  enum class Mode { none, count, all };
  Mode mode = Mode::none;
  std::size_t count = 0;

  static TopicSetting none() { return {}; }
  static TopicSetting all() { return {Mode::all, 0}; }
  static TopicSetting of(std::size_t n) { return n == 0 ? none() : TopicSetting{Mode::count, n}; }

  bool enabled() const noexcept { return mode != Mode::none; }
  friend bool operator==(const TopicSetting&, const TopicSetting&) = default;
};

std::string to_string(const TopicSetting& topics);
TopicSetting parse_topic_setting(const std::string& text);

struct FeatureCombo {
  Extractor extractor = Extractor::simon;
  bool emotions = false;
  TopicSetting topics;

  // "unigram", "simon+emotions", "external_vectors+emotions+topics:64", ...
  std::string name() const;
  static FeatureCombo parse(const std::string& name);
  // Throws when the unigram baseline is combined with anything.
  void validate() const;

  friend bool operator==(const FeatureCombo&, const FeatureCombo&) = default;
};

struct GridAxes {
  bool baseline = true;
  std::vector<Extractor> extractors{Extractor::simon, Extractor::external_vectors};
  std::vector<bool> emotions{false, true};
  std::vector<TopicSetting> topics{TopicSetting::none(), TopicSetting::of(64),
                                   TopicSetting::of(128), TopicSetting::all()};
};

// Baseline first, then extractor x emotions x topics in axis order.
std::vector<FeatureCombo> enumerate_combos(const GridAxes& axes);

}  // namespace ecotext
