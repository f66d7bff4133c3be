#include "ecotext/features.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "ecotext/error.hpp"

namespace ecotext {

Vocab fit_vocab(std::span<const TokenSeq> train_docs, std::size_t min_df) {
  if (min_df < 1) throw ValidationError("min_df must be >= 1");
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& doc : train_docs) {
    std::unordered_set<std::string_view> seen;
    for (const auto& token : doc) {
      if (seen.insert(token).second) ++df[token];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [term, count] : df) {
    if (count >= min_df) kept.emplace_back(term, count);
  }
  if (kept.empty()) {
    throw ValidationError("empty vocabulary: no term reaches min_df=" + std::to_string(min_df));
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  Vocab vocab;
  vocab.min_df = min_df;
  for (auto& [term, count] : kept) {
    vocab.terms.push_back(std::move(term));
    vocab.document_frequency.push_back(count);
  }
  return vocab;
}

void save_vocab(const Vocab& vocab, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write vocabulary " + path.string());
  out << "term\tdf\n";
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    out << vocab.terms[i] << '\t' << vocab.document_frequency[i] << '\n';
  }
}

UnigramIndex::UnigramIndex(const Vocab& vocab) : size_(vocab.size()) {
  index_.reserve(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) index_.emplace(vocab.terms[i], static_cast<Eigen::Index>(i));
}

Eigen::VectorXd UnigramIndex::encode(const TokenSeq& tokens, bool binary) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size_));
  for (const auto& token : tokens) {
    const auto it = index_.find(token);
    if (it == index_.end()) continue;
    out[it->second] = binary ? 1.0 : out[it->second] + 1.0;
  }
  return out;
}

Eigen::VectorXd unigram_features(const TokenSeq& tokens, const Vocab& vocab, bool binary) {
  return UnigramIndex(vocab).encode(tokens, binary);
}

std::string to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::semantic: return "semantic";
    case FeatureKind::emotion: return "emotion";
    case FeatureKind::topic: return "topic";
  }
  return "semantic";
}

FeatureKind parse_feature_kind(const std::string& name) {
  if (name == "semantic") return FeatureKind::semantic;
  if (name == "emotion") return FeatureKind::emotion;
  if (name == "topic") return FeatureKind::topic;
  throw ValidationError("unknown feature kind '" + name + "'");
}

FeatureVector assemble(std::vector<FeaturePart> parts) {
  if (parts.empty()) throw ValidationError("assemble: no parts");
  std::stable_sort(parts.begin(), parts.end(), [](const FeaturePart& a, const FeaturePart& b) {
    return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  });
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.names.size() != static_cast<std::size_t>(p.values.size())) {
      throw ValidationError("assemble: part '" + p.span_name + "' has " +
                            std::to_string(p.names.size()) + " names for " +
                            std::to_string(p.values.size()) + " values");
    }
    total += p.names.size();
  }
  FeatureVector out;
  out.values.resize(static_cast<Eigen::Index>(total));
  std::unordered_set<std::string> seen;
  std::size_t offset = 0;
  for (auto& p : parts) {
    out.values.segment(static_cast<Eigen::Index>(offset), p.values.size()) = p.values;
    out.spans.push_back({p.span_name, p.kind, offset, p.names.size()});
    for (auto& name : p.names) {
      if (!seen.insert(name).second) throw ValidationError("assemble: duplicate feature name '" + name + "'");
      out.names.push_back(std::move(name));
    }
    offset += p.names.size();
  }
  return out;
}

void validate_layout(const FeatureMatrix& matrix) {
  std::size_t offset = 0;
  for (const auto& span : matrix.spans) {
    if (span.start != offset) throw ValidationError("feature spans are not contiguous");
    offset += span.length;
  }
  if (offset != matrix.cols() || matrix.names.size() != matrix.cols()) {
    throw ValidationError("feature spans/names do not cover the matrix columns");
  }
  std::unordered_set<std::string> seen;
  for (const auto& name : matrix.names) {
    if (!seen.insert(name).second) throw ValidationError("duplicate feature name '" + name + "'");
  }
}

void write_feature_tsv(const FeatureMatrix& matrix, const std::vector<std::string>& ids,
                       const std::vector<std::string>& labels, const std::filesystem::path& path) {
  if (ids.size() != matrix.rows() || labels.size() != matrix.rows()) {
    throw ValidationError("write_feature_tsv: ids/labels do not match the matrix rows");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write features " + path.string());
  out << "id\tlabel";
  for (const auto& name : matrix.names) out << '\t' << name;
  out << '\n';
  out.precision(17);
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    out << ids[r] << '\t' << labels[r];
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      out << '\t' << matrix.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
    out << '\n';
  }
}

std::string to_string(Extractor extractor) {
  switch (extractor) {
    case Extractor::unigram: return "unigram";
    case Extractor::simon: return "simon";
    case Extractor::external_vectors: return "external_vectors";
  }
  return "simon";
}

Extractor parse_extractor(const std::string& name) {
  if (name == "unigram") return Extractor::unigram;
  if (name == "simon") return Extractor::simon;
  if (name == "external_vectors" || name == "transformers") return Extractor::external_vectors;
  throw ValidationError("unknown extractor '" + name + "'");
}

std::string to_string(const TopicSetting& topics) {
  switch (topics.mode) {
    case TopicSetting::Mode::none: return "0";
    case TopicSetting::Mode::all: return "all";
    case TopicSetting::Mode::count: return std::to_string(topics.count);
  }
  return "0";
}

TopicSetting parse_topic_setting(const std::string& text) {
  if (text == "all") return TopicSetting::all();
  if (text.empty() || !std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw ValidationError("invalid topic setting '" + text + "' (expected a count or \"all\")");
  }
  return TopicSetting::of(std::stoul(text));
}

std::string FeatureCombo::name() const {
  std::string out = to_string(extractor);
  if (emotions) out += "+emotions";
  if (topics.enabled()) out += "+topics:" + to_string(topics);
  return out;
}

FeatureCombo FeatureCombo::parse(const std::string& name) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto plus = name.find('+', start);
    parts.push_back(name.substr(start, plus == std::string::npos ? std::string::npos : plus - start));
    if (plus == std::string::npos) break;
    start = plus + 1;
  }
  FeatureCombo combo;
  combo.extractor = parse_extractor(parts.front());
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto& p = parts[i];
    if (p == "emotions") {
      combo.emotions = true;
    } else if (p.rfind("topics:", 0) == 0) {
      combo.topics = parse_topic_setting(p.substr(7));
    } else {
      throw ValidationError("invalid combo component '" + p + "' in '" + name + "'");
    }
  }
  combo.validate();
  return combo;
}

void FeatureCombo::validate() const {
  if (extractor == Extractor::unigram && (emotions || topics.enabled())) {
    throw ValidationError("the unigram baseline cannot be combined with other features");
  }
}

std::vector<FeatureCombo> enumerate_combos(const GridAxes& axes) {
  std::vector<FeatureCombo> out;
  if (axes.baseline) out.push_back({Extractor::unigram, false, TopicSetting::none()});
  for (auto extractor : axes.extractors) {
    if (extractor == Extractor::unigram) continue;
    for (bool emotions : axes.emotions) {
      for (const auto& topics : axes.topics) out.push_back({extractor, emotions, topics});
    }
  }
  return out;
}

}  // namespace ecotext
