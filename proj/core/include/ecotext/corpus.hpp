#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace ecotext {

struct Document {
  std::string id;
  std::string text;
  std::string label;

  friend bool operator==(const Document&, const Document&) = default;
};

enum class CorpusFormat { jsonl, tsv };

CorpusFormat parse_corpus_format(const std::string& name);

// Documents plus the sorted set of distinct labels. Labels are opaque strings
// so binary and multi-class tasks share one path.
class LabeledCorpus {
 public:
  LabeledCorpus() = default;

  // Validates ids (unique), texts (non-blank) and derives the class list.
  explicit LabeledCorpus(std::vector<Document> documents);

  // Same, but keeps an explicit class list (must cover every label). Used by
  // splits so that a split half remembers classes absent from it.
  LabeledCorpus(std::vector<Document> documents, std::vector<std::string> classes);

  const std::vector<Document>& documents() const noexcept { return documents_; }
  const std::vector<std::string>& classes() const noexcept { return classes_; }
  std::size_t size() const noexcept { return documents_.size(); }
  bool empty() const noexcept { return documents_.empty(); }
  const Document& operator[](std::size_t i) const { return documents_[i]; }

  std::vector<std::string> labels() const;

  // (label, count) in class order; counts sum to size().
  std::vector<std::pair<std::string, std::size_t>> class_distribution() const;

 private:
  std::vector<Document> documents_;
  std::vector<std::string> classes_;
};

struct SplitPair {
  LabeledCorpus train;
  LabeledCorpus test;
  std::uint64_t seed = 0;
  double test_fraction = 0.0;
  bool stratified = true;
};

LabeledCorpus load_corpus(const std::filesystem::path& path, CorpusFormat format);
void save_corpus(const LabeledCorpus& corpus, const std::filesystem::path& path,
                 CorpusFormat format);

// |test| = round(test_fraction * |corpus|). In stratified mode the per-class
// test counts are allocated by largest remainder, so each class is within one
// document of its proportional share. Both halves keep the original order.
SplitPair split(const LabeledCorpus& corpus, double test_fraction, std::uint64_t seed,
                bool stratified = true);

}  // namespace ecotext
