#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ecotext/textproc.hpp"

namespace ecotext {

using Stoplist = std::unordered_set<std::string>;

// Projection axes chosen by training-split frequency.
struct DomainLexicon {
  std::vector<std::string> words;
  std::unordered_map<std::string, std::size_t> source_stats;

  std::size_t size() const noexcept { return words.size(); }
};

struct LexiconInduction {
  std::size_t size = 512;
  std::size_t min_len = 2;
  Stoplist stoplist;
};

// Top-`size` tokens by frequency over `train_docs` (descending count, ties
// lexicographic) after dropping stoplisted and short tokens. Returns fewer
// words, with a warning, when not enough tokens are eligible.
DomainLexicon induce_domain_lexicon(std::span<const TokenSeq> train_docs,
                                    const LexiconInduction& options);

void save_domain_lexicon(const DomainLexicon& lexicon, const std::filesystem::path& path);
DomainLexicon load_domain_lexicon(const std::filesystem::path& path);

// Packaged function-word lists; "en" and "es" are known, anything else yields
// an empty list.
Stoplist default_stoplist(const std::string& language);
Stoplist load_stoplist(const std::filesystem::path& path);

class EmotionLexicon {
 public:
  EmotionLexicon() = default;
  explicit EmotionLexicon(std::vector<std::string> emotions);

  const std::vector<std::string>& emotions() const noexcept { return emotions_; }
  std::size_t num_emotions() const noexcept { return emotions_.size(); }
  std::size_t size() const noexcept { return entries_.size(); }

  // Scores must number num_emotions() and lie in [0, 1]. Word is lowercased.
  void add(const std::string& word, std::vector<double> scores);
  const std::vector<double>* find(const std::string& word) const;

  void save(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> emotions_;
  std::unordered_map<std::string, std::vector<double>> entries_;
  std::vector<std::string> order_;
};

// TSV with header `word<TAB>e1..eK`. Commas are accepted as the header and
// field separator when the file has no tabs.
EmotionLexicon load_emotion_lexicon(const std::filesystem::path& path);

}  // namespace ecotext
