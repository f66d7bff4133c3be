#include "ecotext/lexicons.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "ecotext/error.hpp"

namespace ecotext {
namespace {

constexpr const char* kEnglishStopwords[] = {
    "a", "about", "after", "again", "all", "am", "an", "and", "any", "are", "as", "at", "be",
    "because", "been", "before", "being", "but", "by", "can", "could", "did", "do", "does",
    "doing", "for", "from", "had", "has", "have", "having", "he", "her", "here", "hers", "him",
    "his", "how", "i", "if", "in", "into", "is", "it", "it's", "its", "just", "me", "my", "of",
    "off", "on", "or", "our", "ours", "out", "over", "she", "so", "some", "than", "that", "the",
    "their", "them", "then", "there", "these", "they", "this", "those", "through", "to", "too",
    "up", "us", "very", "was", "we", "were", "what", "when", "where", "which", "while", "who",
    "whom", "why", "will", "with", "would", "you", "your", "yours", "i'm", "i've", "i'll", "i'd",
    "url", "user"};

constexpr const char* kSpanishStopwords[] = {
    "a", "al", "algo", "como", "con", "cual", "de", "del", "desde", "donde", "el", "ella",
    "ellas", "ellos", "en", "entre", "era", "es", "esa", "ese", "eso", "esta", "este", "esto",
    "fue", "ha", "han", "hay", "la", "las", "le", "les", "lo", "los", "me", "mi", "mis", "muy",
    "nos", "o", "para", "pero", "por", "porque", "que", "qué", "se", "si", "sin", "sobre", "su",
    "sus", "también", "te", "tu", "tus", "un", "una", "uno", "unos", "y", "ya", "yo", "él",
    "url", "user", "rt"};

std::vector<std::string> split_on(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

DomainLexicon induce_domain_lexicon(std::span<const TokenSeq> train_docs,
                                    const LexiconInduction& options) {
  if (options.size < 1) throw ValidationError("lexicon size must be >= 1");
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& doc : train_docs) {
    for (const auto& token : doc) {
      if (options.stoplist.contains(token)) continue;
      if (utf8_length(token) < options.min_len) continue;
      ++counts[token];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() < options.size) {
    spdlog::warn("only {} eligible tokens for a lexicon of size {}", ranked.size(), options.size);
  } else {
    ranked.resize(options.size);
  }
  DomainLexicon lexicon;
  lexicon.words.reserve(ranked.size());
  for (auto& [word, count] : ranked) {
    lexicon.source_stats.emplace(word, count);
    lexicon.words.push_back(word);
  }
  return lexicon;
}

void save_domain_lexicon(const DomainLexicon& lexicon, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write lexicon " + path.string());
  out << "word\tcount\n";
  for (const auto& word : lexicon.words) {
    const auto it = lexicon.source_stats.find(word);
    out << word << '\t' << (it == lexicon.source_stats.end() ? 0 : it->second) << '\n';
  }
}

DomainLexicon load_domain_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lexicon " + path.string());
  std::string line;
  std::size_t line_no = 0;
  DomainLexicon lexicon;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line == "word\tcount") continue;
    if (line.empty()) continue;
    const auto fields = split_on(line, '\t');
    std::size_t count = 0;
    if (fields.size() == 2) {
      auto [ptr, ec] = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), count);
      if (ec != std::errc() || ptr != fields[1].data() + fields[1].size()) {
        throw ParseError(path.string(), line_no, "invalid count '" + fields[1] + "'");
      }
    } else if (fields.size() != 1) {
      throw ParseError(path.string(), line_no, "expected word<TAB>count");
    }
    if (lexicon.source_stats.contains(fields[0])) {
      throw ParseError(path.string(), line_no, "duplicate word '" + fields[0] + "'");
    }
    lexicon.words.push_back(fields[0]);
    lexicon.source_stats.emplace(fields[0], count);
  }
  return lexicon;
}

Stoplist default_stoplist(const std::string& language) {
  Stoplist out;
  if (language == "en") {
    for (const char* w : kEnglishStopwords) out.insert(w);
  } else if (language == "es") {
    for (const char* w : kSpanishStopwords) out.insert(w);
  }
  return out;
}

Stoplist load_stoplist(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open stoplist " + path.string());
  Stoplist out;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty() && line[0] != '#') out.insert(line);
  }
  return out;
}

EmotionLexicon::EmotionLexicon(std::vector<std::string> emotions) : emotions_(std::move(emotions)) {
  if (emotions_.empty()) throw ValidationError("emotion lexicon needs at least one emotion");
}

void EmotionLexicon::add(const std::string& word, std::vector<double> scores) {
  if (scores.size() != emotions_.size()) {
    throw ValidationError("entry '" + word + "' has " + std::to_string(scores.size()) +
                          " scores, expected " + std::to_string(emotions_.size()));
  }
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) {
      throw ValidationError("entry '" + word + "' has score outside [0, 1]");
    }
  }
  const std::string key = lowercase(word);
  if (entries_.emplace(key, std::move(scores)).second) order_.push_back(key);
}

const std::vector<double>* EmotionLexicon::find(const std::string& word) const {
  const auto it = entries_.find(word);
  return it == entries_.end() ? nullptr : &it->second;
}

void EmotionLexicon::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write emotion lexicon " + path.string());
  out << "word";
  for (const auto& e : emotions_) out << '\t' << e;
  out << '\n';
  out.precision(17);
  for (const auto& word : order_) {
    out << word;
    for (double s : entries_.at(word)) out << '\t' << s;
    out << '\n';
  }
}

EmotionLexicon load_emotion_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open emotion lexicon " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string(), 1, "empty file, expected header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const char sep = line.find('\t') != std::string::npos ? '\t' : ',';
  auto header = split_on(line, sep);
  for (auto& h : header) h = trim(h);
  if (header.size() < 2 || lowercase(header[0]) != "word") {
    throw ParseError(path.string(), 1, "header must be word followed by emotion names");
  }
  EmotionLexicon lexicon(std::vector<std::string>(header.begin() + 1, header.end()));
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_on(line, sep);
    if (fields.size() != header.size()) {
      throw ParseError(path.string(), line_no,
                       "expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()));
    }
    std::vector<double> scores(fields.size() - 1);
    for (std::size_t k = 0; k + 1 < fields.size(); ++k) {
      const std::string f = trim(fields[k + 1]);
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), scores[k]);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(scores[k])) {
        throw ParseError(path.string(), line_no, "invalid score '" + f + "'");
      }
      if (scores[k] < 0.0 || scores[k] > 1.0) {
        throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": score " + f +
                              " for '" + trim(fields[0]) + "' is outside [0, 1]");
      }
    }
    lexicon.add(trim(fields[0]), std::move(scores));
  }
  return lexicon;
}

}  // namespace ecotext
