#include <algorithm>
#include <map>

#include <gtest/gtest.h>

#include "ecotext/corpus.hpp"
#include "ecotext/error.hpp"
#include "ecotext/lexicons.hpp"
#include "ecotext/synthetic.hpp"
#include "test_support.hpp"

using namespace ecotext;
using ecotext::testing::TempDir;
using ecotext::testing::write_file;

namespace {

std::vector<TokenSeq> docs_with_counts(const std::map<std::string, int>& counts) {
  std::vector<TokenSeq> docs(1);
  for (const auto& [w, n] : counts) {
    for (int i = 0; i < n; ++i) docs[0].push_back(w);
  }
  return docs;
}

}  // namespace

TEST(FreqSelect, StoplistAndSize) {
  LexiconInduction opts;
  opts.size = 2;
  opts.stoplist = {"the"};
  const auto lex = induce_domain_lexicon(docs_with_counts({{"sad", 10}, {"happy", 7}, {"the", 50}}), opts);
  EXPECT_EQ(lex.words, (std::vector<std::string>{"sad", "happy"}));
  EXPECT_EQ(lex.source_stats.at("sad"), 10u);
}

TEST(FreqSelect, TiesBreakLexicographically) {
  LexiconInduction opts;
  opts.size = 2;
  const auto lex = induce_domain_lexicon(docs_with_counts({{"a1", 5}, {"a0", 5}, {"zz", 1}}), opts);
  EXPECT_EQ(lex.words, (std::vector<std::string>{"a0", "a1"}));
}

TEST(FreqSelect, MinLengthFilter) {
  LexiconInduction opts;
  opts.size = 5;
  opts.min_len = 3;
  const auto lex = induce_domain_lexicon(docs_with_counts({{"ab", 9}, {"abc", 1}, {"ñoñ", 2}}), opts);
  EXPECT_EQ(lex.words, (std::vector<std::string>{"ñoñ", "abc"}));
}

TEST(FreqSelect, MatchesBruteForceOnSyntheticCorpus) {
  const auto corpus = synth_corpus(make_synth_spec(300, 3, 6, 120, 8));
  std::vector<TokenSeq> docs;
  for (const auto& d : corpus.documents()) docs.push_back(tokenize(d.text));
  LexiconInduction opts;
  opts.size = 64;
  const auto lex = induce_domain_lexicon(docs, opts);
  ASSERT_EQ(lex.words.size(), 64u);

  std::map<std::string, std::size_t> counts;
  for (const auto& d : docs) {
    for (const auto& t : d) ++counts[t];
  }
  std::size_t min_kept = SIZE_MAX;
  for (const auto& w : lex.words) {
    EXPECT_EQ(lex.source_stats.at(w), counts.at(w));
    min_kept = std::min(min_kept, counts.at(w));
  }
  for (const auto& [w, n] : counts) {
    if (std::find(lex.words.begin(), lex.words.end(), w) == lex.words.end() && w.size() >= 2) {
      EXPECT_LE(n, min_kept) << w;
    }
  }
}

TEST(FreqSelect, ReinductionIsByteIdentical) {
  TempDir dir;
  const auto corpus = synth_corpus(make_synth_spec(100, 2, 4, 60, 2));
  std::vector<TokenSeq> docs;
  for (const auto& d : corpus.documents()) docs.push_back(tokenize(d.text));
  save_domain_lexicon(induce_domain_lexicon(docs, {}), dir / "a.tsv");
  save_domain_lexicon(induce_domain_lexicon(docs, {}), dir / "b.tsv");
  EXPECT_EQ(ecotext::testing::read_file(dir / "a.tsv"), ecotext::testing::read_file(dir / "b.tsv"));
  const auto back = load_domain_lexicon(dir / "a.tsv");
  EXPECT_EQ(back.words, induce_domain_lexicon(docs, {}).words);
}

TEST(EmotionLexicon, LoadsHeaderOrder) {
  TempDir dir;
  write_file(dir / "l.tsv",
             "word\tanger\tanticipation\tdisgust\tfear\tjoy\tsadness\tsurprise\ttrust\n"
             "cry\t0\t0\t0\t0.2\t0\t0.9\t0\t0\n"
             "Smile\t0\t0.1\t0\t0\t1\t0\t0\t0.3\n"
             "rage\t1\t0\t0.5\t0\t0\t0\t0\t0\n");
  const auto lex = load_emotion_lexicon(dir / "l.tsv");
  EXPECT_EQ(lex.num_emotions(), 8u);
  EXPECT_EQ(lex.size(), 3u);
  EXPECT_EQ(lex.emotions(), (std::vector<std::string>{"anger", "anticipation", "disgust", "fear", "joy", "sadness",
                                                       "surprise", "trust"}));
  ASSERT_NE(lex.find("smile"), nullptr);
  EXPECT_DOUBLE_EQ((*lex.find("smile"))[4], 1.0);
}

TEST(EmotionLexicon, CommaSeparatedAndBinaryIndicators) {
  TempDir dir;
  write_file(dir / "l.csv", "word,joy,sadness\nhappy,1,0\nsad,0,1\n");
  const auto lex = load_emotion_lexicon(dir / "l.csv");
  EXPECT_EQ(lex.num_emotions(), 2u);
  EXPECT_DOUBLE_EQ((*lex.find("sad"))[1], 1.0);
}

TEST(EmotionLexicon, RejectsOutOfRangeScores) {
  TempDir dir;
  write_file(dir / "neg.tsv", "word\tjoy\nx\t-0.1\n");
  EXPECT_THROW(load_emotion_lexicon(dir / "neg.tsv"), ValidationError);
  write_file(dir / "big.tsv", "word\tjoy\nx\t1.5\n");
  EXPECT_THROW(load_emotion_lexicon(dir / "big.tsv"), ValidationError);
  write_file(dir / "short.tsv", "word\tjoy\tfear\nx\t0.5\n");
  EXPECT_THROW(load_emotion_lexicon(dir / "short.tsv"), ParseError);
}

TEST(Stoplist, DefaultsPerLanguage) {
  EXPECT_TRUE(default_stoplist("en").contains("the"));
  EXPECT_TRUE(default_stoplist("es").contains("que"));
  EXPECT_TRUE(default_stoplist("xx").empty());
}
