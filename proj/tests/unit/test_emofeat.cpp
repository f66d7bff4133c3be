#include <random>

#include <gtest/gtest.h>

#include "ecotext/emofeat.hpp"

using namespace ecotext;

namespace {

EmotionLexicon random_lexicon(std::size_t k, std::size_t words, std::uint64_t seed) {
  std::vector<std::string> emotions;
  for (std::size_t e = 0; e < k; ++e) emotions.push_back("e" + std::to_string(e));
  EmotionLexicon lex(emotions);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t w = 0; w < words; ++w) {
    std::vector<double> s(k);
    for (auto& x : s) x = u(rng);
    lex.add("w" + std::to_string(w), s);
  }
  return lex;
}

}  // namespace

TEST(EmoFeat, LengthIsTwiceTheEmotionCount) {
  EXPECT_EQ(emofeat_features({"w1"}, random_lexicon(8, 5, 1)).values.size(), 16);
  EXPECT_EQ(emofeat_features({"w1"}, random_lexicon(6, 5, 1)).values.size(), 12);
}

TEST(EmoFeat, MaxAndMeanOverHits) {
  EmotionLexicon lex({"sadness"});
  lex.add("w1", {0.8});
  lex.add("w2", {0.2});
  const auto f = emofeat_features({"w1", "other", "w2"}, lex);
  EXPECT_EQ(f.matched_count, 2u);
  EXPECT_DOUBLE_EQ(f.values[0], 0.8);
  EXPECT_DOUBLE_EQ(f.values[1], 0.5);
}

TEST(EmoFeat, NoHitsGivesZeroVector) {
  const auto f = emofeat_features({"nothing", "here"}, random_lexicon(8, 5, 2));
  EXPECT_EQ(f.matched_count, 0u);
  EXPECT_EQ(f.values, Eigen::VectorXd::Zero(16));
}

TEST(EmoFeat, RepeatedWordsCountPerOccurrence) {
  EmotionLexicon lex({"joy"});
  lex.add("a", {1.0});
  lex.add("b", {0.0});
  const auto f = emofeat_features({"a", "a", "a", "b"}, lex);
  EXPECT_DOUBLE_EQ(f.values[1], 0.75);
}

TEST(EmoFeat, MaxAtLeastMeanAndDuplicationInvariantProperty) {
  const auto lex = random_lexicon(8, 40, 3);
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> pick(0, 79);
  std::uniform_int_distribution<int> len(0, 15);
  for (int trial = 0; trial < 500; ++trial) {
    TokenSeq t;
    for (int i = len(rng); i > 0; --i) t.push_back("w" + std::to_string(pick(rng)));
    const auto f = emofeat_features(t, lex).values;
    for (Eigen::Index e = 0; e < 8; ++e) {
      EXPECT_GE(f[2 * e], f[2 * e + 1]);
      EXPECT_GE(f[2 * e + 1], 0.0);
    }
    auto doubled = t;
    doubled.insert(doubled.end(), t.begin(), t.end());
    EXPECT_LT((emofeat_features(doubled, lex).values - f).cwiseAbs().maxCoeff(), 1e-12);
  }
}
