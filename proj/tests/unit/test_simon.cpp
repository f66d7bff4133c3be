#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ecotext/simon.hpp"

using namespace ecotext;

namespace {

EmbeddingStore random_store(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  EmbeddingStore store(dim);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(dim);
    for (auto& x : v) x = normal(rng);
    store.add("w" + std::to_string(i), v);
  }
  store.normalize();
  return store;
}

DomainLexicon lexicon_of(std::vector<std::string> words) {
  DomainLexicon lex;
  for (const auto& w : words) lex.source_stats[w] = 1;
  lex.words = std::move(words);
  return lex;
}

}  // namespace

TEST(Simon, ToyStoreHandCosines) {
  EmbeddingStore store(2);
  store.add("a", std::vector<double>{1, 0});
  store.add("b", std::vector<double>{0, 1});
  store.add("c", std::vector<double>{1, 1});
  store.normalize();
  const auto lex = lexicon_of({"a", "b"});
  const SimonProjector proj(lex, store);
  const auto f = proj.project({"c"});
  ASSERT_EQ(f.size(), 2);
  EXPECT_NEAR(f[0], std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(f[1], std::sqrt(0.5), 1e-12);
}

TEST(Simon, ContainingAxisWordGivesOne) {
  const auto store = random_store(50, 8, 1);
  const auto lex = lexicon_of({"w3", "w7", "w9"});
  const SimonProjector proj(lex, store);
  const auto f = proj.project({"w20", "w7", "w1"});
  EXPECT_NEAR(f[1], 1.0, 1e-12);
}

TEST(Simon, EmptyAndOovGiveZeroVector) {
  const auto store = random_store(10, 4, 2);
  const auto lex = lexicon_of({"w1", "w2", "missing"});
  const SimonProjector proj(lex, store);
  EXPECT_EQ(proj.missing_axes(), (std::vector<std::string>{"missing"}));
  EXPECT_EQ(proj.project({}), Eigen::VectorXd::Zero(3));
  EXPECT_EQ(proj.project({"nope"}), Eigen::VectorXd::Zero(3));
}

TEST(Simon, LengthFixedByLexicon) {
  const auto store = random_store(600, 10, 3);
  std::vector<std::string> words;
  for (int i = 0; i < 512; ++i) words.push_back("w" + std::to_string(i));
  const auto lex = lexicon_of(words);
  const SimonProjector proj(lex, store);
  EXPECT_EQ(proj.project({"w1"}).size(), 512);
  EXPECT_EQ(proj.project(TokenSeq(300, "w5")).size(), 512);
}

TEST(Simon, MonotoneBoundedPermutationInvariantProperty) {
  const auto store = random_store(200, 12, 4);
  std::vector<std::string> words;
  for (int i = 0; i < 64; ++i) words.push_back("w" + std::to_string(i * 3));
  const auto lex = lexicon_of(words);
  const SimonProjector proj(lex, store);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> pick(0, 249);  // some ids are out of vocabulary
  for (int trial = 0; trial < 200; ++trial) {
    TokenSeq t;
    for (int i = 0; i < 6; ++i) t.push_back("w" + std::to_string(pick(rng)));
    const auto before = proj.project(t);
    EXPECT_LE(before.cwiseAbs().maxCoeff(), 1.0);
    auto extended = t;
    extended.push_back("w" + std::to_string(pick(rng)));
    const auto after = proj.project(extended);
    EXPECT_TRUE(((after - before).array() >= -1e-15).all() || t.empty());
    std::shuffle(t.begin(), t.end(), rng);
    EXPECT_EQ(proj.project(t), before);
  }
}

TEST(Simon, ClampAndMeanPooling) {
  EmbeddingStore store(2);
  store.add("a", std::vector<double>{1, 0});
  store.add("neg", std::vector<double>{-1, 0});
  store.add("b", std::vector<double>{0, 1});
  const auto lex = lexicon_of({"a"});
  SimonConfig clamp;
  clamp.clamp_negative = true;
  EXPECT_DOUBLE_EQ(SimonProjector(lex, store, clamp).project({"neg"})[0], 0.0);
  EXPECT_DOUBLE_EQ(SimonProjector(lex, store).project({"neg"})[0], -1.0);
  SimonConfig mean;
  mean.pooling = SimonPooling::mean;
  EXPECT_DOUBLE_EQ(SimonProjector(lex, store, mean).project({"a", "b"})[0], 0.5);
}
