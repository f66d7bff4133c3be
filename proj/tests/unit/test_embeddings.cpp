#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ecotext/embeddings.hpp"
#include "ecotext/error.hpp"
#include "test_support.hpp"

using namespace ecotext;
using ecotext::testing::TempDir;
using ecotext::testing::write_file;

TEST(Embeddings, LoadsTextFormatAndNormalizes) {
  TempDir dir;
  write_file(dir / "e.txt", "3 4\nsad 1 2 3 4\nhappy 0 0 0 2\ntired -1 0.5 0 0\n");
  const auto store = load_embeddings(dir / "e.txt");
  EXPECT_EQ(store.dim(), 4u);
  EXPECT_EQ(store.size(), 3u);
  for (std::size_t i = 0; i < store.size(); ++i) {
    double norm = 0.0;
    for (double v : store.row(i)) norm += v * v;
    EXPECT_NEAR(std::sqrt(norm), 1.0, 1e-6);
  }
  const auto happy = *store.lookup("happy");
  EXPECT_DOUBLE_EQ(happy[3], 1.0);
}

TEST(Embeddings, DimensionMismatchIsAParseError) {
  TempDir dir;
  write_file(dir / "e.txt", "a 1 2 3 4\nb 1 2 3\n");
  try {
    load_embeddings(dir / "e.txt");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Embeddings, HeaderDimensionIsEnforced) {
  TempDir dir;
  write_file(dir / "e.txt", "1 4\nsad 1 2 3\n");
  EXPECT_THROW(load_embeddings(dir / "e.txt"), ParseError);
}

TEST(Cosine, HandValues) {
  const std::vector<double> v{0.3, -2.0, 5.0};
  EXPECT_NEAR(cosine(v, v), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(cosine(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 0.0);
  EXPECT_NEAR(cosine(std::vector<double>{1, 1}, std::vector<double>{1, 0}), 0.70710678118654752, 1e-12);
  EXPECT_THROW(cosine(std::vector<double>{0, 0}, std::vector<double>{1, 0}), ValidationError);
  EXPECT_THROW(cosine(std::vector<double>{1}, std::vector<double>{1, 0}), ValidationError);
}

TEST(Cosine, SymmetricAndBoundedProperty) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> a(7), b(7);
    for (auto& x : a) x = normal(rng);
    for (auto& x : b) x = normal(rng);
    const double ab = cosine(a, b);
    EXPECT_EQ(ab, cosine(b, a));
    EXPECT_LE(std::abs(ab), 1.0 + 1e-9);
  }
}

TEST(DocVector, MeanOfKnownTokens) {
  EmbeddingStore store(2);
  store.add("a", std::vector<double>{1, 0});
  store.add("b", std::vector<double>{0, 1});
  const auto one = doc_vector(store, {"a", "zzz"});
  EXPECT_EQ(one.matched, 1u);
  EXPECT_DOUBLE_EQ(one.values[0], 1.0);
  EXPECT_DOUBLE_EQ(one.values[1], 0.0);

  const auto two = doc_vector(store, {"a", "b"});
  EXPECT_DOUBLE_EQ(two.values[0], 0.5);
  EXPECT_DOUBLE_EQ(two.values[1], 0.5);

  const auto none = doc_vector(store, {"x", "y"});
  EXPECT_TRUE(none.all_oov());
  EXPECT_DOUBLE_EQ(none.values.norm(), 0.0);
}

TEST(DocVector, PermutationInvariantProperty) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  EmbeddingStore store(5);
  std::vector<std::string> words;
  for (int i = 0; i < 20; ++i) {
    std::vector<double> v(5);
    for (auto& x : v) x = normal(rng);
    words.push_back("w" + std::to_string(i));
    store.add(words.back(), v);
  }
  store.normalize();
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  for (int trial = 0; trial < 100; ++trial) {
    TokenSeq t;
    for (int i = 0; i < 8; ++i) t.push_back(words[pick(rng)]);
    const auto a = doc_vector(store, t);
    std::shuffle(t.begin(), t.end(), rng);
    const auto b = doc_vector(store, t);
    EXPECT_LT((a.values - b.values).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(DocVectors, LoadRejectsDuplicatesAndReportsMissingIds) {
  TempDir dir;
  write_file(dir / "v.tsv", "d1\t0.1,0.2\nd2\t0.3,0.4\n");
  const auto table = load_doc_vectors(dir / "v.tsv");
  EXPECT_EQ(table.dim(), 2u);
  EXPECT_NO_THROW(table.require_ids({"d1", "d2"}));
  EXPECT_THROW(table.require_ids({"d1", "d3"}), ValidationError);

  write_file(dir / "dup.tsv", "d1\t0.1,0.2\nd1\t0.3,0.4\n");
  EXPECT_THROW(load_doc_vectors(dir / "dup.tsv"), ParseError);
}

TEST(Embeddings, SaveLoadRoundTrip) {
  TempDir dir;
  EmbeddingStore store(3);
  store.add("x", std::vector<double>{1, 2, 2});
  store.add("y", std::vector<double>{0, 3, 4});
  store.normalize();
  store.save(dir / "s.txt");
  const auto back = load_embeddings(dir / "s.txt");
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(back.lookup("y")->data()[i], store.lookup("y")->data()[i], 1e-12);
}
