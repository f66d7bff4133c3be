#include <algorithm>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "ecotext/corpus.hpp"
#include "ecotext/error.hpp"
#include "ecotext/synthetic.hpp"
#include "test_support.hpp"

using namespace ecotext;
using ecotext::testing::TempDir;
using ecotext::testing::write_file;

namespace {

LabeledCorpus numbered_corpus(std::size_t n_a, std::size_t n_b) {
  std::vector<Document> docs;
  for (std::size_t i = 0; i < n_a + n_b; ++i) {
    docs.push_back({"id" + std::to_string(i), "text number " + std::to_string(i), i < n_a ? "a" : "b"});
  }
  return LabeledCorpus(docs);
}

std::multiset<std::string> ids_of(const LabeledCorpus& c) {
  std::multiset<std::string> out;
  for (const auto& d : c.documents()) out.insert(d.id);
  return out;
}

}  // namespace

TEST(Corpus, LoadsJsonlAndDerivesSortedClasses) {
  TempDir dir;
  write_file(dir / "c.jsonl",
             "{\"id\":\"1\",\"text\":\"good day\",\"label\":\"pos\"}\n"
             "{\"id\":\"2\",\"text\":\"bad day\",\"label\":\"neg\"}\n"
             "\n"
             "{\"id\":3,\"text\":\"fine\",\"label\":\"pos\"}\n");
  const auto corpus = load_corpus(dir / "c.jsonl", CorpusFormat::jsonl);
  EXPECT_EQ(corpus.size(), 3u);
  EXPECT_EQ(corpus.classes(), (std::vector<std::string>{"neg", "pos"}));
  EXPECT_EQ(corpus[2].id, "3");
}

TEST(Corpus, MissingLabelReportsItsLine) {
  TempDir dir;
  write_file(dir / "c.jsonl",
             "{\"id\":\"1\",\"text\":\"a\",\"label\":\"x\"}\n"
             "{\"id\":\"2\",\"text\":\"b\"}\n");
  try {
    load_corpus(dir / "c.jsonl", CorpusFormat::jsonl);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Corpus, RejectsDuplicateIdsAndBlankText) {
  EXPECT_THROW(LabeledCorpus({{"1", "a", "x"}, {"1", "b", "y"}}), ValidationError);
  EXPECT_THROW(LabeledCorpus({{"1", "   ", "x"}}), ValidationError);
  EXPECT_THROW(LabeledCorpus({{"1", "a", ""}}), ValidationError);
}

TEST(Corpus, TsvRequiresHeaderAndThreeFields) {
  TempDir dir;
  write_file(dir / "ok.tsv", "id\ttext\tlabel\n1\thello there\tmoderate\n2\tfine\tnot depression\n");
  const auto corpus = load_corpus(dir / "ok.tsv", CorpusFormat::tsv);
  EXPECT_EQ(corpus.size(), 2u);
  EXPECT_EQ(corpus.classes(), (std::vector<std::string>{"moderate", "not depression"}));

  write_file(dir / "bad.tsv", "id\ttext\tlabel\n1\thello\tthere\tx\n");
  EXPECT_THROW(load_corpus(dir / "bad.tsv", CorpusFormat::tsv), ParseError);
  write_file(dir / "nohdr.tsv", "1\thello\tx\n");
  EXPECT_THROW(load_corpus(dir / "nohdr.tsv", CorpusFormat::tsv), ParseError);
}

TEST(Corpus, SaveLoadRoundTripIsIdentity) {
  TempDir dir;
  const auto corpus = LabeledCorpus({{"a", "quote \" and unicode ñandú", "x"},
                                     {"b", "backslash \\ end", "y"},
                                     {"c", "plain", "x"}});
  for (auto fmt : {CorpusFormat::jsonl, CorpusFormat::tsv}) {
    const auto path = dir / (fmt == CorpusFormat::jsonl ? "r.jsonl" : "r.tsv");
    save_corpus(corpus, path, fmt);
    const auto back = load_corpus(path, fmt);
    EXPECT_EQ(back.documents(), corpus.documents());
  }
}

TEST(Split, SizesFollowRoundedFraction) {
  const auto corpus = numbered_corpus(50, 50);
  const auto s = split(corpus, 0.33, 7);
  EXPECT_EQ(s.test.size(), 33u);
  EXPECT_EQ(s.train.size(), 67u);
}

TEST(Split, DeterministicForSeed) {
  const auto corpus = numbered_corpus(40, 60);
  const auto a = split(corpus, 0.33, 7);
  const auto b = split(corpus, 0.33, 7);
  EXPECT_EQ(a.test.documents(), b.test.documents());
  const auto c = split(corpus, 0.33, 8);
  EXPECT_NE(a.test.documents(), c.test.documents());
}

TEST(Split, IsAPartitionProperty) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto corpus = numbered_corpus(10 + seed, 30);
    for (bool stratified : {true, false}) {
      const auto s = split(corpus, 0.25 + 0.01 * static_cast<double>(seed % 10), seed, stratified);
      auto all = ids_of(s.train);
      const auto test = ids_of(s.test);
      all.insert(test.begin(), test.end());
      EXPECT_EQ(all, ids_of(corpus));
      EXPECT_EQ(s.train.classes(), corpus.classes());
      EXPECT_EQ(s.test.classes(), corpus.classes());
    }
  }
}

TEST(Split, StratifiedKeepsClassMixWithinOneDoc) {
  const auto corpus = numbered_corpus(60, 40);
  const auto s = split(corpus, 0.33, 3, true);
  std::map<std::string, int> counts;
  for (const auto& d : s.test.documents()) ++counts[d.label];
  const double n = static_cast<double>(s.test.size());
  EXPECT_LE(std::abs(counts["a"] - 0.6 * n), 1.0);
  EXPECT_LE(std::abs(counts["b"] - 0.4 * n), 1.0);
}

TEST(Split, RejectsBadFraction) {
  const auto corpus = numbered_corpus(5, 5);
  EXPECT_THROW(split(corpus, 0.0, 1), ValidationError);
  EXPECT_THROW(split(corpus, 1.0, 1), ValidationError);
}

TEST(Corpus, ClassDistributionSumsToSize) {
  const auto corpus = numbered_corpus(7, 3);
  std::size_t total = 0;
  for (const auto& [label, n] : corpus.class_distribution()) total += n;
  EXPECT_EQ(total, corpus.size());
}

TEST(Synthetic, FixedSeedIsByteIdentical) {
  TempDir dir;
  const auto spec = make_synth_spec(200, 2, 5, 40, 11);
  save_corpus(synth_corpus(spec), dir / "a.jsonl", CorpusFormat::jsonl);
  save_corpus(synth_corpus(spec), dir / "b.jsonl", CorpusFormat::jsonl);
  EXPECT_EQ(ecotext::testing::read_file(dir / "a.jsonl"), ecotext::testing::read_file(dir / "b.jsonl"));
}

TEST(Synthetic, ImbalancedHistogramMatchesSpecExactly) {
  // DepSign-like ratios: not depression / moderate / severe.
  auto spec = make_synth_spec(1000, 3, 5, 50, 3);
  spec.class_weights = {0.26, 0.64, 0.10};
  const auto corpus = synth_corpus(spec);
  std::map<std::string, std::size_t> counts;
  for (const auto& d : corpus.documents()) ++counts[d.label];
  const auto expected = synth_class_counts(spec);
  EXPECT_EQ(expected, (std::vector<std::size_t>{260, 640, 100}));
  for (std::size_t c = 0; c < spec.classes.size(); ++c) EXPECT_EQ(counts[spec.classes[c]], expected[c]);
}

TEST(Synthetic, PlantedTokensIdentifyTheClass) {
  const auto spec = make_synth_spec(200, 2, 5, 40, 5);
  const auto corpus = synth_corpus(spec);
  for (const auto& d : corpus.documents()) {
    const std::size_t c = d.label == "class_0" ? 0 : 1;
    bool has_own = false;
    bool has_other = false;
    for (const auto& w : spec.planted_vocab[c]) has_own |= d.text.find(w) != std::string::npos;
    for (const auto& w : spec.planted_vocab[1 - c]) has_other |= d.text.find(w) != std::string::npos;
    EXPECT_TRUE(has_own);
    EXPECT_FALSE(has_other);
  }
}
