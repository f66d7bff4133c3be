#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "ecotext/error.hpp"
#include "ecotext/synthetic.hpp"
#include "ecotext/topics.hpp"
#include "test_support.hpp"

using namespace ecotext;

namespace {

// Word vectors for `groups` clusters around random centres with small jitter.
struct ClusteredData {
  EmbeddingStore store{8};
  std::vector<std::string> ids;
  std::vector<TokenSeq> docs;
  std::vector<std::size_t> planted;
};

ClusteredData clustered(std::size_t groups, std::size_t docs_per_group, std::uint64_t seed) {
  ClusteredData data;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0.0, 0.05);
  std::normal_distribution<double> center(0.0, 1.0);
  for (std::size_t g = 0; g < groups; ++g) {
    std::vector<double> c(8);
    for (auto& x : c) x = center(rng);
    for (int w = 0; w < 10; ++w) {
      std::vector<double> v = c;
      for (auto& x : v) x += jitter(rng);
      data.store.add("g" + std::to_string(g) + "w" + std::to_string(w), v);
    }
  }
  std::uniform_int_distribution<int> word(0, 9);
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t i = 0; i < docs_per_group; ++i) {
      TokenSeq t;
      for (int j = 0; j < 4; ++j) t.push_back("g" + std::to_string(g) + "w" + std::to_string(word(rng)));
      data.ids.push_back("d" + std::to_string(data.ids.size()));
      data.docs.push_back(std::move(t));
      data.planted.push_back(g);
    }
  }
  return data;
}

// Direct transcription of W[t,c] = tf(t,c) * log(1 + A / tf(t)).
double oracle_weight(const TermCounts& counts, std::size_t topic, const std::string& term) {
  double total_all = 0.0;
  double term_total = 0.0;
  for (const auto& t : counts) {
    for (const auto& [w, c] : t) {
      total_all += static_cast<double>(c);
      if (w == term) term_total += static_cast<double>(c);
    }
  }
  const double a = total_all / static_cast<double>(counts.size());
  const auto it = counts[topic].find(term);
  const double tf = it == counts[topic].end() ? 0.0 : static_cast<double>(it->second);
  return tf == 0.0 ? 0.0 : tf * std::log(1.0 + a / term_total);
}

}  // namespace

TEST(Ctfidf, MatchesDirectFormulaOracle) {
  const TermCounts counts{{{"t1", 4}, {"t2", 2}}, {{"t2", 2}}};
  const auto table = ctfidf(counts);
  EXPECT_DOUBLE_EQ(table.average_terms(), 4.0);
  for (std::size_t c = 0; c < 2; ++c) {
    for (const std::string term : {"t1", "t2"}) {
      EXPECT_NEAR(table.weight(c, term), oracle_weight(counts, c, term), 1e-9) << c << term;
    }
  }
  EXPECT_EQ(table.weight(1, "t1"), 0.0);
}

TEST(Ctfidf, ExclusiveTermOutweighsSharedTerm) {
  const TermCounts counts{{{"shared", 3}, {"mine", 3}}, {{"shared", 3}, {"other", 3}}};
  const auto table = ctfidf(counts);
  EXPECT_GT(table.weight(0, "mine"), table.weight(0, "shared"));
  const auto top = table.top_terms(0, 1);
  ASSERT_EQ(top.size(), 1u);
  EXPECT_EQ(top[0].term, "mine");
}

TEST(Ctfidf, RandomTablesMatchOracleProperty) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> count(0, 6);
  for (int trial = 0; trial < 100; ++trial) {
    TermCounts counts(3);
    for (auto& topic : counts) {
      for (int w = 0; w < 5; ++w) {
        const int c = count(rng);
        if (c > 0) topic["w" + std::to_string(w)] = static_cast<std::uint64_t>(c);
      }
    }
    counts[0]["anchor"] = 1;
    const auto table = ctfidf(counts);
    for (std::size_t c = 0; c < 3; ++c) {
      for (int w = 0; w < 5; ++w) {
        const auto term = "w" + std::to_string(w);
        const double got = table.weight(c, term);
        EXPECT_GE(got, 0.0);
        EXPECT_NEAR(got, oracle_weight(counts, c, term), 1e-9);
      }
    }
  }
}

TEST(Ctfidf, EmptyTableIsAnError) {
  EXPECT_THROW(ctfidf({}), ValidationError);
  EXPECT_THROW(ctfidf(TermCounts(2)), ValidationError);
}

TEST(TopicModel, TwoPlantedClustersAreRecovered) {
  const auto data = clustered(2, 30, 1);
  TopicOptions opts;
  opts.k = 2;
  opts.reduced_dim = 2;
  opts.seed = 7;
  const auto model = fit_topic_model(data.ids, data.docs, data.store, opts);
  ASSERT_EQ(model.k(), 2u);
  const auto& assignments = model.train_assignments();
  ASSERT_EQ(assignments.size(), data.docs.size());
  const std::size_t first = assignments[0].second;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    EXPECT_EQ(assignments[i].second == first, data.planted[i] == data.planted[0]) << i;
    // Brute-force nearest centroid.
    const auto z = model.reduce(doc_vector(data.store, data.docs[i]).values);
    std::size_t best = 0;
    for (std::size_t c = 1; c < model.k(); ++c) {
      if ((model.centroids().row(static_cast<Eigen::Index>(c)).transpose() - z).squaredNorm() <
          (model.centroids().row(static_cast<Eigen::Index>(best)).transpose() - z).squaredNorm()) {
        best = c;
      }
    }
    EXPECT_EQ(assignments[i].second, best);
  }
  // Labels come from the uni/bi/trigrams of member documents.
  for (std::size_t t = 0; t < model.k(); ++t) {
    EXPECT_FALSE(model.topic_terms()[t].empty());
    EXPECT_NE(model.label(t).find('{'), std::string::npos);
  }
}

TEST(TopicModel, TwentyOneRequestedTopics) {
  const auto data = clustered(21, 8, 2);
  TopicOptions opts;
  opts.k = 21;
  opts.reduced_dim = 5;
  const auto model = fit_topic_model(data.ids, data.docs, data.store, opts);
  EXPECT_EQ(model.k(), 21u);
  EXPECT_EQ(model.centroids().rows(), 21);
  EXPECT_TRUE(model.centroids().allFinite());
  const auto counts = model.member_counts();
  EXPECT_EQ(std::accumulate(counts.begin(), counts.end(), std::size_t{0}), data.docs.size());
}

TEST(TopicModel, SameSeedIsDeterministic) {
  const auto data = clustered(4, 15, 3);
  TopicOptions opts;
  opts.k = 4;
  opts.seed = 11;
  const auto a = fit_topic_model(data.ids, data.docs, data.store, opts);
  const auto b = fit_topic_model(data.ids, data.docs, data.store, opts);
  EXPECT_EQ(a.centroids(), b.centroids());
  EXPECT_EQ(a.train_assignments(), b.train_assignments());
  EXPECT_EQ(a.to_json_string(), b.to_json_string());
}

TEST(TopicModel, RejectsBadArguments) {
  const auto data = clustered(2, 3, 4);
  TopicOptions opts;
  opts.k = 7;
  opts.reduced_dim = 2;
  EXPECT_THROW(fit_topic_model(data.ids, data.docs, data.store, opts), ValidationError);
  opts.k = 2;
  opts.reduced_dim = 9;
  EXPECT_THROW(fit_topic_model(data.ids, data.docs, data.store, opts), ValidationError);

  std::vector<TokenSeq> same(5, TokenSeq{"g0w1"});
  std::vector<std::string> ids{"a", "b", "c", "d", "e"};
  opts.reduced_dim = 2;
  EXPECT_THROW(fit_topic_model(ids, same, data.store, opts), ValidationError);
}

TEST(TopicModel, SaveLoadRoundTrip) {
  ecotext::testing::TempDir dir;
  const auto data = clustered(3, 10, 5);
  TopicOptions opts;
  opts.k = 3;
  const auto model = fit_topic_model(data.ids, data.docs, data.store, opts);
  model.save(dir / "t.json");
  const auto back = TopicModel::load(dir / "t.json");
  EXPECT_EQ(back.to_json_string(), model.to_json_string());
}

TEST(TopicFeatures, SimplexUniformAndPeaked) {
  const auto data = clustered(3, 12, 6);
  TopicOptions opts;
  opts.k = 3;
  opts.reduced_dim = 3;
  const auto model = fit_topic_model(data.ids, data.docs, data.store, opts);

  const auto uniform = topic_features({"unknown", "words"}, model, data.store);
  for (Eigen::Index j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(uniform[j], 1.0 / 3.0);

  for (std::size_t i = 0; i < data.docs.size(); ++i) {
    const auto f = topic_features(data.docs[i], model, data.store);
    ASSERT_EQ(f.size(), 3);
    EXPECT_NEAR(f.sum(), 1.0, 1e-9);
    EXPECT_TRUE((f.array() >= 0.0).all());
    Eigen::Index arg = 0;
    f.maxCoeff(&arg);
    EXPECT_EQ(static_cast<std::size_t>(arg), model.train_assignments()[i].second);
  }
}

TEST(TopicFeatures, DocumentAtDistantCentroidIsOneHot) {
  EmbeddingStore store(2);
  store.add("left", std::vector<double>{-50, 0});
  store.add("right", std::vector<double>{50, 0});
  std::vector<std::string> ids;
  std::vector<TokenSeq> docs;
  for (int i = 0; i < 6; ++i) {
    ids.push_back("d" + std::to_string(i));
    docs.push_back({i % 2 ? "left" : "right"});
  }
  TopicOptions opts;
  opts.k = 2;
  opts.reduced_dim = 1;
  const auto model = fit_topic_model(ids, docs, store, opts);
  const auto f = topic_features({"left"}, model, store);
  const auto topic = model.train_assignments()[1].second;
  EXPECT_NEAR(f[static_cast<Eigen::Index>(topic)], 1.0, 1e-12);
  EXPECT_NEAR(f[static_cast<Eigen::Index>(1 - topic)], 0.0, 1e-12);
}

TEST(ReduceTopics, ChainsAndConservesDocuments) {
  const auto data = clustered(32, 6, 8);
  TopicOptions opts;
  opts.k = 32;
  opts.reduced_dim = 5;
  const auto base = fit_topic_model(data.ids, data.docs, data.store, opts);
  ASSERT_EQ(base.k(), 32u);
  const auto k16 = reduce_topics(base, 16);
  const auto k8 = reduce_topics(k16, 8);
  EXPECT_EQ(k16.k(), 16u);
  EXPECT_EQ(k8.k(), 8u);
  for (const auto* m : {&k16, &k8}) {
    const auto counts = m->member_counts();
    EXPECT_EQ(std::accumulate(counts.begin(), counts.end(), std::size_t{0}), data.docs.size());
    EXPECT_EQ(m->topic_terms().size(), m->k());
    EXPECT_TRUE(m->centroids().allFinite());
  }
  // Merging never splits documents that already share a topic.
  const auto& before = base.train_assignments();
  const auto& after = k8.train_assignments();
  for (std::size_t i = 0; i < before.size(); ++i) {
    for (std::size_t j = i + 1; j < before.size(); ++j) {
      if (before[i].second == before[j].second) {
        EXPECT_EQ(after[i].second, after[j].second);
      }
    }
  }
  EXPECT_THROW(reduce_topics(k8, 8), ValidationError);
  EXPECT_THROW(reduce_topics(k8, 1), ValidationError);
}

TEST(ReduceTopics, MergedCentroidIsMemberWeightedMean) {
  EmbeddingStore store(2);
  store.add("a", std::vector<double>{0, 0});
  store.add("b", std::vector<double>{1, 0});
  store.add("c", std::vector<double>{10, 0});
  std::vector<std::string> ids;
  std::vector<TokenSeq> docs;
  for (int i = 0; i < 3; ++i) { ids.push_back("a" + std::to_string(i)); docs.push_back({"a"}); }
  ids.push_back("b0");
  docs.push_back({"b"});
  for (int i = 0; i < 4; ++i) { ids.push_back("c" + std::to_string(i)); docs.push_back({"c"}); }
  TopicOptions opts;
  opts.k = 3;
  opts.reduced_dim = 1;
  const auto model = fit_topic_model(ids, docs, store, opts);
  const auto merged = reduce_topics(model, 2);
  const auto ta = merged.train_assignments()[0].second;
  EXPECT_EQ(merged.train_assignments()[3].second, ta);
  const auto za = model.reduce(Eigen::Vector2d(0, 0));
  const auto zb = model.reduce(Eigen::Vector2d(1, 0));
  EXPECT_NEAR(merged.centroids()(static_cast<Eigen::Index>(ta), 0), (3 * za[0] + zb[0]) / 4, 1e-9);
  EXPECT_EQ(merged.member_counts()[ta], 4u);
}
