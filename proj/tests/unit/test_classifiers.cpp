#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "ecotext/classifiers.hpp"
#include "ecotext/error.hpp"
#include "test_support.hpp"

using namespace ecotext;

namespace {

struct Dataset {
  Eigen::MatrixXd x;
  std::vector<std::string> y;
};

Dataset blobs(std::size_t per_class, std::size_t classes, std::size_t dim, double spread, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, spread);
  Dataset d;
  d.x.resize(static_cast<Eigen::Index>(per_class * classes), static_cast<Eigen::Index>(dim));
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      const auto r = static_cast<Eigen::Index>(c * per_class + i);
      for (Eigen::Index j = 0; j < d.x.cols(); ++j) d.x(r, j) = noise(rng);
      d.x(r, static_cast<Eigen::Index>(c % dim)) += 3.0;
      d.y.push_back("c" + std::to_string(c));
    }
  }
  return d;
}

double accuracy(const TrainedClassifier& model, const Dataset& d) {
  const auto pred = model.predict(d.x);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) ok += pred[i] == d.y[i];
  return static_cast<double>(ok) / static_cast<double>(pred.size());
}

ClassifierSpec spec_of(ClassifierKind kind, std::map<std::string, double> params = {}, std::uint64_t seed = 1) {
  ClassifierSpec s;
  s.kind = kind;
  s.hyperparams = std::move(params);
  s.seed = seed;
  return s;
}

Dataset xor_points() {
  Dataset d;
  d.x.resize(4, 2);
  d.x << -1, -1, 1, 1, -1, 1, 1, -1;
  d.y = {"same", "same", "diff", "diff"};
  return d;
}

}  // namespace

TEST(Classifiers, LinearSvmSeparatesSeparableData) {
  Dataset d;
  d.x.resize(40, 2);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.2, 2.0);
  for (Eigen::Index i = 0; i < 40; ++i) {
    const double sign = i < 20 ? 1.0 : -1.0;
    d.x(i, 0) = sign * u(rng);
    d.x(i, 1) = u(rng) - 1.0;
    d.y.push_back(i < 20 ? "pos" : "neg");
  }
  const auto model = train(spec_of(ClassifierKind::linear_svm), d.x, d.y);
  EXPECT_EQ(model->classes(), (std::vector<std::string>{"neg", "pos"}));
  EXPECT_DOUBLE_EQ(accuracy(*model, d), 1.0);
}

TEST(Classifiers, OneNearestNeighbourReproducesTrainingLabels) {
  const auto d = blobs(30, 3, 4, 2.0, 2);
  const auto model = train(spec_of(ClassifierKind::knn, {{"k", 1}}), d.x, d.y);
  EXPECT_EQ(model->predict(d.x), d.y);
}

TEST(Classifiers, RandomForestIsDeterministicAndVotesSum) {
  const auto d = blobs(40, 3, 5, 1.5, 3);
  const auto spec = spec_of(ClassifierKind::random_forest, {}, 42);
  const auto a = train(spec, d.x, d.y);
  const auto b = train(spec, d.x, d.y);
  EXPECT_EQ(a->predict(d.x), b->predict(d.x));
  EXPECT_EQ(a->to_json_string(), b->to_json_string());
  const auto votes = a->scores(d.x);
  for (Eigen::Index r = 0; r < votes.rows(); ++r) EXPECT_DOUBLE_EQ(votes.row(r).sum(), 100.0);
  EXPECT_GE(accuracy(*a, d), 0.95);

  const auto other = train(spec_of(ClassifierKind::random_forest, {}, 43), d.x, d.y);
  EXPECT_NE(other->to_json_string(), a->to_json_string());
}

TEST(Classifiers, XorNeedsThePolynomialKernel) {
  const auto d = xor_points();
  const auto poly = train(spec_of(ClassifierKind::poly_svm, {{"coef0", 1.0}, {"C", 100.0}}), d.x, d.y);
  EXPECT_DOUBLE_EQ(accuracy(*poly, d), 1.0);

  const auto linear = train(spec_of(ClassifierKind::linear_svm), d.x, d.y);
  EXPECT_LE(accuracy(*linear, d), 0.75);

  // Brute force over a dense set of separating lines: none classifies all four.
  double best = 0.0;
  for (int a = 0; a < 720; ++a) {
    const double theta = a * std::numbers::pi / 360.0;
    for (int bi = -40; bi <= 40; ++bi) {
      const double b = bi * 0.05;
      std::size_t ok = 0;
      for (Eigen::Index i = 0; i < 4; ++i) {
        const bool side = std::cos(theta) * d.x(i, 0) + std::sin(theta) * d.x(i, 1) + b > 0;
        ok += side == (d.y[static_cast<std::size_t>(i)] == "same");
      }
      best = std::max(best, static_cast<double>(ok) / 4.0);
    }
  }
  EXPECT_DOUBLE_EQ(best, 0.75);
}

TEST(Classifiers, PolySvmLearnsMulticlassBlobs) {
  const auto d = blobs(25, 3, 3, 0.8, 4);
  const auto model = train(spec_of(ClassifierKind::poly_svm), d.x, d.y);
  EXPECT_GE(accuracy(*model, d), 0.95);
}

TEST(Classifiers, LinearSvmIgnoresAllZeroColumn) {
  const auto d = blobs(30, 3, 4, 1.5, 5);
  Eigen::MatrixXd padded(d.x.rows(), d.x.cols() + 1);
  padded << d.x, Eigen::VectorXd::Zero(d.x.rows());
  const auto plain = train(spec_of(ClassifierKind::linear_svm), d.x, d.y);
  const auto wide = train(spec_of(ClassifierKind::linear_svm), padded, d.y);
  const auto sa = plain->scores(d.x);
  const auto sb = wide->scores(padded);
  EXPECT_LT((sa - sb).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_EQ(plain->predict(d.x), wide->predict(padded));
}

TEST(Classifiers, SaveLoadRoundTripForEveryKind) {
  ecotext::testing::TempDir dir;
  const auto d = blobs(20, 3, 4, 1.0, 6);
  for (auto kind : {ClassifierKind::random_forest, ClassifierKind::knn, ClassifierKind::linear_svm,
                    ClassifierKind::poly_svm}) {
    const auto model = train(spec_of(kind, kind == ClassifierKind::random_forest
                                               ? std::map<std::string, double>{{"n_trees", 10}}
                                               : std::map<std::string, double>{}),
                             d.x, d.y);
    const auto path = dir / (to_string(kind) + ".json");
    model->save(path);
    const auto back = load_classifier(path);
    EXPECT_EQ(back->spec().kind, kind);
    EXPECT_EQ(back->classes(), model->classes());
    EXPECT_EQ(back->scores(d.x), model->scores(d.x)) << to_string(kind);
    EXPECT_EQ(back->to_json_string(), model->to_json_string());
  }
}

TEST(Classifiers, RejectsInvalidInput) {
  const auto d = blobs(5, 2, 2, 1.0, 7);
  const std::vector<std::string> one_class(d.y.size(), "c0");
  EXPECT_THROW(train(spec_of(ClassifierKind::knn), d.x, one_class), ValidationError);
  Eigen::MatrixXd with_nan = d.x;
  with_nan(0, 0) = std::nan("");
  EXPECT_THROW(train(spec_of(ClassifierKind::knn), with_nan, d.y), ValidationError);
  EXPECT_THROW(train(spec_of(ClassifierKind::knn, {{"neighbours", 3}}), d.x, d.y), ValidationError);
  EXPECT_THROW(train(spec_of(ClassifierKind::knn, {{"k", 0}}), d.x, d.y), ValidationError);
  const auto model = train(spec_of(ClassifierKind::knn), d.x, d.y);
  EXPECT_THROW(model->predict(Eigen::MatrixXd::Zero(2, 3)), ValidationError);
  EXPECT_THROW(parse_classifier_kind("xgboost"), ValidationError);
}

TEST(Classifiers, TiesFollowClassOrder) {
  // Two identical training points with different labels: one vote each, the
  // earlier class wins.
  Eigen::MatrixXd x(2, 1);
  x << 0.0, 0.0;
  const std::vector<std::string> y{"b", "a"};
  const auto model = train(spec_of(ClassifierKind::knn, {{"k", 2}}), x, y);
  EXPECT_EQ(model->predict(Eigen::MatrixXd::Zero(1, 1)), (std::vector<std::string>{"a"}));
}

TEST(Classifiers, PredictionsStayWithinClassesProperty) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n;
  const auto d = blobs(15, 4, 3, 2.0, 8);
  for (auto kind : {ClassifierKind::random_forest, ClassifierKind::knn, ClassifierKind::linear_svm}) {
    const auto model = train(spec_of(kind, kind == ClassifierKind::random_forest
                                               ? std::map<std::string, double>{{"n_trees", 15}}
                                               : std::map<std::string, double>{}),
                             d.x, d.y);
    Eigen::MatrixXd probe(50, 3);
    for (Eigen::Index i = 0; i < probe.size(); ++i) probe.data()[i] = 5.0 * n(rng);
    for (const auto& label : model->predict(probe)) {
      EXPECT_NE(std::find(model->classes().begin(), model->classes().end(), label), model->classes().end());
    }
  }
}
