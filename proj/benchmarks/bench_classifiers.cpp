#include <random>

#include <benchmark/benchmark.h>

#include "ecotext/classifiers.hpp"

using namespace ecotext;

namespace {

struct Data {
  Eigen::MatrixXd x;
  std::vector<std::string> y;
};

// Gaussian blobs, one per class, in `dim` dimensions.
Data blobs(std::size_t n, std::size_t dim, std::size_t classes) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise;
  Eigen::MatrixXd centres(static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < centres.size(); ++i) centres.data()[i] = noise(rng);
  Data d;
  d.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t c = r % classes;
    for (std::size_t j = 0; j < dim; ++j) {
      d.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
          centres(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) + 1.5 * noise(rng);
    }
    d.y.push_back("c" + std::to_string(c));
  }
  return d;
}

void run_train(benchmark::State& state, ClassifierKind kind) {
  const auto data = blobs(static_cast<std::size_t>(state.range(0)), 64, 4);
  ClassifierSpec spec;
  spec.kind = kind;
  spec.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train(spec, data.x, data.y));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * state.range(0)));
}

void run_predict(benchmark::State& state, ClassifierKind kind) {
  const auto data = blobs(static_cast<std::size_t>(state.range(0)), 64, 4);
  ClassifierSpec spec;
  spec.kind = kind;
  spec.seed = 1;
  const auto model = train(spec, data.x, data.y);
  for (auto _ : state) benchmark::DoNotOptimize(model->predict(data.x));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * state.range(0)));
}

void BM_TrainRandomForest(benchmark::State& s) { run_train(s, ClassifierKind::random_forest); }
void BM_TrainKnn(benchmark::State& s) { run_train(s, ClassifierKind::knn); }
void BM_TrainLinearSvm(benchmark::State& s) { run_train(s, ClassifierKind::linear_svm); }
void BM_TrainPolySvm(benchmark::State& s) { run_train(s, ClassifierKind::poly_svm); }
void BM_PredictRandomForest(benchmark::State& s) { run_predict(s, ClassifierKind::random_forest); }
void BM_PredictKnn(benchmark::State& s) { run_predict(s, ClassifierKind::knn); }
void BM_PredictLinearSvm(benchmark::State& s) { run_predict(s, ClassifierKind::linear_svm); }
void BM_PredictPolySvm(benchmark::State& s) { run_predict(s, ClassifierKind::poly_svm); }

BENCHMARK(BM_TrainRandomForest)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainKnn)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainLinearSvm)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainPolySvm)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictRandomForest)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictKnn)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictLinearSvm)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictPolySvm)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
