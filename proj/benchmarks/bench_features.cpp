#include <benchmark/benchmark.h>

#include "bench_fixture.hpp"
#include "ecotext/emofeat.hpp"
#include "ecotext/simon.hpp"
#include "ecotext/topics.hpp"

using namespace ecotext;

namespace {

const bench::Workload& workload() {
  static const bench::Workload w(1000);
  return w;
}

void BM_Tokenize(benchmark::State& state) {
  const auto& w = workload();
  std::size_t bytes = 0;
  for (const auto& doc : w.corpus.documents()) bytes += doc.text.size();
  for (auto _ : state) {
    for (const auto& doc : w.corpus.documents()) benchmark::DoNotOptimize(tokenize(doc.text));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bytes));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * w.corpus.size()));
}
BENCHMARK(BM_Tokenize);

void BM_LexiconInduction(benchmark::State& state) {
  const auto& w = workload();
  LexiconInduction options;
  options.size = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(induce_domain_lexicon(w.tokens, options));
}
BENCHMARK(BM_LexiconInduction)->Arg(512);

// Per-text projection cost for lexicon sizes 128..1024.
void BM_SimonProject(benchmark::State& state) {
  const auto& w = workload();
  LexiconInduction options;
  options.size = static_cast<std::size_t>(state.range(0));
  const auto lexicon = induce_domain_lexicon(w.tokens, options);
  const SimonProjector projector(lexicon, w.store);
  for (auto _ : state) {
    for (const auto& t : w.tokens) benchmark::DoNotOptimize(projector.project(t));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * w.tokens.size()));
}
BENCHMARK(BM_SimonProject)->RangeMultiplier(2)->Range(128, 1024);

void BM_EmoFeat(benchmark::State& state) {
  const auto& w = workload();
  for (auto _ : state) {
    for (const auto& t : w.tokens) benchmark::DoNotOptimize(emofeat_features(t, w.emotions));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * w.tokens.size()));
}
BENCHMARK(BM_EmoFeat);

void BM_TopicFit(benchmark::State& state) {
  const auto& w = workload();
  std::vector<std::string> ids;
  for (const auto& doc : w.corpus.documents()) ids.push_back(doc.id);
  TopicOptions options;
  options.k = static_cast<std::size_t>(state.range(0));
  options.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(fit_topic_model(ids, w.tokens, w.store, options));
}
BENCHMARK(BM_TopicFit)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_TopicFeatures(benchmark::State& state) {
  const auto& w = workload();
  std::vector<std::string> ids;
  for (const auto& doc : w.corpus.documents()) ids.push_back(doc.id);
  TopicOptions options;
  options.k = 64;
  options.seed = 1;
  const auto model = fit_topic_model(ids, w.tokens, w.store, options);
  for (auto _ : state) {
    for (const auto& t : w.tokens) benchmark::DoNotOptimize(topic_features(t, model, w.store));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * w.tokens.size()));
}
BENCHMARK(BM_TopicFeatures);

}  // namespace
