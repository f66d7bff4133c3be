#include "ecotext/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "ecotext/error.hpp"

namespace ecotext {
namespace {

std::vector<double> gaussian_unit(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(dim);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (auto& x : v) {
      x = normal(rng);
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

void validate(const SynthSpec& spec) {
  if (spec.classes.size() < 2) throw ValidationError("synthetic corpus needs at least two classes");
  if (spec.planted_vocab.size() != spec.classes.size()) {
    throw ValidationError("planted_vocab needs one entry per class");
  }
  for (const auto& v : spec.planted_vocab) {
    if (v.empty()) throw ValidationError("every class needs at least one planted token");
  }
  if (!spec.class_weights.empty()) {
    if (spec.class_weights.size() != spec.classes.size()) {
      throw ValidationError("class_weights needs one entry per class");
    }
    for (double w : spec.class_weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("class weights must be finite and >= 0");
    }
    if (std::accumulate(spec.class_weights.begin(), spec.class_weights.end(), 0.0) <= 0.0) {
      throw ValidationError("class weights must not all be zero");
    }
  }
  if (spec.min_planted > spec.max_planted || spec.min_noise > spec.max_noise) {
    throw ValidationError("min token counts must not exceed max token counts");
  }
  if (spec.max_noise > 0 && spec.noise_vocab.empty()) throw ValidationError("noise tokens requested but noise_vocab is empty");
  if (spec.max_planted + spec.max_noise == 0) throw ValidationError("documents would be empty");
}

}  // namespace

std::vector<std::size_t> synth_class_counts(const SynthSpec& spec) {
  const std::size_t k = spec.classes.size();
  std::vector<double> weights = spec.class_weights.empty() ? std::vector<double>(k, 1.0) : spec.class_weights;
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> counts(k);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const double exact = static_cast<double>(spec.n_docs) * weights[c] / total;
    counts[c] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[c];
    remainders.emplace_back(exact - std::floor(exact), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < spec.n_docs; ++i, ++assigned) ++counts[remainders[i % k].second];
  return counts;
}

LabeledCorpus synth_corpus(const SynthSpec& spec) {
  validate(spec);
  const auto counts = synth_class_counts(spec);
  std::vector<std::size_t> labels;
  for (std::size_t c = 0; c < counts.size(); ++c) labels.insert(labels.end(), counts[c], c);
  std::mt19937_64 rng(spec.seed);
  std::shuffle(labels.begin(), labels.end(), rng);

  std::uniform_int_distribution<std::size_t> planted_n(spec.min_planted, spec.max_planted);
  std::uniform_int_distribution<std::size_t> noise_n(spec.min_noise, spec.max_noise);
  std::vector<Document> docs;
  docs.reserve(labels.size());
  const int width = std::max(4, static_cast<int>(std::to_string(labels.size()).size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto c = labels[i];
    const auto& planted = spec.planted_vocab[c];
    std::vector<std::string> tokens;
    std::uniform_int_distribution<std::size_t> pick_planted(0, planted.size() - 1);
    for (std::size_t n = planted_n(rng); n > 0; --n) tokens.push_back(planted[pick_planted(rng)]);
    if (!spec.noise_vocab.empty()) {
      std::uniform_int_distribution<std::size_t> pick_noise(0, spec.noise_vocab.size() - 1);
      for (std::size_t n = noise_n(rng); n > 0; --n) tokens.push_back(spec.noise_vocab[pick_noise(rng)]);
    }
    if (tokens.empty()) tokens.push_back(planted[pick_planted(rng)]);
    std::shuffle(tokens.begin(), tokens.end(), rng);
    std::string text = tokens.front();
    for (std::size_t t = 1; t < tokens.size(); ++t) text += ' ' + tokens[t];
    docs.push_back({fmt::format("d{:0{}}", i, width), std::move(text), spec.classes[c]});
  }
  return LabeledCorpus(std::move(docs), spec.classes);
}

SynthSpec make_synth_spec(std::size_t n_docs, std::size_t n_classes, std::size_t planted_per_class,
                          std::size_t noise_size, std::uint64_t seed) {
  SynthSpec spec;
  spec.n_docs = n_docs;
  spec.seed = seed;
  for (std::size_t c = 0; c < n_classes; ++c) {
    spec.classes.push_back(fmt::format("class_{}", c));
    std::vector<std::string> words;
    for (std::size_t j = 0; j < planted_per_class; ++j) words.push_back(fmt::format("c{}_w{}", c, j));
    spec.planted_vocab.push_back(std::move(words));
  }
  for (std::size_t j = 0; j < noise_size; ++j) spec.noise_vocab.push_back(fmt::format("n_{}", j));
  if (noise_size == 0) spec.min_noise = spec.max_noise = 0;
  return spec;
}

EmbeddingStore synth_embeddings(const SynthSpec& spec, std::size_t dim, double class_signal, std::uint64_t seed) {
  if (dim == 0) throw ValidationError("embedding dimension must be > 0");
  if (!(class_signal >= 0.0 && class_signal <= 1.0)) throw ValidationError("class_signal must be in [0, 1]");
  std::mt19937_64 rng(seed);
  EmbeddingStore store(dim);
  std::vector<double> v(dim);
  for (const auto& words : spec.planted_vocab) {
    const auto direction = gaussian_unit(dim, rng);
    for (const auto& word : words) {
      const auto noise = gaussian_unit(dim, rng);
      for (std::size_t i = 0; i < dim; ++i) v[i] = class_signal * direction[i] + (1.0 - class_signal) * noise[i];
      if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) v = noise;
      store.add(word, v);
    }
  }
  for (const auto& word : spec.noise_vocab) store.add(word, gaussian_unit(dim, rng));
  store.normalize();
  return store;
}

EmotionLexicon synth_emotion_lexicon(const SynthSpec& spec, const std::vector<std::string>& emotions,
                                     std::uint64_t seed) {
  EmotionLexicon lexicon(emotions);
  const std::size_t k = emotions.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> strong(0.5, 1.0);
  std::uniform_real_distribution<double> weak(0.0, 0.3);
  for (std::size_t c = 0; c < spec.planted_vocab.size(); ++c) {
    for (const auto& word : spec.planted_vocab[c]) {
      std::vector<double> scores(k, 0.0);
      scores[c % k] = strong(rng);
      lexicon.add(word, std::move(scores));
    }
  }
  for (std::size_t j = 0; j < spec.noise_vocab.size(); j += 5) {
    std::vector<double> scores(k);
    for (auto& s : scores) s = weak(rng);
    lexicon.add(spec.noise_vocab[j], std::move(scores));
  }
  return lexicon;
}

DocVectorTable synth_doc_vectors(const LabeledCorpus& corpus, std::size_t dim, double class_signal,
                                 std::uint64_t seed) {
  if (dim == 0) throw ValidationError("doc vector dimension must be > 0");
  if (!(class_signal >= 0.0 && class_signal <= 1.0)) throw ValidationError("class_signal must be in [0, 1]");
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> means;
  for (std::size_t c = 0; c < corpus.classes().size(); ++c) means.push_back(gaussian_unit(dim, rng));
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
  DocVectorTable table(dim);
  for (const auto& doc : corpus.documents()) {
    const auto c = static_cast<std::size_t>(
        std::lower_bound(corpus.classes().begin(), corpus.classes().end(), doc.label) - corpus.classes().begin());
    std::vector<double> v(dim);
    for (std::size_t i = 0; i < dim; ++i) v[i] = class_signal * means[c][i] + (1.0 - class_signal) * normal(rng);
    table.add(doc.id, std::move(v));
  }
  return table;
}

}  // namespace ecotext
