#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecotext/corpus.hpp"
#include "ecotext/embeddings.hpp"
#include "ecotext/lexicons.hpp"

namespace ecotext {

// Generator for desk-scale corpora with planted class vocabulary.
struct SynthSpec {
  std::size_t n_docs = 200;
  std::vector<std::string> classes;
  // One entry per class. Empty means uniform.
  std::vector<double> class_weights;
  // planted_vocab[c] holds the tokens that signal classes[c]; disjoint.
  std::vector<std::vector<std::string>> planted_vocab;
  std::vector<std::string> noise_vocab;
  std::size_t min_planted = 1;
  std::size_t max_planted = 3;
  std::size_t min_noise = 8;
  std::size_t max_noise = 20;
  std::uint64_t seed = 0;
};

// Exact per-class document counts implied by n_docs and class_weights
// (largest-remainder rounding, ties to the earlier class).
std::vector<std::size_t> synth_class_counts(const SynthSpec& spec);

LabeledCorpus synth_corpus(const SynthSpec& spec);

// Convenience spec: `n_classes` classes named class_0.., `planted_per_class`
// tokens each (c<k>_w<j>) and `noise_size` noise tokens (n_<j>).
SynthSpec make_synth_spec(std::size_t n_docs, std::size_t n_classes,
                          std::size_t planted_per_class, std::size_t noise_size,
                          std::uint64_t seed);

// Word vectors for every planted and noise token. Planted tokens of one class
// share a class direction; `class_signal` in [0,1] weighs it against noise.
EmbeddingStore synth_embeddings(const SynthSpec& spec, std::size_t dim, double class_signal,
                                std::uint64_t seed);

// Emotion scores for planted tokens (class c excites emotion c mod K) and for
// a sprinkling of noise tokens.
EmotionLexicon synth_emotion_lexicon(const SynthSpec& spec,
                                     const std::vector<std::string>& emotions,
                                     std::uint64_t seed);

// Stand-in for frozen transformer document vectors: class mean plus noise.
DocVectorTable synth_doc_vectors(const LabeledCorpus& corpus, std::size_t dim,
                                 double class_signal, std::uint64_t seed);

}  // namespace ecotext
