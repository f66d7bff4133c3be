#pragma once

#include <cstddef>
#include <vector>

#include "ecotext/corpus.hpp"
#include "ecotext/embeddings.hpp"
#include "ecotext/lexicons.hpp"
#include "ecotext/synthetic.hpp"
#include "ecotext/textproc.hpp"

namespace ecotext::bench {

// A synthetic corpus with word vectors and lexicons, sized like the small
// end of the real datasets.
struct Workload {
  explicit Workload(std::size_t n_docs, std::size_t dim = 100)
      : spec(make_synth_spec(n_docs, 4, 25, 2000, 11)),
        corpus(synth_corpus(spec)),
        store(synth_embeddings(spec, dim, 0.5, 12)),
        emotions(synth_emotion_lexicon(spec, {"anger", "anticipation", "disgust", "fear", "joy", "sadness",
                                              "surprise", "trust"},
                                       13)) {
    for (const auto& doc : corpus.documents()) tokens.push_back(tokenize(doc.text));
  }

  SynthSpec spec;
  LabeledCorpus corpus;
  EmbeddingStore store;
  EmotionLexicon emotions;
  std::vector<TokenSeq> tokens;
};

}  // namespace ecotext::bench
