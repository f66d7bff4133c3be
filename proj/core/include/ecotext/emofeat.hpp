#pragma once

#include <cstddef>

#include <Eigen/Core>

#include "ecotext/lexicons.hpp"
#include "ecotext/textproc.hpp"

namespace ecotext {

// [max_e1, mean_e1, ..., max_eK, mean_eK] over lexicon hits.
struct EmoVector {
  Eigen::VectorXd values;
  std::size_t matched_count = 0;
};

// Statistics run over the multiset of tokens found in the lexicon; tokens
// absent from it are ignored. No hits gives the zero vector.
EmoVector emofeat_features(const TokenSeq& tokens, const EmotionLexicon& lexicon);

}  // namespace ecotext
