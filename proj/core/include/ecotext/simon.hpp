#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ecotext/embeddings.hpp"
#include "ecotext/lexicons.hpp"
#include "ecotext/textproc.hpp"

namespace ecotext {

enum class SimonPooling { max, mean };

struct SimonConfig {
  SimonPooling pooling = SimonPooling::max;
  bool clamp_negative = false;
};

// Projects a token sequence onto the axes of a domain lexicon. Coordinate j is
// the pooled cosine similarity between the lexicon word l_j and the
// in-vocabulary tokens of the text. Holds references; the store and lexicon
// must outlive the projector.
class SimonProjector {
 public:
  SimonProjector(const DomainLexicon& lexicon, const EmbeddingStore& store,
                 SimonConfig config = {});

  std::size_t dimension() const noexcept { return axis_words_.size(); }
  const std::vector<std::string>& axis_words() const noexcept { return axis_words_; }
  const SimonConfig& config() const noexcept { return config_; }
  // Lexicon words without an embedding; their axis is always 0.
  const std::vector<std::string>& missing_axes() const noexcept { return missing_axes_; }

  Eigen::VectorXd project(const TokenSeq& tokens) const;

 private:
  const EmbeddingStore& store_;
  SimonConfig config_;
  std::vector<std::string> axis_words_;
  std::vector<std::string> missing_axes_;
  // One unit-norm row per axis (zero row for missing axes).
  Eigen::MatrixXd axes_;
};

Eigen::VectorXd simon_features(const TokenSeq& tokens, const SimonProjector& projector);

}  // namespace ecotext
