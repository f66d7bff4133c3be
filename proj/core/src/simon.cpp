#include "ecotext/simon.hpp"

#include <limits>
#include <unordered_set>

#include <spdlog/spdlog.h>

namespace ecotext {

SimonProjector::SimonProjector(const DomainLexicon& lexicon, const EmbeddingStore& store,
                               SimonConfig config)
    : store_(store), config_(config), axis_words_(lexicon.words) {
  const auto rows = static_cast<Eigen::Index>(axis_words_.size());
  const auto dim = static_cast<Eigen::Index>(store.dim());
  axes_ = Eigen::MatrixXd::Zero(rows, dim);
  for (Eigen::Index j = 0; j < rows; ++j) {
    const auto v = store.lookup(axis_words_[static_cast<std::size_t>(j)]);
    if (!v) {
      missing_axes_.push_back(axis_words_[static_cast<std::size_t>(j)]);
      continue;
    }
    Eigen::Map<const Eigen::RowVectorXd> row(v->data(), dim);
    const double norm = row.norm();
    if (norm > 0.0) axes_.row(j) = row / norm;
  }
  if (!missing_axes_.empty()) {
    spdlog::warn("{} of {} lexicon words have no embedding; their axes stay at 0",
                 missing_axes_.size(), axis_words_.size());
  }
}

Eigen::VectorXd SimonProjector::project(const TokenSeq& tokens) const {
  const auto dim = static_cast<Eigen::Index>(store_.dim());
  const auto rows = axes_.rows();

  // Max pooling ignores multiplicity, so each distinct token is scored once.
  std::vector<std::size_t> hits;
  hits.reserve(tokens.size());
  if (config_.pooling == SimonPooling::max) {
    std::unordered_set<std::size_t> seen;
    for (const auto& t : tokens) {
      if (auto idx = store_.index_of(t); idx && seen.insert(*idx).second) hits.push_back(*idx);
    }
  } else {
    for (const auto& t : tokens) {
      if (auto idx = store_.index_of(t)) hits.push_back(*idx);
    }
  }
  if (hits.empty()) return Eigen::VectorXd::Zero(rows);

  Eigen::MatrixXd token_matrix(dim, static_cast<Eigen::Index>(hits.size()));
  for (std::size_t c = 0; c < hits.size(); ++c) {
    const auto v = store_.row(hits[c]);
    Eigen::Map<const Eigen::VectorXd> col(v.data(), dim);
    const double norm = col.norm();
    token_matrix.col(static_cast<Eigen::Index>(c)) = norm > 0.0 ? Eigen::VectorXd(col / norm) : Eigen::VectorXd(col);
  }
  const Eigen::MatrixXd sims = (axes_ * token_matrix).cwiseMax(-1.0).cwiseMin(1.0);

  Eigen::VectorXd out = config_.pooling == SimonPooling::max ? Eigen::VectorXd(sims.rowwise().maxCoeff())
                                                            : Eigen::VectorXd(sims.rowwise().mean());
  if (config_.clamp_negative) out = out.cwiseMax(0.0);
  return out;
}

Eigen::VectorXd simon_features(const TokenSeq& tokens, const SimonProjector& projector) {
  return projector.project(tokens);
}

}  // namespace ecotext
