#include "ecotext/emofeat.hpp"

#include <algorithm>

namespace ecotext {

EmoVector emofeat_features(const TokenSeq& tokens, const EmotionLexicon& lexicon) {
  const auto k = static_cast<Eigen::Index>(lexicon.num_emotions());
  Eigen::VectorXd max = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(k);
  std::size_t matched = 0;
  for (const auto& token : tokens) {
    const auto* scores = lexicon.find(token);
    if (scores == nullptr) continue;
    for (Eigen::Index e = 0; e < k; ++e) {
      const double s = (*scores)[static_cast<std::size_t>(e)];
      max[e] = matched == 0 ? s : std::max(max[e], s);
      sum[e] += s;
    }
    ++matched;
  }
  EmoVector out{Eigen::VectorXd::Zero(2 * k), matched};
  if (matched == 0) return out;
  for (Eigen::Index e = 0; e < k; ++e) {
    out.values[2 * e] = max[e];
    out.values[2 * e + 1] = sum[e] / static_cast<double>(matched);
  }
  return out;
}

}  // namespace ecotext
