#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "ecotext/embeddings.hpp"
#include "ecotext/textproc.hpp"

namespace ecotext {

// Per-topic term counts; std::map keeps iteration order stable.
using TermCounts = std::vector<std::map<std::string, std::uint64_t>>;

struct WeightedTerm {
  std::string term;
  double weight = 0.0;
};

// Class-based TF-IDF: W[t,c] = tf(t,c) * log(1 + A / tf(t)), with tf(t) the
// total count of t over all topics and A the mean number of term occurrences
// per topic.
class CtfidfTable {
 public:
  std::size_t num_topics() const noexcept { return weights_.size(); }
  double average_terms() const noexcept { return average_terms_; }
  // 0 for terms absent from the topic.
  double weight(std::size_t topic, const std::string& term) const;
  const std::map<std::string, double>& weights(std::size_t topic) const { return weights_.at(topic); }
  // Highest weights first, ties lexicographic.
  std::vector<WeightedTerm> top_terms(std::size_t topic, std::size_t n) const;

 private:
  friend CtfidfTable ctfidf(const TermCounts& counts);
  std::vector<std::map<std::string, double>> weights_;
  double average_terms_ = 0.0;
};

CtfidfTable ctfidf(const TermCounts& counts);

struct TopicOptions {
  std::size_t k = 2;
  std::size_t reduced_dim = 5;
  std::uint64_t seed = 0;
  std::size_t top_n = 4;
  std::size_t max_iterations = 50;
  double tolerance = 1e-6;
};

// Embed (mean word vector) -> center + truncated SVD -> seeded k-means ->
// c-TF-IDF labels over 1..3-grams of each topic's member documents.
class TopicModel {
 public:
  std::size_t k() const noexcept { return static_cast<std::size_t>(centroids_.rows()); }
  std::size_t reduced_dim() const noexcept { return static_cast<std::size_t>(components_.rows()); }
  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(mean_.size()); }

  const Eigen::MatrixXd& centroids() const noexcept { return centroids_; }
  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& components() const noexcept { return components_; }
  const std::vector<std::vector<WeightedTerm>>& topic_terms() const noexcept { return topic_terms_; }
  const std::vector<std::pair<std::string, std::size_t>>& train_assignments() const noexcept {
    return assignments_;
  }
  // Members per topic, derived from the assignments.
  std::vector<std::size_t> member_counts() const;
  const TermCounts& term_counts() const noexcept { return term_counts_; }

  // Reduced-space coordinates of a raw document vector.
  Eigen::VectorXd reduce(const Eigen::VectorXd& doc) const;

  // Human-readable topic tag such as "3{sleep, night, tired, bed}".
  std::string label(std::size_t topic) const;

  void save(const std::filesystem::path& path) const;
  static TopicModel load(const std::filesystem::path& path);
  std::string to_json_string() const;
  static TopicModel from_json_string(const std::string& text);

 private:
  friend TopicModel fit_topic_model(const std::vector<std::string>&, const std::vector<TokenSeq>&,
                                    const EmbeddingStore&, const TopicOptions&);
  friend TopicModel reduce_topics(const TopicModel&, std::size_t);

  void relabel();

  Eigen::VectorXd mean_;
  Eigen::MatrixXd components_;  // d x input_dim
  Eigen::MatrixXd centroids_;   // k x d
  std::vector<std::pair<std::string, std::size_t>> assignments_;
  TermCounts term_counts_;
  std::vector<std::vector<WeightedTerm>> topic_terms_;
  std::size_t top_n_ = 4;
};

TopicModel fit_topic_model(const std::vector<std::string>& ids, const std::vector<TokenSeq>& docs,
                           const EmbeddingStore& store, const TopicOptions& options);

// Softmax over topics of the negative squared distance to each centroid in
// reduced space. An all-OOV document maps to the uniform vector.
Eigen::VectorXd topic_features(const TokenSeq& tokens, const TopicModel& model,
                               const EmbeddingStore& store);

// Repeatedly folds the topic with the fewest members into the topic with the
// nearest centroid until `target_k` remain.
TopicModel reduce_topics(const TopicModel& model, std::size_t target_k);

}  // namespace ecotext
