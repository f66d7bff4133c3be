#pragma once

// Concrete classifier implementations; reached through ecotext::train and
// ecotext::load_classifier.

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ecotext/classifiers.hpp"
#include "json.hpp"

namespace ecotext::detail {

using json = nlohmann::json;

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int label = 0;
};

struct Tree {
  std::vector<TreeNode> nodes;
  int predict(const Eigen::MatrixXd& x, Eigen::Index row) const;
};

class RandomForest final : public TrainedClassifier {
 public:
  RandomForest(ClassifierSpec spec, std::vector<std::string> classes, std::size_t num_features,
               std::vector<Tree> trees);

  const std::vector<Tree>& trees() const noexcept { return trees_; }

  static std::unique_ptr<RandomForest> fit(const ClassifierSpec& spec,
                                           std::vector<std::string> classes,
                                           const Eigen::MatrixXd& x, const std::vector<int>& y);
  static std::unique_ptr<RandomForest> from_state(ClassifierSpec spec, std::vector<std::string> classes,
                                                  std::size_t num_features, const json& state);

 protected:
  Eigen::MatrixXd raw_scores(const Eigen::MatrixXd& x) const override;
  std::string state_json() const override;

 private:
  std::vector<Tree> trees_;
};

class KNearest final : public TrainedClassifier {
 public:
  KNearest(ClassifierSpec spec, std::vector<std::string> classes, Standardizer scaler,
           Eigen::MatrixXd train, std::vector<int> labels);

  static std::unique_ptr<KNearest> fit(const ClassifierSpec& spec, std::vector<std::string> classes,
                                       const Eigen::MatrixXd& x, const std::vector<int>& y);
  static std::unique_ptr<KNearest> from_state(ClassifierSpec spec, std::vector<std::string> classes,
                                              std::size_t num_features, const json& state);

 protected:
  Eigen::MatrixXd raw_scores(const Eigen::MatrixXd& x) const override;
  std::string state_json() const override;

 private:
  Standardizer scaler_;
  Eigen::MatrixXd train_;
  std::vector<int> labels_;
};

// One-vs-rest linear machines; weights carry the bias as the last column.
class LinearSvm final : public TrainedClassifier {
 public:
  LinearSvm(ClassifierSpec spec, std::vector<std::string> classes, Standardizer scaler,
            Eigen::MatrixXd weights);

  const Eigen::MatrixXd& weights() const noexcept { return weights_; }

  static std::unique_ptr<LinearSvm> fit(const ClassifierSpec& spec, std::vector<std::string> classes,
                                        const Eigen::MatrixXd& x, const std::vector<int>& y);
  static std::unique_ptr<LinearSvm> from_state(ClassifierSpec spec, std::vector<std::string> classes,
                                               std::size_t num_features, const json& state);

 protected:
  Eigen::MatrixXd raw_scores(const Eigen::MatrixXd& x) const override;
  std::string state_json() const override;

 private:
  Standardizer scaler_;
  Eigen::MatrixXd weights_;  // classes x (features + 1)
};

// One-vs-rest kernel machines over a shared support-vector set.
class PolySvm final : public TrainedClassifier {
 public:
  PolySvm(ClassifierSpec spec, std::vector<std::string> classes, Standardizer scaler,
          Eigen::MatrixXd support, Eigen::MatrixXd coef, Eigen::VectorXd bias, double gamma);

  static std::unique_ptr<PolySvm> fit(const ClassifierSpec& spec, std::vector<std::string> classes,
                                      const Eigen::MatrixXd& x, const std::vector<int>& y);
  static std::unique_ptr<PolySvm> from_state(ClassifierSpec spec, std::vector<std::string> classes,
                                             std::size_t num_features, const json& state);

 protected:
  Eigen::MatrixXd raw_scores(const Eigen::MatrixXd& x) const override;
  std::string state_json() const override;

 private:
  Standardizer scaler_;
  Eigen::MatrixXd support_;  // s x features, standardized
  Eigen::MatrixXd coef_;     // classes x s, alpha_i * y_i
  Eigen::VectorXd bias_;     // classes
  double gamma_ = 0.0;
};

json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const json& j);
json standardizer_to_json(const Standardizer& s);
Standardizer standardizer_from_json(const json& j);

}  // namespace ecotext::detail
