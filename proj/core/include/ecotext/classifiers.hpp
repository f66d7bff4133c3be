#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ecotext {

enum class ClassifierKind { random_forest, knn, linear_svm, poly_svm };

std::string to_string(ClassifierKind kind);
ClassifierKind parse_classifier_kind(const std::string& name);

// Hyperparameters default per kind; unknown keys are rejected.
//   random_forest: n_trees=100, max_depth=0 (unlimited), bootstrap=1, min_samples_split=2,
//                  max_features=0 (means ceil(sqrt(d)))
//   knn:           k=5
//   linear_svm:    C=1, tol=1e-4, max_epochs=2000
//   poly_svm:      C=1, degree=3, gamma=0 (means 1/d), coef0=0, tol=1e-3, max_iter=10000000
struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::random_forest;
  std::map<std::string, double> hyperparams;
  std::uint64_t seed = 0;

  // Resolved value, falling back to the kind's default.
  double param(const std::string& key) const;
  std::map<std::string, double> resolved() const;
  void validate() const;
  std::string name() const;
};

// Per-feature affine standardization fitted on training rows.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& x);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
};

class TrainedClassifier {
 public:
  virtual ~TrainedClassifier() = default;

  const ClassifierSpec& spec() const noexcept { return spec_; }
  const std::vector<std::string>& classes() const noexcept { return classes_; }
  std::size_t num_features() const noexcept { return num_features_; }

  // One score per class; higher wins. Votes for trees and neighbours,
  // decision values for the SVMs.
  Eigen::MatrixXd scores(const Eigen::MatrixXd& x) const;

  // Argmax of scores; ties go to the earlier class.
  std::vector<std::string> predict(const Eigen::MatrixXd& x) const;
  std::vector<std::size_t> predict_indices(const Eigen::MatrixXd& x) const;

  void save(const std::filesystem::path& path) const;
  std::string to_json_string() const;

 protected:
  TrainedClassifier(ClassifierSpec spec, std::vector<std::string> classes, std::size_t num_features)
      : spec_(std::move(spec)), classes_(std::move(classes)), num_features_(num_features) {}

  virtual Eigen::MatrixXd raw_scores(const Eigen::MatrixXd& x) const = 0;
  // Kind-specific state as a JSON string (parsed by load_classifier).
  virtual std::string state_json() const = 0;

 private:
  ClassifierSpec spec_;
  std::vector<std::string> classes_;
  std::size_t num_features_;
};

// Classes are the sorted distinct labels of y. Throws on a single class,
// NaN features or row/label count mismatch.
std::unique_ptr<TrainedClassifier> train(const ClassifierSpec& spec, const Eigen::MatrixXd& x,
                                         std::span<const std::string> y);

std::unique_ptr<TrainedClassifier> load_classifier(const std::filesystem::path& path);
std::unique_ptr<TrainedClassifier> classifier_from_json_string(const std::string& text);

}  // namespace ecotext
