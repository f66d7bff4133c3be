#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ecotext {

struct ClassScores {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct EvalReport {
  std::vector<std::string> classes;
  // rows = true class, cols = predicted class, in class order.
  Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> confusion;
  std::vector<ClassScores> per_class;
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
  double accuracy = 0.0;

  std::size_t samples() const;
  const ClassScores& for_class(const std::string& label) const;
};

// Any 0/0 in precision, recall or F1 is taken as 0.
EvalReport evaluate(std::span<const std::string> y_true, std::span<const std::string> y_pred,
                    const std::vector<std::string>& classes);

// Same metrics from a precomputed confusion matrix.
EvalReport evaluate_confusion(const Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>& confusion,
                              const std::vector<std::string>& classes);

// F1 of `positive` treated one-vs-rest.
double one_vs_rest_f1(std::span<const std::string> y_true, std::span<const std::string> y_pred,
                      const std::string& positive);

std::string to_json_string(const EvalReport& report);

// Aligned text table in the usual precision/recall/f1-score/support layout.
std::string classification_report(const EvalReport& report, int digits = 4);

}  // namespace ecotext
