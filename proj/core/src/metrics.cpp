#include "ecotext/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include "ecotext/error.hpp"
#include "json.hpp"

namespace ecotext {
namespace {

double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

}  // namespace

std::size_t EvalReport::samples() const { return static_cast<std::size_t>(confusion.sum()); }

const ClassScores& EvalReport::for_class(const std::string& label) const {
  for (const auto& s : per_class) {
    if (s.label == label) return s;
  }
  throw ValidationError("no class '" + label + "' in report");
}

EvalReport evaluate(std::span<const std::string> y_true, std::span<const std::string> y_pred,
                    const std::vector<std::string>& classes) {
  if (y_true.size() != y_pred.size()) {
    throw ValidationError("evaluate: " + std::to_string(y_true.size()) + " true labels but " +
                          std::to_string(y_pred.size()) + " predictions");
  }
  if (classes.empty()) throw ValidationError("evaluate: empty class list");
  std::unordered_map<std::string, Eigen::Index> index;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (!index.emplace(classes[i], static_cast<Eigen::Index>(i)).second) {
      throw ValidationError("evaluate: duplicate class '" + classes[i] + "'");
    }
  }
  const auto k = static_cast<Eigen::Index>(classes.size());
  Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> confusion =
      Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>::Zero(k, k);
  auto lookup = [&](const std::string& label) {
    const auto it = index.find(label);
    if (it == index.end()) throw ValidationError("evaluate: label '" + label + "' is not in the class list");
    return it->second;
  };
  for (std::size_t i = 0; i < y_true.size(); ++i) ++confusion(lookup(y_true[i]), lookup(y_pred[i]));
  return evaluate_confusion(confusion, classes);
}

EvalReport evaluate_confusion(const Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>& confusion,
                              const std::vector<std::string>& classes) {
  const auto k = static_cast<Eigen::Index>(classes.size());
  if (confusion.rows() != k || confusion.cols() != k) throw ValidationError("confusion matrix shape mismatch");
  if ((confusion.array() < 0).any()) throw ValidationError("confusion matrix has negative counts");
  EvalReport report;
  report.classes = classes;
  report.confusion = confusion;
  const double total = static_cast<double>(confusion.sum());
  double correct = 0.0;
  for (Eigen::Index c = 0; c < k; ++c) {
    const double tp = static_cast<double>(confusion(c, c));
    const double support = static_cast<double>(confusion.row(c).sum());
    const double predicted = static_cast<double>(confusion.col(c).sum());
    ClassScores s;
    s.label = classes[static_cast<std::size_t>(c)];
    s.precision = safe_div(tp, predicted);
    s.recall = safe_div(tp, support);
    s.f1 = safe_div(2.0 * s.precision * s.recall, s.precision + s.recall);
    s.support = static_cast<std::size_t>(support);
    // Both averages use the form sum(f1 * weight) so that equal supports,
    // where support / total == 1 / k exactly, give bit-identical results.
    report.macro_f1 += s.f1 * (1.0 / static_cast<double>(k));
    report.weighted_f1 += s.f1 * safe_div(support, total);
    correct += tp;
    report.per_class.push_back(s);
  }
  report.accuracy = safe_div(correct, total);
  return report;
}

double one_vs_rest_f1(std::span<const std::string> y_true, std::span<const std::string> y_pred,
                      const std::string& positive) {
  if (y_true.size() != y_pred.size()) throw ValidationError("one_vs_rest_f1: length mismatch");
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool t = y_true[i] == positive;
    const bool p = y_pred[i] == positive;
    tp += t && p;
    fp += !t && p;
    fn += t && !p;
  }
  const double precision = safe_div(tp, tp + fp);
  const double recall = safe_div(tp, tp + fn);
  return safe_div(2.0 * precision * recall, precision + recall);
}

std::string to_json_string(const EvalReport& report) {
  nlohmann::json j;
  j["classes"] = report.classes;
  nlohmann::json matrix = nlohmann::json::array();
  for (Eigen::Index r = 0; r < report.confusion.rows(); ++r) {
    std::vector<long long> row(static_cast<std::size_t>(report.confusion.cols()));
    for (Eigen::Index c = 0; c < report.confusion.cols(); ++c) row[static_cast<std::size_t>(c)] = report.confusion(r, c);
    matrix.push_back(row);
  }
  j["confusion"] = matrix;
  nlohmann::json per = nlohmann::json::array();
  for (const auto& s : report.per_class) {
    per.push_back({{"label", s.label},
                   {"precision", s.precision},
                   {"recall", s.recall},
                   {"f1", s.f1},
                   {"support", s.support}});
  }
  j["per_class"] = per;
  j["macro_f1"] = report.macro_f1;
  j["weighted_f1"] = report.weighted_f1;
  j["accuracy"] = report.accuracy;
  return j.dump(2);
}

std::string classification_report(const EvalReport& report, int digits) {
  std::size_t width = std::string("weighted avg").size();
  for (const auto& c : report.classes) width = std::max(width, c.size());
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits);
  const int col = std::max(10, digits + 6);
  out << std::setw(static_cast<int>(width)) << "" << std::setw(col) << "precision" << std::setw(col) << "recall"
      << std::setw(col) << "f1-score" << std::setw(col) << "support" << "\n\n";
  double macro_p = 0, macro_r = 0, weighted_p = 0, weighted_r = 0;
  for (const auto& s : report.per_class) {
    out << std::setw(static_cast<int>(width)) << s.label << std::setw(col) << s.precision << std::setw(col)
        << s.recall << std::setw(col) << s.f1 << std::setw(col) << s.support << '\n';
    macro_p += s.precision;
    macro_r += s.recall;
    weighted_p += s.precision * static_cast<double>(s.support);
    weighted_r += s.recall * static_cast<double>(s.support);
  }
  const double k = static_cast<double>(report.per_class.size());
  const double n = static_cast<double>(report.samples());
  out << '\n'
      << std::setw(static_cast<int>(width)) << "accuracy" << std::setw(col) << "" << std::setw(col) << ""
      << std::setw(col) << report.accuracy << std::setw(col) << report.samples() << '\n';
  out << std::setw(static_cast<int>(width)) << "macro avg" << std::setw(col) << macro_p / k << std::setw(col)
      << macro_r / k << std::setw(col) << report.macro_f1 << std::setw(col) << report.samples() << '\n';
  out << std::setw(static_cast<int>(width)) << "weighted avg" << std::setw(col) << safe_div(weighted_p, n)
      << std::setw(col) << safe_div(weighted_r, n) << std::setw(col) << report.weighted_f1 << std::setw(col)
      << report.samples() << '\n';
  return out.str();
}

}  // namespace ecotext
