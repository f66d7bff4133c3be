#include "ecotext/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "ecotext/error.hpp"
#include "models.hpp"

namespace ecotext {
namespace {

using detail::json;

constexpr const char* kFormat = "ecotext-classifier";
constexpr int kVersion = 1;

const std::map<std::string, double>& defaults_for(ClassifierKind kind) {
  static const std::map<std::string, double> forest{
      {"n_trees", 100}, {"max_depth", 0}, {"bootstrap", 1}, {"min_samples_split", 2}, {"max_features", 0}};
  static const std::map<std::string, double> knn{{"k", 5}};
  static const std::map<std::string, double> linear{{"C", 1.0}, {"tol", 1e-4}, {"max_epochs", 2000}};
  static const std::map<std::string, double> poly{{"C", 1.0},   {"degree", 3},  {"gamma", 0.0},
                                                  {"coef0", 0.0}, {"tol", 1e-3}, {"max_iter", 1e7}};
  switch (kind) {
    case ClassifierKind::random_forest: return forest;
    case ClassifierKind::knn: return knn;
    case ClassifierKind::linear_svm: return linear;
    case ClassifierKind::poly_svm: return poly;
  }
  return forest;
}

bool is_integer(double v) { return std::isfinite(v) && v == std::floor(v); }

}  // namespace

std::string to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::random_forest: return "random_forest";
    case ClassifierKind::knn: return "knn";
    case ClassifierKind::linear_svm: return "linear_svm";
    case ClassifierKind::poly_svm: return "poly_svm";
  }
  return "random_forest";
}

ClassifierKind parse_classifier_kind(const std::string& name) {
  if (name == "random_forest" || name == "rf") return ClassifierKind::random_forest;
  if (name == "knn") return ClassifierKind::knn;
  if (name == "linear_svm") return ClassifierKind::linear_svm;
  if (name == "poly_svm") return ClassifierKind::poly_svm;
  throw ValidationError("unknown classifier '" + name + "'");
}

double ClassifierSpec::param(const std::string& key) const {
  if (const auto it = hyperparams.find(key); it != hyperparams.end()) return it->second;
  const auto& defaults = defaults_for(kind);
  if (const auto it = defaults.find(key); it != defaults.end()) return it->second;
  throw ValidationError("classifier " + to_string(kind) + " has no hyperparameter '" + key + "'");
}

std::map<std::string, double> ClassifierSpec::resolved() const {
  auto out = defaults_for(kind);
  for (const auto& [k, v] : hyperparams) out[k] = v;
  return out;
}

void ClassifierSpec::validate() const {
  const auto& defaults = defaults_for(kind);
  for (const auto& [key, value] : hyperparams) {
    if (!defaults.contains(key)) {
      throw ValidationError("classifier " + to_string(kind) + " has no hyperparameter '" + key + "'");
    }
    if (!std::isfinite(value)) throw ValidationError("hyperparameter '" + key + "' is not finite");
  }
  auto require = [&](bool ok, const std::string& what) {
    if (!ok) throw ValidationError(to_string(kind) + ": " + what);
  };
  switch (kind) {
    case ClassifierKind::random_forest:
      require(is_integer(param("n_trees")) && param("n_trees") >= 1, "n_trees must be a positive integer");
      require(is_integer(param("max_depth")) && param("max_depth") >= 0, "max_depth must be >= 0");
      require(param("bootstrap") == 0 || param("bootstrap") == 1, "bootstrap must be 0 or 1");
      require(is_integer(param("min_samples_split")) && param("min_samples_split") >= 2,
              "min_samples_split must be >= 2");
      require(is_integer(param("max_features")) && param("max_features") >= 0, "max_features must be >= 0");
      break;
    case ClassifierKind::knn:
      require(is_integer(param("k")) && param("k") >= 1, "k must be a positive integer");
      break;
    case ClassifierKind::linear_svm:
      require(param("C") > 0, "C must be > 0");
      require(param("tol") > 0, "tol must be > 0");
      require(is_integer(param("max_epochs")) && param("max_epochs") >= 1, "max_epochs must be >= 1");
      break;
    case ClassifierKind::poly_svm:
      require(param("C") > 0, "C must be > 0");
      require(is_integer(param("degree")) && param("degree") >= 1, "degree must be a positive integer");
      require(param("gamma") >= 0, "gamma must be >= 0 (0 selects 1/d)");
      require(param("tol") > 0, "tol must be > 0");
      require(param("max_iter") >= 1, "max_iter must be >= 1");
      break;
  }
}

std::string ClassifierSpec::name() const { return to_string(kind); }

Standardizer Standardizer::fit(const Eigen::MatrixXd& x) {
  if (x.rows() == 0) throw ValidationError("cannot standardize zero rows");
  Standardizer s;
  s.mean = x.colwise().mean().transpose();
  s.scale.resize(x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double var = (x.col(c).array() - s.mean[c]).square().mean();
    const double sd = std::sqrt(var);
    // Constant columns pass through centred, unscaled.
    s.scale[c] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
  if (x.cols() != mean.size()) {
    throw ValidationError("standardizer expects " + std::to_string(mean.size()) + " features, got " +
                          std::to_string(x.cols()));
  }
  return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

Eigen::MatrixXd TrainedClassifier::scores(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.cols()) != num_features_) {
    throw ValidationError("classifier expects " + std::to_string(num_features_) + " features, got " +
                          std::to_string(x.cols()));
  }
  if (x.hasNaN()) throw ValidationError("feature matrix contains NaN");
  return raw_scores(x);
}

std::vector<std::size_t> TrainedClassifier::predict_indices(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd s = scores(x);
  std::vector<std::size_t> out(static_cast<std::size_t>(s.rows()));
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < s.cols(); ++c) {
      if (s(r, c) > s(r, best)) best = c;
    }
    out[static_cast<std::size_t>(r)] = static_cast<std::size_t>(best);
  }
  return out;
}

std::vector<std::string> TrainedClassifier::predict(const Eigen::MatrixXd& x) const {
  std::vector<std::string> out;
  for (auto i : predict_indices(x)) out.push_back(classes_[i]);
  return out;
}

std::string TrainedClassifier::to_json_string() const {
  json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["spec"] = {{"kind", to_string(spec_.kind)}, {"hyperparams", spec_.hyperparams}, {"seed", spec_.seed}};
  j["classes"] = classes_;
  j["num_features"] = num_features_;
  j["state"] = json::parse(state_json());
  return j.dump();
}

void TrainedClassifier::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model " + path.string());
  out << to_json_string() << '\n';
}

std::unique_ptr<TrainedClassifier> train(const ClassifierSpec& spec, const Eigen::MatrixXd& x,
                                         std::span<const std::string> y) {
  spec.validate();
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw ValidationError("train: " + std::to_string(x.rows()) + " rows but " + std::to_string(y.size()) +
                          " labels");
  }
  if (x.cols() == 0) throw ValidationError("train: feature matrix has no columns");
  if (x.hasNaN()) throw ValidationError("train: feature matrix contains NaN");
  const std::set<std::string> distinct(y.begin(), y.end());
  if (distinct.size() < 2) throw ValidationError("train: need at least two classes in the training labels");
  std::vector<std::string> classes(distinct.begin(), distinct.end());
  std::vector<int> yi(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    yi[i] = static_cast<int>(std::lower_bound(classes.begin(), classes.end(), y[i]) - classes.begin());
  }
  switch (spec.kind) {
    case ClassifierKind::random_forest: return detail::RandomForest::fit(spec, std::move(classes), x, yi);
    case ClassifierKind::knn: return detail::KNearest::fit(spec, std::move(classes), x, yi);
    case ClassifierKind::linear_svm: return detail::LinearSvm::fit(spec, std::move(classes), x, yi);
    case ClassifierKind::poly_svm: return detail::PolySvm::fit(spec, std::move(classes), x, yi);
  }
  throw ValidationError("unsupported classifier");
}

std::unique_ptr<TrainedClassifier> classifier_from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError("<model>", 1, e.what());
  }
  try {
    if (j.value("format", std::string()) != kFormat) throw ValidationError("not an ecotext classifier model");
    if (j.at("version").get<int>() != kVersion) {
      throw ValidationError("unsupported model version " + j.at("version").dump());
    }
    ClassifierSpec spec;
    spec.kind = parse_classifier_kind(j.at("spec").at("kind").get<std::string>());
    spec.hyperparams = j.at("spec").at("hyperparams").get<std::map<std::string, double>>();
    spec.seed = j.at("spec").at("seed").get<std::uint64_t>();
    auto classes = j.at("classes").get<std::vector<std::string>>();
    const auto d = j.at("num_features").get<std::size_t>();
    const auto& state = j.at("state");
    switch (spec.kind) {
      case ClassifierKind::random_forest:
        return detail::RandomForest::from_state(std::move(spec), std::move(classes), d, state);
      case ClassifierKind::knn: return detail::KNearest::from_state(std::move(spec), std::move(classes), d, state);
      case ClassifierKind::linear_svm:
        return detail::LinearSvm::from_state(std::move(spec), std::move(classes), d, state);
      case ClassifierKind::poly_svm:
        return detail::PolySvm::from_state(std::move(spec), std::move(classes), d, state);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed model: ") + e.what());
  }
  throw ValidationError("unsupported classifier");
}

std::unique_ptr<TrainedClassifier> load_classifier(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return classifier_from_json_string(ss.str());
}

namespace detail {

json matrix_to_json(const Eigen::MatrixXd& m) {
  std::vector<double> data(m.data(), m.data() + m.size());
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<std::size_t>(rows * cols) != data.size()) throw ValidationError("matrix size mismatch");
  return Eigen::Map<const Eigen::MatrixXd>(data.data(), rows, cols);
}

json standardizer_to_json(const Standardizer& s) {
  return {{"mean", std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size())},
          {"scale", std::vector<double>(s.scale.data(), s.scale.data() + s.scale.size())}};
}

Standardizer standardizer_from_json(const json& j) {
  const auto mean = j.at("mean").get<std::vector<double>>();
  const auto scale = j.at("scale").get<std::vector<double>>();
  if (mean.size() != scale.size()) throw ValidationError("standardizer size mismatch");
  Standardizer s;
  s.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  s.scale = Eigen::Map<const Eigen::VectorXd>(scale.data(), static_cast<Eigen::Index>(scale.size()));
  return s;
}

// k-nearest neighbours over standardized features.

KNearest::KNearest(ClassifierSpec spec, std::vector<std::string> classes, Standardizer scaler,
                   Eigen::MatrixXd train, std::vector<int> labels)
    : TrainedClassifier(std::move(spec), std::move(classes), static_cast<std::size_t>(train.cols())),
      scaler_(std::move(scaler)),
      train_(std::move(train)),
      labels_(std::move(labels)) {}

std::unique_ptr<KNearest> KNearest::fit(const ClassifierSpec& spec, std::vector<std::string> classes,
                                        const Eigen::MatrixXd& x, const std::vector<int>& y) {
  auto scaler = Standardizer::fit(x);
  Eigen::MatrixXd train = scaler.apply(x);
  return std::make_unique<KNearest>(spec, std::move(classes), std::move(scaler), std::move(train), y);
}

std::unique_ptr<KNearest> KNearest::from_state(ClassifierSpec spec, std::vector<std::string> classes,
                                               std::size_t num_features, const json& state) {
  auto train = matrix_from_json(state.at("train"));
  auto labels = state.at("labels").get<std::vector<int>>();
  if (static_cast<std::size_t>(train.cols()) != num_features || labels.size() != static_cast<std::size_t>(train.rows())) {
    throw ValidationError("knn state shape mismatch");
  }
  return std::make_unique<KNearest>(std::move(spec), std::move(classes),
                                    standardizer_from_json(state.at("scaler")), std::move(train),
                                    std::move(labels));
}

Eigen::MatrixXd KNearest::raw_scores(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd q = scaler_.apply(x);
  const auto n = static_cast<std::size_t>(train_.rows());
  const std::size_t k = std::min(n, static_cast<std::size_t>(spec().param("k")));
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(q.rows(), static_cast<Eigen::Index>(classes().size()));
  std::vector<std::size_t> order(n);
  std::vector<double> dist(n);
  for (Eigen::Index r = 0; r < q.rows(); ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] = (train_.row(static_cast<Eigen::Index>(i)) - q.row(r)).squaredNorm();
    }
    std::iota(order.begin(), order.end(), 0);
    // Equal distances resolve to the earlier training row.
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) { return dist[a] != dist[b] ? dist[a] < dist[b] : a < b; });
    for (std::size_t i = 0; i < k; ++i) out(r, labels_[order[i]]) += 1.0;
  }
  return out;
}

std::string KNearest::state_json() const {
  json j{{"scaler", standardizer_to_json(scaler_)}, {"train", matrix_to_json(train_)}, {"labels", labels_}};
  return j.dump();
}

}  // namespace detail
}  // namespace ecotext
