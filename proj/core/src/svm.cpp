#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <numeric>
#include <random>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "ecotext/error.hpp"
#include "models.hpp"

namespace ecotext::detail {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kKernelCacheBytes = std::size_t{256} << 20;

// L1-loss (hinge) dual coordinate descent for one binary problem. The bias
// is learned as the weight of a constant feature equal to one.
Eigen::VectorXd train_linear_binary(const Eigen::MatrixXd& x, const std::vector<double>& y, double c,
                                    double tol, std::size_t max_epochs, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(x.rows());
  const Eigen::Index d = x.cols();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double b = 0.0;
  std::vector<double> alpha(n, 0.0);
  std::vector<double> qd(n);
  for (std::size_t i = 0; i < n; ++i) qd[i] = x.row(static_cast<Eigen::Index>(i)).squaredNorm() + 1.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);

  std::size_t epoch = 0;
  for (; epoch < max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double pg_max = -kInf;
    double pg_min = kInf;
    for (const auto i : order) {
      const auto r = static_cast<Eigen::Index>(i);
      const double g = y[i] * (x.row(r).dot(w) + b) - 1.0;
      double pg = g;
      if (alpha[i] == 0.0) {
        pg = std::min(g, 0.0);
      } else if (alpha[i] == c) {
        pg = std::max(g, 0.0);
      }
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (std::abs(pg) > 1e-12) {
        const double old = alpha[i];
        alpha[i] = std::min(std::max(alpha[i] - g / qd[i], 0.0), c);
        const double delta = (alpha[i] - old) * y[i];
        w += delta * x.row(r).transpose();
        b += delta;
      }
    }
    if (pg_max - pg_min <= tol) break;
  }
  if (epoch == max_epochs) spdlog::warn("linear_svm reached max_epochs={} before converging", max_epochs);
  Eigen::VectorXd out(d + 1);
  out.head(d) = w;
  out[d] = b;
  return out;
}

double poly_kernel(double dot, double gamma, double coef0, int degree) {
  const double base = gamma * dot + coef0;
  double out = 1.0;
  for (int i = 0; i < degree; ++i) out *= base;
  return out;
}

// Least-recently-used cache of kernel rows. Two rows fetched back to back
// stay valid because eviction always takes the oldest entry first.
class KernelCache {
 public:
  KernelCache(const Eigen::MatrixXd& x, double gamma, double coef0, int degree)
      : x_(x), gamma_(gamma), coef0_(coef0), degree_(degree) {
    const std::size_t row_bytes = static_cast<std::size_t>(x.rows()) * sizeof(double);
    capacity_ = std::max<std::size_t>(2, kKernelCacheBytes / std::max<std::size_t>(row_bytes, 1));
  }

  const Eigen::VectorXd& row(std::size_t i) {
    if (auto it = index_.find(i); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
    if (lru_.size() >= capacity_) {
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
    Eigen::VectorXd k = x_ * x_.row(static_cast<Eigen::Index>(i)).transpose();
    for (Eigen::Index t = 0; t < k.size(); ++t) k[t] = poly_kernel(k[t], gamma_, coef0_, degree_);
    lru_.emplace_front(i, std::move(k));
    index_[i] = lru_.begin();
    return lru_.front().second;
  }

  double diag(std::size_t i) const {
    const auto r = static_cast<Eigen::Index>(i);
    return poly_kernel(x_.row(r).squaredNorm(), gamma_, coef0_, degree_);
  }

 private:
  const Eigen::MatrixXd& x_;
  double gamma_, coef0_;
  int degree_;
  std::size_t capacity_ = 2;
  std::list<std::pair<std::size_t, Eigen::VectorXd>> lru_;
  std::unordered_map<std::size_t, std::list<std::pair<std::size_t, Eigen::VectorXd>>::iterator> index_;
};

struct BinaryKernelMachine {
  std::vector<double> alpha;
  double rho = 0.0;
};

// SMO with second-order working-set selection for
//   min 1/2 a'Qa - e'a  s.t.  0 <= a <= C, y'a = 0,  Q_ij = y_i y_j K_ij.
BinaryKernelMachine train_kernel_binary(KernelCache& cache, const std::vector<double>& kdiag,
                                        const std::vector<double>& y, double c, double eps,
                                        std::size_t max_iter) {
  const std::size_t n = y.size();
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);
  auto is_up = [&](std::size_t t) { return (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0); };
  auto is_low = [&](std::size_t t) { return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < c); };

  std::size_t iter = 0;
  for (; iter < max_iter; ++iter) {
    double gmax = -kInf;
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (is_up(t) && -y[t] * grad[t] >= gmax) {
        gmax = -y[t] * grad[t];
        i = t;
      }
    }
    if (i == n) break;
    const Eigen::VectorXd& ki = cache.row(i);
    double gmax2 = -kInf;
    double best_obj = kInf;
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (!is_low(t)) continue;
      gmax2 = std::max(gmax2, y[t] * grad[t]);
      const double b = gmax + y[t] * grad[t];
      if (b > 0) {
        double a = kdiag[i] + kdiag[t] - 2.0 * ki[static_cast<Eigen::Index>(t)];
        if (a <= 0) a = 1e-12;
        const double obj = -(b * b) / a;
        if (obj <= best_obj) {
          best_obj = obj;
          j = t;
        }
      }
    }
    if (gmax + gmax2 < eps || j == n) break;

    const Eigen::VectorXd ki_copy = ki;  // the next fetch may evict row i
    const Eigen::VectorXd& kj = cache.row(j);
    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    const double kij = ki_copy[static_cast<Eigen::Index>(j)];
    if (y[i] != y[j]) {
      double quad = kdiag[i] + kdiag[j] + 2.0 * kij;
      if (quad <= 0) quad = 1e-12;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) {
          alpha[j] = 0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = -diff;
      }
      if (diff > 0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = kdiag[i] + kdiag[j] - 2.0 * kij;
      if (quad <= 0) quad = 1e-12;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0) {
        alpha[j] = 0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = sum;
      }
    }
    const double di = alpha[i] - old_ai;
    const double dj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) {
      const auto tt = static_cast<Eigen::Index>(t);
      grad[t] += y[t] * (y[i] * ki_copy[tt] * di + y[j] * kj[tt] * dj);
    }
  }
  if (iter == max_iter) spdlog::warn("poly_svm reached max_iter={} before converging", max_iter);

  // rho from free support vectors, or the midpoint of the feasible interval.
  double ub = kInf, lb = -kInf, sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= c) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  BinaryKernelMachine out;
  out.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
  out.alpha = std::move(alpha);
  return out;
}

}  // namespace

// Linear SVM.

LinearSvm::LinearSvm(ClassifierSpec spec, std::vector<std::string> classes, Standardizer scaler,
                     Eigen::MatrixXd weights)
    : TrainedClassifier(std::move(spec), std::move(classes), static_cast<std::size_t>(weights.cols() - 1)),
      scaler_(std::move(scaler)),
      weights_(std::move(weights)) {}

std::unique_ptr<LinearSvm> LinearSvm::fit(const ClassifierSpec& spec, std::vector<std::string> classes,
                                          const Eigen::MatrixXd& x, const std::vector<int>& y) {
  auto scaler = Standardizer::fit(x);
  const Eigen::MatrixXd xs = scaler.apply(x);
  const double c = spec.param("C");
  const double tol = spec.param("tol");
  const auto epochs = static_cast<std::size_t>(spec.param("max_epochs"));
  Eigen::MatrixXd weights(static_cast<Eigen::Index>(classes.size()), xs.cols() + 1);
  std::vector<double> yb(y.size());
  for (std::size_t k = 0; k < classes.size(); ++k) {
    for (std::size_t i = 0; i < y.size(); ++i) yb[i] = y[i] == static_cast<int>(k) ? 1.0 : -1.0;
    weights.row(static_cast<Eigen::Index>(k)) =
        train_linear_binary(xs, yb, c, tol, epochs, spec.seed + k).transpose();
  }
  return std::make_unique<LinearSvm>(spec, std::move(classes), std::move(scaler), std::move(weights));
}

std::unique_ptr<LinearSvm> LinearSvm::from_state(ClassifierSpec spec, std::vector<std::string> classes,
                                                 std::size_t num_features, const json& state) {
  auto weights = matrix_from_json(state.at("weights"));
  if (static_cast<std::size_t>(weights.rows()) != classes.size() ||
      static_cast<std::size_t>(weights.cols()) != num_features + 1) {
    throw ValidationError("linear_svm state shape mismatch");
  }
  return std::make_unique<LinearSvm>(std::move(spec), std::move(classes), standardizer_from_json(state.at("scaler")),
                                     std::move(weights));
}

Eigen::MatrixXd LinearSvm::raw_scores(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd xs = scaler_.apply(x);
  const Eigen::Index d = xs.cols();
  Eigen::MatrixXd out = xs * weights_.leftCols(d).transpose();
  out.rowwise() += weights_.col(d).transpose();
  return out;
}

std::string LinearSvm::state_json() const {
  return json{{"scaler", standardizer_to_json(scaler_)}, {"weights", matrix_to_json(weights_)}}.dump();
}

// Polynomial-kernel SVM.

PolySvm::PolySvm(ClassifierSpec spec, std::vector<std::string> classes, Standardizer scaler,
                 Eigen::MatrixXd support, Eigen::MatrixXd coef, Eigen::VectorXd bias, double gamma)
    : TrainedClassifier(std::move(spec), std::move(classes), static_cast<std::size_t>(scaler.mean.size())),
      scaler_(std::move(scaler)),
      support_(std::move(support)),
      coef_(std::move(coef)),
      bias_(std::move(bias)),
      gamma_(gamma) {}

std::unique_ptr<PolySvm> PolySvm::fit(const ClassifierSpec& spec, std::vector<std::string> classes,
                                      const Eigen::MatrixXd& x, const std::vector<int>& y) {
  auto scaler = Standardizer::fit(x);
  const Eigen::MatrixXd xs = scaler.apply(x);
  const double c = spec.param("C");
  const double gamma = spec.param("gamma") > 0 ? spec.param("gamma") : 1.0 / static_cast<double>(xs.cols());
  const double coef0 = spec.param("coef0");
  const int degree = static_cast<int>(spec.param("degree"));
  const double tol = spec.param("tol");
  const auto max_iter = static_cast<std::size_t>(spec.param("max_iter"));
  const std::size_t n = y.size();

  KernelCache cache(xs, gamma, coef0, degree);
  std::vector<double> kdiag(n);
  for (std::size_t i = 0; i < n; ++i) kdiag[i] = cache.diag(i);

  const auto k = classes.size();
  Eigen::MatrixXd dense_coef = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
  Eigen::VectorXd bias(static_cast<Eigen::Index>(k));
  std::vector<double> yb(n);
  for (std::size_t cls = 0; cls < k; ++cls) {
    for (std::size_t i = 0; i < n; ++i) yb[i] = y[i] == static_cast<int>(cls) ? 1.0 : -1.0;
    const auto machine = train_kernel_binary(cache, kdiag, yb, c, tol, max_iter);
    for (std::size_t i = 0; i < n; ++i) {
      dense_coef(static_cast<Eigen::Index>(cls), static_cast<Eigen::Index>(i)) = machine.alpha[i] * yb[i];
    }
    bias[static_cast<Eigen::Index>(cls)] = -machine.rho;
  }

  // Keep only rows that are a support vector for at least one class.
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < dense_coef.cols(); ++i) {
    if ((dense_coef.col(i).array() != 0.0).any()) keep.push_back(i);
  }
  Eigen::MatrixXd support(static_cast<Eigen::Index>(keep.size()), xs.cols());
  Eigen::MatrixXd coef(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t s = 0; s < keep.size(); ++s) {
    support.row(static_cast<Eigen::Index>(s)) = xs.row(keep[s]);
    coef.col(static_cast<Eigen::Index>(s)) = dense_coef.col(keep[s]);
  }
  return std::make_unique<PolySvm>(spec, std::move(classes), std::move(scaler), std::move(support), std::move(coef),
                                   std::move(bias), gamma);
}

std::unique_ptr<PolySvm> PolySvm::from_state(ClassifierSpec spec, std::vector<std::string> classes,
                                             std::size_t num_features, const json& state) {
  auto scaler = standardizer_from_json(state.at("scaler"));
  auto support = matrix_from_json(state.at("support"));
  auto coef = matrix_from_json(state.at("coef"));
  const auto bias_v = state.at("bias").get<std::vector<double>>();
  const double gamma = state.at("gamma").get<double>();
  if (static_cast<std::size_t>(scaler.mean.size()) != num_features ||
      (support.rows() > 0 && static_cast<std::size_t>(support.cols()) != num_features) ||
      static_cast<std::size_t>(coef.rows()) != classes.size() || coef.cols() != support.rows() ||
      bias_v.size() != classes.size()) {
    throw ValidationError("poly_svm state shape mismatch");
  }
  if (support.rows() == 0) support.resize(0, static_cast<Eigen::Index>(num_features));
  Eigen::VectorXd bias = Eigen::Map<const Eigen::VectorXd>(bias_v.data(), static_cast<Eigen::Index>(bias_v.size()));
  return std::make_unique<PolySvm>(std::move(spec), std::move(classes), std::move(scaler), std::move(support),
                                   std::move(coef), std::move(bias), gamma);
}

Eigen::MatrixXd PolySvm::raw_scores(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd xs = scaler_.apply(x);
  const double coef0 = spec().param("coef0");
  const int degree = static_cast<int>(spec().param("degree"));
  Eigen::MatrixXd kernel = xs * support_.transpose();
  kernel = kernel.unaryExpr([&](double v) { return poly_kernel(v, gamma_, coef0, degree); });
  Eigen::MatrixXd out = kernel * coef_.transpose();
  out.rowwise() += bias_.transpose();
  return out;
}

std::string PolySvm::state_json() const {
  return json{{"scaler", standardizer_to_json(scaler_)},
              {"support", matrix_to_json(support_)},
              {"coef", matrix_to_json(coef_)},
              {"bias", std::vector<double>(bias_.data(), bias_.data() + bias_.size())},
              {"gamma", gamma_}}
      .dump();
}

}  // namespace ecotext::detail
