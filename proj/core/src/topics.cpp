#include "ecotext/topics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "ecotext/error.hpp"
#include "json.hpp"

namespace ecotext {
namespace {

using json = nlohmann::json;

constexpr int kFormatVersion = 1;

std::size_t nearest_row(const Eigen::MatrixXd& centroids, const Eigen::VectorXd& z) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < centroids.rows(); ++j) {
    const double d = (centroids.row(j).transpose() - z).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::size_t>(j);
    }
  }
  return best;
}

// k-means++ seeding followed by Lloyd iterations. Rows of `points` are
// samples. Returns k x d centroids.
Eigen::MatrixXd kmeans(const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed,
                       std::size_t max_iterations, double tolerance) {
  const auto n = static_cast<std::size_t>(points.rows());
  const auto d = points.cols();
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd centroids(static_cast<Eigen::Index>(k), d);

  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  centroids.row(0) = points.row(static_cast<Eigen::Index>(pick(rng)));
  std::vector<double> dist2(n);
  for (std::size_t i = 0; i < n; ++i) {
    dist2[i] = (points.row(static_cast<Eigen::Index>(i)) - centroids.row(0)).squaredNorm();
  }
  for (std::size_t c = 1; c < k; ++c) {
    const double total = std::accumulate(dist2.begin(), dist2.end(), 0.0);
    if (!(total > 0.0)) {
      throw ValidationError("topic fit is degenerate: fewer than k distinct document vectors");
    }
    std::uniform_real_distribution<double> u(0.0, total);
    const double target = u(rng);
    double acc = 0.0;
    std::size_t chosen = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      acc += dist2[i];
      if (acc >= target && dist2[i] > 0.0) {
        chosen = i;
        break;
      }
    }
    while (dist2[chosen] == 0.0 && chosen > 0) --chosen;
    centroids.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(chosen));
    for (std::size_t i = 0; i < n; ++i) {
      dist2[i] = std::min(dist2[i], (points.row(static_cast<Eigen::Index>(i)) -
                                     centroids.row(static_cast<Eigen::Index>(c)))
                                        .squaredNorm());
    }
  }

  std::vector<std::size_t> assign(n, k);
  double previous_inertia = std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::VectorXd z = points.row(static_cast<Eigen::Index>(i)).transpose();
      const std::size_t a = nearest_row(centroids, z);
      inertia += (centroids.row(static_cast<Eigen::Index>(a)).transpose() - z).squaredNorm();
      if (a != assign[i]) {
        assign[i] = a;
        changed = true;
      }
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), d);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.row(static_cast<Eigen::Index>(assign[i])) += points.row(static_cast<Eigen::Index>(i));
      ++counts[assign[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centroids.row(static_cast<Eigen::Index>(c)) = sums.row(static_cast<Eigen::Index>(c)) /
                                                      static_cast<double>(counts[c]);
        continue;
      }
      // Empty cluster: move it onto the point farthest from its own centroid.
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[assign[i]] <= 1) continue;
        const double dd = (points.row(static_cast<Eigen::Index>(i)) -
                           centroids.row(static_cast<Eigen::Index>(assign[i])))
                              .squaredNorm();
        if (dd > far_d) {
          far_d = dd;
          far = i;
        }
      }
      --counts[assign[far]];
      assign[far] = c;
      counts[c] = 1;
      centroids.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(far));
      changed = true;
    }
    if (!changed) break;
    if (std::isfinite(previous_inertia) &&
        std::abs(previous_inertia - inertia) <= tolerance * std::max(previous_inertia, 1e-300)) {
      break;
    }
    previous_inertia = inertia;
  }
  return centroids;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows, Eigen::Index cols_hint) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index c = r > 0 ? static_cast<Eigen::Index>(rows[0].size()) : cols_hint;
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != c) {
      throw ValidationError("topic model: ragged matrix");
    }
    for (Eigen::Index j = 0; j < c; ++j) {
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<double>();
    }
  }
  return m;
}

void count_ngrams(const TokenSeq& tokens, std::map<std::string, std::uint64_t>& into) {
  for (auto& term : ngrams(tokens, 1, 3)) ++into[std::move(term)];
}

}  // namespace

// ---------------------------------------------------------------------------
// c-TF-IDF

CtfidfTable ctfidf(const TermCounts& counts) {
  if (counts.empty()) throw ValidationError("ctfidf: empty count table");
  std::map<std::string, std::uint64_t> totals;
  std::uint64_t grand_total = 0;
  for (const auto& topic : counts) {
    for (const auto& [term, c] : topic) {
      if (c == 0) continue;
      totals[term] += c;
      grand_total += c;
    }
  }
  if (grand_total == 0) throw ValidationError("ctfidf: empty count table");

  CtfidfTable table;
  table.average_terms_ = static_cast<double>(grand_total) / static_cast<double>(counts.size());
  table.weights_.resize(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    for (const auto& [term, tf] : counts[c]) {
      if (tf == 0) continue;
      const double total = static_cast<double>(totals.at(term));
      table.weights_[c][term] =
          static_cast<double>(tf) * std::log(1.0 + table.average_terms_ / total);
    }
  }
  return table;
}

double CtfidfTable::weight(std::size_t topic, const std::string& term) const {
  const auto& w = weights_.at(topic);
  const auto it = w.find(term);
  return it == w.end() ? 0.0 : it->second;
}

std::vector<WeightedTerm> CtfidfTable::top_terms(std::size_t topic, std::size_t n) const {
  std::vector<WeightedTerm> all;
  for (const auto& [term, w] : weights_.at(topic)) all.push_back({term, w});
  std::stable_sort(all.begin(), all.end(), [](const WeightedTerm& a, const WeightedTerm& b) {
    return a.weight != b.weight ? a.weight > b.weight : a.term < b.term;
  });
  if (all.size() > n) all.resize(n);
  return all;
}

// ---------------------------------------------------------------------------
// TopicModel

std::vector<std::size_t> TopicModel::member_counts() const {
  std::vector<std::size_t> counts(k(), 0);
  for (const auto& [id, topic] : assignments_) ++counts.at(topic);
  return counts;
}

Eigen::VectorXd TopicModel::reduce(const Eigen::VectorXd& doc) const {
  return components_ * (doc - mean_);
}

std::string TopicModel::label(std::size_t topic) const {
  std::string out = std::to_string(topic) + "{";
  const auto& terms = topic_terms_.at(topic);
  for (std::size_t i = 0; i < terms.size(); ++i) out += (i ? ", " : "") + terms[i].term;
  return out + "}";
}

void TopicModel::relabel() {
  topic_terms_.assign(k(), {});
  bool any = false;
  for (const auto& t : term_counts_) any = any || !t.empty();
  if (!any) return;
  const CtfidfTable table = ctfidf(term_counts_);
  for (std::size_t t = 0; t < k(); ++t) topic_terms_[t] = table.top_terms(t, top_n_);
}

std::string TopicModel::to_json_string() const {
  json j;
  j["format"] = "ecotext-topic-model";
  j["version"] = kFormatVersion;
  j["top_n"] = top_n_;
  j["mean"] = std::vector<double>(mean_.data(), mean_.data() + mean_.size());
  j["components"] = matrix_to_json(components_);
  j["centroids"] = matrix_to_json(centroids_);
  json assignments = json::array();
  for (const auto& [id, topic] : assignments_) assignments.push_back({id, topic});
  j["assignments"] = std::move(assignments);
  j["term_counts"] = term_counts_;
  json terms = json::array();
  for (const auto& topic : topic_terms_) {
    json t = json::array();
    for (const auto& wt : topic) t.push_back({wt.term, wt.weight});
    terms.push_back(std::move(t));
  }
  j["topic_terms"] = std::move(terms);
  return j.dump();
}

TopicModel TopicModel::from_json_string(const std::string& text) {
  const json j = json::parse(text);
  if (j.value("format", "") != "ecotext-topic-model") throw ValidationError("not a topic model file");
  if (j.at("version").get<int>() != kFormatVersion) {
    throw ValidationError("unsupported topic model version " + j.at("version").dump());
  }
  TopicModel m;
  m.top_n_ = j.at("top_n").get<std::size_t>();
  const auto mean = j.at("mean").get<std::vector<double>>();
  m.mean_ = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  m.components_ = matrix_from_json(j.at("components"), m.mean_.size());
  m.centroids_ = matrix_from_json(j.at("centroids"), m.components_.rows());
  for (const auto& a : j.at("assignments")) {
    m.assignments_.emplace_back(a.at(0).get<std::string>(), a.at(1).get<std::size_t>());
  }
  m.term_counts_ = j.at("term_counts").get<TermCounts>();
  for (const auto& t : j.at("topic_terms")) {
    std::vector<WeightedTerm> terms;
    for (const auto& wt : t) terms.push_back({wt.at(0).get<std::string>(), wt.at(1).get<double>()});
    m.topic_terms_.push_back(std::move(terms));
  }
  if (m.components_.cols() != m.mean_.size() || m.centroids_.cols() != m.components_.rows() ||
      m.term_counts_.size() != m.k() || m.topic_terms_.size() != m.k()) {
    throw ValidationError("topic model: inconsistent dimensions");
  }
  for (const auto& [id, topic] : m.assignments_) {
    if (topic >= m.k()) throw ValidationError("topic model: assignment out of range");
  }
  return m;
}

void TopicModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write topic model " + path.string());
  out << to_json_string() << '\n';
}

TopicModel TopicModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open topic model " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_string(ss.str());
}

// ---------------------------------------------------------------------------
// Fitting

TopicModel fit_topic_model(const std::vector<std::string>& ids, const std::vector<TokenSeq>& docs,
                           const EmbeddingStore& store, const TopicOptions& options) {
  if (ids.size() != docs.size()) throw ValidationError("fit_topic_model: ids/docs size mismatch");
  if (options.k < 2) throw ValidationError("fit_topic_model: k must be >= 2");
  if (options.reduced_dim < 1 || options.reduced_dim > store.dim()) {
    throw ValidationError("fit_topic_model: reduced dimension must lie in [1, embedding dim]");
  }
  const auto dim = static_cast<Eigen::Index>(store.dim());

  Eigen::MatrixXd raw(static_cast<Eigen::Index>(docs.size()), dim);
  std::vector<Eigen::Index> usable;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    auto dv = doc_vector(store, docs[i]);
    raw.row(static_cast<Eigen::Index>(i)) = dv.values.transpose();
    if (!dv.all_oov()) usable.push_back(static_cast<Eigen::Index>(i));
  }
  if (usable.size() < options.k) {
    throw ValidationError("fit_topic_model: k=" + std::to_string(options.k) + " exceeds the " +
                          std::to_string(usable.size()) + " documents with embeddings");
  }

  TopicModel model;
  model.top_n_ = options.top_n;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(usable.size()), dim);
  for (std::size_t r = 0; r < usable.size(); ++r) x.row(static_cast<Eigen::Index>(r)) = raw.row(usable[r]);
  model.mean_ = x.colwise().mean().transpose();
  x.rowwise() -= model.mean_.transpose();
  if (x.cwiseAbs().maxCoeff() < 1e-12) {
    throw ValidationError("fit_topic_model: all document vectors are identical");
  }

  // Truncated SVD through the eigen-decomposition of the scatter matrix; the
  // top right singular vectors are its leading eigenvectors.
  const Eigen::MatrixXd scatter = x.transpose() * x;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scatter);
  const auto d = static_cast<Eigen::Index>(options.reduced_dim);
  model.components_.resize(d, dim);
  for (Eigen::Index c = 0; c < d; ++c) {
    Eigen::VectorXd v = eig.eigenvectors().col(dim - 1 - c);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0) v = -v;
    model.components_.row(c) = v.transpose();
  }
  const Eigen::MatrixXd z = x * model.components_.transpose();
  model.centroids_ = kmeans(z, options.k, options.seed, options.max_iterations, options.tolerance);

  model.term_counts_.assign(options.k, {});
  model.assignments_.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const Eigen::VectorXd zi = model.reduce(raw.row(static_cast<Eigen::Index>(i)).transpose());
    const std::size_t topic = nearest_row(model.centroids_, zi);
    model.assignments_.emplace_back(ids[i], topic);
    count_ngrams(docs[i], model.term_counts_[topic]);
  }
  model.relabel();
  return model;
}

Eigen::VectorXd topic_features(const TokenSeq& tokens, const TopicModel& model,
                               const EmbeddingStore& store) {
  const auto k = static_cast<Eigen::Index>(model.k());
  const auto dv = doc_vector(store, tokens);
  if (dv.all_oov()) return Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  const Eigen::VectorXd z = model.reduce(dv.values);
  Eigen::VectorXd logits(k);
  for (Eigen::Index j = 0; j < k; ++j) logits[j] = -(model.centroids().row(j).transpose() - z).squaredNorm();
  const double top = logits.maxCoeff();
  Eigen::VectorXd p = (logits.array() - top).exp().matrix();
  return p / p.sum();
}

TopicModel reduce_topics(const TopicModel& model, std::size_t target_k) {
  if (target_k < 2) throw ValidationError("reduce_topics: target must be >= 2");
  if (target_k >= model.k()) {
    throw ValidationError("reduce_topics: target " + std::to_string(target_k) +
                          " must be below the current " + std::to_string(model.k()) + " topics");
  }
  TopicModel out = model;
  while (out.k() > target_k) {
    const auto counts = out.member_counts();
    const auto smallest = static_cast<std::size_t>(
        std::min_element(counts.begin(), counts.end()) - counts.begin());
    std::size_t into = smallest == 0 ? 1 : 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < out.k(); ++t) {
      if (t == smallest) continue;
      const double dd = (out.centroids_.row(static_cast<Eigen::Index>(t)) -
                         out.centroids_.row(static_cast<Eigen::Index>(smallest)))
                            .squaredNorm();
      if (dd < best) {
        best = dd;
        into = t;
      }
    }
    const double ns = static_cast<double>(counts[smallest]);
    const double nt = static_cast<double>(counts[into]);
    if (ns + nt > 0) {
      out.centroids_.row(static_cast<Eigen::Index>(into)) =
          (ns * out.centroids_.row(static_cast<Eigen::Index>(smallest)) +
           nt * out.centroids_.row(static_cast<Eigen::Index>(into))) /
          (ns + nt);
    }
    for (const auto& [term, c] : out.term_counts_[smallest]) out.term_counts_[into][term] += c;

    // Drop row `smallest` and shift later topic ids down by one.
    const std::size_t target = into > smallest ? into - 1 : into;
    Eigen::MatrixXd kept(out.centroids_.rows() - 1, out.centroids_.cols());
    for (Eigen::Index r = 0, w = 0; r < out.centroids_.rows(); ++r) {
      if (static_cast<std::size_t>(r) != smallest) kept.row(w++) = out.centroids_.row(r);
    }
    out.centroids_ = std::move(kept);
    out.term_counts_.erase(out.term_counts_.begin() + static_cast<std::ptrdiff_t>(smallest));
    for (auto& [id, topic] : out.assignments_) {
      if (topic == smallest) topic = target;
      else if (topic > smallest) --topic;
    }
  }
  out.relabel();
  return out;
}

}  // namespace ecotext
