#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "ecotext/error.hpp"
#include "models.hpp"

namespace ecotext::detail {
namespace {

struct TreeParams {
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t min_samples_split = 2;
  std::size_t max_features = 1;
  std::size_t n_classes = 2;
};

// Gini impurity scaled by the node size: n - sum(c^2) / n.
double weighted_gini(const std::vector<double>& counts, double n) {
  if (n <= 0) return 0.0;
  double sq = 0.0;
  for (double c : counts) sq += c * c;
  return n - sq / n;
}

int majority(const std::vector<double>& counts) {
  int best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c) {
    if (counts[c] > counts[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
  }
  return best;
}

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, const std::vector<int>& y, const TreeParams& params, std::mt19937_64& rng)
      : x_(x), y_(y), params_(params), rng_(rng) {}

  Tree build(std::vector<std::size_t> samples) {
    samples_ = std::move(samples);
    Tree tree;
    tree.nodes.emplace_back();
    struct Task {
      int node;
      std::size_t begin, end, depth;
    };
    std::vector<Task> stack{{0, 0, samples_.size(), 0}};
    std::vector<int> features(static_cast<std::size_t>(x_.cols()));
    for (std::size_t f = 0; f < features.size(); ++f) features[f] = static_cast<int>(f);

    while (!stack.empty()) {
      const Task task = stack.back();
      stack.pop_back();
      std::vector<double> counts(params_.n_classes, 0.0);
      for (std::size_t i = task.begin; i < task.end; ++i) counts[static_cast<std::size_t>(y_[samples_[i]])] += 1.0;
      tree.nodes[static_cast<std::size_t>(task.node)].label = majority(counts);

      const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0; }) <= 1;
      const bool depth_limit = params_.max_depth > 0 && task.depth >= params_.max_depth;
      if (pure || depth_limit || task.end - task.begin < params_.min_samples_split) continue;

      const auto split = best_split(task.begin, task.end, counts, features);
      if (split.feature < 0) continue;

      // Partition samples so the left child occupies [begin, mid).
      const auto mid_it = std::partition(
          samples_.begin() + static_cast<std::ptrdiff_t>(task.begin),
          samples_.begin() + static_cast<std::ptrdiff_t>(task.end),
          [&](std::size_t s) { return x_(static_cast<Eigen::Index>(s), split.feature) <= split.threshold; });
      const auto mid = static_cast<std::size_t>(mid_it - samples_.begin());
      if (mid == task.begin || mid == task.end) continue;

      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      const int right = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      auto& node = tree.nodes[static_cast<std::size_t>(task.node)];
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.left = left;
      node.right = right;
      stack.push_back({right, mid, task.end, task.depth + 1});
      stack.push_back({left, task.begin, mid, task.depth + 1});
    }
    return tree;
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
  };

  // Draws features in random order; after max_features candidates the search
  // continues only while no valid split has been found.
  Split best_split(std::size_t begin, std::size_t end, const std::vector<double>& parent_counts,
                   std::vector<int>& features) {
    Split best;
    best.impurity = std::numeric_limits<double>::infinity();
    const std::size_t d = features.size();
    const double n = static_cast<double>(end - begin);
    std::vector<std::pair<double, int>> values(end - begin);
    std::vector<double> left(params_.n_classes);
    std::vector<double> right(params_.n_classes);

    for (std::size_t drawn = 0; drawn < d; ++drawn) {
      if (drawn >= params_.max_features && best.feature >= 0) break;
      std::uniform_int_distribution<std::size_t> pick(drawn, d - 1);
      std::swap(features[drawn], features[pick(rng_)]);
      const int f = features[drawn];

      for (std::size_t i = begin; i < end; ++i) {
        const auto s = samples_[i];
        values[i - begin] = {x_(static_cast<Eigen::Index>(s), f), y_[s]};
      }
      std::sort(values.begin(), values.end());
      if (values.front().first == values.back().first) continue;

      std::fill(left.begin(), left.end(), 0.0);
      right = parent_counts;
      for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        const auto c = static_cast<std::size_t>(values[i].second);
        left[c] += 1.0;
        right[c] -= 1.0;
        if (values[i].first == values[i + 1].first) continue;
        const double nl = static_cast<double>(i + 1);
        const double impurity = weighted_gini(left, nl) + weighted_gini(right, n - nl);
        if (impurity < best.impurity - 1e-12) {
          double threshold = 0.5 * (values[i].first + values[i + 1].first);
          if (threshold >= values[i + 1].first) threshold = values[i].first;
          best = {f, threshold, impurity};
        }
      }
    }
    return best;
  }

  const Eigen::MatrixXd& x_;
  const std::vector<int>& y_;
  const TreeParams& params_;
  std::mt19937_64& rng_;
  std::vector<std::size_t> samples_;
};

json tree_to_json(const Tree& tree) {
  std::vector<int> feature, left, right, label;
  std::vector<double> threshold;
  for (const auto& n : tree.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    label.push_back(n.label);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"label", label}};
}

Tree tree_from_json(const json& j, std::size_t num_features, std::size_t num_classes) {
  const auto feature = j.at("feature").get<std::vector<int>>();
  const auto threshold = j.at("threshold").get<std::vector<double>>();
  const auto left = j.at("left").get<std::vector<int>>();
  const auto right = j.at("right").get<std::vector<int>>();
  const auto label = j.at("label").get<std::vector<int>>();
  const std::size_t n = feature.size();
  if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n || label.size() != n) {
    throw ValidationError("malformed tree");
  }
  Tree tree;
  tree.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = tree.nodes[i];
    node = {feature[i], threshold[i], left[i], right[i], label[i]};
    if (node.label < 0 || static_cast<std::size_t>(node.label) >= num_classes) throw ValidationError("malformed tree");
    if (node.feature >= 0) {
      const auto in_range = [&](int c) { return c > static_cast<int>(i) && static_cast<std::size_t>(c) < n; };
      if (static_cast<std::size_t>(node.feature) >= num_features || !in_range(node.left) || !in_range(node.right)) {
        throw ValidationError("malformed tree");
      }
    }
  }
  return tree;
}

}  // namespace

int Tree::predict(const Eigen::MatrixXd& x, Eigen::Index row) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const bool go_left = x(row, nodes[i].feature) <= nodes[i].threshold;
    i = static_cast<std::size_t>(go_left ? nodes[i].left : nodes[i].right);
  }
  return nodes[i].label;
}

RandomForest::RandomForest(ClassifierSpec spec, std::vector<std::string> classes, std::size_t num_features,
                           std::vector<Tree> trees)
    : TrainedClassifier(std::move(spec), std::move(classes), num_features), trees_(std::move(trees)) {}

std::unique_ptr<RandomForest> RandomForest::fit(const ClassifierSpec& spec, std::vector<std::string> classes,
                                                const Eigen::MatrixXd& x, const std::vector<int>& y) {
  const auto n_trees = static_cast<std::size_t>(spec.param("n_trees"));
  const bool bootstrap = spec.param("bootstrap") != 0;
  const auto d = static_cast<std::size_t>(x.cols());
  TreeParams params;
  params.max_depth = static_cast<std::size_t>(spec.param("max_depth"));
  params.min_samples_split = static_cast<std::size_t>(spec.param("min_samples_split"));
  const auto max_features = static_cast<std::size_t>(spec.param("max_features"));
  params.max_features = max_features > 0 ? std::min(max_features, d)
                                         : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
  params.n_classes = classes.size();

  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<Tree> trees(n_trees);
  // Each tree owns a generator derived from (seed, tree index), so the
  // forest does not depend on thread scheduling.
  auto grow = [&](std::size_t t) {
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(t)};
    std::mt19937_64 rng(seq);
    std::vector<std::size_t> samples(n);
    if (bootstrap) {
      std::uniform_int_distribution<std::size_t> draw(0, n - 1);
      for (auto& s : samples) s = draw(rng);
    } else {
      for (std::size_t i = 0; i < n; ++i) samples[i] = i;
    }
    TreeBuilder builder(x, y, params, rng);
    trees[t] = builder.build(std::move(samples));
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), n_trees));
  if (workers == 1) {
    for (std::size_t t = 0; t < n_trees; ++t) grow(t);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t t = w; t < n_trees; t += workers) grow(t);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return std::make_unique<RandomForest>(spec, std::move(classes), d, std::move(trees));
}

std::unique_ptr<RandomForest> RandomForest::from_state(ClassifierSpec spec, std::vector<std::string> classes,
                                                       std::size_t num_features, const json& state) {
  std::vector<Tree> trees;
  for (const auto& t : state.at("trees")) trees.push_back(tree_from_json(t, num_features, classes.size()));
  if (trees.empty()) throw ValidationError("forest has no trees");
  return std::make_unique<RandomForest>(std::move(spec), std::move(classes), num_features, std::move(trees));
}

Eigen::MatrixXd RandomForest::raw_scores(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(x.rows(), static_cast<Eigen::Index>(classes().size()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (const auto& tree : trees_) out(r, tree.predict(x, r)) += 1.0;
  }
  return out;
}

std::string RandomForest::state_json() const {
  json trees = json::array();
  for (const auto& t : trees_) trees.push_back(tree_to_json(t));
  return json{{"trees", trees}}.dump();
}

}  // namespace ecotext::detail
