#include "ecotext/explain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include <fmt/format.h>

#include "ecotext/error.hpp"
#include "ecotext/metrics.hpp"
#include "json.hpp"

namespace ecotext {
namespace {

struct Target {
  std::string name;
  FeatureKind kind;
  std::vector<Eigen::Index> columns;
};

}  // namespace

ImportanceReport permutation_importance(const TrainedClassifier& model, const FeatureMatrix& x,
                                        std::span<const std::string> y, const ImportanceOptions& options) {
  validate_layout(x);
  if (x.rows() != y.size()) throw ValidationError("permutation_importance: row/label count mismatch");
  if (x.rows() < 2) throw ValidationError("permutation_importance: need at least two rows");
  if (options.repeats < 1) throw ValidationError("permutation_importance: repeats must be >= 1");

  std::set<std::string> label_set(model.classes().begin(), model.classes().end());
  label_set.insert(y.begin(), y.end());
  const std::vector<std::string> classes(label_set.begin(), label_set.end());
  if (options.target_class && !label_set.contains(*options.target_class)) {
    throw ValidationError("target class '" + *options.target_class + "' is not a known label");
  }
  auto metric = [&](const Eigen::MatrixXd& values) {
    const auto pred = model.predict(values);
    if (options.target_class) return one_vs_rest_f1(y, pred, *options.target_class);
    return evaluate(y, pred, classes).macro_f1;
  };

  std::vector<Target> targets;
  if (options.group_by_kind) {
    for (auto kind : {FeatureKind::semantic, FeatureKind::emotion, FeatureKind::topic}) {
      Target t{to_string(kind), kind, {}};
      for (const auto& span : x.spans) {
        if (span.kind != kind) continue;
        for (std::size_t c = 0; c < span.length; ++c) t.columns.push_back(static_cast<Eigen::Index>(span.start + c));
      }
      if (!t.columns.empty()) targets.push_back(std::move(t));
    }
  } else {
    for (const auto& span : x.spans) {
      for (std::size_t c = 0; c < span.length; ++c) {
        const auto col = static_cast<Eigen::Index>(span.start + c);
        targets.push_back({x.names[static_cast<std::size_t>(col)], span.kind, {col}});
      }
    }
  }

  ImportanceReport report;
  report.target_class = options.target_class;
  report.repeats = options.repeats;
  report.grouped = options.group_by_kind;
  report.baseline = metric(x.values);

  Eigen::MatrixXd work = x.values;
  const auto n = static_cast<std::size_t>(x.values.rows());
  std::vector<Eigen::Index> perm(n);
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const auto& target = targets[t];
    std::vector<double> drops(options.repeats);
    for (std::size_t r = 0; r < options.repeats; ++r) {
      std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                        static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(r)};
      std::mt19937_64 rng(seq);
      std::iota(perm.begin(), perm.end(), Eigen::Index{0});
      std::shuffle(perm.begin(), perm.end(), rng);
      for (const auto col : target.columns) {
        for (std::size_t i = 0; i < n; ++i) work(static_cast<Eigen::Index>(i), col) = x.values(perm[i], col);
      }
      drops[r] = report.baseline - metric(work);
    }
    for (const auto col : target.columns) work.col(col) = x.values.col(col);
    const double mean = std::accumulate(drops.begin(), drops.end(), 0.0) / static_cast<double>(drops.size());
    double var = 0.0;
    for (double d : drops) var += (d - mean) * (d - mean);
    var /= static_cast<double>(drops.size());
    report.entries.push_back({target.name, target.kind, mean, std::sqrt(var)});
  }
  std::stable_sort(report.entries.begin(), report.entries.end(),
                   [](const ImportanceEntry& a, const ImportanceEntry& b) { return a.mean_drop > b.mean_drop; });
  return report;
}

void write_importance_csv(const ImportanceReport& report, const std::filesystem::path& path, std::size_t top_n) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "rank,name,kind,mean_drop,std_drop\n";
  const std::size_t limit = top_n == 0 ? report.entries.size() : std::min(top_n, report.entries.size());
  for (std::size_t i = 0; i < limit; ++i) {
    const auto& e = report.entries[i];
    std::string name = e.name;
    if (name.find_first_of(",\"\n") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : name) {
        if (c == '"') quoted += '"';
        quoted += c;
      }
      name = quoted + "\"";
    }
    out << fmt::format("{},{},{},{},{}\n", i + 1, name, to_string(e.kind), e.mean_drop, e.std_drop);
  }
}

std::string to_json_string(const ImportanceReport& report, std::size_t top_n) {
  nlohmann::json j;
  j["metric"] = report.target_class ? "one_vs_rest_f1" : "macro_f1";
  j["target_class"] = report.target_class ? nlohmann::json(*report.target_class) : nlohmann::json(nullptr);
  j["baseline"] = report.baseline;
  j["repeats"] = report.repeats;
  j["grouped"] = report.grouped;
  nlohmann::json entries = nlohmann::json::array();
  const std::size_t limit = top_n == 0 ? report.entries.size() : std::min(top_n, report.entries.size());
  for (std::size_t i = 0; i < limit; ++i) {
    const auto& e = report.entries[i];
    entries.push_back({{"rank", i + 1}, {"name", e.name}, {"kind", to_string(e.kind)},
                       {"mean_drop", e.mean_drop}, {"std_drop", e.std_drop}});
  }
  j["entries"] = entries;
  return j.dump(2);
}

}  // namespace ecotext
