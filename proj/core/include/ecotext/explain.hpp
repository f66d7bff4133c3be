#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecotext/classifiers.hpp"
#include "ecotext/features.hpp"

namespace ecotext {

struct ImportanceOptions {
  std::size_t repeats = 10;
  std::uint64_t seed = 0;
  // When set, the metric is the one-vs-rest F1 of this class instead of
  // macro F1.
  std::optional<std::string> target_class;
  // Permute every column of a span kind together instead of one column.
  bool group_by_kind = false;
};

struct ImportanceEntry {
  std::string name;
  FeatureKind kind = FeatureKind::semantic;
  double mean_drop = 0.0;
  double std_drop = 0.0;
};

struct ImportanceReport {
  std::vector<ImportanceEntry> entries;  // descending mean_drop
  std::optional<std::string> target_class;
  double baseline = 0.0;
  std::size_t repeats = 0;
  bool grouped = false;
};

// Metric drop when one feature (or one feature kind) is shuffled across rows.
// Permutations are seeded per (feature, repeat) so reports are reproducible.
ImportanceReport permutation_importance(const TrainedClassifier& model, const FeatureMatrix& x,
                                        std::span<const std::string> y,
                                        const ImportanceOptions& options);

// rank,name,kind,mean_drop,std_drop; top_n = 0 writes everything.
void write_importance_csv(const ImportanceReport& report, const std::filesystem::path& path,
                          std::size_t top_n = 20);
std::string to_json_string(const ImportanceReport& report, std::size_t top_n = 20);

}  // namespace ecotext
