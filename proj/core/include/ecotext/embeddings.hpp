#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "ecotext/textproc.hpp"

namespace ecotext {

// Token -> dense vector table. Rows are stored contiguously; lookups return
// views into the table.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  explicit EmbeddingStore(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool unit_norm() const noexcept { return unit_norm_; }

  // Returns false (and keeps the existing row) when the token is present.
  bool add(const std::string& token, std::span<const double> vector);

  // L2-normalizes every row; rows with zero norm are left untouched.
  void normalize();

  bool contains(const std::string& token) const { return index_.contains(token); }
  std::optional<std::size_t> index_of(const std::string& token) const;
  std::span<const double> row(std::size_t index) const;
  std::optional<std::span<const double>> lookup(const std::string& token) const;
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  void save(const std::filesystem::path& path) const;

 private:
  std::size_t dim_ = 0;
  bool unit_norm_ = false;
  std::vector<std::string> tokens_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Externally computed document vectors keyed by document id.
class DocVectorTable {
 public:
  DocVectorTable() = default;
  explicit DocVectorTable(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return table_.size(); }
  void add(const std::string& id, std::vector<double> vector);
  bool contains(const std::string& id) const { return table_.contains(id); }
  const std::vector<double>& at(const std::string& id) const;

  // Throws ValidationError listing every id without a vector.
  void require_ids(const std::vector<std::string>& ids) const;

  void save(const std::filesystem::path& path) const;

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::vector<double>> table_;
  std::vector<std::string> order_;
};

// Text word2vec format, optional "count dim" header. Vectors are normalized
// on load; duplicate tokens keep their first occurrence.
EmbeddingStore load_embeddings(const std::filesystem::path& path);

// TSV: id<TAB>v1,...,vd per line; dim inferred from the first row.
DocVectorTable load_doc_vectors(const std::filesystem::path& path);

// a.b / (|a||b|), clamped to [-1, 1]. Throws on length mismatch or zero vector.
double cosine(std::span<const double> a, std::span<const double> b);

struct DocVector {
  Eigen::VectorXd values;
  std::size_t matched = 0;
  bool all_oov() const noexcept { return matched == 0; }
};

// Mean of in-vocabulary token vectors; zero vector when nothing matched.
DocVector doc_vector(const EmbeddingStore& store, const TokenSeq& tokens);

}  // namespace ecotext
