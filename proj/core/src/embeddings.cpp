#include "ecotext/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "ecotext/error.hpp"

namespace ecotext {
namespace {

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= line.size()) {
    auto end = line.find(sep, start);
    if (end == std::string_view::npos) end = line.size();
    if (end > start || sep != ' ') out.push_back(line.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

bool parse_double(std::string_view text, double& out) {
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

bool parse_size(std::string_view text, std::size_t& out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

bool EmbeddingStore::add(const std::string& token, std::span<const double> vector) {
  if (vector.size() != dim_) {
    throw ValidationError("vector for '" + token + "' has length " + std::to_string(vector.size()) +
                          ", expected " + std::to_string(dim_));
  }
  if (index_.contains(token)) return false;
  index_.emplace(token, tokens_.size());
  tokens_.push_back(token);
  data_.insert(data_.end(), vector.begin(), vector.end());
  unit_norm_ = false;
  return true;
}

void EmbeddingStore::normalize() {
  for (std::size_t r = 0; r < tokens_.size(); ++r) {
    double* row = data_.data() + r * dim_;
    double norm = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) norm += row[j] * row[j];
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    for (std::size_t j = 0; j < dim_; ++j) row[j] /= norm;
  }
  unit_norm_ = true;
}

std::optional<std::size_t> EmbeddingStore::index_of(const std::string& token) const {
  const auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const double> EmbeddingStore::row(std::size_t index) const {
  return {data_.data() + index * dim_, dim_};
}

std::optional<std::span<const double>> EmbeddingStore::lookup(const std::string& token) const {
  const auto idx = index_of(token);
  if (!idx) return std::nullopt;
  return row(*idx);
}

void EmbeddingStore::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write embeddings " + path.string());
  out << tokens_.size() << ' ' << dim_ << '\n';
  for (std::size_t r = 0; r < tokens_.size(); ++r) {
    out << tokens_[r];
    for (double v : row(r)) out << ' ' << format_double(v);
    out << '\n';
  }
}

EmbeddingStore load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embeddings " + path.string());
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  std::size_t duplicates = 0;
  std::size_t zero_rows = 0;
  EmbeddingStore store;
  std::vector<double> values;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_fields(line, ' ');
    if (fields.empty()) continue;
    std::size_t count = 0;
    std::size_t header_dim = 0;
    if (line_no == 1 && fields.size() == 2 && parse_size(fields[0], count) &&
        parse_size(fields[1], header_dim)) {
      dim = header_dim;
      store = EmbeddingStore(dim);
      continue;
    }
    if (fields.size() < 2) throw ParseError(path.string(), line_no, "expected token and values");
    if (dim == 0) {
      dim = fields.size() - 1;
      store = EmbeddingStore(dim);
    }
    if (fields.size() - 1 != dim) {
      throw ParseError(path.string(), line_no,
                       "dimension mismatch: " + std::to_string(fields.size() - 1) +
                           " values, expected " + std::to_string(dim));
    }
    values.resize(dim);
    double norm = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      if (!parse_double(fields[j + 1], values[j])) {
        throw ParseError(path.string(), line_no, "invalid number '" + std::string(fields[j + 1]) + "'");
      }
      norm += values[j] * values[j];
    }
    if (norm == 0.0) {
      ++zero_rows;
      continue;
    }
    if (!store.add(std::string(fields[0]), values)) ++duplicates;
  }
  if (dim == 0) throw ParseError(path.string(), line_no, "no vectors found");
  if (duplicates > 0) spdlog::warn("{}: {} duplicate tokens ignored", path.string(), duplicates);
  if (zero_rows > 0) spdlog::warn("{}: {} all-zero vectors skipped", path.string(), zero_rows);
  store.normalize();
  return store;
}

void DocVectorTable::add(const std::string& id, std::vector<double> vector) {
  if (dim_ == 0) dim_ = vector.size();
  if (vector.size() != dim_) {
    throw ValidationError("document vector for '" + id + "' has length " +
                          std::to_string(vector.size()) + ", expected " + std::to_string(dim_));
  }
  if (table_.emplace(id, std::move(vector)).second) order_.push_back(id);
}

const std::vector<double>& DocVectorTable::at(const std::string& id) const {
  const auto it = table_.find(id);
  if (it == table_.end()) throw ValidationError("no document vector for id '" + id + "'");
  return it->second;
}

void DocVectorTable::require_ids(const std::vector<std::string>& ids) const {
  std::vector<std::string> missing;
  for (const auto& id : ids) {
    if (!table_.contains(id)) missing.push_back(id);
  }
  if (missing.empty()) return;
  std::string msg = "document vectors missing for " + std::to_string(missing.size()) + " ids:";
  const std::size_t shown = std::min<std::size_t>(missing.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) msg += " " + missing[i];
  if (shown < missing.size()) msg += " ...";
  throw ValidationError(msg);
}

void DocVectorTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write document vectors " + path.string());
  for (const auto& id : order_) {
    out << id << '\t';
    const auto& v = table_.at(id);
    for (std::size_t j = 0; j < v.size(); ++j) out << (j ? "," : "") << format_double(v[j]);
    out << '\n';
  }
}

DocVectorTable load_doc_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open document vectors " + path.string());
  DocVectorTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(path.string(), line_no, "expected id<TAB>vector");
    const std::string id = line.substr(0, tab);
    const auto fields = split_fields(std::string_view(line).substr(tab + 1), ',');
    std::vector<double> v(fields.size());
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (!parse_double(fields[j], v[j])) {
        throw ParseError(path.string(), line_no, "invalid number '" + std::string(fields[j]) + "'");
      }
    }
    if (table.dim() != 0 && v.size() != table.dim()) {
      throw ParseError(path.string(), line_no,
                       "dimension mismatch: " + std::to_string(v.size()) + " values, expected " +
                           std::to_string(table.dim()));
    }
    if (table.contains(id)) throw ParseError(path.string(), line_no, "duplicate id '" + id + "'");
    table.add(id, std::move(v));
  }
  if (table.size() == 0) throw ParseError(path.string(), line_no, "no document vectors found");
  return table;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("cosine: length mismatch");
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw ValidationError("cosine: zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

DocVector doc_vector(const EmbeddingStore& store, const TokenSeq& tokens) {
  DocVector out{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(store.dim())), 0};
  for (const auto& token : tokens) {
    const auto v = store.lookup(token);
    if (!v) continue;
    out.values += Eigen::Map<const Eigen::VectorXd>(v->data(), static_cast<Eigen::Index>(v->size()));
    ++out.matched;
  }
  if (out.matched > 0) out.values /= static_cast<double>(out.matched);
  return out;
}

}  // namespace ecotext
