#include "ecotext/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <unordered_set>

#include "ecotext/error.hpp"
#include "json.hpp"

namespace ecotext {
namespace {

using json = nlohmann::json;

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

void validate_documents(const std::vector<Document>& docs) {
  std::unordered_set<std::string> seen;
  seen.reserve(docs.size());
  for (const auto& doc : docs) {
    if (doc.id.empty()) throw ValidationError("document with empty id");
    if (!seen.insert(doc.id).second) throw ValidationError("duplicate document id '" + doc.id + "'");
    if (is_blank(doc.text)) throw ValidationError("document '" + doc.id + "' has blank text");
    if (doc.label.empty()) throw ValidationError("document '" + doc.id + "' has empty label");
  }
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<Document> read_jsonl(const std::filesystem::path& path, std::istream& in) {
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(std::move(line));
    if (is_blank(line)) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(path.string(), line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!record.is_object()) throw ParseError(path.string(), line_no, "record is not an object");
    Document doc;
    for (const char* field : {"id", "text", "label"}) {
      auto it = record.find(field);
      if (it == record.end()) {
        throw ParseError(path.string(), line_no, std::string("missing field \"") + field + "\"");
      }
      std::string value;
      if (it->is_string()) {
        value = it->get<std::string>();
      } else if (it->is_number_integer() && std::string(field) != "text") {
        value = it->dump();
      } else {
        throw ParseError(path.string(), line_no, std::string("field \"") + field + "\" is not a string");
      }
      if (std::string(field) == "id") doc.id = std::move(value);
      else if (std::string(field) == "text") doc.text = std::move(value);
      else doc.label = std::move(value);
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<Document> read_tsv(const std::filesystem::path& path, std::istream& in) {
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(path.string(), 1, "empty file, expected header");
  ++line_no;
  if (strip_cr(line) != "id\ttext\tlabel") {
    throw ParseError(path.string(), line_no, "header must be id<TAB>text<TAB>label");
  }
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(std::move(line));
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 3) {
      throw ParseError(path.string(), line_no,
                       "expected 3 tab-separated fields, got " + std::to_string(fields.size()) +
                           " (tabs inside text are not allowed)");
    }
    docs.push_back({std::move(fields[0]), std::move(fields[1]), std::move(fields[2])});
  }
  return docs;
}

}  // namespace

CorpusFormat parse_corpus_format(const std::string& name) {
  if (name == "jsonl") return CorpusFormat::jsonl;
  if (name == "tsv") return CorpusFormat::tsv;
  throw ValidationError("unknown corpus format '" + name + "' (expected jsonl or tsv)");
}

LabeledCorpus::LabeledCorpus(std::vector<Document> documents) : documents_(std::move(documents)) {
  validate_documents(documents_);
  std::vector<std::string> classes;
  for (const auto& doc : documents_) classes.push_back(doc.label);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  classes_ = std::move(classes);
}

LabeledCorpus::LabeledCorpus(std::vector<Document> documents, std::vector<std::string> classes)
    : documents_(std::move(documents)), classes_(std::move(classes)) {
  validate_documents(documents_);
  std::sort(classes_.begin(), classes_.end());
  classes_.erase(std::unique(classes_.begin(), classes_.end()), classes_.end());
  for (const auto& doc : documents_) {
    if (!std::binary_search(classes_.begin(), classes_.end(), doc.label)) {
      throw ValidationError("label '" + doc.label + "' of document '" + doc.id +
                            "' is not in the class list");
    }
  }
}

std::vector<std::string> LabeledCorpus::labels() const {
  std::vector<std::string> out;
  out.reserve(documents_.size());
  for (const auto& doc : documents_) out.push_back(doc.label);
  return out;
}

std::vector<std::pair<std::string, std::size_t>> LabeledCorpus::class_distribution() const {
  std::map<std::string, std::size_t> counts;
  for (const auto& c : classes_) counts[c] = 0;
  for (const auto& doc : documents_) ++counts[doc.label];
  return {counts.begin(), counts.end()};
}

LabeledCorpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file " + path.string());
  auto docs = format == CorpusFormat::jsonl ? read_jsonl(path, in) : read_tsv(path, in);
  return LabeledCorpus(std::move(docs));
}

void save_corpus(const LabeledCorpus& corpus, const std::filesystem::path& path,
                 CorpusFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write corpus file " + path.string());
  if (format == CorpusFormat::jsonl) {
    for (const auto& doc : corpus.documents()) {
      json record{{"id", doc.id}, {"text", doc.text}, {"label", doc.label}};
      out << record.dump() << '\n';
    }
  } else {
    out << "id\ttext\tlabel\n";
    for (const auto& doc : corpus.documents()) {
      for (const auto* field : {&doc.id, &doc.text, &doc.label}) {
        if (field->find_first_of("\t\n") != std::string::npos) {
          throw ValidationError("document '" + doc.id + "' contains a tab or newline; use jsonl");
        }
      }
      out << doc.id << '\t' << doc.text << '\t' << doc.label << '\n';
    }
  }
}

SplitPair split(const LabeledCorpus& corpus, double test_fraction, std::uint64_t seed,
                bool stratified) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ValidationError("test_fraction must lie in (0, 1)");
  }
  const std::size_t n = corpus.size();
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));

  std::mt19937_64 rng(seed);
  std::vector<bool> in_test(n, false);

  if (stratified) {
    const auto& classes = corpus.classes();
    std::vector<std::vector<std::size_t>> members(classes.size());
    for (std::size_t i = 0; i < n; ++i) {
      const auto it = std::lower_bound(classes.begin(), classes.end(), corpus[i].label);
      members[static_cast<std::size_t>(it - classes.begin())].push_back(i);
    }
    for (std::size_t c = 0; c < classes.size(); ++c) {
      if (members[c].size() < 2) {
        throw ValidationError("stratified split needs >= 2 documents for class '" + classes[c] + "'");
      }
    }
    // Largest-remainder allocation of n_test across classes.
    std::vector<std::size_t> quota(classes.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t allocated = 0;
    for (std::size_t c = 0; c < classes.size(); ++c) {
      const double exact = test_fraction * static_cast<double>(members[c].size());
      quota[c] = static_cast<std::size_t>(std::floor(exact));
      allocated += quota[c];
      remainders.emplace_back(exact - std::floor(exact), c);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; allocated < n_test && r < remainders.size(); ++r, ++allocated) {
      ++quota[remainders[r].second];
    }
    for (std::size_t c = 0; c < classes.size(); ++c) {
      std::shuffle(members[c].begin(), members[c].end(), rng);
      for (std::size_t j = 0; j < quota[c]; ++j) in_test[members[c][j]] = true;
    }
  } else {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t j = 0; j < n_test; ++j) in_test[order[j]] = true;
  }

  std::vector<Document> train;
  std::vector<Document> test;
  for (std::size_t i = 0; i < n; ++i) (in_test[i] ? test : train).push_back(corpus[i]);
  return SplitPair{LabeledCorpus(std::move(train), corpus.classes()),
                   LabeledCorpus(std::move(test), corpus.classes()), seed, test_fraction, stratified};
}

}  // namespace ecotext
