#include "tourrec/binning.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "tourrec/error.hpp"

namespace tourrec {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string lowercase(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

VectorTable::VectorTable(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw InvariantError("vector dimension must be at least 1");
}

void VectorTable::add(std::string token, std::vector<double> vector) {
  if (vector.size() != dimension_) {
    throw DimensionError("vector for '" + token + "' has " + std::to_string(vector.size()) +
                         " components, expected " + std::to_string(dimension_));
  }
  entries_[lowercase(std::move(token))] = std::move(vector);
}

const std::vector<double>* VectorTable::find(const std::string& token) const {
  auto it = entries_.find(token);
  return it == entries_.end() ? nullptr : &it->second;
}

void VectorTable::add_stopword(std::string token) { stopwords_.insert(lowercase(std::move(token))); }

VectorTable VectorTable::scaled(double factor) const {
  VectorTable out = *this;
  for (auto& [token, v] : out.entries_) {
    for (double& x : v) x *= factor;
  }
  return out;
}

VectorTable load_vector_table(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError("empty vector file", 1);
  std::size_t count = 0;
  std::size_t dimension = 0;
  {
    std::istringstream header(line);
    if (!(header >> count >> dimension) || dimension == 0) {
      throw ParseError("header must be '<count> <dimension>'", line_no);
    }
  }
  VectorTable table(dimension);
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    std::string token;
    row >> token;
    std::vector<double> v;
    v.reserve(dimension);
    std::string field;
    while (row >> field) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(field, &used));
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw ParseError("bad number '" + field + "'", line_no, v.size() + 2);
      }
    }
    if (v.size() != dimension) {
      throw ParseError("expected " + std::to_string(dimension) + " components, got " + std::to_string(v.size()),
                       line_no);
    }
    table.add(token, std::move(v));
  }
  if (table.size() != count) {
    throw ParseError("header declares " + std::to_string(count) + " vectors, found " + std::to_string(table.size()),
                     1);
  }
  return table;
}

VectorTable load_vector_table_file(const std::string& path) {
  try {
    return load_vector_table(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

void load_stopwords(VectorTable& table, std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream words(line);
    std::string word;
    if (!(words >> word) || word.front() == '#') continue;
    table.add_stopword(word);
  }
}

void load_stopwords_file(VectorTable& table, const std::string& path) { load_stopwords(table, read_file(path)); }

void BinningConfig::validate() const {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw InvariantError("binning threshold must lie in (0, 1]");
}

std::vector<std::string> tokenize_normalize(std::string_view text, const VectorTable& table) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty() && !table.is_stopword(current)) tokens.push_back(current);
    current.clear();
  };
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      current.push_back(static_cast<char>(std::tolower(u)));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

Embedding embed(const std::vector<std::string>& tokens, const VectorTable& table) {
  Embedding out{std::vector<double>(table.dimension(), 0.0), true};
  std::size_t hits = 0;
  for (const auto& token : tokens) {
    const auto* v = table.find(token);
    if (!v) continue;
    for (std::size_t i = 0; i < v->size(); ++i) out.vector[i] += (*v)[i];
    ++hits;
  }
  if (hits > 0) {
    for (double& x : out.vector) x /= static_cast<double>(hits);
    out.oov = false;
  }
  return out;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DimensionError("cosine of vectors with different lengths");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

BinResult bin_item(const ItemRecord& item, const OntologyGraph& graph, const VectorTable& table,
                   const BinningConfig& cfg) {
  cfg.validate();
  BinResult result;
  // Description and keyword tokens, deduplicated in first-seen order.
  std::vector<std::string> tokens;
  std::set<std::string> seen;
  auto take = [&](std::string_view text) {
    for (auto& t : tokenize_normalize(text, table)) {
      if (seen.insert(t).second) tokens.push_back(std::move(t));
    }
  };
  take(item.description);
  for (const auto& k : item.keywords) take(k);
  if (item.description.empty() && item.keywords.empty()) take(item.name);

  const Embedding pooled = embed(tokens, table);
  if (pooled.oov) {
    result.oov = true;
    result.diagnostic = "item " + std::to_string(item.id) + " has no in-vocabulary tokens";
    return result;
  }
  for (const auto& label : graph.ll_classes()) {
    const Embedding label_vec = embed(tokenize_normalize(label, table), table);
    const double score = cosine(pooled.vector, label_vec.vector);
    result.scores.emplace_back(label, score);
    if (score >= cfg.threshold) result.links.push_back({item.id, label, std::min(score, 1.0)});
  }
  return result;
}

std::vector<std::pair<ItemId, BinResult>> bin_unclassified(OntologyGraph& graph, const VectorTable& table,
                                                          const BinningConfig& cfg) {
  std::vector<std::pair<ItemId, BinResult>> out;
  const std::vector<ItemId> order = graph.item_order();
  for (ItemId id : order) {
    const ItemRecord& item = graph.item(id);
    if (!item.categories.empty()) continue;
    BinResult r = bin_item(item, graph, table, cfg);
    for (const auto& link : r.links) graph.link(link.item, link.ll_class, link.score);
    out.emplace_back(id, std::move(r));
  }
  return out;
}

}  // namespace tourrec
