#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tourrec/ontology.hpp"

namespace tourrec {

/// Pretrained token vectors plus the stopword list used when tokenizing.
class VectorTable {
 public:
  explicit VectorTable(std::size_t dimension = 1);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return entries_.size(); }

  /// Token is lowercased. Throws DimensionError on a length mismatch.
  void add(std::string token, std::vector<double> vector);
  const std::vector<double>* find(const std::string& token) const;

  void add_stopword(std::string token);
  bool is_stopword(const std::string& token) const { return stopwords_.contains(token); }

  /// Every vector multiplied by factor.
  VectorTable scaled(double factor) const;

 private:
  std::size_t dimension_;
  std::unordered_map<std::string, std::vector<double>> entries_;
  std::unordered_set<std::string> stopwords_;
};

/// word2vec text format: "<count> <dimension>" then "token v1 ... vd".
VectorTable load_vector_table(std::string_view text);
VectorTable load_vector_table_file(const std::string& path);
/// One token per line; blank lines and '#' comments skipped.
void load_stopwords(VectorTable& table, std::string_view text);
void load_stopwords_file(VectorTable& table, const std::string& path);

struct BinningConfig {
  double threshold = kDefaultBinningThreshold;

  void validate() const;
};

/// Lowercase alphanumeric runs, stopwords dropped, order kept.
std::vector<std::string> tokenize_normalize(std::string_view text, const VectorTable& table);

struct Embedding {
  std::vector<double> vector;
  /// True when no token was in the vocabulary (vector is all zeros).
  bool oov = true;
};

/// Mean of the in-vocabulary token vectors.
Embedding embed(const std::vector<std::string>& tokens, const VectorTable& table);

/// Cosine similarity; 0 when either vector is zero.
double cosine(const std::vector<double>& a, const std::vector<double>& b);

struct BinResult {
  /// Label-sorted links with score >= threshold.
  std::vector<ItemLink> links;
  /// Cosine to every LL class, label-sorted.
  std::vector<std::pair<std::string, double>> scores;
  bool oov = false;
  std::string diagnostic;
};

/// Links the item to every LL class whose label embedding has cosine >= threshold
/// with the pooled description and keyword tokens.
BinResult bin_item(const ItemRecord& item, const OntologyGraph& graph, const VectorTable& table,
                   const BinningConfig& cfg = {});

/// Bins every item without explicit categories and records the links (scores
/// clamped into [0,1]). Returns per-item results in graph order.
std::vector<std::pair<ItemId, BinResult>> bin_unclassified(OntologyGraph& graph, const VectorTable& table,
                                                          const BinningConfig& cfg = {});

}  // namespace tourrec
