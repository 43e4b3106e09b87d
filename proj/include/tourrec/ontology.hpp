#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tourrec/json.hpp"

namespace tourrec {

using ItemId = std::int64_t;

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  bool operator==(const GeoPoint&) const = default;
};

struct ItemRecord {
  ItemId id = 0;
  std::string name;
  std::string description;
  std::vector<std::string> keywords;
  /// Explicit class labels. Items that carry them are linked with score 1.0.
  std::vector<std::string> categories;
  std::optional<GeoPoint> location;
  std::optional<std::string> partner_id;

  bool operator==(const ItemRecord&) const = default;
};

json item_to_json(const ItemRecord& item);
/// Throws InvariantError on a missing id or empty name.
ItemRecord item_from_json(const json& value);

/// One JSON item per line; blank lines skipped. Errors carry the line number.
std::vector<ItemRecord> items_from_jsonl(std::string_view text);
std::vector<ItemRecord> load_items_file(const std::string& path);

struct ItemLink {
  ItemId item = 0;
  std::string ll_class;
  double score = 1.0;

  bool operator==(const ItemLink&) const = default;
};

inline constexpr double kDefaultBinningThreshold = 0.55;

/// Two-level class hierarchy: high-level (HL) classes have no parent, low-level
/// (LL) classes have at least one HL parent and are the ones items link to.
/// The same label may exist once on each level.
class OntologyGraph {
 public:
  void add_hl_class(const std::string& label);
  /// Adds the LL class if needed and the HL -> LL edge. The HL class must exist.
  void add_ll_class(const std::string& label, const std::string& hl_parent);

  /// Registers a label that resolves to an LL class (used for flattened
  /// deeper taxonomy levels).
  void add_alias(const std::string& alias, const std::string& ll_class);
  /// Resolves an LL label or alias to the LL classes it stands for.
  std::vector<std::string> resolve(const std::string& label) const;

  /// Adds an item and links its explicit categories with score 1.0.
  /// Throws ConflictError on a duplicate id, InvariantError on an empty name
  /// or an unknown category.
  void add_item(const ItemRecord& item);
  /// Adds or replaces an item -> LL link. Score must lie in [0, 1].
  void link(ItemId item, const std::string& ll_class, double score);

  bool has_hl(const std::string& label) const { return hl_.contains(label); }
  bool has_ll(const std::string& label) const { return ll_.contains(label); }
  bool has_item(ItemId id) const { return items_.contains(id); }

  /// Label-sorted.
  std::vector<std::string> hl_classes() const { return {hl_.begin(), hl_.end()}; }
  std::vector<std::string> ll_classes() const { return {ll_.begin(), ll_.end()}; }
  const std::set<std::pair<std::string, std::string>>& hl_ll_edges() const { return edges_; }
  std::vector<std::string> hl_parents(const std::string& ll_class) const;

  /// Items in insertion order.
  const std::vector<ItemId>& item_order() const { return item_order_; }
  const ItemRecord& item(ItemId id) const;
  std::size_t item_count() const { return item_order_.size(); }

  const std::map<std::pair<ItemId, std::string>, double>& links() const { return links_; }
  /// LL classes linked to the item with score >= threshold, label-sorted.
  std::vector<std::string> linked_classes(ItemId item, double threshold = kDefaultBinningThreshold) const;
  /// HL classes reachable from the item's LL links, label-sorted.
  std::vector<std::string> linked_hl_classes(ItemId item,
                                             double threshold = kDefaultBinningThreshold) const;

  /// Throws InvariantError describing the first violated invariant.
  void validate() const;

  bool operator==(const OntologyGraph&) const = default;

 private:
  std::set<std::string> hl_;
  std::set<std::string> ll_;
  std::set<std::pair<std::string, std::string>> edges_;
  std::map<std::string, std::set<std::string>> aliases_;
  std::map<ItemId, ItemRecord> items_;
  std::vector<ItemId> item_order_;
  std::map<std::pair<ItemId, std::string>, double> links_;
};

/// Parses the line-oriented ontology document:
///   C<TAB>parent<TAB>child   class edge; parent "ROOT" declares an HL class
///   I<TAB>{json}             item record
/// Blank lines and lines starting with '#' are ignored. Classes below the LL
/// level are flattened onto their LL ancestor.
OntologyGraph load_ontology(std::string_view document);
OntologyGraph load_ontology_file(const std::string& path);

/// Inverse of load_ontology for graphs without aliases: edges, then items,
/// then explicit links of items that carry no categories.
std::string write_ontology(const OntologyGraph& graph);

/// Dense row-major 0/1 matrix.
class BinaryMatrix {
 public:
  BinaryMatrix() = default;
  BinaryMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::uint8_t at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  void set(std::size_t r, std::size_t c, std::uint8_t v = 1) { data_[r * cols_ + c] = v; }

  bool operator==(const BinaryMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Binary content matrices linking HL -> LL and LL -> items. Rows are ordered
/// by label; item columns follow graph insertion order, so adding an item only
/// appends a column.
struct ContentMatrices {
  std::vector<std::string> hl_labels;
  std::vector<std::string> ll_labels;
  std::vector<ItemId> item_ids;
  BinaryMatrix hl_ll;
  BinaryMatrix ll_item;

  std::optional<std::size_t> item_column(ItemId id) const;
  std::optional<std::size_t> hl_index(const std::string& label) const;
  std::optional<std::size_t> ll_index(const std::string& label) const;

  bool operator==(const ContentMatrices&) const = default;
};

ContentMatrices content_matrices(const OntologyGraph& graph,
                                 double link_threshold = kDefaultBinningThreshold);

}  // namespace tourrec
