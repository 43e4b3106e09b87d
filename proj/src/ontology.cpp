#include "tourrec/ontology.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "tourrec/error.hpp"

namespace tourrec {

namespace {

constexpr std::string_view kRoot = "ROOT";

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

json item_to_json(const ItemRecord& item) {
  json out = {{"id", item.id}, {"name", item.name}};
  if (!item.description.empty()) out["description"] = item.description;
  if (!item.keywords.empty()) out["keywords"] = item.keywords;
  if (!item.categories.empty()) out["categories"] = item.categories;
  if (item.location) out["location"] = {{"lat", item.location->lat}, {"lon", item.location->lon}};
  if (item.partner_id) out["partner_id"] = *item.partner_id;
  return out;
}

ItemRecord item_from_json(const json& value) {
  if (!value.is_object()) throw InvariantError("item must be a JSON object");
  if (!value.contains("id") || !value["id"].is_number_integer()) {
    throw InvariantError("item requires an integer 'id'");
  }
  ItemRecord item;
  item.id = value["id"].get<ItemId>();
  item.name = value.value("name", std::string{});
  if (item.name.empty()) throw InvariantError("item " + std::to_string(item.id) + " has an empty name");
  item.description = value.value("description", std::string{});
  if (value.contains("keywords")) item.keywords = value["keywords"].get<std::vector<std::string>>();
  if (value.contains("categories")) item.categories = value["categories"].get<std::vector<std::string>>();
  if (value.contains("location") && !value["location"].is_null()) {
    const auto& loc = value["location"];
    if (loc.is_array() && loc.size() == 2) {
      item.location = GeoPoint{loc[0].get<double>(), loc[1].get<double>()};
    } else {
      item.location = GeoPoint{loc.at("lat").get<double>(), loc.at("lon").get<double>()};
    }
  }
  if (value.contains("partner_id") && !value["partner_id"].is_null()) {
    const auto& pid = value["partner_id"];
    item.partner_id = pid.is_string() ? pid.get<std::string>() : pid.dump();
  }
  return item;
}

std::vector<ItemRecord> items_from_jsonl(std::string_view text) {
  std::vector<ItemRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    ++line_no;
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.push_back(item_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(e.what(), line_no);
    } catch (const InvariantError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return out;
}

std::vector<ItemRecord> load_items_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return items_from_jsonl(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

void OntologyGraph::add_hl_class(const std::string& label) {
  if (label.empty()) throw InvariantError("empty class label");
  hl_.insert(label);
}

void OntologyGraph::add_ll_class(const std::string& label, const std::string& hl_parent) {
  if (label.empty()) throw InvariantError("empty class label");
  if (!hl_.contains(hl_parent)) {
    throw InvariantError("unknown high-level class '" + hl_parent + "' for '" + label + "'");
  }
  ll_.insert(label);
  edges_.emplace(hl_parent, label);
}

void OntologyGraph::add_alias(const std::string& alias, const std::string& ll_class) {
  if (!ll_.contains(ll_class)) throw InvariantError("alias target '" + ll_class + "' is not a low-level class");
  aliases_[alias].insert(ll_class);
}

std::vector<std::string> OntologyGraph::resolve(const std::string& label) const {
  if (ll_.contains(label)) return {label};
  if (auto it = aliases_.find(label); it != aliases_.end()) return {it->second.begin(), it->second.end()};
  return {};
}

void OntologyGraph::add_item(const ItemRecord& item) {
  if (items_.contains(item.id)) throw ConflictError("duplicate item id " + std::to_string(item.id));
  if (item.name.empty()) throw InvariantError("item " + std::to_string(item.id) + " has an empty name");
  std::vector<std::string> targets;
  for (const auto& category : item.categories) {
    auto resolved = resolve(category);
    if (resolved.empty()) {
      throw InvariantError("item " + std::to_string(item.id) + " references unknown class '" + category + "'");
    }
    targets.insert(targets.end(), resolved.begin(), resolved.end());
  }
  items_.emplace(item.id, item);
  item_order_.push_back(item.id);
  for (const auto& target : targets) links_[{item.id, target}] = 1.0;
}

void OntologyGraph::link(ItemId item, const std::string& ll_class, double score) {
  if (!items_.contains(item)) throw NotFoundError("unknown item " + std::to_string(item));
  if (!ll_.contains(ll_class)) throw InvariantError("unknown low-level class '" + ll_class + "'");
  if (!(score >= 0.0 && score <= 1.0)) throw InvariantError("link score outside [0,1]");
  links_[{item, ll_class}] = score;
}

std::vector<std::string> OntologyGraph::hl_parents(const std::string& ll_class) const {
  std::vector<std::string> parents;
  for (const auto& [hl, ll] : edges_) {
    if (ll == ll_class) parents.push_back(hl);
  }
  return parents;
}

const ItemRecord& OntologyGraph::item(ItemId id) const {
  auto it = items_.find(id);
  if (it == items_.end()) throw NotFoundError("unknown item " + std::to_string(id));
  return it->second;
}

std::vector<std::string> OntologyGraph::linked_classes(ItemId item, double threshold) const {
  std::vector<std::string> out;
  for (auto it = links_.lower_bound({item, std::string{}}); it != links_.end() && it->first.first == item; ++it) {
    if (it->second >= threshold) out.push_back(it->first.second);
  }
  return out;
}

std::vector<std::string> OntologyGraph::linked_hl_classes(ItemId item, double threshold) const {
  std::set<std::string> hl;
  for (const auto& ll : linked_classes(item, threshold)) {
    for (auto& parent : hl_parents(ll)) hl.insert(std::move(parent));
  }
  return {hl.begin(), hl.end()};
}

void OntologyGraph::validate() const {
  for (const auto& ll : ll_) {
    if (hl_parents(ll).empty()) throw InvariantError("orphan low-level class '" + ll + "'");
  }
  for (const auto& [hl, ll] : edges_) {
    if (!hl_.contains(hl) || !ll_.contains(ll)) throw InvariantError("dangling edge " + hl + " -> " + ll);
  }
  for (const auto& [key, score] : links_) {
    if (!items_.contains(key.first)) throw InvariantError("link to unknown item " + std::to_string(key.first));
    if (!ll_.contains(key.second)) throw InvariantError("link to unknown class '" + key.second + "'");
    if (!(score >= 0.0 && score <= 1.0)) throw InvariantError("link score outside [0,1]");
  }
  for (const auto& [id, item] : items_) {
    if (item.name.empty()) throw InvariantError("item " + std::to_string(id) + " has an empty name");
  }
}

OntologyGraph load_ontology(std::string_view document) {
  struct Edge {
    std::string parent;
    std::string child;
    std::size_t line;
  };
  struct ItemLine {
    json value;
    std::size_t line;
  };
  struct LinkLine {
    ItemId item;
    std::string ll_class;
    double score;
    std::size_t line;
  };

  std::vector<Edge> edges;
  std::vector<ItemLine> items;
  std::vector<LinkLine> links;

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= document.size()) {
    std::size_t end = document.find('\n', start);
    if (end == std::string_view::npos) end = document.size();
    std::string_view line = document.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || line.front() == '#') {
      if (end == document.size()) break;
      continue;
    }

    const auto fields = split_tabs(line);
    const std::string_view tag = fields[0];
    if (tag == "C") {
      if (fields.size() != 3) throw ParseError("class line needs 'C<TAB>parent<TAB>child'", line_no);
      Edge edge{std::string(trim(fields[1])), std::string(trim(fields[2])), line_no};
      if (edge.parent.empty() || edge.child.empty()) throw ParseError("empty class label", line_no);
      if (edge.child == kRoot) throw ParseError("ROOT cannot be a child", line_no);
      edges.push_back(std::move(edge));
    } else if (tag == "I") {
      const std::size_t tab = line.find('\t');
      if (tab == std::string_view::npos) throw ParseError("item line needs 'I<TAB>{json}'", line_no);
      try {
        items.push_back({json::parse(line.substr(tab + 1)), line_no});
      } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid item JSON: ") + e.what(), line_no);
      }
    } else if (tag == "L") {
      if (fields.size() != 4) throw ParseError("link line needs 'L<TAB>item<TAB>class<TAB>score'", line_no);
      try {
        links.push_back({std::stoll(std::string(fields[1])), std::string(fields[2]),
                         std::stod(std::string(fields[3])), line_no});
      } catch (const std::exception&) {
        throw ParseError("malformed link line", line_no);
      }
    } else {
      throw ParseError("unknown record tag '" + std::string(tag) + "'", line_no, 1);
    }
    if (end == document.size()) break;
  }

  OntologyGraph graph;
  std::vector<const Edge*> pending;
  for (const auto& edge : edges) {
    if (edge.parent == kRoot) {
      graph.add_hl_class(edge.child);
    }
  }
  for (const auto& edge : edges) {
    if (edge.parent == kRoot) continue;
    if (graph.has_hl(edge.parent)) {
      graph.add_ll_class(edge.child, edge.parent);
    } else {
      pending.push_back(&edge);
    }
  }
  // Deeper levels collapse onto their LL ancestors; resolve until fixpoint.
  bool progress = true;
  while (!pending.empty() && progress) {
    progress = false;
    std::vector<const Edge*> still;
    for (const Edge* edge : pending) {
      const auto targets = graph.resolve(edge->parent);
      if (targets.empty()) {
        still.push_back(edge);
        continue;
      }
      for (const auto& target : targets) graph.add_alias(edge->child, target);
      progress = true;
    }
    pending = std::move(still);
  }
  if (!pending.empty()) {
    const Edge* first = *std::min_element(pending.begin(), pending.end(),
                                          [](const Edge* a, const Edge* b) { return a->line < b->line; });
    throw ParseError("orphan class '" + first->parent + "' has no high-level parent", first->line);
  }

  for (const auto& entry : items) {
    try {
      graph.add_item(item_from_json(entry.value));
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(e.what(), entry.line);
    }
  }
  for (const auto& entry : links) {
    try {
      graph.link(entry.item, entry.ll_class, entry.score);
    } catch (const std::exception& e) {
      throw ParseError(e.what(), entry.line);
    }
  }
  graph.validate();
  return graph;
}

OntologyGraph load_ontology_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open ontology file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return load_ontology(buffer.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

std::string write_ontology(const OntologyGraph& graph) {
  std::ostringstream out;
  for (const auto& hl : graph.hl_classes()) out << "C\t" << kRoot << '\t' << hl << '\n';
  for (const auto& [hl, ll] : graph.hl_ll_edges()) out << "C\t" << hl << '\t' << ll << '\n';
  for (ItemId id : graph.item_order()) out << "I\t" << item_to_json(graph.item(id)).dump() << '\n';
  for (const auto& [key, score] : graph.links()) {
    if (!graph.item(key.first).categories.empty()) continue;
    json s = score;
    out << "L\t" << key.first << '\t' << key.second << '\t' << s.dump() << '\n';
  }
  return out.str();
}

std::optional<std::size_t> ContentMatrices::item_column(ItemId id) const {
  auto it = std::find(item_ids.begin(), item_ids.end(), id);
  if (it == item_ids.end()) return std::nullopt;
  return static_cast<std::size_t>(it - item_ids.begin());
}

std::optional<std::size_t> ContentMatrices::hl_index(const std::string& label) const {
  auto it = std::lower_bound(hl_labels.begin(), hl_labels.end(), label);
  if (it == hl_labels.end() || *it != label) return std::nullopt;
  return static_cast<std::size_t>(it - hl_labels.begin());
}

std::optional<std::size_t> ContentMatrices::ll_index(const std::string& label) const {
  auto it = std::lower_bound(ll_labels.begin(), ll_labels.end(), label);
  if (it == ll_labels.end() || *it != label) return std::nullopt;
  return static_cast<std::size_t>(it - ll_labels.begin());
}

ContentMatrices content_matrices(const OntologyGraph& graph, double link_threshold) {
  ContentMatrices m;
  m.hl_labels = graph.hl_classes();
  m.ll_labels = graph.ll_classes();
  m.item_ids = graph.item_order();
  m.hl_ll = BinaryMatrix(m.hl_labels.size(), m.ll_labels.size());
  m.ll_item = BinaryMatrix(m.ll_labels.size(), m.item_ids.size());
  for (const auto& [hl, ll] : graph.hl_ll_edges()) {
    m.hl_ll.set(*m.hl_index(hl), *m.ll_index(ll));
  }
  std::map<ItemId, std::size_t> column;
  for (std::size_t k = 0; k < m.item_ids.size(); ++k) column[m.item_ids[k]] = k;
  for (const auto& [key, score] : graph.links()) {
    if (score >= link_threshold) m.ll_item.set(*m.ll_index(key.second), column.at(key.first));
  }
  return m;
}

}  // namespace tourrec
