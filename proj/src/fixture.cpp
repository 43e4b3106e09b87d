#include "tourrec/fixture.hpp"

namespace tourrec {

namespace {

struct FixtureRow {
  const char* name;
  std::vector<std::string> categories;
};

const std::vector<FixtureRow>& rows() {
  static const std::vector<FixtureRow> kRows = {
      {"A service that offers you the opportunity to do bungee-jumping", {"Leisure", "Sports", "Routes", "Events", "Nature"}},
      {"A tavern that serves traditional food", {"Leisure", "Events", "Culture", "Towns"}},
      {"Ancient history museum", {"Culture", "ViewPoints", "Events", "Nature", "Routes", "Towns"}},
      {"Discount for Callaway clubs", {"Sports"}},
      {"Get a discount for Comic-Con", {"Sports"}},
      {"Get a free pint at the pub", {"Events", "Leisure"}},
      {"Get a free pizza at Pizza Hut", {"Leisure"}},
      {"Get a voucher for Sephora", {"Leisure"}},
      {"Go shopping in our new mall", {"Leisure"}},
      {"Golf lessons", {"Sports", "Leisure", "Events"}},
      {"Great meals that are tasty", {"Leisure", "Events"}},
      {"Medieval fair", {"Culture", "Events", "Nature", "Towns"}},
      {"One day snorkeling with the fish", {"Sports", "Leisure", "Nature"}},
      {"One of the main nightclubs in the city", {"Culture", "Events", "Nature", "Leisure", "Routes", "Towns"}},
      {"Rest and relaxation at the spa", {"Leisure", "Routes"}},
      {"Surfing lessons", {"Sports"}},
      {"Take a trip in a hot-air balloon", {"Sports"}},
      {"Try go-karts with your friends", {"Sports"}},
      {"Try scuba diving", {"Sports"}},
      {"Try spearfishing with a pro", {"Sports"}},
      {"Watch a FC Porto match", {"Events", "Sports"}},
      {"Watch a SL Benfica match", {"Events", "Sports"}},
      {"Watch a Sporting CP match", {"Sports", "Events"}},
      {"Watch a live concert of Mastodon", {"Events"}},
      {"Watch a live football match", {"Sports", "Events"}},
      {"Watch a motogp race", {"Events", "Sports"}},
      {"drive a F1 racecar", {"Sports"}},
      {"go to the spa", {"Leisure"}},
      {"visiting Disneyland", {"Leisure"}},
  };
  return kRows;
}

}  // namespace

const std::vector<std::string>& fixture_hl_labels() {
  static const std::vector<std::string> kLabels = {"ViewPoints", "Nature", "Towns",  "Culture",
                                                   "Events",     "Leisure", "Routes", "Sports"};
  return kLabels;
}

const std::vector<std::string>& preference_categories() {
  static const std::vector<std::string> kLabels = {"Beach",  "Relax",  "Shop",    "Nightlife", "Theme park",
                                                   "Gastro", "Sports", "Culture", "Nature",    "Events"};
  return kLabels;
}

const std::vector<std::pair<std::string, std::string>>& fixture_hl_ll_edges() {
  static const std::vector<std::pair<std::string, std::string>> kEdges = [] {
    std::vector<std::pair<std::string, std::string>> edges;
    // Every HL class has a same-named LL child so catalog categories link directly.
    for (const auto& hl : fixture_hl_labels()) edges.emplace_back(hl, hl);
    const std::vector<std::pair<std::string, std::vector<std::string>>> children = {
        {"Nature", {"Beach", "Water Sports", "Adventure"}},
        {"Towns", {"Shop", "Gastro"}},
        {"Culture", {"Museums", "Gastro"}},
        {"Events", {"Nightlife", "Concerts", "Football"}},
        {"Leisure", {"Relax", "Shop", "Nightlife", "Theme park", "Gastro", "Beach", "Food"}},
        {"Sports", {"Golf", "Motor Sports", "Water Sports", "Football", "Adventure"}},
    };
    for (const auto& [hl, lls] : children) {
      for (const auto& ll : lls) edges.emplace_back(hl, ll);
    }
    return edges;
  }();
  return kEdges;
}

std::vector<ItemRecord> load_item_fixture() {
  std::vector<ItemRecord> items;
  ItemId id = 0;
  for (const auto& row : rows()) {
    ItemRecord item;
    item.id = id++;
    item.name = row.name;
    item.description = row.name;
    item.categories = row.categories;
    items.push_back(std::move(item));
  }
  return items;
}

OntologyGraph fixture_ontology(bool with_items) {
  OntologyGraph graph;
  for (const auto& hl : fixture_hl_labels()) graph.add_hl_class(hl);
  for (const auto& [hl, ll] : fixture_hl_ll_edges()) graph.add_ll_class(ll, hl);
  if (with_items) {
    for (const auto& item : load_item_fixture()) graph.add_item(item);
  }
  return graph;
}

std::string fixture_ontology_document() {
  return "# Tourism ontology: high-level classes, low-level classes and the 29 catalog items.\n" +
         write_ontology(fixture_ontology(true));
}

std::string fixture_items_jsonl() {
  std::string out;
  for (const auto& item : load_item_fixture()) out += item_to_json(item).dump() + "\n";
  return out;
}

}  // namespace tourrec
