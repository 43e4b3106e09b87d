#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tourrec/ontology.hpp"

namespace tourrec {

/// High-level classes in the column order of the published preference sample.
const std::vector<std::string>& fixture_hl_labels();
/// The ten latent preference categories of the synthetic users.
const std::vector<std::string>& preference_categories();
/// (HL parent, LL class) edges of the bundled ontology.
const std::vector<std::pair<std::string, std::string>>& fixture_hl_ll_edges();

/// The 29 catalog items with their published names and category lists.
/// Descriptions repeat the name so the items can also be binned by text.
std::vector<ItemRecord> load_item_fixture();

/// Bundled ontology; with_items adds the 29 catalog items.
OntologyGraph fixture_ontology(bool with_items = true);
/// Ontology document text of fixture_ontology(true).
std::string fixture_ontology_document();
/// One JSON object per line.
std::string fixture_items_jsonl();

}  // namespace tourrec
