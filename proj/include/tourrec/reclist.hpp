#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tourrec/json.hpp"
#include "tourrec/ontology.hpp"

namespace tourrec {

using UserId = std::int64_t;
/// Seconds since the Unix epoch.
using Timestamp = std::int64_t;

inline constexpr Timestamp kSecondsPerDay = 86400;

struct ScoredItem {
  ItemId item = 0;
  double score = 0.0;

  bool operator==(const ScoredItem&) const = default;
};

using ScoredItems = std::vector<ScoredItem>;

/// Descending score, ascending item id.
void rank(ScoredItems& items);
ScoredItems top_n(ScoredItems items, std::size_t n);

struct RecEntry {
  ItemId item = 0;
  double score = 0.0;
  bool backfilled = false;
  /// Names of the recommenders that scored this item.
  std::vector<std::string> provenance;

  bool operator==(const RecEntry&) const = default;
};

struct RecList {
  std::vector<RecEntry> entries;
  /// Diagnostics such as "empty" or "fallback".
  std::vector<std::string> flags;

  bool has_flag(const std::string& flag) const;
  std::vector<ItemId> items() const;
  bool operator==(const RecList&) const = default;
};

RecList make_reclist(const ScoredItems& ranked, const std::string& source);
json reclist_to_json(const RecList& list);

}  // namespace tourrec
