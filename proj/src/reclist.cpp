#include "tourrec/reclist.hpp"

#include <algorithm>

namespace tourrec {

void rank(ScoredItems& items) {
  std::sort(items.begin(), items.end(), [](const ScoredItem& a, const ScoredItem& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.item < b.item;
  });
}

ScoredItems top_n(ScoredItems items, std::size_t n) {
  rank(items);
  if (items.size() > n) items.resize(n);
  return items;
}

bool RecList::has_flag(const std::string& flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

std::vector<ItemId> RecList::items() const {
  std::vector<ItemId> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.item);
  return out;
}

RecList make_reclist(const ScoredItems& ranked, const std::string& source) {
  RecList list;
  list.entries.reserve(ranked.size());
  for (const auto& s : ranked) list.entries.push_back({s.item, s.score, false, {source}});
  return list;
}

json reclist_to_json(const RecList& list) {
  json entries = json::array();
  for (const auto& e : list.entries) {
    json entry = {{"item", e.item}, {"score", e.score}, {"provenance", e.provenance}};
    if (e.backfilled) entry["backfilled"] = true;
    entries.push_back(std::move(entry));
  }
  return {{"items", std::move(entries)}, {"flags", list.flags}};
}

}  // namespace tourrec
