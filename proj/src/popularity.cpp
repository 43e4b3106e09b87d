#include "tourrec/popularity.hpp"

#include <algorithm>

#include "tourrec/error.hpp"

namespace tourrec {

json rating_to_json(const RatingEvent& r) {
  return {{"user", r.user}, {"item", r.item}, {"rating", r.rating}, {"timestamp", r.timestamp}};
}

RatingEvent rating_from_json(const json& v) {
  RatingEvent r;
  r.user = v.at("user").get<UserId>();
  r.item = v.at("item").get<ItemId>();
  r.rating = v.at("rating").get<double>();
  r.timestamp = v.value("timestamp", Timestamp{0});
  if (!(r.rating >= 0.0 && r.rating <= 5.0)) throw InvariantError("rating must lie in [0, 5]");
  return r;
}

PopularityStats::PopularityStats(double k, double default_global_mean)
    : k_(k), default_global_mean_(default_global_mean) {
  if (k < 0.0) throw InvariantError("damping k must be nonnegative");
}

void PopularityStats::add(ItemId item, double rating) {
  if (!(rating >= 0.0 && rating <= 5.0)) throw InvariantError("rating must lie in [0, 5]");
  auto& [n, s] = per_item_[item];
  ++n;
  s += rating;
  ++total_count_;
  total_sum_ += rating;
}

std::size_t PopularityStats::count(ItemId item) const {
  auto it = per_item_.find(item);
  return it == per_item_.end() ? 0 : it->second.first;
}

double PopularityStats::sum(ItemId item) const {
  auto it = per_item_.find(item);
  return it == per_item_.end() ? 0.0 : it->second.second;
}

double PopularityStats::global_mean() const {
  if (global_override_) return *global_override_;
  return total_count_ == 0 ? default_global_mean_ : total_sum_ / static_cast<double>(total_count_);
}

void PopularityStats::set_global_mean(double value) {
  if (!(value >= 0.0 && value <= 5.0)) throw InvariantError("global mean must lie in [0, 5]");
  global_override_ = value;
}

double damped_mean(const PopularityStats& stats, ItemId item) {
  const double n = static_cast<double>(stats.count(item));
  if (n + stats.k() <= 0.0) {
    throw InvariantError("damped mean undefined for unrated item " + std::to_string(item) + " with k = 0");
  }
  return (stats.sum(item) + stats.k() * stats.global_mean()) / (n + stats.k());
}

double damped_mean(const std::vector<double>& ratings, double k, double global_mean) {
  const double n = static_cast<double>(ratings.size());
  if (n + k <= 0.0) throw InvariantError("damped mean undefined with n = 0 and k = 0");
  double sum = 0.0;
  for (double r : ratings) sum += r;
  return (sum + k * global_mean) / (n + k);
}

std::set<ItemId> popularity_prefilter(const std::vector<ItemId>& items, const PopularityStats& stats,
                                      double threshold, bool use_raw_mean) {
  std::set<ItemId> out;
  for (ItemId item : items) {
    const std::size_t n = stats.count(item);
    bool pass = false;
    if (n == 0) {
      pass = stats.k() == 0.0 || stats.global_mean() >= threshold;
    } else if (use_raw_mean) {
      pass = stats.sum(item) / static_cast<double>(n) >= threshold;
    } else {
      pass = damped_mean(stats, item) >= threshold;
    }
    if (pass) out.insert(item);
  }
  return out;
}

ScoredItems hybrid_scores(const ScoredItems& content, const PopularityStats& stats, std::size_t n,
                          const PopularityConfig& pop, std::set<ItemId>* backfilled) {
  std::vector<ItemId> ids;
  ids.reserve(content.size());
  for (const auto& s : content) ids.push_back(s.item);
  const std::set<ItemId> keep = popularity_prefilter(ids, stats, pop.threshold, pop.use_raw_mean);

  ScoredItems survivors;
  ScoredItems filtered;
  for (const auto& s : content) (keep.contains(s.item) ? survivors : filtered).push_back(s);
  if (survivors.size() < n) {
    rank(filtered);
    const std::size_t missing = std::min(n - survivors.size(), filtered.size());
    for (std::size_t i = 0; i < missing; ++i) {
      survivors.push_back(filtered[i]);
      if (backfilled) backfilled->insert(filtered[i].item);
    }
  }
  return survivors;
}

RecList recommend_hybrid(const PreferenceState& state, const ContentMatrices& m, const PopularityStats& stats,
                         std::size_t n, const PopularityConfig& pop, const PreferenceConfig& cfg) {
  const ScoredItems content = content_scores(state, m, cfg);
  std::set<ItemId> backfilled;
  ScoredItems scored = hybrid_scores(content, stats, n, pop, &backfilled);

  // Survivors rank first; backfill follows in content order.
  ScoredItems head;
  ScoredItems tail;
  for (const auto& s : scored) (backfilled.contains(s.item) ? tail : head).push_back(s);
  head = top_n(std::move(head), n);
  rank(tail);
  RecList list = make_reclist(head, "hybrid");
  for (const auto& s : tail) {
    if (list.entries.size() >= n) break;
    list.entries.push_back({s.item, s.score, true, {"hybrid"}});
  }
  if (!tail.empty()) list.flags.push_back("backfilled");
  if (state.fallback) list.flags.push_back("fallback");
  return list;
}

}  // namespace tourrec
