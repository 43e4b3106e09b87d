#pragma once

#include <map>
#include <set>
#include <vector>

#include "tourrec/json.hpp"
#include "tourrec/preferences.hpp"

namespace tourrec {

struct RatingEvent {
  UserId user = 0;
  ItemId item = 0;
  double rating = 0.0;
  Timestamp timestamp = 0;

  bool operator==(const RatingEvent&) const = default;
};

json rating_to_json(const RatingEvent& r);
RatingEvent rating_from_json(const json& value);

struct PopularityConfig {
  double k = 5.0;
  double threshold = 2.5;
  /// Global mean used while no rating exists.
  double default_global_mean = 3.0;
  /// Filter on the plain per-item mean instead of the damped mean.
  bool use_raw_mean = false;
};

class PopularityStats {
 public:
  explicit PopularityStats(double k = 5.0, double default_global_mean = 3.0);

  void add(ItemId item, double rating);
  void add(const RatingEvent& r) { add(r.item, r.rating); }

  double k() const { return k_; }
  std::size_t count(ItemId item) const;
  double sum(ItemId item) const;
  std::size_t total_count() const { return total_count_; }
  /// Mean of all observed ratings, or the default while there are none.
  double global_mean() const;
  /// Overrides the computed global mean.
  void set_global_mean(double value);

 private:
  double k_;
  double default_global_mean_;
  std::optional<double> global_override_;
  std::map<ItemId, std::pair<std::size_t, double>> per_item_;
  std::size_t total_count_ = 0;
  double total_sum_ = 0.0;
};

/// (sum + k * global_mean) / (n + k). Throws InvariantError when n + k == 0.
double damped_mean(const PopularityStats& stats, ItemId item);
double damped_mean(const std::vector<double>& ratings, double k, double global_mean);

/// Items whose damped mean (or raw mean) reaches the threshold. Unrated items
/// pass when k == 0.
std::set<ItemId> popularity_prefilter(const std::vector<ItemId>& items, const PopularityStats& stats,
                                      double threshold, bool use_raw_mean = false);

/// Content ranking restricted to prefilter survivors, backfilled from the
/// filtered items in content order when fewer than n survive.
RecList recommend_hybrid(const PreferenceState& state, const ContentMatrices& m, const PopularityStats& stats,
                         std::size_t n, const PopularityConfig& pop = {}, const PreferenceConfig& cfg = {});

/// Scores for use inside the ensemble: content scores of survivors, plus the
/// backfill needed to reach n entries.
ScoredItems hybrid_scores(const ScoredItems& content, const PopularityStats& stats, std::size_t n,
                          const PopularityConfig& pop, std::set<ItemId>* backfilled = nullptr);

}  // namespace tourrec
