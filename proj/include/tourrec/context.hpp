#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tourrec/json.hpp"
#include "tourrec/ontology.hpp"
#include "tourrec/reclist.hpp"

namespace tourrec {

enum class Weather { sunny, cloudy, rainy };

std::string to_string(Weather w);
/// Throws InvariantError on an unknown name.
Weather weather_from_string(const std::string& name);

struct ClassContextParams {
  /// Missing conditions mean no penalty.
  std::map<Weather, double> weather;
  double tau_days = 30.0;

  bool operator==(const ClassContextParams&) const = default;
};

struct ContextParams {
  std::map<std::string, ClassContextParams> classes;
  /// Time constant for classes without an entry.
  double default_tau_days = 30.0;

  void validate() const;
  bool operator==(const ContextParams&) const = default;
};

/// {"default_tau_days": d, "classes": {label: {"weather": {...}, "tau_days": d}}}
json context_params_to_json(const ContextParams& p);
ContextParams context_params_from_json(const json& v);
ContextParams load_context_params_file(const std::string& path);

/// Parameters for the fixture ontology's classes: outdoor classes take
/// {rainy 0.2, cloudy 0.7, sunny 1.0}; food 3 days, nightlife 7 days,
/// museums and culture 180 days, everything else 30 days.
ContextParams default_context_params();

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kDefaultRadiusKm = 50.0;
inline constexpr double kDefaultDecayKm = 25.0;

void validate_point(const GeoPoint& p);
double haversine_km(const GeoPoint& a, const GeoPoint& b);

struct ContextState {
  std::optional<GeoPoint> hotel;
  std::optional<Weather> weather;
  Timestamp now = 0;
  /// Item -> most recent consumption time for the requesting user.
  std::map<ItemId, Timestamp> last_consumed;
  double radius_km = kDefaultRadiusKm;
  /// Replace the hard cutoff by a multiplicative exp(-d / decay_km).
  bool distance_decay = false;
  double decay_km = kDefaultDecayKm;
};

struct ContextItem {
  std::optional<GeoPoint> location;
  std::vector<std::string> classes;
};

using ContextCatalog = std::map<ItemId, ContextItem>;

/// Items within radius of the hotel, plus items without a location.
std::vector<ItemId> location_filter(const std::vector<ItemId>& items, const ContextCatalog& catalog,
                                    const GeoPoint& hotel, double radius_km);

double weather_penalty(const std::string& ll_class, Weather condition, const ContextParams& params);
/// 1 - exp(-dt / tau); dt in seconds.
double repetition_willingness(const std::string& ll_class, double elapsed_seconds, const ContextParams& params);

/// Max weather factor over the item's classes (1 without classes or weather).
double item_weather_factor(const ContextItem& item, const ContextState& ctx, const ContextParams& params);
/// Min willingness over the item's classes (1 when never consumed).
double item_willingness(ItemId id, const ContextItem& item, const ContextState& ctx, const ContextParams& params);

/// Drops items outside the location filter and multiplies each remaining
/// score by weather factor x repetition willingness. Scores must be >= 0.
/// The output is ranked.
ScoredItems apply_context(const ScoredItems& scored, const ContextCatalog& catalog, const ContextState& ctx,
                          const ContextParams& params);

}  // namespace tourrec
