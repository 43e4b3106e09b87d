#include "tourrec/context.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "tourrec/error.hpp"

namespace tourrec {

std::string to_string(Weather w) {
  switch (w) {
    case Weather::sunny: return "sunny";
    case Weather::cloudy: return "cloudy";
    case Weather::rainy: return "rainy";
  }
  return "unknown";
}

Weather weather_from_string(const std::string& name) {
  if (name == "sunny") return Weather::sunny;
  if (name == "cloudy") return Weather::cloudy;
  if (name == "rainy") return Weather::rainy;
  throw InvariantError("unknown weather '" + name + "' (expected sunny, cloudy or rainy)");
}

void ContextParams::validate() const {
  if (!(default_tau_days > 0.0)) throw InvariantError("default tau must be positive");
  for (const auto& [label, p] : classes) {
    if (!(p.tau_days > 0.0)) throw InvariantError("tau for '" + label + "' must be positive");
    for (const auto& [w, f] : p.weather) {
      if (!(f >= 0.0 && f <= 1.0)) {
        throw InvariantError("weather factor for '" + label + "'/" + to_string(w) + " outside [0, 1]");
      }
    }
  }
}

json context_params_to_json(const ContextParams& p) {
  json classes = json::object();
  for (const auto& [label, c] : p.classes) {
    json weather = json::object();
    for (const auto& [w, f] : c.weather) weather[to_string(w)] = f;
    classes[label] = {{"weather", weather}, {"tau_days", c.tau_days}};
  }
  return {{"default_tau_days", p.default_tau_days}, {"classes", classes}};
}

ContextParams context_params_from_json(const json& v) {
  ContextParams p;
  p.default_tau_days = v.value("default_tau_days", 30.0);
  const json& classes = v.contains("classes") ? v.at("classes") : v;
  for (const auto& [label, c] : classes.items()) {
    if (!c.is_object()) continue;
    ClassContextParams cp;
    cp.tau_days = c.value("tau_days", p.default_tau_days);
    if (c.contains("weather")) {
      for (const auto& [w, f] : c.at("weather").items()) cp.weather[weather_from_string(w)] = f.get<double>();
    }
    p.classes[label] = cp;
  }
  p.validate();
  return p;
}

ContextParams load_context_params_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return context_params_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

ContextParams default_context_params() {
  const std::map<Weather, double> outdoor = {{Weather::rainy, 0.2}, {Weather::cloudy, 0.7}, {Weather::sunny, 1.0}};
  ContextParams p;
  for (const char* label : {"Adventure", "Beach", "Football", "Golf", "Motor Sports", "Nature", "Routes", "Sports",
                            "Theme park", "ViewPoints", "Water Sports"}) {
    p.classes[label] = {outdoor, 30.0};
  }
  for (const char* label : {"Gastro", "Food"}) p.classes[label] = {{}, 3.0};
  p.classes["Nightlife"] = {{}, 7.0};
  for (const char* label : {"Culture", "Museums"}) p.classes[label] = {{}, 180.0};
  return p;
}

void validate_point(const GeoPoint& p) {
  if (!(p.lat >= -90.0 && p.lat <= 90.0) || !(p.lon >= -180.0 && p.lon <= 180.0)) {
    throw InvariantError("invalid coordinates (" + std::to_string(p.lat) + ", " + std::to_string(p.lon) + ")");
  }
}

double haversine_km(const GeoPoint& a, const GeoPoint& b) {
  validate_point(a);
  validate_point(b);
  constexpr double rad = std::numbers::pi / 180.0;
  const double dlat = (b.lat - a.lat) * rad;
  const double dlon = (b.lon - a.lon) * rad;
  const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(a.lat * rad) * std::cos(b.lat * rad) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

std::vector<ItemId> location_filter(const std::vector<ItemId>& items, const ContextCatalog& catalog,
                                    const GeoPoint& hotel, double radius_km) {
  if (!(radius_km > 0.0)) throw InvariantError("radius must be positive");
  validate_point(hotel);
  std::vector<ItemId> out;
  for (ItemId id : items) {
    auto it = catalog.find(id);
    if (it == catalog.end() || !it->second.location || haversine_km(hotel, *it->second.location) <= radius_km) {
      out.push_back(id);
    }
  }
  return out;
}

double weather_penalty(const std::string& ll_class, Weather condition, const ContextParams& params) {
  auto it = params.classes.find(ll_class);
  if (it == params.classes.end()) return 1.0;
  auto w = it->second.weather.find(condition);
  return w == it->second.weather.end() ? 1.0 : w->second;
}

double repetition_willingness(const std::string& ll_class, double elapsed_seconds, const ContextParams& params) {
  if (elapsed_seconds < 0.0) throw InvariantError("elapsed time must be nonnegative");
  auto it = params.classes.find(ll_class);
  const double tau_days = it == params.classes.end() ? params.default_tau_days : it->second.tau_days;
  return 1.0 - std::exp(-elapsed_seconds / (tau_days * static_cast<double>(kSecondsPerDay)));
}

double item_weather_factor(const ContextItem& item, const ContextState& ctx, const ContextParams& params) {
  if (!ctx.weather || item.classes.empty()) return 1.0;
  double factor = 0.0;
  for (const auto& c : item.classes) factor = std::max(factor, weather_penalty(c, *ctx.weather, params));
  return factor;
}

double item_willingness(ItemId id, const ContextItem& item, const ContextState& ctx, const ContextParams& params) {
  auto it = ctx.last_consumed.find(id);
  if (it == ctx.last_consumed.end()) return 1.0;
  const double elapsed = static_cast<double>(std::max<Timestamp>(0, ctx.now - it->second));
  if (item.classes.empty()) {
    return 1.0 - std::exp(-elapsed / (params.default_tau_days * static_cast<double>(kSecondsPerDay)));
  }
  double w = 1.0;
  for (const auto& c : item.classes) w = std::min(w, repetition_willingness(c, elapsed, params));
  return w;
}

ScoredItems apply_context(const ScoredItems& scored, const ContextCatalog& catalog, const ContextState& ctx,
                          const ContextParams& params) {
  if (ctx.hotel) validate_point(*ctx.hotel);
  static const ContextItem kNoInfo;
  ScoredItems out;
  out.reserve(scored.size());
  for (const auto& s : scored) {
    if (s.score < 0.0) throw InvariantError("context adjustment expects nonnegative scores");
    auto it = catalog.find(s.item);
    const ContextItem& item = it == catalog.end() ? kNoInfo : it->second;
    double factor = 1.0;
    if (ctx.hotel && item.location) {
      const double d = haversine_km(*ctx.hotel, *item.location);
      if (ctx.distance_decay) {
        factor *= std::exp(-d / ctx.decay_km);
      } else if (d > ctx.radius_km) {
        continue;
      }
    }
    factor *= item_weather_factor(item, ctx, params);
    factor *= item_willingness(s.item, item, ctx, params);
    out.push_back({s.item, s.score * factor});
  }
  rank(out);
  return out;
}

}  // namespace tourrec
