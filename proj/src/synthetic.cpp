#include "tourrec/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "tourrec/error.hpp"
#include "tourrec/fixture.hpp"
#include "tourrec/random.hpp"

namespace tourrec {

namespace {

enum Stream : std::uint64_t {
  kUserStream = 1,
  kNoiseStream = 2,
  kSelectStream = 3,
  kCoefficientStream = 4,
};

enum Pref { Beach, Relax, Shop, Nightlife, ThemePark, Gastro, Sports, Culture, Nature, Events };

using Effects = std::vector<std::pair<Pref, double>>;

const std::map<std::string, std::vector<Pref>>& category_map() {
  static const std::map<std::string, std::vector<Pref>> kMap = {
      {"Leisure", {Relax, Shop, ThemePark, Gastro, Beach, Nightlife}},
      {"Sports", {Sports}},
      {"Events", {Events, Nightlife}},
      {"Culture", {Culture, Gastro}},
      {"Nature", {Nature, Beach}},
      {"Towns", {Shop, Gastro, Culture}},
      {"Routes", {Nature, Culture}},
      {"ViewPoints", {Nature, Beach}},
      {"Beach", {Beach}},
      {"Relax", {Relax}},
      {"Shop", {Shop}},
      {"Nightlife", {Nightlife}},
      {"Theme park", {ThemePark}},
      {"Gastro", {Gastro}},
      {"Food", {Gastro}},
      {"Golf", {Sports}},
      {"Motor Sports", {Sports}},
      {"Water Sports", {Sports, Beach}},
      {"Football", {Sports, Events}},
      {"Museums", {Culture}},
      {"Concerts", {Events, Nightlife}},
      {"Adventure", {Sports, Nature}},
  };
  return kMap;
}

std::vector<double> normalized_marginal(const std::vector<double>& given, std::size_t levels, const std::string& name) {
  if (given.empty()) return std::vector<double>(levels, 1.0 / static_cast<double>(levels));
  if (given.size() != levels) {
    throw InvariantError("marginal for " + name + " has " + std::to_string(given.size()) + " entries, expected " +
                         std::to_string(levels));
  }
  double sum = 0.0;
  for (double p : given) {
    if (!(p >= 0.0)) throw InvariantError("marginal for " + name + " has a negative entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvariantError("marginal for " + name + " does not sum to 1");
  return given;
}

std::string fmt2(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", x);
  return buf;
}

std::string fmt3(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", x);
  return buf;
}

}  // namespace

std::string coefficient_key(Ordinal attr, int level) {
  return std::string(ordinal_name(attr)) + "=" + ordinal_levels(attr).at(static_cast<std::size_t>(level));
}

std::string coefficient_key(Nominal attr, int level) {
  return std::string(nominal_name(attr)) + "=" + nominal_levels(attr).at(static_cast<std::size_t>(level));
}

CoefficientTable zero_coefficients() {
  CoefficientTable table;
  for (std::size_t a = 0; a < kOrdinalCount; ++a) {
    const auto attr = static_cast<Ordinal>(a);
    for (std::size_t l = 0; l < ordinal_levels(attr).size(); ++l) table[coefficient_key(attr, static_cast<int>(l))] = {};
  }
  for (std::size_t a = 0; a < kNominalCount; ++a) {
    const auto attr = static_cast<Nominal>(a);
    for (std::size_t l = 0; l < nominal_levels(attr).size(); ++l) table[coefficient_key(attr, static_cast<int>(l))] = {};
  }
  return table;
}

CoefficientTable default_coefficients(std::uint64_t seed) {
  const std::map<std::string, Effects> effects = {
      {"age=18-30", {{Nightlife, 1.8}, {Sports, 1.2}, {Events, 0.9}, {Beach, 0.6}, {Culture, -0.6}, {Relax, -0.6}}},
      {"age=31-40", {{Sports, 0.6}, {Beach, 0.5}, {Gastro, 0.3}, {ThemePark, 0.5}}},
      {"age=41-50", {{Gastro, 0.6}, {Culture, 0.5}, {ThemePark, 0.4}}},
      {"age=51-60", {{Culture, 1.0}, {Relax, 0.8}, {Gastro, 0.6}, {Nightlife, -0.9}}},
      {"age=60+", {{Culture, 1.4}, {Relax, 1.2}, {Nature, 0.6}, {Nightlife, -1.5}, {Sports, -0.9}}},
      {"ac_deg=None", {{Sports, 0.5}, {Events, 0.5}}},
      {"ac_deg=High School", {{Shop, 0.3}, {ThemePark, 0.3}}},
      {"ac_deg=Some College", {{Nightlife, 0.3}, {Events, 0.2}}},
      {"ac_deg=College Degree", {{Culture, 0.8}, {Gastro, 0.5}}},
      {"budget=Low", {{Nature, 0.6}, {Beach, 0.5}, {Shop, -0.5}, {Gastro, -0.5}}},
      {"budget=Mid", {}},
      {"budget=High", {{Gastro, 0.8}, {Shop, 0.8}, {Relax, 0.5}}},
      {"accom=Single", {{Nature, 0.5}}},
      {"accom=Double", {{Beach, 0.2}}},
      {"accom=Suite", {{Relax, 0.5}, {Gastro, 0.3}}},
      {"accom=Villa", {{Relax, 0.8}, {Beach, 0.5}}},
      {"gender=Male", {{Sports, 0.9}}},
      {"gender=Female", {{Shop, 0.8}, {Relax, 0.5}}},
      {"job=Blue Collar", {{Sports, 0.3}, {Events, 0.3}}},
      {"job=White Collar", {{Culture, 0.3}, {Gastro, 0.3}}},
      {"region=South Europe", {{Beach, 0.3}, {Gastro, 0.5}}},
      {"region=North Europe", {{Beach, 0.9}, {Nature, 0.3}}},
      {"region=East Europe", {{Nightlife, 0.5}, {Culture, 0.3}}},
      {"region=North America", {{ThemePark, 0.9}, {Shop, 0.5}}},
      {"region=South America", {{Nightlife, 0.6}, {Events, 0.5}}},
      {"region=Asia", {{Shop, 0.9}, {Culture, 0.5}}},
      {"region=Africa", {{Nature, 0.8}, {Sports, 0.3}}},
      {"region=Middle East", {{Shop, 0.8}, {Relax, 0.5}}},
      {"group_comp=1 Adult", {{Culture, 0.5}, {Nature, 0.5}}},
      {"group_comp=2 Adults", {{Relax, 0.6}, {Gastro, 0.5}}},
      {"group_comp=2 Adults + Child", {{ThemePark, 1.8}, {Beach, 0.8}, {Nightlife, -1.5}}},
      {"group_comp=Group of Friends", {{Nightlife, 1.5}, {Events, 0.9}, {Sports, 0.5}}},
  };
  CoefficientTable table = zero_coefficients();
  Rng rng(mix_seed(seed, kCoefficientStream));
  for (auto& [key, row] : table) {
    if (auto it = effects.find(key); it != effects.end()) {
      for (const auto& [pref, value] : it->second) row[pref] += value;
    }
    for (double& x : row) x += 0.2 * rng.normal();
  }
  return table;
}

void GenConfig::validate() const {
  for (std::size_t a = 0; a < kOrdinalCount; ++a) {
    const auto attr = static_cast<Ordinal>(a);
    normalized_marginal(ordinal_marginals[a], ordinal_levels(attr).size(), std::string(ordinal_name(attr)));
  }
  for (std::size_t a = 0; a < kNominalCount; ++a) {
    const auto attr = static_cast<Nominal>(a);
    normalized_marginal(nominal_marginals[a], nominal_levels(attr).size(), std::string(nominal_name(attr)));
  }
  if (!(sparsity > 0.0 && sparsity <= 1.0)) throw InvariantError("sparsity must lie in (0, 1]");
  if (!(sigma >= 0.0)) throw InvariantError("noise scale must be nonnegative");
}

std::vector<UserRecord> gen_users(const GenConfig& cfg) {
  cfg.validate();
  std::array<std::vector<double>, kOrdinalCount> ordinal;
  std::array<std::vector<double>, kNominalCount> nominal;
  for (std::size_t a = 0; a < kOrdinalCount; ++a) {
    const auto attr = static_cast<Ordinal>(a);
    ordinal[a] = normalized_marginal(cfg.ordinal_marginals[a], ordinal_levels(attr).size(), "");
  }
  for (std::size_t a = 0; a < kNominalCount; ++a) {
    const auto attr = static_cast<Nominal>(a);
    nominal[a] = normalized_marginal(cfg.nominal_marginals[a], nominal_levels(attr).size(), "");
  }
  std::vector<UserRecord> users;
  users.reserve(cfg.n_users);
  for (std::size_t i = 0; i < cfg.n_users; ++i) {
    Rng rng(mix_seed(cfg.seed, kUserStream, i));
    UserRecord u;
    u.id = static_cast<UserId>(i);
    for (std::size_t a = 0; a < kOrdinalCount; ++a) u.ordinal[a] = static_cast<int>(rng.categorical(ordinal[a]));
    for (std::size_t a = 0; a < kNominalCount; ++a) u.nominal[a] = static_cast<int>(rng.categorical(nominal[a]));
    users.push_back(u);
  }
  return users;
}

std::vector<LatentPrefRow> gen_latent_prefs(const std::vector<UserRecord>& users, const GenConfig& cfg) {
  std::vector<LatentPrefRow> out;
  out.reserve(users.size());
  auto lookup = [&](const std::string& key) -> const PreferenceRow& {
    auto it = cfg.coefficients.find(key);
    if (it == cfg.coefficients.end()) throw InvariantError("no coefficients for level '" + key + "'");
    return it->second;
  };
  for (const auto& u : users) {
    PreferenceRow utility{};
    for (std::size_t a = 0; a < kOrdinalCount; ++a) {
      const auto& row = lookup(coefficient_key(static_cast<Ordinal>(a), u.ordinal[a]));
      for (std::size_t c = 0; c < kPreferenceCount; ++c) utility[c] += row[c];
    }
    for (std::size_t a = 0; a < kNominalCount; ++a) {
      const auto& row = lookup(coefficient_key(static_cast<Nominal>(a), u.nominal[a]));
      for (std::size_t c = 0; c < kPreferenceCount; ++c) utility[c] += row[c];
    }
    const double top = *std::max_element(utility.begin(), utility.end());
    double sum = 0.0;
    LatentPrefRow r;
    r.user = u.id;
    for (std::size_t c = 0; c < kPreferenceCount; ++c) {
      r.probs[c] = std::exp(utility[c] - top);
      sum += r.probs[c];
    }
    for (double& p : r.probs) p /= sum;
    out.push_back(r);
  }
  return out;
}

double class_affinity(const PreferenceRow& probs, const std::string& item_category) {
  auto it = category_map().find(item_category);
  if (it == category_map().end()) return 1.0 / static_cast<double>(kPreferenceCount);
  double sum = 0.0;
  for (Pref p : it->second) sum += probs[p];
  return sum / static_cast<double>(it->second.size());
}

double item_affinity(const PreferenceRow& probs, const ItemRecord& item) {
  if (item.categories.empty()) return 1.0 / static_cast<double>(kPreferenceCount);
  double sum = 0.0;
  for (const auto& c : item.categories) sum += class_affinity(probs, c);
  return sum / static_cast<double>(item.categories.size());
}

std::vector<double> dense_ratings(const std::vector<LatentPrefRow>& prefs, const std::vector<ItemRecord>& catalog,
                                  const GenConfig& cfg) {
  const std::size_t n = catalog.size();
  std::vector<double> out(prefs.size() * n, 0.0);
  std::vector<double> affinity(n);
  std::vector<std::size_t> order(n);
  std::vector<double> scaled(n);
  for (std::size_t u = 0; u < prefs.size(); ++u) {
    for (std::size_t i = 0; i < n; ++i) affinity[i] = item_affinity(prefs[u].probs, catalog[i]);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return affinity[a] < affinity[b]; });
    // Average ranks for ties, scaled to [0, 1].
    for (std::size_t lo = 0; lo < n;) {
      std::size_t hi = lo;
      while (hi + 1 < n && affinity[order[hi + 1]] == affinity[order[lo]]) ++hi;
      const double rank = 0.5 * static_cast<double>(lo + hi);
      for (std::size_t j = lo; j <= hi; ++j) scaled[order[j]] = n > 1 ? rank / static_cast<double>(n - 1) : 0.5;
      lo = hi + 1;
    }
    for (std::size_t i = 0; i < n; ++i) {
      Rng rng(mix_seed(cfg.seed, kNoiseStream, static_cast<std::uint64_t>(prefs[u].user),
                       static_cast<std::uint64_t>(catalog[i].id)));
      const double noise = cfg.sigma > 0.0 ? cfg.sigma * rng.normal() : 0.0;
      const double r = std::clamp(1.0 + 4.0 * scaled[i] + noise, 1.0, 5.0);
      out[u * n + i] = std::round(r * 100.0) / 100.0;
    }
  }
  return out;
}

double pair_key(std::uint64_t seed, UserId user, ItemId item, std::uint64_t stream) {
  Rng rng(mix_seed(seed, stream, static_cast<std::uint64_t>(user), static_cast<std::uint64_t>(item)));
  return rng.uniform();
}

std::vector<RatingEvent> gen_ratings(const std::vector<UserRecord>& users, const std::vector<LatentPrefRow>& prefs,
                                     const std::vector<ItemRecord>& catalog, const GenConfig& cfg) {
  cfg.validate();
  if (users.size() != prefs.size()) throw DimensionError("users and preference rows differ in count");
  const std::vector<double> dense = dense_ratings(prefs, catalog, cfg);
  std::vector<RatingEvent> out;
  for (std::size_t u = 0; u < users.size(); ++u) {
    for (std::size_t i = 0; i < catalog.size(); ++i) {
      if (pair_key(cfg.seed, users[u].id, catalog[i].id, kSelectStream) < cfg.sparsity) {
        out.push_back({users[u].id, catalog[i].id, dense[u * catalog.size() + i], 0});
      }
    }
  }
  return out;
}

std::vector<double> hl_selection_from_prefs(const PreferenceRow& probs, const std::vector<std::string>& hl_labels,
                                            double ratio) {
  std::vector<double> mass(hl_labels.size());
  double top = 0.0;
  for (std::size_t i = 0; i < hl_labels.size(); ++i) {
    mass[i] = class_affinity(probs, hl_labels[i]);
    top = std::max(top, mass[i]);
  }
  std::vector<double> out(hl_labels.size(), 0.0);
  for (std::size_t i = 0; i < hl_labels.size(); ++i) out[i] = mass[i] >= ratio * top && top > 0.0 ? 1.0 : 0.0;
  return out;
}

std::string prefs_to_csv(const std::vector<LatentPrefRow>& prefs) {
  std::ostringstream out;
  out << "UserID";
  for (const auto& c : preference_categories()) out << ',' << c;
  out << '\n';
  for (const auto& r : prefs) {
    out << r.user;
    for (double p : r.probs) out << ',' << fmt3(p);
    out << '\n';
  }
  return out.str();
}

std::string ratings_to_csv(const std::vector<RatingEvent>& ratings) {
  std::ostringstream out;
  out << "userid,itemid,rating\n";
  for (const auto& r : ratings) out << r.user << ',' << r.item << ',' << fmt2(r.rating) << '\n';
  return out.str();
}

std::vector<RatingEvent> ratings_from_csv(std::string_view text) {
  std::vector<RatingEvent> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line_no == 1 && !line.empty() && !std::isdigit(static_cast<unsigned char>(line[0]))) continue;
    std::stringstream row(line);
    std::string a, b, c;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c, ',')) {
      throw ParseError("expected 'userid,itemid,rating'", line_no);
    }
    RatingEvent r;
    try {
      r.user = std::stoll(a);
      r.item = std::stoll(b);
      r.rating = std::stod(c);
    } catch (const std::exception&) {
      throw ParseError("malformed rating row", line_no);
    }
    if (!(r.rating >= 0.0 && r.rating <= 5.0)) throw ParseError("rating outside [0, 5]", line_no, 3);
    out.push_back(r);
  }
  return out;
}

std::string dense_matrix_csv(const std::vector<UserRecord>& users, const std::vector<ItemRecord>& catalog,
                             const std::vector<RatingEvent>& ratings) {
  std::map<std::pair<UserId, ItemId>, double> cells;
  for (const auto& r : ratings) cells[{r.user, r.item}] = r.rating;
  std::ostringstream out;
  out << "userid";
  for (const auto& item : catalog) out << ',' << item.id;
  out << '\n';
  for (const auto& u : users) {
    out << u.id;
    for (const auto& item : catalog) {
      auto it = cells.find({u.id, item.id});
      out << ',' << fmt2(it == cells.end() ? 0.0 : it->second);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace tourrec
