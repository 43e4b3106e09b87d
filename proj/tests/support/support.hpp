#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tourrec/demographic.hpp"
#include "tourrec/engine.hpp"
#include "tourrec/fixture.hpp"
#include "tourrec/json.hpp"
#include "tourrec/random.hpp"

namespace tourrec::test {

inline const std::string kFixtureDir = TOURREC_TEST_FIXTURE_DIR;

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string fixture_path(const std::string& name) { return kFixtureDir + "/" + name; }

/// Values computed by tests/oracles/oracles.py and frozen into the repository.
inline const json& frozen() {
  static const json values = json::parse(read_text(TOURREC_TEST_FROZEN_VALUES));
  return values;
}

inline double frozen_num(const std::string& group, const std::string& key) {
  return frozen().at(group).at(key).get<double>();
}

/// Adjusted Rand index of two labelings of the same points.
inline double adjusted_rand(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::map<std::pair<std::size_t, std::size_t>, double> joint;
  std::map<std::size_t, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1;
    rows[a[i]] += 1;
    cols[b[i]] += 1;
  }
  auto pairs = [](double n) { return n * (n - 1) / 2; };
  double index = 0, sum_rows = 0, sum_cols = 0;
  for (const auto& [key, n] : joint) index += pairs(n);
  for (const auto& [key, n] : rows) sum_rows += pairs(n);
  for (const auto& [key, n] : cols) sum_cols += pairs(n);
  const double expected = sum_rows * sum_cols / pairs(static_cast<double>(a.size()));
  const double max_index = (sum_rows + sum_cols) / 2;
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

/// Three well-separated mixed-type blobs: two numeric columns around distinct
/// centers and two nominal columns that mostly carry the blob index.
inline MixedData three_blobs(std::size_t per_blob, std::uint64_t seed, std::vector<std::size_t>* truth) {
  const double centers[3][2] = {{0, 0}, {12, 12}, {-12, 12}};
  Rng rng(seed);
  MixedData d;
  d.numeric_dims = 2;
  d.categorical_dims = 2;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < per_blob; ++i) {
      d.numeric.push_back(centers[c][0] + rng.normal());
      d.numeric.push_back(centers[c][1] + rng.normal());
      for (int j = 0; j < 2; ++j) {
        d.categorical.push_back(rng.bernoulli(0.9) ? static_cast<int>(c) : static_cast<int>(rng.below(3)));
      }
      if (truth) truth->push_back(c);
      ++d.rows;
    }
  }
  return d;
}

inline UserRecord random_user(Rng& rng, UserId id) {
  UserRecord u{.id = id};
  for (std::size_t a = 0; a < kOrdinalCount; ++a) {
    u.ordinal[a] = static_cast<int>(rng.below(ordinal_levels(static_cast<Ordinal>(a)).size()));
  }
  for (std::size_t a = 0; a < kNominalCount; ++a) {
    u.nominal[a] = static_cast<int>(rng.below(nominal_levels(static_cast<Nominal>(a)).size()));
  }
  return u;
}

/// A random but valid event log produced by driving an engine through its
/// public mutators and capturing what reaches the sink.
inline std::vector<Event> random_event_log(std::uint64_t seed, std::size_t count, const EngineConfig& cfg = {}) {
  Engine engine(fixture_ontology(), cfg);
  std::vector<Event> log;
  engine.set_sink([&](const Event& e) { log.push_back(e); });
  Rng rng(seed);
  Timestamp ts = 1'000'000;
  const auto hl_count = engine.matrices().hl_labels.size();
  ItemId next_item = 1000;
  while (log.size() < count) {
    ts += 1 + static_cast<Timestamp>(rng.below(20'000));
    const double pick = rng.uniform();
    const auto& items = engine.graph().item_order();
    if (engine.users().empty() || pick < 0.15) {
      engine.add_user(random_user(rng, engine.next_user_id()), ts);
      continue;
    }
    auto it = engine.users().begin();
    std::advance(it, static_cast<long>(rng.below(engine.users().size())));
    const UserId user = it->first;
    const ItemId item = items[rng.below(items.size())];
    if (pick < 0.3) {
      std::vector<double> sel(hl_count);
      for (double& x : sel) x = rng.bernoulli(0.3) ? 1.0 : 0.0;
      engine.set_preferences(user, sel, ts);
    } else if (pick < 0.6) {
      const auto kind = static_cast<FeedbackKind>(rng.below(3));
      engine.add_feedback({.user = user, .item = item, .kind = kind, .timestamp = ts});
    } else if (pick < 0.95) {
      engine.add_rating({.user = user, .item = item, .rating = static_cast<double>(1 + rng.below(5)), .timestamp = ts});
    } else {
      const auto& ll = engine.graph().ll_classes();
      engine.add_item({.id = next_item, .name = "item " + std::to_string(next_item),
                       .categories = {ll[rng.below(ll.size())]}},
                      {}, ts);
      ++next_item;
    }
  }
  return log;
}

}  // namespace tourrec::test
