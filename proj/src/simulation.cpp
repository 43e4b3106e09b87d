#include "tourrec/simulation.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <tuple>

#include "tourrec/error.hpp"
#include "tourrec/fixture.hpp"

namespace tourrec {

namespace {

constexpr std::uint64_t kOrderStream = 11;
constexpr std::uint64_t kTestStream = 12;

std::string fmt6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  return buf;
}

std::array<double, 7> metric_values(const EvalReport& r) {
  return {r.map_at_k, r.mar_at_k, r.coverage, r.personalization, r.diversity_hl, r.diversity_ll, r.novelty};
}

FeatureMatrix one_hot(const OntologyGraph& graph, const ContentMatrices& m, bool high_level) {
  const auto& labels = high_level ? m.hl_labels : m.ll_labels;
  FeatureMatrix out;
  for (ItemId id : m.item_ids) {
    std::vector<double> row(labels.size(), 0.0);
    const auto classes = high_level ? graph.linked_hl_classes(id) : graph.linked_classes(id);
    for (const auto& c : classes) {
      auto it = std::find(labels.begin(), labels.end(), c);
      if (it != labels.end()) row[static_cast<std::size_t>(it - labels.begin())] = 1.0;
    }
    out[id] = std::move(row);
  }
  return out;
}

}  // namespace

void SimulationPlan::validate() const {
  if (milestones.empty()) throw InvariantError("simulation plan has no milestones");
  if (k == 0) throw InvariantError("k must be positive");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InvariantError("test fraction must lie in (0, 1)");
  for (std::size_t i = 0; i < milestones.size(); ++i) {
    if (milestones[i].users == 0) throw InvariantError("milestone " + std::to_string(i + 1) + " has no users");
    if (i > 0 && (milestones[i].users < milestones[i - 1].users || milestones[i].ratings < milestones[i - 1].ratings)) {
      throw InvariantError("milestones must be non-decreasing in users and ratings");
    }
  }
}

SimulationPlan default_plan() {
  SimulationPlan plan;
  plan.milestones = {{98, 0}, {98, 64}, {198, 191}, {250, 191}, {1000, 883}};
  return plan;
}

std::vector<Milestone> parse_milestones(const std::string& text) {
  std::vector<Milestone> out;
  std::stringstream in(text);
  std::string part;
  std::size_t column = 1;
  while (std::getline(in, part, ',')) {
    const auto colon = part.find(':');
    if (colon == std::string::npos) throw ParseError("milestone '" + part + "' is not users:ratings", 0, column);
    try {
      std::size_t used = 0;
      const long long u = std::stoll(part.substr(0, colon), &used);
      if (used != colon) throw std::invalid_argument(part);
      const std::string rs = part.substr(colon + 1);
      const long long r = std::stoll(rs, &used);
      if (used != rs.size() || u < 0 || r < 0) throw std::invalid_argument(part);
      out.push_back({static_cast<std::size_t>(u), static_cast<std::size_t>(r)});
    } catch (const std::exception&) {
      throw ParseError("milestone '" + part + "' is not users:ratings", 0, column);
    }
    column += part.size() + 1;
  }
  if (out.empty()) throw ParseError("no milestones given", 0);
  return out;
}

SyntheticWorld build_world(std::size_t n_users, const std::vector<ItemRecord>& catalog, const GenConfig& gen) {
  GenConfig cfg = gen;
  cfg.n_users = n_users;
  SyntheticWorld w;
  w.catalog = catalog;
  w.users = gen_users(cfg);
  w.prefs = gen_latent_prefs(w.users, cfg);
  w.dense = dense_ratings(w.prefs, catalog, cfg);
  for (const auto& p : w.prefs) w.hl_selection.push_back(hl_selection_from_prefs(p.probs, fixture_hl_labels()));
  return w;
}

std::vector<RatingEvent> milestone_ratings(const SyntheticWorld& world, std::size_t n_users, std::size_t count,
                                           std::uint64_t seed) {
  if (n_users > world.users.size()) throw InvariantError("milestone exceeds the generated population");
  const std::size_t n_items = world.catalog.size();
  if (count > n_users * n_items) throw InvariantError("milestone asks for more ratings than user/item pairs");
  struct Pair {
    double key;
    std::size_t u;
    std::size_t i;
  };
  std::vector<Pair> pairs;
  pairs.reserve(n_users * n_items);
  for (std::size_t u = 0; u < n_users; ++u) {
    for (std::size_t i = 0; i < n_items; ++i) {
      pairs.push_back({pair_key(seed, world.users[u].id, world.catalog[i].id, kOrderStream), u, i});
    }
  }
  std::partial_sort(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(count), pairs.end(),
                    [](const Pair& a, const Pair& b) {
                      if (a.key != b.key) return a.key < b.key;
                      return std::tie(a.u, a.i) < std::tie(b.u, b.i);
                    });
  std::vector<RatingEvent> out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    const Pair& p = pairs[j];
    out.push_back({world.users[p.u].id, world.catalog[p.i].id, world.dense[p.u * n_items + p.i],
                   static_cast<Timestamp>(j + 1)});
  }
  return out;
}

SimulationResult run_simulation(const SimulationPlan& plan, const EngineConfig& engine_cfg, const GenConfig& gen) {
  plan.validate();
  std::size_t max_users = 0;
  for (const auto& m : plan.milestones) max_users = std::max(max_users, m.users);
  GenConfig g = gen;
  g.seed = plan.seed;
  const OntologyGraph base = fixture_ontology(true);
  std::vector<ItemRecord> catalog;
  for (ItemId id : base.item_order()) catalog.push_back(base.item(id));
  const SyntheticWorld world = build_world(max_users, catalog, g);

  EngineConfig cfg = engine_cfg;
  cfg.auto_retrain = false;
  cfg.seed = plan.seed;

  SimulationResult result;
  for (const auto& milestone : plan.milestones) {
    Engine engine(base, cfg);
    for (std::size_t u = 0; u < milestone.users; ++u) {
      engine.add_user(world.users[u]);
      engine.set_preferences(world.users[u].id, world.hl_selection[u]);
    }
    const std::vector<RatingEvent> ratings = milestone_ratings(world, milestone.users, milestone.ratings, plan.seed);
    for (const auto& r : ratings) engine.add_rating(r);
    engine.retrain();

    MilestoneResult mr;
    mr.milestone = milestone;
    mr.phase = engine.phase();
    mr.stats = engine.stats();
    mr.weights = engine.weights();

    EvalSet set;
    set.k = plan.k;
    for (const auto& item : catalog) set.train_items.insert(item.id);
    set.features_hl = one_hot(engine.graph(), engine.matrices(), true);
    set.features_ll = one_hot(engine.graph(), engine.matrices(), false);
    std::map<ItemId, std::set<UserId>> raters;
    std::map<UserId, std::set<ItemId>> rated;
    for (const auto& r : ratings) {
      raters[r.item].insert(r.user);
      rated[r.user].insert(r.item);
    }
    for (const auto& item : catalog) set.consumption[item.id] = raters[item.id].size();
    set.population = milestone.users;

    std::vector<UserEval> truth(milestone.users);
    for (std::size_t u = 0; u < milestone.users; ++u) {
      const UserId id = world.users[u].id;
      truth[u].user = id;
      for (std::size_t i = 0; i < catalog.size(); ++i) {
        if (rated[id].contains(catalog[i].id)) continue;
        if (pair_key(plan.seed, id, catalog[i].id, kTestStream) >= plan.test_fraction) continue;
        if (world.dense[u * catalog.size() + i] >= plan.relevant_threshold) truth[u].relevant.insert(catalog[i].id);
      }
    }
    for (Member member : active_members(mr.phase)) {
      EvalSet s = set;
      s.users = truth;
      for (auto& ue : s.users) ue.recs = engine.member_recommend(ue.user, member, plan.k).items();
      mr.reports.push_back(evaluate(s, report_label(member)));
    }
    result.milestones.push_back(std::move(mr));
  }
  return result;
}

std::string milestone_csv(const MilestoneResult& m) {
  std::string out = std::string(kReportCsvHeader) + "\n";
  for (const auto& r : m.reports) out += report_csv_row(r) + "\n";
  return out;
}

std::string combined_csv(const SimulationResult& r) {
  std::string out = std::string("Users,Ratings,Phase,") + kReportCsvHeader + "\n";
  for (const auto& m : r.milestones) {
    for (const auto& rep : m.reports) {
      out += std::to_string(m.milestone.users) + "," + std::to_string(m.milestone.ratings) + "," +
             std::to_string(m.phase) + "," + report_csv_row(rep) + "\n";
    }
  }
  return out;
}

std::string scaled_csv(const SimulationResult& r) {
  std::vector<std::array<double, 7>> rows;
  for (const auto& m : r.milestones) {
    for (const auto& rep : m.reports) rows.push_back(metric_values(rep));
  }
  std::array<double, 7> lo{};
  std::array<double, 7> hi{};
  for (std::size_t c = 0; c < 7; ++c) {
    lo[c] = hi[c] = rows.empty() ? 0.0 : rows.front()[c];
    for (const auto& row : rows) {
      lo[c] = std::min(lo[c], row[c]);
      hi[c] = std::max(hi[c], row[c]);
    }
  }
  std::string out = std::string("Users,Ratings,Phase,") + kReportCsvHeader + "\n";
  std::size_t j = 0;
  for (const auto& m : r.milestones) {
    for (const auto& rep : m.reports) {
      out += std::to_string(m.milestone.users) + "," + std::to_string(m.milestone.ratings) + "," +
             std::to_string(m.phase) + "," + rep.model;
      for (std::size_t c = 0; c < 7; ++c) {
        const double v = hi[c] > lo[c] ? (rows[j][c] - lo[c]) / (hi[c] - lo[c]) : 0.0;
        out += "," + fmt6(v);
      }
      out += "\n";
      ++j;
    }
  }
  return out;
}

std::vector<std::string> write_simulation_outputs(const SimulationResult& r, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> paths;
  auto write = [&](const std::string& name, const std::string& text) {
    const std::string path = (std::filesystem::path(dir) / name).string();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path + "'");
    out << text;
    paths.push_back(path);
  };
  for (std::size_t i = 0; i < r.milestones.size(); ++i) {
    const auto& m = r.milestones[i];
    write("milestone_" + std::to_string(i + 1) + "_" + std::to_string(m.milestone.users) + "u_" +
              std::to_string(m.milestone.ratings) + "r.csv",
          milestone_csv(m));
  }
  write("comparison.csv", combined_csv(r));
  write("comparison_scaled.csv", scaled_csv(r));
  return paths;
}

}  // namespace tourrec
