#include "tourrec/orchestrator.hpp"

#include <algorithm>
#include <cmath>

#include "tourrec/error.hpp"

namespace tourrec {

namespace {

constexpr std::array<Member, kMemberCount> kAllMembers{Member::content, Member::hybrid, Member::demographic,
                                                       Member::collaborative};

// Survivors of the popularity filter always rank above backfill.
constexpr double kSurvivorOffset = 2.0;

void check_weights(const MemberWeights& w, const std::string& name) {
  double sum = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) throw InvariantError(name + " weights must be nonnegative");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvariantError(name + " weights must sum to 1");
}

json weights_to_json(const MemberWeights& w) {
  json out = json::object();
  for (Member m : kAllMembers) out[to_string(m)] = w[static_cast<std::size_t>(m)];
  return out;
}

MemberWeights weights_from_json(const json& v) {
  MemberWeights w{};
  for (auto it = v.begin(); it != v.end(); ++it) {
    bool known = false;
    for (Member m : kAllMembers) {
      if (it.key() == to_string(m)) {
        w[static_cast<std::size_t>(m)] = it.value().get<double>();
        known = true;
      }
    }
    if (!known) throw InvariantError("unknown recommender '" + it.key() + "' in weights");
  }
  return w;
}

double rank_key(const MemberScores& ms, const ScoredItem& s) {
  if (ms.member == Member::hybrid && !ms.backfilled.contains(s.item)) return s.score + kSurvivorOffset;
  return s.score;
}

void order_by_key(MemberScores& ms) {
  std::stable_sort(ms.scores.begin(), ms.scores.end(), [&](const ScoredItem& a, const ScoredItem& b) {
    const double ka = rank_key(ms, a);
    const double kb = rank_key(ms, b);
    if (ka != kb) return ka > kb;
    return a.item < b.item;
  });
}

ScoredItems restrict(const ScoredItems& scores, const std::vector<ItemId>& candidates) {
  const std::set<ItemId> allowed(candidates.begin(), candidates.end());
  ScoredItems out;
  for (const auto& s : scores) {
    if (allowed.contains(s.item)) out.push_back(s);
  }
  return out;
}

ScoredItems with_context(const ScoredItems& scores, const EnsembleInput& in) {
  if (in.catalog == nullptr || in.context_params == nullptr) {
    ScoredItems out = scores;
    rank(out);
    return out;
  }
  return apply_context(scores, *in.catalog, in.context, *in.context_params);
}

void add_flag(std::vector<std::string>& flags, const std::string& flag) {
  if (std::find(flags.begin(), flags.end(), flag) == flags.end()) flags.push_back(flag);
}

RecList own_list(const MemberScores& ms, std::size_t n) {
  RecList list;
  list.flags = ms.flags;
  if (ms.empty) {
    add_flag(list.flags, "empty");
    return list;
  }
  const std::string source = to_string(ms.member);
  for (const auto& s : ms.scores) {
    if (list.entries.size() >= n) break;
    list.entries.push_back({s.item, s.score, ms.backfilled.contains(s.item), {source}});
  }
  return list;
}

}  // namespace

std::string to_string(Member m) {
  switch (m) {
    case Member::content: return "content";
    case Member::hybrid: return "hybrid";
    case Member::demographic: return "demographic";
    case Member::collaborative: return "collaborative";
  }
  return "unknown";
}

std::string report_label(Member m) {
  switch (m) {
    case Member::content: return "Content";
    case Member::hybrid: return "Hybrid";
    case Member::demographic: return "Demog";
    case Member::collaborative: return "Collab";
  }
  return "Unknown";
}

double MaturityStats::density() const {
  if (users == 0 || items == 0) return 0.0;
  return static_cast<double>(ratings) / (static_cast<double>(users) * static_cast<double>(items));
}

void PhaseConfig::validate() const {
  if (p2_min_ratings < 1) throw InvariantError("phase-2 trigger needs at least one rating");
  if (p4_min_users < p3_min_users) throw InvariantError("phase-4 user trigger is below the phase-3 trigger");
  if (!(p4_min_density > 0.0 && p4_min_density <= 0.5)) throw InvariantError("phase-4 density trigger must lie in (0, 0.5]");
  check_weights(p3_weights, "phase-3");
  check_weights(p4_entry, "phase-4 entry");
  check_weights(p4_cap, "phase-4 cap");
}

json phase_config_to_json(const PhaseConfig& cfg) {
  return {{"p2_min_ratings", cfg.p2_min_ratings}, {"p3_min_users", cfg.p3_min_users},
          {"p3_min_ratings", cfg.p3_min_ratings}, {"p4_min_users", cfg.p4_min_users},
          {"p4_min_density", cfg.p4_min_density}, {"p3_weights", weights_to_json(cfg.p3_weights)},
          {"p4_entry", weights_to_json(cfg.p4_entry)}, {"p4_cap", weights_to_json(cfg.p4_cap)},
          {"borda", cfg.borda}};
}

PhaseConfig phase_config_from_json(const json& v) {
  PhaseConfig cfg;
  try {
    if (v.contains("p2_min_ratings")) cfg.p2_min_ratings = v.at("p2_min_ratings").get<std::size_t>();
    if (v.contains("p3_min_users")) cfg.p3_min_users = v.at("p3_min_users").get<std::size_t>();
    if (v.contains("p3_min_ratings")) cfg.p3_min_ratings = v.at("p3_min_ratings").get<std::size_t>();
    if (v.contains("p4_min_users")) cfg.p4_min_users = v.at("p4_min_users").get<std::size_t>();
    if (v.contains("p4_min_density")) cfg.p4_min_density = v.at("p4_min_density").get<double>();
    if (v.contains("p3_weights")) cfg.p3_weights = weights_from_json(v.at("p3_weights"));
    if (v.contains("p4_entry")) cfg.p4_entry = weights_from_json(v.at("p4_entry"));
    if (v.contains("p4_cap")) cfg.p4_cap = weights_from_json(v.at("p4_cap"));
    if (v.contains("borda")) cfg.borda = v.at("borda").get<bool>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("phase config: ") + e.what(), 0);
  }
  cfg.validate();
  return cfg;
}

int determine_phase(const MaturityStats& stats, const PhaseConfig& cfg, int previous) {
  int phase = 1;
  if (stats.ratings >= cfg.p2_min_ratings) phase = 2;
  if (stats.users >= cfg.p3_min_users && stats.ratings >= cfg.p3_min_ratings) phase = 3;
  if (stats.users >= cfg.p4_min_users && stats.density() >= cfg.p4_min_density) phase = 4;
  return std::max(phase, previous);
}

std::vector<Member> active_members(int phase) {
  switch (phase) {
    case 1: return {Member::content};
    case 2: return {Member::hybrid};
    case 3: return {Member::hybrid, Member::demographic};
    case 4: return {Member::hybrid, Member::demographic, Member::collaborative};
  }
  throw InvariantError("phase must lie in 1..4");
}

MemberWeights update_weights(int phase, const MaturityStats& stats, const PhaseConfig& cfg) {
  switch (phase) {
    case 1: return {1.0, 0.0, 0.0, 0.0};
    case 2: return {0.0, 1.0, 0.0, 0.0};
    case 3: return cfg.p3_weights;
    case 4: break;
    default: throw InvariantError("phase must lie in 1..4");
  }
  const double d4 = cfg.p4_min_density;
  const double t = std::clamp((stats.density() - d4) / d4, 0.0, 1.0);
  MemberWeights w{};
  double sum = 0.0;
  for (std::size_t i = 0; i < kMemberCount; ++i) {
    w[i] = cfg.p4_entry[i] + t * (cfg.p4_cap[i] - cfg.p4_entry[i]);
    sum += w[i];
  }
  for (double& x : w) x /= sum;
  return w;
}

std::vector<ItemId> candidate_items(const EnsembleInput& in) {
  std::vector<ItemId> items;
  if (in.matrices != nullptr) {
    items = in.matrices->item_ids;
  } else if (in.catalog != nullptr) {
    for (const auto& [id, _] : *in.catalog) items.push_back(id);
  }
  std::vector<ItemId> out;
  for (ItemId id : items) {
    if (!in.excluded.contains(id)) out.push_back(id);
  }
  if (in.catalog != nullptr && in.context.hotel && !in.context.distance_decay) {
    out = location_filter(out, *in.catalog, *in.context.hotel, in.context.radius_km);
  }
  return out;
}

MemberScores member_scores(Member m, const EnsembleInput& in, std::size_t n) {
  MemberScores out;
  out.member = m;
  const std::vector<ItemId> candidates = candidate_items(in);
  switch (m) {
    case Member::content:
    case Member::hybrid: {
      if (in.prefs == nullptr || in.matrices == nullptr) {
        out.empty = true;
        return out;
      }
      if (in.prefs->fallback) out.flags.push_back("fallback");
      ScoredItems content = restrict(content_scores(*in.prefs, *in.matrices, in.pref_cfg), candidates);
      if (m == Member::hybrid) {
        const PopularityStats none(in.pop_cfg.k, in.pop_cfg.default_global_mean);
        const PopularityStats& stats = in.popularity != nullptr ? *in.popularity : none;
        content = hybrid_scores(content, stats, n, in.pop_cfg, &out.backfilled);
        if (!out.backfilled.empty()) out.flags.push_back("backfilled");
      }
      out.scores = with_context(content, in);
      break;
    }
    case Member::demographic: {
      if (in.user == nullptr || in.demographic == nullptr || !in.demographic->fitted() || in.opinions == nullptr) {
        out.empty = true;
        return out;
      }
      bool empty = false;
      ScoredItems raw = demographic_scores(*in.user, *in.demographic, *in.opinions, candidates, in.knn_cfg, &empty);
      if (empty) {
        out.empty = true;
        return out;
      }
      for (auto& s : raw) s.score = std::clamp((s.score + 1.0) / 2.0, 0.0, 1.0);
      out.scores = with_context(raw, in);
      break;
    }
    case Member::collaborative: {
      if (in.user == nullptr || in.ffm == nullptr || in.vocab == nullptr || in.item_classes == nullptr) {
        out.empty = true;
        return out;
      }
      CollaborativeInput ci;
      ci.user = in.user;
      ci.candidates = candidates;
      ci.item_classes = in.item_classes;
      out.scores = with_context(collaborative_scores(ci, *in.ffm, *in.vocab), in);
      break;
    }
  }
  order_by_key(out);
  if (out.scores.empty()) out.empty = true;
  return out;
}

RecList member_recommend(Member m, const EnsembleInput& in, std::size_t n) {
  return own_list(member_scores(m, in, n), n);
}

RecList aggregate(const std::vector<MemberScores>& members, const MemberWeights& weights, std::size_t n, bool borda) {
  std::vector<const MemberScores*> usable;
  double total = 0.0;
  for (const auto& ms : members) {
    const double w = weights[static_cast<std::size_t>(ms.member)];
    if (!ms.empty && w > 0.0) {
      usable.push_back(&ms);
      total += w;
    }
  }
  if (usable.empty()) {
    RecList list;
    list.flags.push_back("empty");
    return list;
  }
  if (usable.size() == 1) return own_list(*usable.front(), n);

  std::map<ItemId, double> fused;
  std::map<ItemId, std::vector<std::string>> provenance;
  std::map<ItemId, std::vector<std::string>> scored_by;
  std::set<ItemId> backfilled;
  RecList list;
  for (const MemberScores* ms : usable) {
    const double w = weights[static_cast<std::size_t>(ms->member)] / total;
    const std::string name = to_string(ms->member);
    const std::size_t len = ms->scores.size();
    double lo = 0.0;
    double hi = 0.0;
    if (!borda) {
      lo = hi = rank_key(*ms, ms->scores.front());
      for (const auto& s : ms->scores) {
        lo = std::min(lo, rank_key(*ms, s));
        hi = std::max(hi, rank_key(*ms, s));
      }
    }
    for (std::size_t pos = 0; pos < len; ++pos) {
      const ScoredItem& s = ms->scores[pos];
      double norm = 1.0;
      if (borda) {
        norm = len > 1 ? static_cast<double>(len - 1 - pos) / static_cast<double>(len - 1) : 1.0;
      } else if (hi > lo) {
        norm = (rank_key(*ms, s) - lo) / (hi - lo);
      }
      fused[s.item] += w * norm;
      scored_by[s.item].push_back(name);
      if (pos < n) provenance[s.item].push_back(name);
    }
    for (ItemId b : ms->backfilled) backfilled.insert(b);
    for (const auto& f : ms->flags) add_flag(list.flags, f);
  }
  ScoredItems ranked;
  ranked.reserve(fused.size());
  for (const auto& [item, score] : fused) ranked.push_back({item, score});
  ranked = top_n(std::move(ranked), n);
  for (const auto& s : ranked) {
    auto it = provenance.find(s.item);
    list.entries.push_back(
        {s.item, s.score, backfilled.contains(s.item), it != provenance.end() ? it->second : scored_by[s.item]});
  }
  add_flag(list.flags, "ensemble");
  return list;
}

RecList ensemble_recommend(const EnsembleInput& in, int phase, const MemberWeights& weights, std::size_t n,
                           bool borda) {
  std::vector<MemberScores> members;
  for (Member m : active_members(phase)) members.push_back(member_scores(m, in, n));
  return aggregate(members, weights, n, borda);
}

}  // namespace tourrec
