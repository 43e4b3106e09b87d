#include "tourrec/demographic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "tourrec/error.hpp"
#include "tourrec/random.hpp"

namespace tourrec {

void MixedDistanceSchema::validate() const {
  if (alpha < 0.0 || beta < 0.0 || std::abs(alpha + beta - 1.0) > 1e-12) {
    throw InvariantError("distance weights must be nonnegative and sum to 1");
  }
}

double mixed_distance(const UserRecord& u, const UserRecord& v, const MixedDistanceSchema& schema) {
  schema.validate();
  u.validate();
  v.validate();
  double manhattan = 0.0;
  for (std::size_t a = 0; a < kOrdinalCount; ++a) {
    const double range = static_cast<double>(ordinal_levels(static_cast<Ordinal>(a)).size() - 1);
    manhattan += std::abs(u.ordinal[a] - v.ordinal[a]) / range;
  }
  manhattan /= static_cast<double>(kOrdinalCount);

  // Each record is the set {attr=value}; one element per nominal attribute.
  std::size_t shared = 0;
  for (std::size_t a = 0; a < kNominalCount; ++a) shared += u.nominal[a] == v.nominal[a] ? 1 : 0;
  const double union_size = static_cast<double>(2 * kNominalCount - shared);
  const double jaccard = 1.0 - static_cast<double>(shared) / union_size;
  return schema.alpha * manhattan + schema.beta * jaccard;
}

void MixedData::validate() const {
  if (numeric.size() != rows * numeric_dims || categorical.size() != rows * categorical_dims) {
    throw DimensionError("mixed data buffers do not match the declared shape");
  }
}

MixedData users_to_mixed(const std::vector<UserRecord>& users) {
  MixedData d;
  d.rows = users.size();
  d.numeric_dims = kOrdinalCount;
  d.categorical_dims = kNominalCount;
  for (const auto& u : users) {
    for (int x : u.ordinal) d.numeric.push_back(static_cast<double>(x));
    for (int x : u.nominal) d.categorical.push_back(x);
  }
  return d;
}

std::size_t KPrototypesModel::predict(const std::vector<double>& numeric, const std::vector<int>& categorical) const {
  if (numeric.size() != mean.size()) throw DimensionError("numeric row has the wrong length");
  const std::size_t p = mean.size();
  const std::size_t q = k == 0 ? 0 : modes.size() / k;
  if (categorical.size() != q) throw DimensionError("categorical row has the wrong length");
  std::size_t best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    double cost = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double z = (numeric[j] - mean[j]) / scale[j] - centers[c * p + j];
      cost += z * z;
    }
    for (std::size_t j = 0; j < q; ++j) cost += categorical[j] != modes[c * q + j] ? gamma : 0.0;
    if (cost < best_cost) {
      best_cost = cost;
      best = c;
    }
  }
  return best;
}

json kprototypes_to_json(const KPrototypesModel& m) {
  return {{"k", m.k},
          {"gamma", m.gamma},
          {"mean", m.mean},
          {"scale", m.scale},
          {"centers", m.centers},
          {"modes", m.modes},
          {"assignments", m.assignments},
          {"cost", m.cost},
          {"cost_history", m.cost_history},
          {"iterations", m.iterations}};
}

KPrototypesModel kprototypes_from_json(const json& v) {
  KPrototypesModel m;
  m.k = v.at("k").get<std::size_t>();
  m.gamma = v.at("gamma").get<double>();
  m.mean = v.at("mean").get<std::vector<double>>();
  m.scale = v.at("scale").get<std::vector<double>>();
  m.centers = v.at("centers").get<std::vector<double>>();
  m.modes = v.at("modes").get<std::vector<int>>();
  m.assignments = v.at("assignments").get<std::vector<std::size_t>>();
  m.cost = v.at("cost").get<double>();
  m.cost_history = v.at("cost_history").get<std::vector<double>>();
  m.iterations = v.at("iterations").get<std::size_t>();
  return m;
}

namespace {

struct Workspace {
  std::size_t n = 0;
  std::size_t p = 0;
  std::size_t q = 0;
  std::size_t k = 0;
  double gamma = 0.0;
  std::vector<double> z;  // standardized numeric, n x p
  const std::vector<int>* cat = nullptr;
  std::vector<double> centers;
  std::vector<int> modes;

  double dissimilarity(std::size_t row, std::size_t c) const {
    double cost = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double d = z[row * p + j] - centers[c * p + j];
      cost += d * d;
    }
    for (std::size_t j = 0; j < q; ++j) cost += (*cat)[row * q + j] != modes[c * q + j] ? gamma : 0.0;
    return cost;
  }

  void set_prototype(std::size_t c, std::size_t row) {
    for (std::size_t j = 0; j < p; ++j) centers[c * p + j] = z[row * p + j];
    for (std::size_t j = 0; j < q; ++j) modes[c * q + j] = (*cat)[row * q + j];
  }

  std::size_t nearest(std::size_t row) const {
    std::size_t best = 0;
    double best_cost = dissimilarity(row, 0);
    for (std::size_t c = 1; c < k; ++c) {
      const double cost = dissimilarity(row, c);
      if (cost < best_cost) {
        best_cost = cost;
        best = c;
      }
    }
    return best;
  }

  double total_cost(const std::vector<std::size_t>& assign) const {
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) cost += dissimilarity(i, assign[i]);
    return cost;
  }

  // Moves the prototype of every empty cluster onto the point farthest from
  // its own prototype, taken from a cluster that keeps at least one member.
  void fill_empty(std::vector<std::size_t>& assign) {
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t a : assign) ++sizes[a];
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      std::size_t far = n;
      double far_cost = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[assign[i]] < 2) continue;
        const double cost = dissimilarity(i, assign[i]);
        if (cost > far_cost) {
          far_cost = cost;
          far = i;
        }
      }
      if (far == n) continue;
      set_prototype(c, far);
      --sizes[assign[far]];
      assign[far] = c;
      ++sizes[c];
    }
  }

  void update_prototypes(const std::vector<std::size_t>& assign) {
    std::vector<double> sums(k * p, 0.0);
    std::vector<std::size_t> sizes(k, 0);
    std::vector<std::map<int, std::size_t>> counts(k * q);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = assign[i];
      ++sizes[c];
      for (std::size_t j = 0; j < p; ++j) sums[c * p + j] += z[i * p + j];
      for (std::size_t j = 0; j < q; ++j) ++counts[c * q + j][(*cat)[i * q + j]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] == 0) continue;
      for (std::size_t j = 0; j < p; ++j) centers[c * p + j] = sums[c * p + j] / static_cast<double>(sizes[c]);
      for (std::size_t j = 0; j < q; ++j) {
        int mode = 0;
        std::size_t best = 0;
        for (const auto& [value, count] : counts[c * q + j]) {
          if (count > best) {
            best = count;
            mode = value;
          }
        }
        modes[c * q + j] = mode;
      }
    }
  }
};

}  // namespace

KPrototypesModel kprototypes_fit(const MixedData& data, const KPrototypesConfig& cfg) {
  data.validate();
  if (data.rows == 0) throw InvariantError("cannot cluster an empty data set");
  if (cfg.k == 0) throw InvariantError("k must be at least 1");
  if (cfg.k > data.rows) {
    throw InvariantError("k = " + std::to_string(cfg.k) + " exceeds the " + std::to_string(data.rows) + " rows");
  }

  Workspace w;
  w.n = data.rows;
  w.p = data.numeric_dims;
  w.q = data.categorical_dims;
  w.k = cfg.k;
  w.cat = &data.categorical;

  KPrototypesModel model;
  model.k = cfg.k;
  model.mean.assign(w.p, 0.0);
  model.scale.assign(w.p, 1.0);
  double sd_sum = 0.0;
  for (std::size_t j = 0; j < w.p; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < w.n; ++i) mean += data.num(i, j);
    mean /= static_cast<double>(w.n);
    double var = 0.0;
    for (std::size_t i = 0; i < w.n; ++i) var += (data.num(i, j) - mean) * (data.num(i, j) - mean);
    const double sd = std::sqrt(var / static_cast<double>(w.n));
    model.mean[j] = mean;
    model.scale[j] = sd > 0.0 ? sd : 1.0;
    sd_sum += sd > 0.0 ? 1.0 : 0.0;  // standardized columns have unit spread
  }
  w.z.resize(w.n * w.p);
  for (std::size_t i = 0; i < w.n; ++i) {
    for (std::size_t j = 0; j < w.p; ++j) w.z[i * w.p + j] = (data.num(i, j) - model.mean[j]) / model.scale[j];
  }
  model.gamma = cfg.gamma ? *cfg.gamma : (w.p > 0 ? 0.5 * sd_sum / static_cast<double>(w.p) : 0.5);
  if (model.gamma < 0.0) throw InvariantError("gamma must be nonnegative");
  w.gamma = model.gamma;

  bool have_best = false;
  const std::size_t runs = std::max<std::size_t>(cfg.n_init, 1);
  for (std::size_t run = 0; run < runs; ++run) {
    Rng rng(mix_seed(cfg.seed, run, 0x6b70));
    w.centers.assign(w.k * w.p, 0.0);
    w.modes.assign(w.k * w.q, 0);

    // Seeding: each new prototype is drawn proportionally to the distance to
    // the nearest prototype chosen so far.
    w.set_prototype(0, rng.below(w.n));
    std::vector<double> nearest(w.n, std::numeric_limits<double>::infinity());
    for (std::size_t c = 1; c < w.k; ++c) {
      for (std::size_t i = 0; i < w.n; ++i) nearest[i] = std::min(nearest[i], w.dissimilarity(i, c - 1));
      w.set_prototype(c, rng.categorical(nearest));
    }

    std::vector<std::size_t> assign(w.n);
    for (std::size_t i = 0; i < w.n; ++i) assign[i] = w.nearest(i);
    w.fill_empty(assign);
    std::vector<double> history{w.total_cost(assign)};
    std::size_t iterations = 0;
    while (iterations < cfg.max_iter) {
      ++iterations;
      w.update_prototypes(assign);
      std::vector<std::size_t> next(w.n);
      for (std::size_t i = 0; i < w.n; ++i) {
        // Keep the current cluster on ties so cost can only drop.
        const std::size_t best = w.nearest(i);
        next[i] = w.dissimilarity(i, best) < w.dissimilarity(i, assign[i]) ? best : assign[i];
      }
      w.fill_empty(next);
      const bool changed = next != assign;
      assign = std::move(next);
      history.push_back(w.total_cost(assign));
      if (!changed) break;
    }

    const double cost = history.back();
    if (!have_best || cost < model.cost) {
      have_best = true;
      model.cost = cost;
      model.centers = w.centers;
      model.modes = w.modes;
      model.assignments = assign;
      model.cost_history = std::move(history);
      model.iterations = iterations;
    }
  }
  return model;
}

std::size_t knee_index(const std::vector<double>& costs) {
  if (costs.size() < 3) return 0;
  const double first = costs.front();
  const double last = costs.back();
  double lo = *std::min_element(costs.begin(), costs.end());
  double hi = *std::max_element(costs.begin(), costs.end());
  const double span = hi - lo > 0.0 ? hi - lo : 1.0;
  const double n = static_cast<double>(costs.size() - 1);
  // Chord from (0, y0) to (1, y1) in scaled coordinates: (y1 - y0) x - y + y0 = 0.
  const double y0 = (first - lo) / span;
  const double y1 = (last - lo) / span;
  const double a = y1 - y0;
  const double norm = std::sqrt(a * a + 1.0);
  std::size_t best = 0;
  double best_distance = 0.0;
  for (std::size_t i = 1; i + 1 < costs.size(); ++i) {
    const double x = static_cast<double>(i) / n;
    const double y = (costs[i] - lo) / span;
    const double distance = std::abs(a * x - y + y0) / norm;
    if (distance > best_distance + 1e-12) {
      best_distance = distance;
      best = i;
    }
  }
  return best;
}

ChooseKResult choose_k(const MixedData& data, std::size_t k_min, std::size_t k_max, std::optional<double> gamma,
                       std::uint64_t seed, std::size_t n_init) {
  if (k_min < 1 || k_max < k_min) throw InvariantError("invalid k range");
  if (k_max > data.rows) throw InvariantError("k_max exceeds the number of rows");
  ChooseKResult result;
  for (std::size_t k = k_min; k <= k_max; ++k) {
    KPrototypesConfig cfg;
    cfg.k = k;
    cfg.gamma = gamma;
    cfg.seed = seed;
    cfg.n_init = n_init;
    result.costs.push_back(kprototypes_fit(data, cfg).cost);
  }
  result.k = k_min + knee_index(result.costs);
  return result;
}

void OpinionBook::record_implicit(UserId user, ItemId item, double signal) {
  auto& entry = entries_[user][item];
  if (entry.rated) return;
  entry.signal = signal;
  view_[user][item] = signal;
}

void OpinionBook::record_rating(UserId user, ItemId item, double signal) {
  entries_[user][item] = {signal, true};
  view_[user][item] = signal;
}

const std::map<ItemId, double>* OpinionBook::opinions(UserId user) const {
  auto it = view_.find(user);
  return it == view_.end() ? nullptr : &it->second;
}

bool OpinionBook::has_opinions(UserId user) const {
  auto it = view_.find(user);
  return it != view_.end() && !it->second.empty();
}

std::set<ItemId> OpinionBook::consumed(UserId user) const {
  std::set<ItemId> out;
  if (auto* ops = opinions(user)) {
    for (const auto& [item, s] : *ops) out.insert(item);
  }
  return out;
}

json OpinionBook::to_json() const {
  json out = json::array();
  for (const auto& [user, items] : entries_) {
    for (const auto& [item, e] : items) out.push_back({user, item, e.signal, e.rated});
  }
  return out;
}

OpinionBook OpinionBook::from_json(const json& v) {
  OpinionBook book;
  for (const auto& row : v) {
    const auto user = row.at(0).get<UserId>();
    const auto item = row.at(1).get<ItemId>();
    const double signal = row.at(2).get<double>();
    if (row.at(3).get<bool>()) {
      book.record_rating(user, item, signal);
    } else {
      book.record_implicit(user, item, signal);
    }
  }
  return book;
}

KnnPrediction knn_predict(const UserRecord& target, const std::vector<UserRecord>& candidates,
                          const OpinionBook& opinions, const KnnConfig& cfg) {
  KnnPrediction out;
  std::vector<Neighbor> pool;
  for (const auto& c : candidates) {
    if (c.id == target.id || !opinions.has_opinions(c.id)) continue;
    pool.push_back({c.id, mixed_distance(target, c, cfg.schema)});
  }
  std::sort(pool.begin(), pool.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.user < b.user;
  });
  if (pool.size() > cfg.k_nn) pool.resize(cfg.k_nn);
  out.neighbors = pool;
  out.empty = pool.empty();

  std::map<ItemId, std::pair<double, double>> acc;
  for (const auto& nb : pool) {
    const double w = 1.0 / (nb.distance + cfg.epsilon);
    for (const auto& [item, s] : *opinions.opinions(nb.user)) {
      auto& [num, den] = acc[item];
      num += w * s;
      den += w;
    }
  }
  for (const auto& [item, nd] : acc) out.scores[item] = nd.first / nd.second;
  return out;
}

DemographicModel DemographicModel::fit(std::vector<UserRecord> users, std::size_t k, std::uint64_t seed,
                                       std::size_t k_max, std::optional<double> gamma) {
  if (users.empty()) throw InvariantError("cannot fit a demographic model without users");
  std::sort(users.begin(), users.end(), [](const UserRecord& a, const UserRecord& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < users.size(); ++i) {
    if (users[i].id == users[i - 1].id) throw ConflictError("duplicate user id " + std::to_string(users[i].id));
  }
  const MixedData data = users_to_mixed(users);
  if (k == 0) k = choose_k(data, 1, std::min(k_max, users.size()), gamma, seed).k;
  KPrototypesConfig cfg;
  cfg.k = k;
  cfg.gamma = gamma;
  cfg.seed = seed;
  DemographicModel model;
  model.clusters_ = kprototypes_fit(data, cfg);
  model.users_ = std::move(users);
  return model;
}

std::size_t DemographicModel::cluster_of(const UserRecord& user) const {
  if (!fitted()) throw InvariantError("demographic model is not fitted");
  auto it = std::lower_bound(users_.begin(), users_.end(), user.id,
                             [](const UserRecord& u, UserId id) { return u.id < id; });
  if (it != users_.end() && it->id == user.id && *it == user) {
    return clusters_.assignments[static_cast<std::size_t>(it - users_.begin())];
  }
  std::vector<double> num(user.ordinal.begin(), user.ordinal.end());
  std::vector<int> cat(user.nominal.begin(), user.nominal.end());
  return clusters_.predict(num, cat);
}

std::vector<UserRecord> DemographicModel::cluster_members(const UserRecord& target) const {
  const std::size_t c = cluster_of(target);
  std::vector<UserRecord> out;
  for (std::size_t i = 0; i < users_.size(); ++i) {
    if (clusters_.assignments[i] == c && users_[i].id != target.id) out.push_back(users_[i]);
  }
  return out;
}

json DemographicModel::to_json() const {
  json users = json::array();
  for (const auto& u : users_) users.push_back(user_to_json(u));
  return {{"users", std::move(users)}, {"clusters", kprototypes_to_json(clusters_)}};
}

DemographicModel DemographicModel::from_json(const json& v) {
  DemographicModel m;
  for (const auto& u : v.at("users")) m.users_.push_back(user_from_json(u));
  m.clusters_ = kprototypes_from_json(v.at("clusters"));
  return m;
}

ScoredItems demographic_scores(const UserRecord& target, const DemographicModel& model, const OpinionBook& opinions,
                               const std::vector<ItemId>& candidates, const KnnConfig& cfg, bool* empty) {
  const KnnPrediction pred = knn_predict(target, model.cluster_members(target), opinions, cfg);
  if (empty) *empty = pred.empty;
  ScoredItems out;
  out.reserve(candidates.size());
  for (ItemId item : candidates) {
    auto it = pred.scores.find(item);
    out.push_back({item, it == pred.scores.end() ? 0.0 : it->second});
  }
  return out;
}

RecList recommend_demographic(const UserRecord& target, const DemographicModel& model, const OpinionBook& opinions,
                              const std::vector<ItemId>& catalog, std::size_t n, const KnnConfig& cfg) {
  const std::set<ItemId> consumed = opinions.consumed(target.id);
  const KnnPrediction pred = knn_predict(target, model.cluster_members(target), opinions, cfg);
  if (pred.empty) {
    RecList list;
    list.flags.push_back("empty");
    return list;
  }
  ScoredItems scores;
  for (ItemId item : catalog) {
    auto it = pred.scores.find(item);
    if (it != pred.scores.end() && !consumed.contains(item)) scores.push_back({item, it->second});
  }
  return make_reclist(top_n(std::move(scores), n), "demographic");
}

}  // namespace tourrec
