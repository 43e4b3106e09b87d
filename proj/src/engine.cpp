#include "tourrec/engine.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "tourrec/error.hpp"
#include "tourrec/random.hpp"

namespace tourrec {

namespace {

constexpr std::uint64_t kNegativeStream = 0x6e6567;

template <typename T>
void read_opt(const json& v, const char* key, T& out) {
  if (v.contains(key)) out = v.at(key).get<T>();
}

json pref_cfg_to_json(const PreferenceConfig& c) {
  return {{"eta_ll", c.eta_ll}, {"eta_hl", c.eta_hl}, {"w_hl", c.w_hl}, {"w_ll", c.w_ll}, {"fallback_ll", c.fallback_ll}};
}

json pop_cfg_to_json(const PopularityConfig& c) {
  return {{"k", c.k},
          {"threshold", c.threshold},
          {"default_global_mean", c.default_global_mean},
          {"use_raw_mean", c.use_raw_mean}};
}

json train_cfg_to_json(const TrainConfig& c) {
  return {{"d", c.d},           {"eta", c.eta},   {"lambda", c.lambda},         {"epochs", c.epochs},
          {"seed", c.seed},     {"init_scale", c.init_scale}, {"patience", c.patience}, {"linear_only", c.linear_only}};
}

std::string user_key(UserId id) { return std::to_string(id); }

}  // namespace

void EngineConfig::validate() const {
  phase.validate();
  preferences.validate();
  ffm.validate();
  context.validate();
  if (popularity.k < 0.0) throw InvariantError("damping count must be nonnegative");
  if (!(binning_threshold >= 0.0 && binning_threshold <= 1.0)) throw InvariantError("binning threshold must lie in [0, 1]");
  if (demographic_every == 0 || ffm_every == 0) throw InvariantError("retrain intervals must be positive");
  if (knn.k_nn == 0) throw InvariantError("k_nn must be positive");
  if (default_n == 0) throw InvariantError("default list length must be positive");
}

json engine_config_to_json(const EngineConfig& cfg) {
  return {{"phase", phase_config_to_json(cfg.phase)},
          {"preferences", pref_cfg_to_json(cfg.preferences)},
          {"popularity", pop_cfg_to_json(cfg.popularity)},
          {"knn", {{"k_nn", cfg.knn.k_nn}, {"epsilon", cfg.knn.epsilon},
                   {"alpha", cfg.knn.schema.alpha}, {"beta", cfg.knn.schema.beta}}},
          {"ffm", train_cfg_to_json(cfg.ffm)},
          {"context", context_params_to_json(cfg.context)},
          {"binning_threshold", cfg.binning_threshold},
          {"seed", cfg.seed},
          {"auto_retrain", cfg.auto_retrain},
          {"demographic_every", cfg.demographic_every},
          {"ffm_every", cfg.ffm_every},
          {"demographic_k", cfg.demographic_k},
          {"demographic_k_max", cfg.demographic_k_max},
          {"default_n", cfg.default_n}};
}

EngineConfig engine_config_from_json(const json& v) {
  EngineConfig cfg;
  try {
    if (v.contains("phase")) cfg.phase = phase_config_from_json(v.at("phase"));
    if (v.contains("preferences")) {
      const json& p = v.at("preferences");
      read_opt(p, "eta_ll", cfg.preferences.eta_ll);
      read_opt(p, "eta_hl", cfg.preferences.eta_hl);
      read_opt(p, "w_hl", cfg.preferences.w_hl);
      read_opt(p, "w_ll", cfg.preferences.w_ll);
      read_opt(p, "fallback_ll", cfg.preferences.fallback_ll);
    }
    if (v.contains("popularity")) {
      const json& p = v.at("popularity");
      read_opt(p, "k", cfg.popularity.k);
      read_opt(p, "threshold", cfg.popularity.threshold);
      read_opt(p, "default_global_mean", cfg.popularity.default_global_mean);
      read_opt(p, "use_raw_mean", cfg.popularity.use_raw_mean);
    }
    if (v.contains("knn")) {
      const json& p = v.at("knn");
      read_opt(p, "k_nn", cfg.knn.k_nn);
      read_opt(p, "epsilon", cfg.knn.epsilon);
      read_opt(p, "alpha", cfg.knn.schema.alpha);
      read_opt(p, "beta", cfg.knn.schema.beta);
    }
    if (v.contains("ffm")) {
      const json& p = v.at("ffm");
      read_opt(p, "d", cfg.ffm.d);
      read_opt(p, "eta", cfg.ffm.eta);
      read_opt(p, "lambda", cfg.ffm.lambda);
      read_opt(p, "epochs", cfg.ffm.epochs);
      read_opt(p, "seed", cfg.ffm.seed);
      read_opt(p, "init_scale", cfg.ffm.init_scale);
      read_opt(p, "patience", cfg.ffm.patience);
      read_opt(p, "linear_only", cfg.ffm.linear_only);
    }
    if (v.contains("context")) cfg.context = context_params_from_json(v.at("context"));
    read_opt(v, "binning_threshold", cfg.binning_threshold);
    read_opt(v, "seed", cfg.seed);
    read_opt(v, "auto_retrain", cfg.auto_retrain);
    read_opt(v, "demographic_every", cfg.demographic_every);
    read_opt(v, "ffm_every", cfg.ffm_every);
    read_opt(v, "demographic_k", cfg.demographic_k);
    read_opt(v, "demographic_k_max", cfg.demographic_k_max);
    read_opt(v, "default_n", cfg.default_n);
  } catch (const json::exception& e) {
    throw ParseError(std::string("engine config: ") + e.what(), 0);
  }
  cfg.validate();
  return cfg;
}

EngineConfig load_engine_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path + "'");
  json v;
  try {
    v = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
  return engine_config_from_json(v);
}

Engine::Engine(OntologyGraph base, EngineConfig cfg)
    : cfg_(std::move(cfg)), graph_(std::move(base)), popularity_(cfg_.popularity.k, cfg_.popularity.default_global_mean) {
  cfg_.validate();
  graph_.validate();
  matrices_ = content_matrices(graph_, cfg_.binning_threshold);
  for (ItemId id : graph_.item_order()) index_item(id);
}

void Engine::index_item(ItemId id) {
  const ItemRecord& item = graph_.item(id);
  item_classes_[id] = graph_.linked_classes(id, cfg_.binning_threshold);
  catalog_[id] = ContextItem{item.location, item_classes_[id]};
}

MaturityStats Engine::stats() const { return {users_.size(), ratings_.size(), graph_.item_count()}; }

const UserRecord& Engine::user(UserId id) const {
  auto it = users_.find(id);
  if (it == users_.end()) throw NotFoundError("unknown user " + std::to_string(id));
  return it->second;
}

UserId Engine::next_user_id() const { return users_.empty() ? 0 : users_.rbegin()->first + 1; }

const PreferenceState& Engine::preferences(UserId id) const {
  auto it = prefs_.find(id);
  if (it == prefs_.end()) throw NotFoundError("unknown user " + std::to_string(id));
  return it->second;
}

void Engine::validate_event(EventKind kind, const json& payload) const {
  auto need_user = [&](UserId id) {
    if (!users_.contains(id)) throw NotFoundError("unknown user " + std::to_string(id));
  };
  auto need_item = [&](ItemId id) {
    if (!graph_.has_item(id)) throw NotFoundError("unknown item " + std::to_string(id));
  };
  try {
    switch (kind) {
      case EventKind::user_created: {
        const UserRecord u = user_from_json(payload);
        if (users_.contains(u.id)) throw ConflictError("user " + std::to_string(u.id) + " already exists");
        break;
      }
      case EventKind::preferences_set: {
        need_user(payload.at("user").get<UserId>());
        const auto hl = payload.at("hl").get<std::vector<double>>();
        if (hl.size() != matrices_.hl_labels.size()) {
          throw DimensionError("preference vector has " + std::to_string(hl.size()) + " entries, expected " +
                               std::to_string(matrices_.hl_labels.size()));
        }
        for (double x : hl) {
          if (x != 0.0 && x != 1.0) throw InvariantError("preference selection entries must be 0 or 1");
        }
        break;
      }
      case EventKind::feedback: {
        const FeedbackEvent f = feedback_from_json(payload);
        f.validate();
        need_user(f.user);
        need_item(f.item);
        break;
      }
      case EventKind::rating: {
        const RatingEvent r = rating_from_json(payload);
        need_user(r.user);
        need_item(r.item);
        break;
      }
      case EventKind::item_added: {
        const ItemRecord item = item_from_json(payload.at("item"));
        if (graph_.has_item(item.id)) throw ConflictError("item " + std::to_string(item.id) + " already exists");
        for (const auto& c : item.categories) {
          if (graph_.resolve(c).empty()) throw InvariantError("unknown category '" + c + "'");
        }
        if (payload.contains("links")) {
          for (const auto& l : payload.at("links")) {
            const auto label = l.at("class").get<std::string>();
            const double score = l.at("score").get<double>();
            if (!graph_.has_ll(label)) throw InvariantError("unknown low-level class '" + label + "'");
            if (!(score >= 0.0 && score <= 1.0)) throw InvariantError("link score must lie in [0, 1]");
          }
        }
        break;
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed ") + to_string(kind) + " payload: " + e.what(), 0);
  }
}

Event Engine::submit(EventKind kind, json payload, Timestamp ts) {
  validate_event(kind, payload);
  Event e{high_water_ + 1, ts, kind, std::move(payload)};
  if (sink_) sink_(e);
  apply_payload(e);
  high_water_ = e.seq;
  after_event(cfg_.auto_retrain);
  return e;
}

void Engine::apply(const Event& e) {
  if (e.seq != high_water_ + 1) {
    throw InvariantError("event log gap: missing sequence number " + std::to_string(high_water_ + 1));
  }
  validate_event(e.kind, e.payload);
  apply_payload(e);
  high_water_ = e.seq;
  after_event(cfg_.auto_retrain);
}

void Engine::replay(const std::vector<Event>& events) {
  for (const auto& e : events) apply(e);
}

Event Engine::add_user(const UserRecord& user, Timestamp ts) {
  user.validate();
  return submit(EventKind::user_created, user_to_json(user), ts);
}

Event Engine::set_preferences(UserId user, const std::vector<double>& hl_selection, Timestamp ts) {
  return submit(EventKind::preferences_set, {{"user", user}, {"hl", hl_selection}}, ts);
}

Event Engine::add_feedback(const FeedbackEvent& event) {
  return submit(EventKind::feedback, feedback_to_json(event), event.timestamp);
}

Event Engine::add_rating(const RatingEvent& rating) {
  return submit(EventKind::rating, rating_to_json(rating), rating.timestamp);
}

Event Engine::add_item(const ItemRecord& item, const std::vector<ItemLink>& links, Timestamp ts) {
  json payload = {{"item", item_to_json(item)}};
  if (!links.empty()) {
    json arr = json::array();
    for (const auto& l : links) arr.push_back({{"class", l.ll_class}, {"score", l.score}});
    payload["links"] = arr;
  }
  return submit(EventKind::item_added, std::move(payload), ts);
}

void Engine::note_consumption(UserId user, ItemId item, Timestamp ts) {
  auto& slot = last_consumed_[user][item];
  slot = std::max(slot, ts);
}

void Engine::add_item_internal(const ItemRecord& item, const std::vector<ItemLink>& links) {
  graph_.add_item(item);
  for (const auto& l : links) graph_.link(item.id, l.ll_class, l.score);
  added_items_.emplace_back(item, links);
  matrices_ = content_matrices(graph_, cfg_.binning_threshold);
  index_item(item.id);
  for (auto& [id, state] : prefs_) refresh_item_cache(state, matrices_);
}

void Engine::apply_payload(const Event& e) {
  switch (e.kind) {
    case EventKind::user_created: {
      const UserRecord u = user_from_json(e.payload);
      users_[u.id] = u;
      prefs_[u.id] = init_preferences(u.id, std::vector<double>(matrices_.hl_labels.size(), 0.0), matrices_,
                                      cfg_.preferences, e.timestamp);
      break;
    }
    case EventKind::preferences_set: {
      const auto id = e.payload.at("user").get<UserId>();
      prefs_[id] = init_preferences(id, e.payload.at("hl").get<std::vector<double>>(), matrices_, cfg_.preferences,
                                    e.timestamp);
      break;
    }
    case EventKind::feedback: {
      const FeedbackEvent f = feedback_from_json(e.payload);
      prefs_[f.user] = apply_feedback(prefs_.at(f.user), f, matrices_, cfg_.preferences);
      if (f.kind == FeedbackKind::rate && f.rating) {
        opinions_.record_rating(f.user, f.item, rating_signal(*f.rating));
      } else {
        opinions_.record_implicit(f.user, f.item, feedback_signal(f));
      }
      if (f.kind == FeedbackKind::dismiss) dismissed_[f.user].insert(f.item);
      if (f.kind == FeedbackKind::book || f.kind == FeedbackKind::rate) note_consumption(f.user, f.item, e.timestamp);
      break;
    }
    case EventKind::rating: {
      const RatingEvent r = rating_from_json(e.payload);
      ratings_.push_back(r);
      popularity_.add(r);
      opinions_.record_rating(r.user, r.item, rating_signal(r.rating));
      FeedbackEvent f{r.user, r.item, FeedbackKind::rate, r.rating, e.timestamp};
      prefs_[r.user] = apply_feedback(prefs_.at(r.user), f, matrices_, cfg_.preferences);
      note_consumption(r.user, r.item, e.timestamp);
      break;
    }
    case EventKind::item_added: {
      const ItemRecord item = item_from_json(e.payload.at("item"));
      std::vector<ItemLink> links;
      if (e.payload.contains("links")) {
        for (const auto& l : e.payload.at("links")) {
          links.push_back({item.id, l.at("class").get<std::string>(), l.at("score").get<double>()});
        }
      }
      add_item_internal(item, links);
      break;
    }
  }
}

void Engine::after_event(bool retrain_allowed) {
  const MaturityStats s = stats();
  const int next = determine_phase(s, cfg_.phase, phase_);
  const bool entered = next > phase_;
  phase_ = next;
  if (!retrain_allowed) return;
  if (phase_ >= 3 && (entered || !demographic_ || s.users >= demographic_users_at_fit_ + cfg_.demographic_every)) {
    fit_demographic();
  }
  if (phase_ >= 4 && (entered || !ffm_ || s.ratings >= ffm_ratings_at_fit_ + cfg_.ffm_every)) {
    fit_collaborative();
  }
}

void Engine::retrain() {
  if (phase_ >= 3) fit_demographic();
  if (phase_ >= 4) fit_collaborative();
}

void Engine::fit_demographic() {
  if (users_.empty()) return;
  std::vector<UserRecord> all;
  all.reserve(users_.size());
  for (const auto& [id, u] : users_) all.push_back(u);
  demographic_ = DemographicModel::fit(std::move(all), cfg_.demographic_k, cfg_.seed, cfg_.demographic_k_max);
  demographic_users_at_fit_ = users_.size();
}

void Engine::fit_collaborative() {
  Collaborative c;
  std::vector<FfmExample> data;
  const std::vector<ItemId>& items = graph_.item_order();
  for (const auto& [id, u] : users_) {
    const auto* ops = opinions_.opinions(id);
    if (ops == nullptr || ops->empty()) continue;
    bool any_negative = false;
    for (const auto& [item, signal] : *ops) {
      const bool positive = signal >= 0.0;
      any_negative = any_negative || !positive;
      data.push_back({positive ? 1 : 0, encode_example(u, item, item_classes_.at(item), {}, c.vocab)});
    }
    if (any_negative) continue;
    std::vector<ItemId> pool;
    for (ItemId item : items) {
      if (!ops->contains(item)) pool.push_back(item);
    }
    Rng rng(mix_seed(cfg_.seed, kNegativeStream, static_cast<std::uint64_t>(id)));
    rng.shuffle(pool);
    const std::size_t take = std::min(pool.size(), ops->size());
    for (std::size_t j = 0; j < take; ++j) {
      data.push_back({0, encode_example(u, pool[j], item_classes_.at(pool[j]), {}, c.vocab)});
    }
  }
  if (data.empty()) return;
  TrainConfig tc = cfg_.ffm;
  tc.seed = mix_seed(cfg_.seed, tc.seed);
  TrainResult result = ffm_train(data, tc, nullptr, c.vocab.feature_count(), c.vocab.field_count());
  c.vocab.freeze();
  c.model = std::move(result.model);
  ffm_ = std::move(c);
  ffm_ratings_at_fit_ = ratings_.size();
}

std::set<ItemId> Engine::excluded(UserId id) const {
  std::set<ItemId> out = opinions_.consumed(id);
  if (auto it = dismissed_.find(id); it != dismissed_.end()) out.insert(it->second.begin(), it->second.end());
  return out;
}

EnsembleInput Engine::ensemble_input(UserId id, ContextState ctx) const {
  EnsembleInput in;
  in.prefs = &preferences(id);
  in.matrices = &matrices_;
  in.popularity = &popularity_;
  in.pop_cfg = cfg_.popularity;
  in.pref_cfg = cfg_.preferences;
  in.user = &user(id);
  in.demographic = demographic();
  in.opinions = &opinions_;
  in.knn_cfg = cfg_.knn;
  in.ffm = ffm();
  in.vocab = vocab();
  in.item_classes = &item_classes_;
  in.catalog = &catalog_;
  in.context_params = &cfg_.context;
  if (auto it = last_consumed_.find(id); it != last_consumed_.end()) {
    for (const auto& [item, ts] : it->second) {
      auto& slot = ctx.last_consumed[item];
      slot = std::max(slot, ts);
    }
  }
  in.context = std::move(ctx);
  in.excluded = excluded(id);
  return in;
}

RecList Engine::recommend(UserId id, std::size_t n, ContextState ctx) const {
  const EnsembleInput in = ensemble_input(id, std::move(ctx));
  return ensemble_recommend(in, phase_, weights(), n, cfg_.phase.borda);
}

RecList Engine::member_recommend(UserId id, Member m, std::size_t n, ContextState ctx) const {
  return tourrec::member_recommend(m, ensemble_input(id, std::move(ctx)), n);
}

json Engine::profile(UserId id) const {
  const UserRecord& u = user(id);
  const PreferenceState& p = preferences(id);
  json hl = json::object();
  for (std::size_t i = 0; i < matrices_.hl_labels.size(); ++i) hl[matrices_.hl_labels[i]] = p.hl[i];
  json ll = json::object();
  for (std::size_t j = 0; j < matrices_.ll_labels.size(); ++j) ll[matrices_.ll_labels[j]] = p.ll[j];
  json opinions = json::object();
  if (const auto* ops = opinions_.opinions(id)) {
    for (const auto& [item, signal] : *ops) opinions[std::to_string(item)] = signal;
  }
  json out = {{"user", user_to_json(u)},      {"hl", hl},
              {"ll", ll},                     {"feedback_count", p.feedback_count},
              {"fallback", p.fallback},       {"opinions", opinions},
              {"phase", phase_}};
  if (demographic_) out["cluster"] = demographic_->cluster_of(u);
  return out;
}

json Engine::state_json() const {
  json users = json::array();
  for (const auto& [id, u] : users_) users.push_back(user_to_json(u));
  json prefs = json::array();
  for (const auto& [id, p] : prefs_) prefs.push_back(preferences_to_json(p));
  json ratings = json::array();
  for (const auto& r : ratings_) ratings.push_back(rating_to_json(r));
  json dismissed = json::object();
  for (const auto& [id, items] : dismissed_) dismissed[user_key(id)] = items;
  json consumed = json::array();
  for (const auto& [id, items] : last_consumed_) {
    for (const auto& [item, ts] : items) consumed.push_back({id, item, ts});
  }
  json added = json::array();
  for (const auto& [item, links] : added_items_) {
    json arr = json::array();
    for (const auto& l : links) arr.push_back({{"class", l.ll_class}, {"score", l.score}});
    added.push_back({{"item", item_to_json(item)}, {"links", arr}});
  }
  json out = {{"high_water", high_water_},
              {"phase", phase_},
              {"users", users},
              {"preferences", prefs},
              {"opinions", opinions_.to_json()},
              {"ratings", ratings},
              {"dismissed", dismissed},
              {"last_consumed", consumed},
              {"added_items", added},
              {"demographic", nullptr},
              {"collaborative", nullptr}};
  if (demographic_) {
    out["demographic"] = {{"model", demographic_->to_json()}, {"users_at_fit", demographic_users_at_fit_}};
  }
  if (ffm_) {
    out["collaborative"] = {{"model", ffm_model_to_json(ffm_->model)},
                            {"vocab", ffm_->vocab.to_json()},
                            {"ratings_at_fit", ffm_ratings_at_fit_}};
  }
  return out;
}

Snapshot Engine::snapshot() const { return {kSnapshotVersion, high_water_, state_json()}; }

void Engine::load_snapshot(const Snapshot& s) {
  if (high_water_ != 0 || !users_.empty()) throw InvariantError("snapshots load only into a fresh engine");
  const json& st = s.state;
  try {
    if (st.at("high_water").get<std::uint64_t>() != s.high_water) {
      throw InvariantError("snapshot high-water mark disagrees with its state");
    }
    for (const auto& a : st.at("added_items")) {
      const ItemRecord item = item_from_json(a.at("item"));
      std::vector<ItemLink> links;
      for (const auto& l : a.at("links")) {
        links.push_back({item.id, l.at("class").get<std::string>(), l.at("score").get<double>()});
      }
      add_item_internal(item, links);
    }
    for (const auto& u : st.at("users")) {
      const UserRecord rec = user_from_json(u);
      users_[rec.id] = rec;
    }
    for (const auto& p : st.at("preferences")) {
      PreferenceState state = preferences_from_json(p);
      prefs_[state.user] = std::move(state);
    }
    opinions_ = OpinionBook::from_json(st.at("opinions"));
    for (const auto& r : st.at("ratings")) {
      const RatingEvent rating = rating_from_json(r);
      ratings_.push_back(rating);
      popularity_.add(rating);
    }
    for (auto it = st.at("dismissed").begin(); it != st.at("dismissed").end(); ++it) {
      dismissed_[std::stoll(it.key())] = it.value().get<std::set<ItemId>>();
    }
    for (const auto& row : st.at("last_consumed")) {
      last_consumed_[row.at(0).get<UserId>()][row.at(1).get<ItemId>()] = row.at(2).get<Timestamp>();
    }
    if (!st.at("demographic").is_null()) {
      demographic_ = DemographicModel::from_json(st.at("demographic").at("model"));
      demographic_users_at_fit_ = st.at("demographic").at("users_at_fit").get<std::size_t>();
    }
    if (!st.at("collaborative").is_null()) {
      Collaborative c;
      c.model = ffm_model_from_json(st.at("collaborative").at("model"));
      c.vocab = FfmVocab::from_json(st.at("collaborative").at("vocab"));
      c.vocab.freeze();
      ffm_ = std::move(c);
      ffm_ratings_at_fit_ = st.at("collaborative").at("ratings_at_fit").get<std::size_t>();
    }
    phase_ = st.at("phase").get<int>();
    high_water_ = s.high_water;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed snapshot state: ") + e.what(), 0);
  }
}

Engine restore_engine(const OntologyGraph& base, const EngineConfig& cfg, const Snapshot* snapshot,
                      const std::vector<Event>& events) {
  Engine engine(base, cfg);
  std::uint64_t after = 0;
  if (snapshot != nullptr) {
    engine.load_snapshot(*snapshot);
    after = snapshot->high_water;
  }
  std::vector<Event> tail;
  for (const auto& e : events) {
    if (e.seq > after) tail.push_back(e);
  }
  check_contiguous(tail, after);
  engine.replay(tail);
  return engine;
}

}  // namespace tourrec
