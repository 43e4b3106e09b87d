#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tourrec/context.hpp"
#include "tourrec/demographic.hpp"
#include "tourrec/event_log.hpp"
#include "tourrec/ffm.hpp"
#include "tourrec/json.hpp"
#include "tourrec/ontology.hpp"
#include "tourrec/orchestrator.hpp"
#include "tourrec/popularity.hpp"
#include "tourrec/preferences.hpp"
#include "tourrec/user.hpp"

namespace tourrec {

struct EngineConfig {
  PhaseConfig phase;
  PreferenceConfig preferences;
  PopularityConfig popularity;
  KnnConfig knn;
  TrainConfig ffm;
  ContextParams context = default_context_params();
  double binning_threshold = kDefaultBinningThreshold;
  std::uint64_t seed = 7;
  /// Retrain models while events are ingested. Off means models only change
  /// through an explicit retrain().
  bool auto_retrain = true;
  std::size_t demographic_every = 50;
  std::size_t ffm_every = 100;
  /// 0 picks the cluster count by the knee rule.
  std::size_t demographic_k = 0;
  std::size_t demographic_k_max = 8;
  std::size_t default_n = 5;

  void validate() const;
};

json engine_config_to_json(const EngineConfig& cfg);
/// Missing keys keep their defaults.
EngineConfig engine_config_from_json(const json& v);
EngineConfig load_engine_config_file(const std::string& path);

/// Engine state is a fold over the event log. Every mutation goes through
/// submit(), which validates the event, hands it to the sink (the log
/// appender) and only then applies it.
class Engine {
 public:
  Engine(OntologyGraph base, EngineConfig cfg);

  const EngineConfig& config() const { return cfg_; }
  void set_sink(std::function<void(const Event&)> sink) { sink_ = std::move(sink); }

  Event submit(EventKind kind, json payload, Timestamp ts);
  /// Replay path. Throws InvariantError naming the missing sequence number on
  /// a gap.
  void apply(const Event& e);
  void replay(const std::vector<Event>& events);

  Event add_user(const UserRecord& user, Timestamp ts = 0);
  Event set_preferences(UserId user, const std::vector<double>& hl_selection, Timestamp ts = 0);
  Event add_feedback(const FeedbackEvent& event);
  Event add_rating(const RatingEvent& rating);
  Event add_item(const ItemRecord& item, const std::vector<ItemLink>& links = {}, Timestamp ts = 0);

  std::uint64_t high_water() const { return high_water_; }
  int phase() const { return phase_; }
  MaturityStats stats() const;
  MemberWeights weights() const { return update_weights(phase_, stats(), cfg_.phase); }

  bool has_user(UserId id) const { return users_.contains(id); }
  const UserRecord& user(UserId id) const;
  const std::map<UserId, UserRecord>& users() const { return users_; }
  UserId next_user_id() const;
  const PreferenceState& preferences(UserId id) const;
  const OntologyGraph& graph() const { return graph_; }
  const ContentMatrices& matrices() const { return matrices_; }
  const PopularityStats& popularity() const { return popularity_; }
  const OpinionBook& opinions() const { return opinions_; }
  const std::vector<RatingEvent>& ratings() const { return ratings_; }
  const ContextCatalog& catalog() const { return catalog_; }
  const std::map<ItemId, std::vector<std::string>>& item_classes() const { return item_classes_; }
  const DemographicModel* demographic() const { return demographic_ ? &*demographic_ : nullptr; }
  const FfmModel* ffm() const { return ffm_ ? &ffm_->model : nullptr; }
  const FfmVocab* vocab() const { return ffm_ ? &ffm_->vocab : nullptr; }

  /// Consumed (booked, rated, dismissed or bookmarked) items.
  std::set<ItemId> excluded(UserId id) const;
  EnsembleInput ensemble_input(UserId id, ContextState ctx) const;
  RecList recommend(UserId id, std::size_t n, ContextState ctx = {}) const;
  RecList member_recommend(UserId id, Member m, std::size_t n, ContextState ctx = {}) const;

  /// Fits every model the current phase needs.
  void retrain();
  void fit_demographic();
  void fit_collaborative();

  json profile(UserId id) const;
  json state_json() const;
  Snapshot snapshot() const;
  /// Loads a snapshot into a freshly constructed engine over the same base
  /// ontology.
  void load_snapshot(const Snapshot& s);

 private:
  struct Collaborative {
    FfmModel model;
    FfmVocab vocab;
  };

  void validate_event(EventKind kind, const json& payload) const;
  void apply_payload(const Event& e);
  void after_event(bool retrain_allowed);
  void rebuild_derived();
  void add_item_internal(const ItemRecord& item, const std::vector<ItemLink>& links);
  void index_item(ItemId id);
  void note_consumption(UserId user, ItemId item, Timestamp ts);

  EngineConfig cfg_;
  OntologyGraph graph_;
  ContentMatrices matrices_;
  ContextCatalog catalog_;
  std::map<ItemId, std::vector<std::string>> item_classes_;
  std::function<void(const Event&)> sink_;

  std::uint64_t high_water_ = 0;
  int phase_ = 1;
  std::map<UserId, UserRecord> users_;
  std::map<UserId, PreferenceState> prefs_;
  OpinionBook opinions_;
  PopularityStats popularity_;
  std::vector<RatingEvent> ratings_;
  std::map<UserId, std::set<ItemId>> dismissed_;
  std::map<UserId, std::map<ItemId, Timestamp>> last_consumed_;
  std::vector<std::pair<ItemRecord, std::vector<ItemLink>>> added_items_;

  std::optional<DemographicModel> demographic_;
  std::size_t demographic_users_at_fit_ = 0;
  std::optional<Collaborative> ffm_;
  std::size_t ffm_ratings_at_fit_ = 0;
};

/// Full replay, or snapshot plus the events after its high-water mark.
Engine restore_engine(const OntologyGraph& base, const EngineConfig& cfg, const Snapshot* snapshot,
                      const std::vector<Event>& events);

}  // namespace tourrec
