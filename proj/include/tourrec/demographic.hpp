#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "tourrec/json.hpp"
#include "tourrec/reclist.hpp"
#include "tourrec/user.hpp"

namespace tourrec {

struct MixedDistanceSchema {
  double alpha = 0.5;
  double beta = 0.5;

  void validate() const;
};

/// alpha * mean range-normalized Manhattan distance over the ordinals +
/// beta * Jaccard distance between the attribute=value sets of the nominals.
double mixed_distance(const UserRecord& u, const UserRecord& v, const MixedDistanceSchema& schema = {});

/// Row-major mixed-type data: n rows of numeric columns and categorical codes.
struct MixedData {
  std::size_t rows = 0;
  std::size_t numeric_dims = 0;
  std::size_t categorical_dims = 0;
  std::vector<double> numeric;
  std::vector<int> categorical;

  double num(std::size_t r, std::size_t c) const { return numeric[r * numeric_dims + c]; }
  int cat(std::size_t r, std::size_t c) const { return categorical[r * categorical_dims + c]; }
  void validate() const;
};

/// Ordinals as numbers, nominals as codes, in the given user order.
MixedData users_to_mixed(const std::vector<UserRecord>& users);

struct KPrototypesConfig {
  std::size_t k = 1;
  /// Nominal mismatch weight; defaults to half the mean standard deviation
  /// of the standardized numeric columns.
  std::optional<double> gamma;
  std::uint64_t seed = 0;
  std::size_t max_iter = 100;
  /// Independent seeded initializations; the lowest final cost wins.
  std::size_t n_init = 4;
};

struct KPrototypesModel {
  std::size_t k = 0;
  double gamma = 0.0;
  /// Standardization applied to numeric columns before clustering.
  std::vector<double> mean;
  std::vector<double> scale;
  /// k x numeric_dims centers in standardized units.
  std::vector<double> centers;
  /// k x categorical_dims modes.
  std::vector<int> modes;
  std::vector<std::size_t> assignments;
  double cost = 0.0;
  /// Objective after initial assignment and after every iteration of the
  /// winning run.
  std::vector<double> cost_history;
  std::size_t iterations = 0;

  /// Nearest prototype for a raw (unstandardized) row; ties go to the lowest index.
  std::size_t predict(const std::vector<double>& numeric, const std::vector<int>& categorical) const;
  bool operator==(const KPrototypesModel&) const = default;
};

json kprototypes_to_json(const KPrototypesModel& m);
KPrototypesModel kprototypes_from_json(const json& v);

/// Lloyd-style alternation under squared Euclidean (standardized numeric)
/// + gamma * nominal mismatches. Throws InvariantError when k > rows.
KPrototypesModel kprototypes_fit(const MixedData& data, const KPrototypesConfig& cfg);

/// Knee of a decreasing cost curve: the index maximizing the perpendicular
/// distance from the chord between the end points (axes scaled to [0,1]);
/// ties go to the smaller index.
std::size_t knee_index(const std::vector<double>& costs);

struct ChooseKResult {
  std::size_t k = 1;
  std::vector<double> costs;
};

ChooseKResult choose_k(const MixedData& data, std::size_t k_min, std::size_t k_max, std::optional<double> gamma,
                       std::uint64_t seed, std::size_t n_init = 4);

/// Per-user opinions on items in [-1, 1]. A rating overrides implicit
/// feedback; otherwise the latest implicit signal counts.
class OpinionBook {
 public:
  void record_implicit(UserId user, ItemId item, double signal);
  void record_rating(UserId user, ItemId item, double signal);

  const std::map<ItemId, double>* opinions(UserId user) const;
  bool has_opinions(UserId user) const;
  std::set<ItemId> consumed(UserId user) const;

  json to_json() const;
  static OpinionBook from_json(const json& v);
  bool operator==(const OpinionBook&) const = default;

 private:
  struct Entry {
    double signal = 0.0;
    bool rated = false;
    bool operator==(const Entry&) const = default;
  };
  std::map<UserId, std::map<ItemId, Entry>> entries_;
  std::map<UserId, std::map<ItemId, double>> view_;
};

struct Neighbor {
  UserId user = 0;
  double distance = 0.0;
};

struct KnnConfig {
  std::size_t k_nn = 10;
  double epsilon = 1e-6;
  MixedDistanceSchema schema;
};

struct KnnPrediction {
  /// Item -> weighted mean opinion. Items without neighbor opinions are absent.
  std::map<ItemId, double> scores;
  std::vector<Neighbor> neighbors;
  bool empty = true;
};

/// Inverse-distance weighted mean of neighbor opinions over the K nearest
/// candidates that have at least one opinion. Ties in distance go to the
/// lower user id.
KnnPrediction knn_predict(const UserRecord& target, const std::vector<UserRecord>& candidates,
                          const OpinionBook& opinions, const KnnConfig& cfg = {});

/// Fitted clustering over a user population.
class DemographicModel {
 public:
  DemographicModel() = default;

  /// Users are sorted by id before fitting. k == 0 selects k by the knee rule
  /// over [1, min(k_max, n)].
  static DemographicModel fit(std::vector<UserRecord> users, std::size_t k, std::uint64_t seed,
                              std::size_t k_max = 8, std::optional<double> gamma = std::nullopt);

  bool fitted() const { return clusters_.k > 0; }
  std::size_t user_count() const { return users_.size(); }
  const KPrototypesModel& clusters() const { return clusters_; }
  /// Cluster of a fitted user, or the nearest prototype for a new one.
  std::size_t cluster_of(const UserRecord& user) const;
  /// Fitted users sharing the target's cluster, target excluded.
  std::vector<UserRecord> cluster_members(const UserRecord& target) const;

  json to_json() const;
  static DemographicModel from_json(const json& v);
  bool operator==(const DemographicModel&) const = default;

 private:
  std::vector<UserRecord> users_;
  KPrototypesModel clusters_;
};

/// Ranked kNN scores inside the target's cluster for the catalog items some
/// neighbor has an opinion on, excluding consumed items.
/// Flags "empty" when no neighbor has feedback.
RecList recommend_demographic(const UserRecord& target, const DemographicModel& model, const OpinionBook& opinions,
                              const std::vector<ItemId>& catalog, std::size_t n, const KnnConfig& cfg = {});

/// Raw kNN score per candidate item (0 for items without neighbor opinions).
ScoredItems demographic_scores(const UserRecord& target, const DemographicModel& model, const OpinionBook& opinions,
                               const std::vector<ItemId>& candidates, const KnnConfig& cfg, bool* empty);

}  // namespace tourrec
