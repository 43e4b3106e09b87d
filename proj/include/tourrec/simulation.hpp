#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tourrec/engine.hpp"
#include "tourrec/metrics.hpp"
#include "tourrec/orchestrator.hpp"
#include "tourrec/synthetic.hpp"

namespace tourrec {

struct Milestone {
  std::size_t users = 0;
  std::size_t ratings = 0;

  bool operator==(const Milestone&) const = default;
};

struct SimulationPlan {
  std::vector<Milestone> milestones;
  std::uint64_t seed = 7;
  std::size_t k = 5;
  /// Fraction of user/item pairs held out as potential ground truth.
  double test_fraction = 0.2;
  /// Held-out pairs whose generated rating reaches this are relevant.
  double relevant_threshold = 3.0;

  /// Throws InvariantError unless milestones are non-empty, non-decreasing
  /// in both coordinates and start with at least one user.
  void validate() const;
};

/// The four-phase growth sequence (98/0, 98/64, 198/191, 250/191, 1000/883).
SimulationPlan default_plan();
/// Parses "users:ratings,users:ratings,...".
std::vector<Milestone> parse_milestones(const std::string& text);

/// Synthetic world shared by every milestone: users, latent preferences and
/// the dense rating matrix for the largest population, plus the order in
/// which user/item pairs receive ratings.
struct SyntheticWorld {
  std::vector<ItemRecord> catalog;
  std::vector<UserRecord> users;
  std::vector<LatentPrefRow> prefs;
  std::vector<std::vector<double>> hl_selection;
  /// users.size() x catalog.size(), row-major.
  std::vector<double> dense;
};

SyntheticWorld build_world(std::size_t n_users, const std::vector<ItemRecord>& catalog, const GenConfig& gen);

/// The first `count` ratings among users [0, n_users) in seeded pair order.
std::vector<RatingEvent> milestone_ratings(const SyntheticWorld& world, std::size_t n_users, std::size_t count,
                                           std::uint64_t seed);

struct MilestoneResult {
  Milestone milestone;
  int phase = 1;
  MaturityStats stats;
  MemberWeights weights{};
  std::vector<EvalReport> reports;
};

struct SimulationResult {
  std::vector<MilestoneResult> milestones;
};

/// Replays every milestone into a fresh engine over the fixture ontology and
/// evaluates each active recommender's top-k lists.
SimulationResult run_simulation(const SimulationPlan& plan, const EngineConfig& engine_cfg, const GenConfig& gen);

std::string milestone_csv(const MilestoneResult& m);
/// Every model row of every milestone, prefixed by Users,Ratings,Phase.
std::string combined_csv(const SimulationResult& r);
/// combined_csv with each metric column min-max scaled to [0, 1].
std::string scaled_csv(const SimulationResult& r);

/// Writes milestone_<i>_<users>u_<ratings>r.csv, comparison.csv and
/// comparison_scaled.csv into `dir` (created if missing). Returns the paths.
std::vector<std::string> write_simulation_outputs(const SimulationResult& r, const std::string& dir);

}  // namespace tourrec
