#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tourrec/context.hpp"
#include "tourrec/demographic.hpp"
#include "tourrec/ffm.hpp"
#include "tourrec/json.hpp"
#include "tourrec/popularity.hpp"
#include "tourrec/preferences.hpp"
#include "tourrec/reclist.hpp"

namespace tourrec {

enum class Member { content = 0, hybrid = 1, demographic = 2, collaborative = 3 };
inline constexpr std::size_t kMemberCount = 4;

/// "content", "hybrid", "demographic", "collaborative".
std::string to_string(Member m);
/// Short labels used in report tables: Content, Hybrid, Demog, Collab.
std::string report_label(Member m);

/// Indexed by Member.
using MemberWeights = std::array<double, kMemberCount>;

struct MaturityStats {
  std::size_t users = 0;
  std::size_t ratings = 0;
  std::size_t items = 0;

  /// ratings / (users * items), 0 for an empty matrix.
  double density() const;
};

struct PhaseConfig {
  std::size_t p2_min_ratings = 1;
  std::size_t p3_min_users = 150;
  std::size_t p3_min_ratings = 150;
  std::size_t p4_min_users = 225;
  double p4_min_density = 0.025;
  MemberWeights p3_weights{0.0, 0.5, 0.5, 0.0};
  MemberWeights p4_entry{0.0, 0.35, 0.35, 0.30};
  MemberWeights p4_cap{0.0, 0.25, 0.25, 0.50};
  /// Rank-based Borda aggregation instead of min-max score fusion.
  bool borda = false;

  void validate() const;
};

json phase_config_to_json(const PhaseConfig& cfg);
PhaseConfig phase_config_from_json(const json& v);

/// Highest phase whose trigger holds, never below `previous`.
int determine_phase(const MaturityStats& stats, const PhaseConfig& cfg, int previous = 1);

std::vector<Member> active_members(int phase);

/// Phase 1 and 2 put all weight on their single member. In phase 4 the
/// collaborative weight ramps linearly from the entry to the cap vector as
/// density grows from the trigger density to twice that.
MemberWeights update_weights(int phase, const MaturityStats& stats, const PhaseConfig& cfg);

/// Everything a member needs to score one user's candidates. Pointers left
/// null disable the members that need them.
struct EnsembleInput {
  const PreferenceState* prefs = nullptr;
  const ContentMatrices* matrices = nullptr;
  const PopularityStats* popularity = nullptr;
  PopularityConfig pop_cfg;
  PreferenceConfig pref_cfg;

  const UserRecord* user = nullptr;
  const DemographicModel* demographic = nullptr;
  const OpinionBook* opinions = nullptr;
  KnnConfig knn_cfg;

  const FfmModel* ffm = nullptr;
  const FfmVocab* vocab = nullptr;
  const std::map<ItemId, std::vector<std::string>>* item_classes = nullptr;

  const ContextCatalog* catalog = nullptr;
  const ContextParams* context_params = nullptr;
  ContextState context;

  /// Items never recommended to this user (consumed or dismissed).
  std::set<ItemId> excluded;
};

/// Nonnegative member scores after the candidate filter and context
/// multipliers, ranked. `empty` is set when the member has nothing to say.
struct MemberScores {
  Member member = Member::content;
  ScoredItems scores;
  std::set<ItemId> backfilled;
  std::vector<std::string> flags;
  bool empty = false;
};

/// Candidate set: every item column minus exclusions, then the location filter.
std::vector<ItemId> candidate_items(const EnsembleInput& in);

MemberScores member_scores(Member m, const EnsembleInput& in, std::size_t n);

/// One member's own top-n list.
RecList member_recommend(Member m, const EnsembleInput& in, std::size_t n);

/// Weighted fusion of member outputs. A single usable member returns its own
/// list unchanged; flagged-empty members are dropped and weights renormalized.
RecList aggregate(const std::vector<MemberScores>& members, const MemberWeights& weights, std::size_t n,
                  bool borda = false);

RecList ensemble_recommend(const EnsembleInput& in, int phase, const MemberWeights& weights, std::size_t n,
                           bool borda = false);

}  // namespace tourrec
