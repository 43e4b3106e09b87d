#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tourrec/json.hpp"
#include "tourrec/ontology.hpp"
#include "tourrec/reclist.hpp"

namespace tourrec {

enum class FeedbackKind { book, bookmark, dismiss, rate };

std::string to_string(FeedbackKind kind);
/// Throws InvariantError on an unknown name.
FeedbackKind feedback_kind_from_string(const std::string& name);

struct FeedbackEvent {
  UserId user = 0;
  ItemId item = 0;
  FeedbackKind kind = FeedbackKind::book;
  /// Present exactly when kind == rate; in [0, 5].
  std::optional<double> rating;
  Timestamp timestamp = 0;

  void validate() const;
  bool operator==(const FeedbackEvent&) const = default;
};

json feedback_to_json(const FeedbackEvent& event);
FeedbackEvent feedback_from_json(const json& value);

inline constexpr double kSignalBook = 1.0;
inline constexpr double kSignalBookmark = 0.5;
inline constexpr double kSignalDismiss = -1.0;

/// book +1, bookmark +0.5, dismiss -1, rate (r - 3) / 2.
double feedback_signal(const FeedbackEvent& event);
double rating_signal(double rating);

struct PreferenceConfig {
  double eta_ll = 0.2;
  double eta_hl = 0.05;
  double w_hl = 0.3;
  double w_ll = 0.7;
  /// Uniform LL value used when the propagated vector is all zeros.
  double fallback_ll = 0.5;

  void validate() const;
};

struct PreferenceState {
  UserId user = 0;
  std::vector<double> hl;
  std::vector<double> ll;
  /// Cache derived from ll.
  std::vector<double> item;
  Timestamp last_updated = 0;
  std::size_t feedback_count = 0;
  /// Set when the LL vector is the uniform cold-start fallback.
  bool fallback = false;

  bool operator==(const PreferenceState&) const = default;
};

json preferences_to_json(const PreferenceState& state);
PreferenceState preferences_from_json(const json& value);

/// Item scores from an LL vector: each item takes the mean of its linked
/// classes' values, then the vector is divided by its maximum.
std::vector<double> item_scores_from_ll(const std::vector<double>& ll, const ContentMatrices& m);
/// normalize(hl^T * hl_ll).
std::vector<double> ll_from_hl(const std::vector<double>& hl, const ContentMatrices& m);

/// Selection entries must be 0 or 1.
PreferenceState init_preferences(UserId user, const std::vector<double>& hl_selection, const ContentMatrices& m,
                                 const PreferenceConfig& cfg = {}, Timestamp now = 0);

/// Recomputes ll from hl (with fallback) and the item cache.
void propagate_down(PreferenceState& state, const ContentMatrices& m, const PreferenceConfig& cfg = {});

/// Recomputes only the item cache, e.g. after items were appended.
void refresh_item_cache(PreferenceState& state, const ContentMatrices& m);

/// Combined content score for every item column. Before any feedback the HL
/// weight is 1.
ScoredItems content_scores(const PreferenceState& state, const ContentMatrices& m,
                           const PreferenceConfig& cfg = {});

RecList recommend_content(const PreferenceState& state, const ContentMatrices& m, std::size_t n,
                          const PreferenceConfig& cfg = {});

/// Trickle-up: LL classes linked to the item move by eta_ll * f, their HL
/// parents by eta_hl * f, then everything is clamped to [0, 1].
PreferenceState apply_feedback(PreferenceState state, const FeedbackEvent& event, const ContentMatrices& m,
                               const PreferenceConfig& cfg = {});

}  // namespace tourrec
