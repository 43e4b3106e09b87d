#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tourrec/ontology.hpp"
#include "tourrec/popularity.hpp"
#include "tourrec/user.hpp"

namespace tourrec {

inline constexpr std::size_t kPreferenceCount = 10;
using PreferenceRow = std::array<double, kPreferenceCount>;

struct LatentPrefRow {
  UserId user = 0;
  /// Probabilities over preference_categories(), summing to 1.
  PreferenceRow probs{};
};

/// Coefficients keyed "attribute=Level label" (e.g. "budget=High").
using CoefficientTable = std::map<std::string, PreferenceRow>;

/// Key for a level in the coefficient table.
std::string coefficient_key(Ordinal attr, int level);
std::string coefficient_key(Nominal attr, int level);

/// Structured demographic effects (age, group composition, budget, ...)
/// plus a small seeded perturbation.
CoefficientTable default_coefficients(std::uint64_t seed = 0);
CoefficientTable zero_coefficients();

struct GenConfig {
  std::size_t n_users = 98;
  std::uint64_t seed = 7;
  /// Level probabilities for the four ordinals then the four nominals;
  /// empty means uniform.
  std::array<std::vector<double>, kOrdinalCount> ordinal_marginals;
  std::array<std::vector<double>, kNominalCount> nominal_marginals;
  CoefficientTable coefficients = default_coefficients();
  /// Probability that a user/item pair is rated.
  double sparsity = 0.0225;
  double sigma = 0.5;

  void validate() const;
};

std::vector<UserRecord> gen_users(const GenConfig& cfg);
/// Multinomial logit over the ten categories. Throws InvariantError naming
/// the first level without coefficients.
std::vector<LatentPrefRow> gen_latent_prefs(const std::vector<UserRecord>& users, const GenConfig& cfg);

/// Mean of the user's latent preferences over the categories a catalog
/// class maps to.
double class_affinity(const PreferenceRow& probs, const std::string& item_category);
/// Mean class affinity over the item's categories.
double item_affinity(const PreferenceRow& probs, const ItemRecord& item);

/// Full users x items rating matrix (row-major, catalog order):
/// clamp(1 + 4 * rank-scaled affinity + N(0, sigma), 1, 5), two decimals.
/// Noise is keyed by (seed, user, item), so rows do not depend on which
/// other users are generated.
std::vector<double> dense_ratings(const std::vector<LatentPrefRow>& prefs, const std::vector<ItemRecord>& catalog,
                                  const GenConfig& cfg);

/// Bernoulli(sparsity) selection over the dense matrix, ordered by (user, item).
std::vector<RatingEvent> gen_ratings(const std::vector<UserRecord>& users, const std::vector<LatentPrefRow>& prefs,
                                     const std::vector<ItemRecord>& catalog, const GenConfig& cfg);

/// Seeded uniform key of a pair; used to order rating arrivals.
double pair_key(std::uint64_t seed, UserId user, ItemId item, std::uint64_t stream);

/// Binary HL selection a simulated user ticks on first login: classes whose
/// affinity is at least `ratio` times the best one.
std::vector<double> hl_selection_from_prefs(const PreferenceRow& probs, const std::vector<std::string>& hl_labels,
                                            double ratio = 0.6);

std::string prefs_to_csv(const std::vector<LatentPrefRow>& prefs);
std::string ratings_to_csv(const std::vector<RatingEvent>& ratings);
std::vector<RatingEvent> ratings_from_csv(std::string_view text);
/// Users x items matrix with 0.00 for unrated cells.
std::string dense_matrix_csv(const std::vector<UserRecord>& users, const std::vector<ItemRecord>& catalog,
                             const std::vector<RatingEvent>& ratings);

}  // namespace tourrec
