#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "tourrec/json.hpp"
#include "tourrec/reclist.hpp"

namespace tourrec {

struct UserEval {
  UserId user = 0;
  /// Ranked recommendations.
  std::vector<ItemId> recs;
  std::set<ItemId> relevant;
};

using FeatureMatrix = std::map<ItemId, std::vector<double>>;

struct EvalSet {
  std::vector<UserEval> users;
  std::size_t k = 5;
  /// Items of the training data (coverage denominator).
  std::set<ItemId> train_items;
  /// One-hot item features at the two ontology levels.
  FeatureMatrix features_hl;
  FeatureMatrix features_ll;
  /// Number of users that consumed each item.
  std::map<ItemId, std::size_t> consumption;
  /// Population size for novelty; 0 means users.size().
  std::size_t population = 0;
};

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  /// No relevant items (m = 0).
  bool flagged = false;
};

/// Hits among the first k recommendations divided by k and by m. Positions
/// past the end of the list count as misses.
PrecisionRecall precision_recall_at_k(const std::vector<ItemId>& list, const std::set<ItemId>& relevant,
                                      std::size_t k);

/// (1/|U|) sum_u (1/min(m,K)) sum_k P_u(k) rel_u(k); users with m = 0 add 0.
double map_at_k(const EvalSet& set, std::size_t k);
/// (1/|U|) sum_u (1/m) sum_k r_u(k) rel_u(k); users with m = 0 add 0.
double mar_at_k(const EvalSet& set, std::size_t k);

/// Distinct recommended training items over the training item count.
double coverage(const EvalSet& set);
/// 1 - mean pairwise cosine similarity of the users' binary list vectors.
double personalization(const EvalSet& set);
/// 1 - mean over users of the mean pairwise cosine among list items.
/// Lists of length one contribute an intra-list similarity of 0 and are
/// counted in *single_item_lists.
double diversity(const EvalSet& set, const FeatureMatrix& features, std::size_t* single_item_lists = nullptr);
/// Mean over users of the mean self-information -log2(count(i)/|U|) of
/// their list (count floored at 1).
double novelty(const EvalSet& set);

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

struct EvalReport {
  std::string model;
  double map_at_k = 0.0;
  double mar_at_k = 0.0;
  double coverage = 0.0;
  double personalization = 0.0;
  double diversity_hl = 0.0;
  double diversity_ll = 0.0;
  double novelty = 0.0;
  std::size_t users = 0;
  std::size_t users_without_relevant = 0;
  std::size_t single_item_lists = 0;
  std::vector<std::string> flags;
};

/// All metrics. Metrics whose preconditions fail (fewer than two users, no
/// features) are reported as 0 and named in flags.
EvalReport evaluate(const EvalSet& set, const std::string& model = "");

inline constexpr const char* kReportCsvHeader =
    "Model,MAP@K,MAR@K,Coverage,Personalization,Diversity HL,Diversity LL,Novelty";

std::string report_csv_row(const EvalReport& r);
json report_to_json(const EvalReport& r);

}  // namespace tourrec
