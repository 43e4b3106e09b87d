#include <gtest/gtest.h>

#include "support.hpp"
#include "tourrec/error.hpp"
#include "tourrec/metrics.hpp"

using namespace tourrec;

namespace {

EvalSet one_user(std::vector<ItemId> recs, std::set<ItemId> relevant, std::size_t k) {
  EvalSet set;
  set.k = k;
  set.users.push_back({.user = 1, .recs = std::move(recs), .relevant = std::move(relevant)});
  return set;
}

}  // namespace

TEST(PrecisionRecall, Cases) {
  const auto all = precision_recall_at_k({1, 2}, {1, 2, 3}, 2);
  EXPECT_EQ(all.precision, 1.0);
  const auto none = precision_recall_at_k({1, 2}, {}, 2);
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_EQ(none.recall, 0.0);
  EXPECT_TRUE(none.flagged);
  const auto worked = precision_recall_at_k({1, 2, 3}, {1, 3}, 3);
  EXPECT_NEAR(worked.precision, test::frozen_num("metrics", "worked_precision"), 1e-12);
  EXPECT_NEAR(worked.recall, test::frozen_num("metrics", "worked_recall"), 1e-12);
}

TEST(MapMar, WorkedExample) {
  const auto set = one_user({1, 2, 3}, {1, 3}, 3);
  EXPECT_NEAR(map_at_k(set, 3), test::frozen_num("metrics", "worked_map"), 1e-9);
  EXPECT_NEAR(mar_at_k(set, 3), test::frozen_num("metrics", "worked_mar"), 1e-9);
}

TEST(MapMar, TrivialCases) {
  EXPECT_EQ(map_at_k(one_user({1, 2, 3}, {1, 2, 3, 4}, 3), 3), 1.0);
  EXPECT_EQ(map_at_k(one_user({1, 2, 3}, {7, 8}, 3), 3), 0.0);
  EXPECT_THROW(map_at_k(EvalSet{}, 3), InvariantError);
}

TEST(Coverage, Cases) {
  EvalSet set;
  for (ItemId i = 0; i < 29; ++i) set.train_items.insert(i);
  for (UserId u = 0; u < 5; ++u) set.users.push_back({.user = u, .recs = {4}});
  EXPECT_NEAR(coverage(set), test::frozen_num("metrics", "coverage_single_item"), 1e-9);
  set.users.clear();
  for (ItemId i = 0; i < 29; ++i) set.users.push_back({.user = i, .recs = {i}});
  EXPECT_EQ(coverage(set), 1.0);
}

TEST(Personalization, Cases) {
  EvalSet set;
  set.users = {{.user = 1, .recs = {1, 2, 3, 4}}, {.user = 2, .recs = {3, 4, 5, 6}}};
  EXPECT_NEAR(personalization(set), test::frozen_num("metrics", "personalization_overlap2"), 1e-9);
  set.users[1].recs = {1, 2, 3, 4};
  EXPECT_NEAR(personalization(set), 0.0, 1e-12);
  set.users[1].recs = {5, 6, 7, 8};
  EXPECT_NEAR(personalization(set), 1.0, 1e-12);
  set.users.pop_back();
  EXPECT_THROW(personalization(set), InvariantError);
}

TEST(Diversity, Cases) {
  EvalSet set;
  const FeatureMatrix f = {{1, {1, 1, 0}}, {2, {0, 1, 1}}, {3, {1, 0, 0}}, {4, {0, 0, 1}}, {5, {1, 1, 0}}};
  set.users = {{.user = 1, .recs = {1, 2}}};
  EXPECT_NEAR(diversity(set, f), test::frozen_num("metrics", "diversity_shared_feature"), 1e-9);
  set.users = {{.user = 1, .recs = {1, 5}}};
  EXPECT_NEAR(diversity(set, f), 0.0, 1e-12);
  set.users = {{.user = 1, .recs = {3, 4}}};
  EXPECT_NEAR(diversity(set, f), 1.0, 1e-12);
  std::size_t singles = 0;
  set.users = {{.user = 1, .recs = {3}}};
  EXPECT_EQ(diversity(set, f, &singles), 1.0);
  EXPECT_EQ(singles, 1u);
}

TEST(Novelty, Cases) {
  EvalSet set;
  set.users = {{.user = 1, .recs = {9}}};
  set.consumption[9] = 1;
  set.population = 4;
  EXPECT_NEAR(novelty(set), test::frozen_num("metrics", "novelty_u4_count1"), 1e-9);
  set.population = 8;
  EXPECT_NEAR(novelty(set), test::frozen_num("metrics", "novelty_u8_count1"), 1e-9);
  set.consumption[9] = 8;
  EXPECT_NEAR(novelty(set), 0.0, 1e-12);
  EXPECT_THROW(novelty(EvalSet{}), InvariantError);
}

TEST(Evaluate, CsvRow) {
  auto set = one_user({1, 2, 3}, {1, 3}, 3);
  set.train_items = {1, 2, 3};
  set.features_hl = {{1, {1, 0}}, {2, {0, 1}}, {3, {1, 1}}};
  set.features_ll = set.features_hl;
  const auto r = evaluate(set, "Content");
  EXPECT_EQ(r.users, 1u);
  EXPECT_FALSE(r.flags.empty());
  EXPECT_EQ(report_csv_row(r).rfind("Content,", 0), 0u);
}
