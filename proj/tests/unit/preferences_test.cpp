#include <gtest/gtest.h>

#include <algorithm>

#include "support.hpp"
#include "tourrec/error.hpp"
#include "tourrec/fixture.hpp"
#include "tourrec/preferences.hpp"

using namespace tourrec;

namespace {

std::vector<double> select(const ContentMatrices& m, std::initializer_list<std::string> labels) {
  std::vector<double> sel(m.hl_labels.size(), 0.0);
  for (const auto& l : labels) sel[*m.hl_index(l)] = 1.0;
  return sel;
}

ContentMatrices chain() {
  auto g = load_ontology("C\tROOT\tSports\nC\tROOT\tNature\nC\tSports\tGolf\nC\tNature\tHiking\n");
  g.add_item({.id = 1, .name = "lesson", .categories = {"Golf"}});
  g.add_item({.id = 2, .name = "trail", .categories = {"Hiking"}});
  return content_matrices(g);
}

}  // namespace

TEST(InitPreferences, LeisureOnlyIsOneHot) {
  const auto m = content_matrices(fixture_ontology());
  const auto s = init_preferences(1, select(m, {"Leisure"}), m);
  for (std::size_t i = 0; i < m.hl_labels.size(); ++i) EXPECT_EQ(s.hl[i], m.hl_labels[i] == "Leisure" ? 1.0 : 0.0);
}

TEST(InitPreferences, AllOnesAndAllZero) {
  const auto m = content_matrices(fixture_ontology());
  const auto ones = init_preferences(1, std::vector<double>(m.hl_labels.size(), 1.0), m);
  EXPECT_TRUE(std::all_of(ones.hl.begin(), ones.hl.end(), [](double v) { return v == 1.0; }));
  const auto zero = init_preferences(1, std::vector<double>(m.hl_labels.size(), 0.0), m);
  EXPECT_TRUE(zero.fallback);
  EXPECT_TRUE(std::all_of(zero.ll.begin(), zero.ll.end(), [](double v) { return v == 0.5; }));
}

TEST(InitPreferences, RejectsNonBinarySelection) {
  const auto m = chain();
  EXPECT_THROW(init_preferences(1, {0.5, 0.0}, m), InvariantError);
}

TEST(Propagation, ChainIdentity) {
  const auto m = chain();
  const auto s = init_preferences(1, select(m, {"Sports"}), m);
  EXPECT_EQ(s.ll[*m.ll_index("Golf")], 1.0);
  EXPECT_EQ(s.ll[*m.ll_index("Hiking")], 0.0);
  EXPECT_EQ(s.item[*m.item_column(1)], 1.0);
  EXPECT_EQ(s.item[*m.item_column(2)], 0.0);
}

TEST(Propagation, SharedChildNormalizesToOne) {
  auto g = load_ontology("C\tROOT\tA\nC\tROOT\tB\nC\tA\tShared\nC\tB\tShared\nC\tA\tOnlyA\n");
  const auto m = content_matrices(g);
  const auto ll = ll_from_hl({1.0, 1.0}, m);
  EXPECT_EQ(ll[*m.ll_index("Shared")], 1.0);
  EXPECT_EQ(ll[*m.ll_index("OnlyA")], 0.5);
}

TEST(Propagation, StaleVectorIsNamed) {
  const auto m = content_matrices(fixture_ontology());
  auto s = init_preferences(1, select(m, {"Leisure"}), m);
  s.hl.pop_back();
  try {
    content_scores(s, m);
    FAIL();
  } catch (const DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("high-level"), std::string::npos);
  }
}

TEST(ContentScores, LeisureRoutesSportsUserMatchesOracle) {
  const auto m = content_matrices(fixture_ontology());
  const auto s = init_preferences(4, select(m, {"Leisure", "Routes", "Sports"}), m);
  const auto expected = test::frozen()["content"]["user4_item_scores"].get<std::vector<double>>();
  const auto scores = content_scores(s, m);
  ASSERT_EQ(scores.size(), expected.size());
  for (std::size_t k = 0; k < scores.size(); ++k) EXPECT_NEAR(scores[k].score, expected[k], 1e-12) << k;
}

TEST(RecommendContent, LeisureOnlyTopFive) {
  const auto g = fixture_ontology();
  const auto m = content_matrices(g);
  const auto s = init_preferences(1, select(m, {"Leisure"}), m);
  auto items = recommend_content(s, m, 5).items();
  for (ItemId id : items) {
    EXPECT_EQ(g.linked_hl_classes(id), std::vector<std::string>{"Leisure"}) << g.item(id).name;
  }
  std::sort(items.begin(), items.end());
  EXPECT_EQ(items, test::frozen()["content"]["leisure_only_top5"].get<std::vector<ItemId>>());
}

TEST(RecommendContent, SingleItemAndOversizedN) {
  auto g = load_ontology("C\tROOT\tSports\nC\tSports\tGolf\n");
  g.add_item({.id = 3, .name = "lesson", .categories = {"Golf"}});
  const auto m = content_matrices(g);
  const auto s = init_preferences(1, {1.0}, m);
  EXPECT_EQ(recommend_content(s, m, 10).items(), std::vector<ItemId>{3});
}

TEST(RecommendContent, TiesBreakByLowerId) {
  auto g = load_ontology("C\tROOT\tSports\nC\tSports\tGolf\n");
  g.add_item({.id = 9, .name = "b", .categories = {"Golf"}});
  g.add_item({.id = 4, .name = "a", .categories = {"Golf"}});
  const auto m = content_matrices(g);
  const auto s = init_preferences(1, {1.0}, m);
  EXPECT_EQ(recommend_content(s, m, 2).items(), (std::vector<ItemId>{4, 9}));
}

TEST(Feedback, DismissMovesByEta) {
  const auto m = content_matrices(fixture_ontology());
  const auto s = init_preferences(1, std::vector<double>(m.hl_labels.size(), 1.0), m);
  const PreferenceConfig cfg;
  const auto after = apply_feedback(s, {.user = 1, .item = 26, .kind = FeedbackKind::dismiss, .timestamp = 5}, m);
  const auto col = *m.item_column(26);
  for (std::size_t j = 0; j < m.ll_labels.size(); ++j) {
    const double expected = m.ll_item.at(j, col) ? s.ll[j] - cfg.eta_ll : s.ll[j];
    EXPECT_NEAR(after.ll[j], expected, 1e-15) << m.ll_labels[j];
  }
  for (std::size_t i = 0; i < m.hl_labels.size(); ++i) {
    const double expected = m.hl_labels[i] == "Sports" ? s.hl[i] - cfg.eta_hl : s.hl[i];
    EXPECT_NEAR(after.hl[i], expected, 1e-15) << m.hl_labels[i];
  }
}

TEST(Feedback, BookClampsAtOne) {
  const auto m = chain();
  auto s = init_preferences(1, select(m, {"Sports"}), m);
  s.ll[*m.ll_index("Golf")] = 0.9;
  const auto after = apply_feedback(s, {.user = 1, .item = 1, .kind = FeedbackKind::book}, m);
  EXPECT_EQ(after.ll[*m.ll_index("Golf")], 1.0);
}

TEST(Feedback, NeutralRatingLeavesVectors) {
  const auto m = chain();
  const auto s = init_preferences(1, select(m, {"Sports"}), m);
  const auto after = apply_feedback(s, {.user = 1, .item = 1, .kind = FeedbackKind::rate, .rating = 3.0}, m);
  EXPECT_EQ(after.hl, s.hl);
  EXPECT_EQ(after.ll, s.ll);
}

TEST(Feedback, UnknownItem) {
  const auto m = chain();
  const auto s = init_preferences(1, select(m, {"Sports"}), m);
  EXPECT_THROW(apply_feedback(s, {.user = 1, .item = 77, .kind = FeedbackKind::book}, m), NotFoundError);
}

TEST(Feedback, JsonRoundTrip) {
  const FeedbackEvent e{.user = 3, .item = 4, .kind = FeedbackKind::rate, .rating = 4.5, .timestamp = 99};
  EXPECT_EQ(feedback_from_json(feedback_to_json(e)), e);
  EXPECT_THROW(feedback_kind_from_string("like"), InvariantError);
}
