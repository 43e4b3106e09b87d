#include <gtest/gtest.h>

#include "support.hpp"
#include "tourrec/error.hpp"
#include "tourrec/fixture.hpp"
#include "tourrec/ontology.hpp"

using namespace tourrec;

TEST(Ontology, MinimalDocument) {
  const auto g = load_ontology("C\tROOT\tSports\nC\tSports\tGolf\n");
  EXPECT_EQ(g.hl_classes(), std::vector<std::string>{"Sports"});
  EXPECT_EQ(g.ll_classes(), std::vector<std::string>{"Golf"});
  EXPECT_EQ(g.hl_ll_edges().size(), 1u);
  EXPECT_NO_THROW(g.validate());
}

TEST(Ontology, OrphanClassIsRejected) {
  EXPECT_THROW(load_ontology("C\tROOT\tSports\nC\tNowhere\tGolf\n"), ParseError);
}

TEST(Ontology, FixtureLinksEveryItem) {
  const auto g = load_ontology_file(test::fixture_path("ontology.txt"));
  EXPECT_EQ(g.item_count(), 29u);
  for (ItemId id : g.item_order()) {
    EXPECT_EQ(g.linked_classes(id).size(), g.item(id).categories.size()) << id;
  }
}

TEST(Ontology, FixtureFilesMatchGenerators) {
  EXPECT_EQ(test::read_text(test::fixture_path("ontology.txt")), fixture_ontology_document());
  EXPECT_EQ(test::read_text(test::fixture_path("table4.jsonl")), fixture_items_jsonl());
  EXPECT_EQ(load_items_file(test::fixture_path("table4.jsonl")), load_item_fixture());
}

TEST(Ontology, DocumentRoundTrip) {
  const auto g = fixture_ontology();
  EXPECT_EQ(load_ontology(write_ontology(g)), g);
}

TEST(Ontology, DuplicateItemConflicts) {
  auto g = fixture_ontology();
  EXPECT_THROW(g.add_item(g.item(0)), ConflictError);
}

TEST(Ontology, UnknownCategoryIsRejected) {
  auto g = fixture_ontology(false);
  ItemRecord it{.id = 100, .name = "x", .categories = {"NoSuchClass"}};
  EXPECT_THROW(g.add_item(it), InvariantError);
}

TEST(ContentMatrices, EmptyGraph) {
  const auto m = content_matrices(OntologyGraph{});
  EXPECT_EQ(m.hl_ll.rows(), 0u);
  EXPECT_EQ(m.ll_item.cols(), 0u);
}

TEST(ContentMatrices, SingleChain) {
  auto g = load_ontology("C\tROOT\tSports\nC\tSports\tGolf\n");
  g.add_item({.id = 1, .name = "lesson", .categories = {"Golf"}});
  const auto m = content_matrices(g);
  ASSERT_EQ(m.hl_ll.rows(), 1u);
  ASSERT_EQ(m.ll_item.cols(), 1u);
  EXPECT_EQ(m.hl_ll.at(0, 0), 1);
  EXPECT_EQ(m.ll_item.at(0, 0), 1);
}

TEST(ContentMatrices, GolfLessonsColumn) {
  const auto g = fixture_ontology();
  const auto m = content_matrices(g);
  ItemId golf = -1;
  for (ItemId id : g.item_order()) {
    if (g.item(id).name == "Golf lessons") golf = id;
  }
  ASSERT_GE(golf, 0);
  const auto col = *m.item_column(golf);
  for (std::size_t r = 0; r < m.ll_labels.size(); ++r) {
    const bool expected = m.ll_labels[r] == "Sports" || m.ll_labels[r] == "Leisure" || m.ll_labels[r] == "Events";
    EXPECT_EQ(m.ll_item.at(r, col), expected ? 1 : 0) << m.ll_labels[r];
  }
}

TEST(ContentMatrices, AddingItemAppendsColumn) {
  auto g = fixture_ontology();
  const auto before = content_matrices(g);
  g.add_item({.id = 500, .name = "Kayak tour", .categories = {"Nature"}});
  const auto after = content_matrices(g);
  ASSERT_EQ(after.item_ids.size(), before.item_ids.size() + 1);
  EXPECT_EQ(after.item_ids.back(), 500);
  for (std::size_t r = 0; r < before.ll_labels.size(); ++r) {
    for (std::size_t c = 0; c < before.item_ids.size(); ++c) EXPECT_EQ(after.ll_item.at(r, c), before.ll_item.at(r, c));
  }
}

TEST(Ontology, LinkScoreOutOfRange) {
  auto g = fixture_ontology();
  EXPECT_THROW(g.link(0, "Golf", 1.5), InvariantError);
}
