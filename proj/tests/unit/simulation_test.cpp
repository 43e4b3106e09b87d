#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"
#include "tourrec/error.hpp"
#include "tourrec/fixture.hpp"
#include "tourrec/simulation.hpp"

using namespace tourrec;

TEST(Plan, ParseAndValidate) {
  EXPECT_EQ(parse_milestones("98:0,98:64"), (std::vector<Milestone>{{98, 0}, {98, 64}}));
  EXPECT_THROW(parse_milestones("98-0"), ParseError);
  SimulationPlan plan;
  plan.milestones = {{0, 0}};
  EXPECT_THROW(plan.validate(), InvariantError);
  plan.milestones = {{98, 10}, {50, 10}};
  EXPECT_THROW(plan.validate(), InvariantError);
  EXPECT_EQ(default_plan().milestones.size(), 5u);
}

TEST(World, MilestoneRatingsArePrefixes) {
  GenConfig gen;
  const auto world = build_world(120, load_item_fixture(), gen);
  const auto small = milestone_ratings(world, 120, 40, gen.seed);
  const auto large = milestone_ratings(world, 120, 90, gen.seed);
  ASSERT_EQ(small.size(), 40u);
  ASSERT_EQ(large.size(), 90u);
  for (std::size_t i = 0; i < small.size(); ++i) EXPECT_EQ(small[i], large[i]);
  for (const auto& r : milestone_ratings(world, 50, 30, gen.seed)) EXPECT_LT(r.user, 50);
}

TEST(Simulation, SingleColdStartMilestone) {
  SimulationPlan plan;
  plan.milestones = {{98, 0}};
  const auto result = run_simulation(plan, {}, {});
  ASSERT_EQ(result.milestones.size(), 1u);
  EXPECT_EQ(result.milestones[0].phase, 1);
  std::istringstream csv(milestone_csv(result.milestones[0]));
  std::string header, row, extra;
  std::getline(csv, header);
  std::getline(csv, row);
  EXPECT_FALSE(std::getline(csv, extra) && !extra.empty());
  EXPECT_EQ(header, kReportCsvHeader);
  EXPECT_EQ(row.rfind("Content,", 0), 0u);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 7);
}

TEST(Simulation, DeterministicForSeed) {
  SimulationPlan plan;
  plan.milestones = {{98, 0}, {98, 64}};
  const auto a = combined_csv(run_simulation(plan, {}, {}));
  const auto b = combined_csv(run_simulation(plan, {}, {}));
  EXPECT_EQ(a, b);
}
