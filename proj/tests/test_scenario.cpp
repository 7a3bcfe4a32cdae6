#include "cutagg/scenario.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>

using namespace cutagg;
namespace fs = std::filesystem;

TEST(Config, JsonRoundTrip)
{
  ScenarioConfig c;
  c.scenario = "colliding-spheres";
  c.resolution = std::vector<int>{32, 16};
  c.degree = 2;
  c.alpha = 0.25;
  c.mode = Mode::Moving;
  c.steps = 7;
  c.ranks = 4;
  c.depth = 5;
  c.out = "x";
  c.seed = 9;
  c.dump_map = true;
  EXPECT_EQ(config_from_json(config_to_json(c)), c);
  EXPECT_EQ(config_from_json(config_to_json(ScenarioConfig{})), ScenarioConfig{});
  const auto j = nlohmann::json::parse(config_to_json(c));
  EXPECT_TRUE(j.contains("dump-map"));
}

TEST(Config, RejectsUnknownKeysAndBadValues)
{
  EXPECT_THROW(config_from_json("{\"alhpa\": 0.3}"), ConfigError);
  EXPECT_THROW(config_from_json("[1,2]"), ConfigError);
  EXPECT_THROW(config_from_json("{\"alpha\": \"big\"}"), ConfigError);
  EXPECT_THROW(config_from_json("{\"mode\": \"sideways\"}"), ConfigError);
  EXPECT_THROW(config_from_json("{"), ConfigError);
  ScenarioConfig c;
  c.alpha = 1.5;
  EXPECT_THROW(validate_config(c), ConfigError);
  c = {};
  c.scenario = "torus";
  c.resolution = std::vector<int>{8, 8};
  EXPECT_THROW(validate_config(c), ConfigError);
  c = {};
  c.scenario = "nope";
  EXPECT_THROW(validate_config(c), ConfigError);
  c = {};
  c.ranks = 0;
  EXPECT_THROW(validate_config(c), ConfigError);
  c = {};
  c.ranks = 31;
  EXPECT_THROW(make_scenario(c), ConfigError);
}

TEST(Scenario, DefaultsForEveryName)
{
  for (const std::string &name : scenario_names())
  {
    ScenarioConfig c;
    c.scenario = name;
    const Scenario s = make_scenario(c);
    EXPECT_EQ(s.name, name);
    EXPECT_GE(s.steps, 1);
    EXPECT_GT(s.grid.cell_count(), 0);
    EXPECT_EQ(s.field.dim(), s.grid.dim());
  }
  const Scenario v = make_scenario(ScenarioConfig{});
  EXPECT_EQ(v.grid.cells_along(0), 30);
  EXPECT_EQ(v.grid.cells_along(1), 30);
  EXPECT_EQ(v.steps, 100);
  EXPECT_EQ(v.mode, Mode::Splitting);
  EXPECT_EQ(v.rule.max_depth, 6);
}

TEST(Scenario, SpeedLimit)
{
  const auto g = build_grid(2, {3, 1}, {0, 0, 0}, {3, 1, 0});
  const auto a = CutCellMesh::from_fractions(g, {1.0, 0.5, 0.0});
  const auto b = CutCellMesh::from_fractions(g, {0.0, 0.5, 0.0});
  EXPECT_EQ(speed_limit_violations(a, b), std::vector<CellIndex>{CellIndex(0)});
  EXPECT_TRUE(speed_limit_violations(a, a).empty());
}

TEST(Pipeline, StaticPlaneAgglomeratesEmptyCells)
{
  ScenarioConfig c;
  c.scenario = "plane";
  StepPipeline pipe(make_scenario(c));
  const StepResult r = pipe.run_step(0, StepOptions{}, 2);
  ASSERT_EQ(r.species.size(), 2u);
  const SpeciesStep &b = r.species[1];
  const auto &empty = pipe.mesh(0).coinciding_empty();
  ASSERT_FALSE(empty.empty());
  for (const PhaseCellRef &e : empty)
  {
    if (e.species == Species::B)
    {
      EXPECT_TRUE(b.map.is_mapped(e.cell));
    }
  }
}

TEST(Pipeline, RunWritesMetricsAndDumps)
{
  const fs::path out = fs::temp_directory_path() / "cutagg_test_run";
  fs::remove_all(out);
  ScenarioConfig c;
  c.steps = 10;
  c.resolution = std::vector<int>{12, 12};
  c.out = out.string();
  c.dump_map = true;
  c.dump_mesh = true;
  const RunSummary s = run_scenario(c);
  EXPECT_EQ(s.steps, 10);
  EXPECT_EQ(s.metrics.size(), 20u);
  std::ifstream is(out / "metrics.csv");
  const auto rows = read_metrics_csv(is);
  ASSERT_EQ(rows.size(), 20u);
  EXPECT_EQ(rows.front().step, 1);
  EXPECT_EQ(rows.back().step, 10);
  for (int k = 1; k <= 10; ++k)
  {
    EXPECT_TRUE(fs::exists(out / ("map_step" + std::to_string(k) + "_A.dot")));
    EXPECT_TRUE(fs::exists(out / ("map_step" + std::to_string(k) + "_B.json")));
    EXPECT_TRUE(fs::exists(out / ("mesh_step" + std::to_string(k) + ".json")));
  }
  fs::remove_all(out);
}

TEST(Pipeline, FastInterfaceViolatesSpeedLimit)
{
  ScenarioConfig c;
  c.steps = 4;
  c.resolution = std::vector<int>{12, 12};
  StepPipeline pipe(make_scenario(c));
  try
  {
    pipe.run_step(1, StepOptions{}, 1);
    FAIL() << "expected SpeedLimitViolation";
  }
  catch (const SpeedLimitViolation &e)
  {
    EXPECT_EQ(e.step(), 1);
    EXPECT_FALSE(e.cells().empty());
  }
}

TEST(Pipeline, RankCountDoesNotChangeMetrics)
{
  ScenarioConfig c;
  c.resolution = std::vector<int>{16, 16};
  c.steps = 10;
  StepPipeline pipe(make_scenario(c));
  StepOptions opt;
  for (int k : {3, 7})
  {
    const StepResult one = pipe.run_step(k, opt, 1);
    for (int ranks : {2, 4})
    {
      opt.schedule = {Schedule::Shuffled, static_cast<std::uint64_t>(ranks)};
      const StepResult many = pipe.run_step(k, opt, ranks);
      for (int s = 0; s < 2; ++s)
      {
        EXPECT_EQ(map_to_canonical_json(many.species[s].map), map_to_canonical_json(one.species[s].map));
        EXPECT_NEAR(many.species[s].metrics.max_kappa_s, one.species[s].metrics.max_kappa_s,
                    1e-9 * one.species[s].metrics.max_kappa_s);
      }
    }
  }
}
