#include "cutagg/scenario.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace cutagg;

namespace {

enum Exit
{
  kOk = 0,
  kFailure = 1,
  kConfig = 2,
  kIsland = 3,
  kSpeed = 4
};

std::vector<StepMetrics>
load_csv(const std::string &path)
{
  std::ifstream is(path);
  if (!is)
    throw std::runtime_error("cannot open " + path);
  return read_metrics_csv(is);
}

int
run_compare(const std::string &a, const std::string &b, bool assert_trend)
{
  const TrendReport rep = compare_runs(load_csv(a), load_csv(b));
  std::cout << "step,species,kappa_a,kappa_b,ratio\n";
  for (const TrendRow &r : rep.rows)
    std::cout << r.step << ',' << to_string(r.species) << ',' << format_double(r.kappa_a) << ','
              << format_double(r.kappa_b) << ',' << format_double(r.ratio) << '\n';
  std::cout << "# rows " << rep.rows.size() << " min_ratio " << format_double(rep.min_ratio) << " max_ratio "
            << format_double(rep.max_ratio) << '\n';
  if (assert_trend && !rep.non_decreasing)
  {
    std::cerr << "trend violated: some step has kappa_a < kappa_b\n";
    return kFailure;
  }
  return kOk;
}

} // namespace

int
main(int argc, char **argv)
{
  CLI::App app{"Cut-cell agglomeration scenario runner"};
  app.require_subcommand(1);

  auto *run = app.add_subcommand("run", "run a scenario and write metrics and dumps");
  std::string config_path;
  std::string scenario, mode, out;
  std::vector<int> res;
  int degree = 0, steps = 0, ranks = 0, depth = 0;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  bool dump_map = false, dump_mesh = false;
  run->add_option("--config", config_path, "JSON config file; flags override its values");
  auto *o_scenario = run->add_option("--scenario", scenario, "scenario name");
  auto *o_res = run->add_option("--res", res, "cells per axis (2 or 3 values)");
  auto *o_degree = run->add_option("--degree", degree, "polynomial degree p");
  auto *o_alpha = run->add_option("--alpha", alpha, "agglomeration threshold");
  auto *o_mode = run->add_option("--mode", mode, "static | splitting | moving");
  auto *o_steps = run->add_option("--steps", steps, "number of time steps");
  auto *o_ranks = run->add_option("--ranks", ranks, "logical rank count");
  auto *o_depth = run->add_option("--depth", depth, "quadrature bisection depth");
  auto *o_out = run->add_option("--out", out, "output directory");
  auto *o_seed = run->add_option("--seed", seed, "non-zero: shuffle rank execution order with this seed");
  run->add_flag("--dump-map", dump_map, "write DOT and JSON maps per step");
  run->add_flag("--dump-mesh", dump_mesh, "write JSON cut-cell meshes per step");

  auto *cmp = app.add_subcommand("compare", "compare max stencil condition numbers of two runs");
  std::string csv_a, csv_b;
  bool assert_trend = false;
  cmp->add_option("a", csv_a, "metrics.csv of run a")->required();
  cmp->add_option("b", csv_b, "metrics.csv of run b")->required();
  cmp->add_flag("--assert-trend", assert_trend, "fail unless kappa_a >= kappa_b at every step");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  if (*cmp)
  {
    try
    {
      return run_compare(csv_a, csv_b, assert_trend);
    }
    catch (const std::exception &e)
    {
      std::cerr << "error: " << e.what() << '\n';
      return kConfig;
    }
  }

  ScenarioConfig cfg;
  try
  {
    if (!config_path.empty())
    {
      std::ifstream is(config_path);
      if (!is)
        throw ConfigError("cannot open config " + config_path);
      std::stringstream ss;
      ss << is.rdbuf();
      cfg = config_from_json(ss.str());
    }
    if (*o_scenario)
      cfg.scenario = scenario;
    if (*o_res)
      cfg.resolution = res;
    if (*o_degree)
      cfg.degree = degree;
    if (*o_alpha)
      cfg.alpha = alpha;
    if (*o_mode)
    {
      try
      {
        cfg.mode = parse_mode(mode);
      }
      catch (const std::invalid_argument &e)
      {
        throw ConfigError(e.what());
      }
    }
    if (*o_steps)
      cfg.steps = steps;
    if (*o_ranks)
      cfg.ranks = ranks;
    if (*o_depth)
      cfg.depth = depth;
    if (*o_out)
      cfg.out = out;
    if (*o_seed)
      cfg.seed = seed;
    cfg.dump_map = cfg.dump_map || dump_map;
    cfg.dump_mesh = cfg.dump_mesh || dump_mesh;
    validate_config(cfg);
    make_scenario(cfg);
  }
  catch (const ConfigError &e)
  {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  }

  try
  {
    const RunSummary s = run_scenario(cfg);
    std::cout << "wrote " << s.metrics.size() << " metric rows for " << s.steps << " steps to " << cfg.out
              << "/metrics.csv\n";
    return kOk;
  }
  catch (const UnresolvableIsland &e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return kIsland;
  }
  catch (const SpeedLimitViolation &e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return kSpeed;
  }
  catch (const ConfigError &e)
  {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  }
  catch (const std::exception &e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}
