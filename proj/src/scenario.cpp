#include "cutagg/scenario.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>

namespace cutagg {

SpeedLimitViolation::SpeedLimitViolation(int step, std::vector<CellIndex> cells)
  : std::runtime_error([&] {
      std::string msg = "interface moved more than one cell in step " + std::to_string(step) + "; cells";
      for (std::size_t i = 0; i < cells.size() && i < 20; ++i)
        msg += " " + std::to_string(cells[i].value);
      if (cells.size() > 20)
        msg += " ...";
      return msg;
    }()),
    step_(step), cells_(std::move(cells))
{
}

const std::vector<std::string> &
scenario_names()
{
  static const std::vector<std::string> names{"vanishing-sphere", "colliding-spheres", "popcorn2d",
                                              "popcorn3d",        "torus",             "plane"};
  return names;
}

namespace {

using nlohmann::json;

const std::set<std::string> kKeys{"scenario", "resolution", "degree", "alpha",     "mode",     "steps",
                                  "ranks",    "depth",      "out",    "seed", "dump-map", "dump-mesh"};

template <class T>
T
get_as(const json &j, const char *key)
{
  try
  {
    return j.at(key).get<T>();
  }
  catch (const json::exception &e)
  {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

} // namespace

std::string
config_to_json(const ScenarioConfig &c)
{
  nlohmann::ordered_json j;
  j["scenario"] = c.scenario;
  if (c.resolution)
    j["resolution"] = *c.resolution;
  j["degree"] = c.degree;
  j["alpha"] = c.alpha;
  if (c.mode)
    j["mode"] = std::string(to_string(*c.mode));
  if (c.steps)
    j["steps"] = *c.steps;
  j["ranks"] = c.ranks;
  if (c.depth)
    j["depth"] = *c.depth;
  j["out"] = c.out;
  j["seed"] = c.seed;
  j["dump-map"] = c.dump_map;
  j["dump-mesh"] = c.dump_mesh;
  return j.dump(2);
}

ScenarioConfig
config_from_json(const std::string &text)
{
  json j;
  try
  {
    j = json::parse(text);
  }
  catch (const json::parse_error &e)
  {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object())
    throw ConfigError("config must be a JSON object");
  for (const auto &[key, value] : j.items())
  {
    (void)value;
    if (!kKeys.count(key))
      throw ConfigError("unknown config key '" + key + "'");
  }
  ScenarioConfig c;
  if (j.contains("scenario"))
    c.scenario = get_as<std::string>(j, "scenario");
  if (j.contains("resolution"))
    c.resolution = get_as<std::vector<int>>(j, "resolution");
  if (j.contains("degree"))
    c.degree = get_as<int>(j, "degree");
  if (j.contains("alpha"))
    c.alpha = get_as<double>(j, "alpha");
  if (j.contains("mode"))
  {
    try
    {
      c.mode = parse_mode(get_as<std::string>(j, "mode"));
    }
    catch (const std::invalid_argument &e)
    {
      throw ConfigError(e.what());
    }
  }
  if (j.contains("steps"))
    c.steps = get_as<int>(j, "steps");
  if (j.contains("ranks"))
    c.ranks = get_as<int>(j, "ranks");
  if (j.contains("depth"))
    c.depth = get_as<int>(j, "depth");
  if (j.contains("out"))
    c.out = get_as<std::string>(j, "out");
  if (j.contains("seed"))
    c.seed = get_as<std::uint64_t>(j, "seed");
  if (j.contains("dump-map"))
    c.dump_map = get_as<bool>(j, "dump-map");
  if (j.contains("dump-mesh"))
    c.dump_mesh = get_as<bool>(j, "dump-mesh");
  return c;
}

void
validate_config(const ScenarioConfig &c)
{
  const auto &names = scenario_names();
  if (std::find(names.begin(), names.end(), c.scenario) == names.end())
    throw ConfigError("unknown scenario '" + c.scenario + "'");
  if (c.resolution)
  {
    const auto &r = *c.resolution;
    if (r.size() != 2 && r.size() != 3)
      throw ConfigError("resolution needs 2 or 3 entries");
    if (std::any_of(r.begin(), r.end(), [](int n) { return n < 1; }))
      throw ConfigError("resolution entries must be positive");
    if ((c.scenario == "torus" || c.scenario == "popcorn3d") && r.size() != 3)
      throw ConfigError(c.scenario + " is three-dimensional");
    if (c.scenario == "popcorn2d" && r.size() != 2)
      throw ConfigError("popcorn2d is two-dimensional");
  }
  if (c.degree < 0 || c.degree > 15)
    throw ConfigError("degree must lie in [0, 15]");
  if (!(c.alpha >= 0.0 && c.alpha <= 1.0))
    throw ConfigError("alpha must lie in [0, 1]");
  if (c.steps && *c.steps < 1)
    throw ConfigError("steps must be positive");
  if (c.ranks < 1)
    throw ConfigError("ranks must be positive");
  if (c.depth && (*c.depth < 0 || *c.depth > 12))
    throw ConfigError("depth must lie in [0, 12]");
  if (c.out.empty())
    throw ConfigError("output directory must not be empty");
}

Scenario
make_scenario(const ScenarioConfig &c)
{
  validate_config(c);
  using std::numbers::pi;
  const std::string &name = c.scenario;
  auto res = [&](std::vector<int> fallback) { return c.resolution ? *c.resolution : fallback; };

  std::vector<int> cells;
  Point origin{}, extent{};
  std::optional<LevelSetField> field;
  int steps = 1;
  Mode mode = Mode::Splitting;
  const double T = 1.0;

  if (name == "vanishing-sphere")
  {
    cells = res({30, 30});
    const int d = static_cast<int>(cells.size());
    origin = {-0.5, -0.5, d == 3 ? -0.5 : 0.0};
    extent = {1.0, 1.0, d == 3 ? 1.0 : 0.0};
    field = rotate(vanishing_sphere(d, 0.6, 1.0 / T), RigidMotion{{0.0, 0.0, 2.0 * pi / T}});
    steps = 100;
  }
  else if (name == "colliding-spheres")
  {
    cells = res({64, 32});
    const int d = static_cast<int>(cells.size());
    origin = {-0.5, -0.25, d == 3 ? -0.25 : 0.0};
    extent = {1.0, 0.5, d == 3 ? 0.5 : 0.0};
    const double rs = 0.15;
    field = colliding_spheres(d, rs, 3.0 * rs / T);
    steps = 100;
  }
  else if (name == "popcorn2d" || name == "popcorn3d")
  {
    const int d = name == "popcorn2d" ? 2 : 3;
    cells = res(d == 2 ? std::vector<int>{32, 32} : std::vector<int>{16, 16, 16});
    origin = {-1.0, -1.0, d == 3 ? -1.0 : 0.0};
    extent = {2.0, 2.0, d == 3 ? 2.0 : 0.0};
    field = rotate(popcorn(d, 0.6), RigidMotion{{0.0, 0.0, 2.0 * pi / 5.0 / T}});
    steps = 80;
  }
  else if (name == "torus")
  {
    cells = res({16, 16, 16});
    origin = {-1.0, -1.0, -1.0};
    extent = {2.0, 2.0, 2.0};
    field = rotate(tilted_torus(0.39, 0.26, pi / 4.0), RigidMotion{{0.0, pi / 4.0 / T, 0.0}});
    steps = 25;
  }
  else // plane
  {
    cells = res({8, 8});
    const int d = static_cast<int>(cells.size());
    origin = {-0.5, -0.5, d == 3 ? -0.5 : 0.0};
    extent = {1.0, 1.0, d == 3 ? 1.0 : 0.0};
    field = axis_plane(d, 0, 0.0);
    steps = 1;
    mode = Mode::Static;
  }

  const int dim = static_cast<int>(cells.size());
  try
  {
    Scenario sc{name, CartesianGrid(dim, cells, origin, extent), *field, T, c.steps.value_or(steps),
                c.mode.value_or(mode), QuadratureRule{c.depth.value_or(dim == 2 ? 6 : 3), 2}, c.ranks};
    if (sc.ranks > sc.grid.cells_along(0))
      throw ConfigError("ranks exceed the number of cells along x");
    return sc;
  }
  catch (const std::invalid_argument &e)
  {
    throw ConfigError(e.what());
  }
}

std::vector<CellIndex>
speed_limit_violations(const CutCellMesh &prev, const CutCellMesh &next)
{
  std::vector<CellIndex> out;
  const auto &a = prev.fractions_a();
  const auto &b = next.fractions_a();
  for (std::size_t i = 0; i < a.size(); ++i)
    if ((a[i] == 1.0 && b[i] == 0.0) || (a[i] == 0.0 && b[i] == 1.0))
      out.emplace_back(static_cast<std::int64_t>(i));
  return out;
}

StepPipeline::StepPipeline(Scenario scenario) : sc_(std::move(scenario)) {}

const CutCellMesh &
StepPipeline::mesh(int k)
{
  if (k < 0 || k > sc_.steps)
    throw std::out_of_range("step outside the scenario");
  auto it = meshes_.find(k);
  if (it == meshes_.end())
    it = meshes_.emplace(k, build_cutcell_mesh(sc_.grid, sc_.field, time_of(k), sc_.rule)).first;
  return it->second;
}

const Matrix &
StepPipeline::phase_mass(int k, Species s, const CellBasis &basis, CellIndex c)
{
  const auto key = std::tuple(k, static_cast<int>(s), basis.degree(), c.value);
  auto it = mass_.find(key);
  if (it == mass_.end())
    it = mass_.emplace(key, phase_mass_matrix(mesh(k), sc_.field, basis, c, s, sc_.rule)).first;
  return it->second;
}

StepResult
StepPipeline::run_step(int k, const StepOptions &opt, int ranks)
{
  if (k < 1 && sc_.mode != Mode::Static)
    throw std::out_of_range("dynamic steps start at 1");
  const CutCellMesh &next = mesh(k);
  const CutCellMesh &prev = sc_.mode == Mode::Static ? next : mesh(k - 1);
  if (sc_.mode != Mode::Static)
  {
    auto bad = speed_limit_violations(prev, next);
    if (!bad.empty())
      throw SpeedLimitViolation(k, std::move(bad));
  }

  StepResult result;
  result.step = k;
  const CellBasis basis = tensor_basis(sc_.grid.dim(), opt.degree);
  for (Species s : kAllSpecies)
  {
    RankNetwork net(partition_strips(sc_.grid, ranks, 0), opt.schedule);
    AggMap map = build_agglomeration(prev, next, opt.alpha, sc_.mode, s, net);
    SpeciesStep ss{std::move(map), {}, {}};
    GlobalCondition g;
    if (opt.conditioning)
    {
      const InjectionOperator Q = assemble_injection(ss.map, basis, sc_.grid);
      BlockMatrix M(Q.rows.size(), Q.rows.size(), basis.size());
      for (int i = 0; i < Q.rows.size(); ++i)
        M.set(i, i, phase_mass(k, s, basis, Q.rows.cells[i]));
      const BlockMatrix Magg = agglomerate_matrix(M, Q);
      ss.stencils = stencil_conditions(next, ss.map, Q, Magg);
      g = global_condition(Magg);
    }
    ss.metrics = collect_step_metrics(k, opt.alpha, opt.degree, next, ss.map, ss.stencils, g);
    result.species.push_back(std::move(ss));
  }
  return result;
}

namespace {

void
write_text(const std::filesystem::path &p, const std::string &text)
{
  std::ofstream os(p, std::ios::binary);
  if (!os)
    throw std::runtime_error("cannot write " + p.string());
  os << text;
}

} // namespace

RunSummary
run_scenario(const ScenarioConfig &c)
{
  Scenario sc = make_scenario(c);
  const int steps = sc.steps;
  const int ranks = sc.ranks;
  const bool dynamic = sc.mode != Mode::Static;
  StepPipeline pipe(std::move(sc));
  std::filesystem::create_directories(c.out);
  const std::filesystem::path out(c.out);

  StepOptions opt;
  opt.alpha = c.alpha;
  opt.degree = c.degree;
  if (c.seed != 0)
    opt.schedule = ScheduleOptions{Schedule::Shuffled, c.seed};

  RunSummary summary;
  const int first = dynamic ? 1 : 0;
  const int last = dynamic ? steps : steps - 1;
  for (int k = first; k <= last; ++k)
  {
    StepResult r = pipe.run_step(k, opt, ranks);
    for (SpeciesStep &s : r.species)
    {
      summary.metrics.push_back(s.metrics);
      if (c.dump_map)
      {
        const std::string stem = "map_step" + std::to_string(k) + "_" + std::string(to_string(s.map.species()));
        write_text(out / (stem + ".dot"), map_to_dot(s.map));
        write_text(out / (stem + ".json"), map_to_canonical_json(s.map));
      }
    }
    if (c.dump_mesh)
      write_text(out / ("mesh_step" + std::to_string(k) + ".json"), mesh_to_json(pipe.mesh(k)));
    ++summary.steps;
  }
  std::ofstream csv(out / "metrics.csv", std::ios::binary);
  if (!csv)
    throw std::runtime_error("cannot write metrics.csv");
  write_metrics_csv(csv, summary.metrics);
  return summary;
}

} // namespace cutagg
