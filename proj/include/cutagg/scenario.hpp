#pragma once

#include "cutagg/aggmap.hpp"
#include "cutagg/algebra.hpp"
#include "cutagg/cutcell.hpp"
#include "cutagg/diagnostics.hpp"
#include "cutagg/geometry.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cutagg {

class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// The interface moved more than one cell within a single step.
class SpeedLimitViolation : public std::runtime_error
{
public:
  SpeedLimitViolation(int step, std::vector<CellIndex> cells);
  int step() const { return step_; }
  const std::vector<CellIndex> &cells() const { return cells_; }

private:
  int step_;
  std::vector<CellIndex> cells_;
};

/// Unset optionals take the scenario default.
struct ScenarioConfig
{
  std::string scenario = "vanishing-sphere";
  std::optional<std::vector<int>> resolution;
  int degree = 1;
  double alpha = 0.3;
  std::optional<Mode> mode;
  std::optional<int> steps;
  int ranks = 1;
  std::optional<int> depth;
  std::string out = "out";
  std::uint64_t seed = 0;
  bool dump_map = false;
  bool dump_mesh = false;

  bool operator==(const ScenarioConfig &) const = default;
};

const std::vector<std::string> &scenario_names();

std::string config_to_json(const ScenarioConfig &c);
/// Throws ConfigError on malformed input or unknown keys.
ScenarioConfig config_from_json(const std::string &text);
void validate_config(const ScenarioConfig &c);

struct Scenario
{
  std::string name;
  CartesianGrid grid;
  LevelSetField field;
  double period = 1.0; ///< total simulated time T
  int steps = 1;
  Mode mode = Mode::Splitting;
  QuadratureRule rule;
  int ranks = 1;
};

Scenario make_scenario(const ScenarioConfig &c);

/// Cells that switch between pure A and pure B across one step.
std::vector<CellIndex> speed_limit_violations(const CutCellMesh &prev, const CutCellMesh &next);

struct SpeciesStep
{
  AggMap map;
  StepMetrics metrics;
  std::vector<CellCondition> stencils;
};

struct StepResult
{
  int step = 0;
  std::vector<SpeciesStep> species; ///< A then B
};

struct StepOptions
{
  double alpha = 0.3;
  int degree = 1;
  bool conditioning = true; ///< assemble matrices and condition numbers
  ScheduleOptions schedule;
};

/// Time-stepping driver with per-step mesh and mass-matrix caches.
class StepPipeline
{
public:
  explicit StepPipeline(Scenario scenario);

  const Scenario &scenario() const { return sc_; }
  double time_of(int k) const { return k * sc_.period / sc_.steps; }
  const CutCellMesh &mesh(int k);

  /// Step k compares the meshes at t_{k-1} and t_k; static mode uses t_k for both.
  StepResult run_step(int k, const StepOptions &opt, int ranks);

  /// Phase mass matrix, cached per (step, species, degree, cell).
  const Matrix &phase_mass(int k, Species s, const CellBasis &basis, CellIndex c);

private:
  Scenario sc_;
  std::map<int, CutCellMesh> meshes_;
  std::map<std::tuple<int, int, int, std::int64_t>, Matrix> mass_;
};

struct RunSummary
{
  std::vector<StepMetrics> metrics;
  int steps = 0;
};

/// Runs every step and writes metrics.csv plus requested dumps into c.out.
RunSummary run_scenario(const ScenarioConfig &c);

} // namespace cutagg
