#pragma once

#include "cutagg/aggmap.hpp"
#include "cutagg/algebra.hpp"

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace cutagg {

inline constexpr double kInfiniteSigmaThreshold = 1e-300;

struct Condition
{
  double kappa = 1.0;
  bool infinite = false;
};

/// sigma_max / sigma_min over the singular values of all blocks.
Condition stencil_condition(const std::vector<Matrix> &blocks);
Condition matrix_condition(const Matrix &m);

struct GlobalCondition
{
  enum class Status
  {
    Ok,
    Infinite,
    TooLarge
  };
  Status status = Status::Ok;
  double kappa = std::numeric_limits<double>::quiet_NaN();
};

GlobalCondition global_condition(const BlockMatrix &A, int dense_limit = 4000);

struct CellCondition
{
  CellIndex cell;
  Condition condition;
};

/// Stencil numbers for every cut phase cell of the map's species: its own agglomerated cell
/// together with the agglomerated cells of its existing face neighbours.
std::vector<CellCondition> stencil_conditions(const CutCellMesh &mesh, const AggMap &map,
                                              const InjectionOperator &Q, const BlockMatrix &agg_mass);

struct StepMetrics
{
  int step = 0;
  Species species = Species::A;
  double alpha = 0.0;
  int degree = 0;
  int n_cut = 0;
  int n_src = 0;
  double pct_agg = 0.0;
  double min_frac = std::numeric_limits<double>::quiet_NaN();
  double max_kappa_s = std::numeric_limits<double>::quiet_NaN();
  double kappa_g = std::numeric_limits<double>::quiet_NaN();
  int inf_count = 0;
};

StepMetrics collect_step_metrics(int step, double alpha, int degree, const CutCellMesh &mesh, const AggMap &map,
                                 const std::vector<CellCondition> &stencils, const GlobalCondition &global);

inline constexpr const char *kMetricsHeader =
  "step,species,alpha,degree,n_cut,n_src,pct_agg,min_frac,max_kappa_s,kappa_g,inf_count";

void write_metrics_csv(std::ostream &os, const std::vector<StepMetrics> &rows);
std::vector<StepMetrics> read_metrics_csv(std::istream &is);
std::string format_double(double v);

struct TrendRow
{
  int step = 0;
  Species species = Species::A;
  double kappa_a = 0.0;
  double kappa_b = 0.0;
  double ratio = 0.0; ///< kappa_a / kappa_b
};

struct TrendReport
{
  std::vector<TrendRow> rows;
  double max_ratio = 0.0;
  double min_ratio = 0.0;
  bool non_decreasing = true; ///< every ratio >= 1
};

/// Per-step max stencil ratio of run a over run b; throws on schema or step mismatch.
TrendReport compare_runs(const std::vector<StepMetrics> &a, const std::vector<StepMetrics> &b);

} // namespace cutagg
