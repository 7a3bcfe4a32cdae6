#include "cutagg/diagnostics.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace cutagg {

namespace {

Condition
from_extremes(double smax, double smin)
{
  if (smin < kInfiniteSigmaThreshold)
    return {std::numeric_limits<double>::infinity(), true};
  return {smax / smin, false};
}

} // namespace

Condition
matrix_condition(const Matrix &m)
{
  return stencil_condition({m});
}

Condition
stencil_condition(const std::vector<Matrix> &blocks)
{
  if (blocks.empty())
    throw std::invalid_argument("stencil is empty");
  double smax = 0.0;
  double smin = std::numeric_limits<double>::infinity();
  for (const Matrix &b : blocks)
  {
    if (b.size() == 0)
      throw std::invalid_argument("stencil block is empty");
    Eigen::JacobiSVD<Matrix> svd(b);
    const auto &s = svd.singularValues();
    smax = std::max(smax, s.maxCoeff());
    smin = std::min(smin, s.minCoeff());
  }
  return from_extremes(smax, smin);
}

GlobalCondition
global_condition(const BlockMatrix &A, int dense_limit)
{
  GlobalCondition g;
  const long long n = static_cast<long long>(A.block_rows()) * A.block_size();
  if (A.block_rows() != A.block_cols())
    throw std::invalid_argument("global condition needs a square matrix");
  if (n == 0)
    return g;
  if (A.is_block_diagonal())
  {
    std::vector<Matrix> blocks;
    for (int i = 0; i < A.block_rows(); ++i)
    {
      const Matrix *b = A.find(i, i);
      blocks.push_back(b ? *b : Matrix::Zero(A.block_size(), A.block_size()));
    }
    const Condition c = stencil_condition(blocks);
    g.kappa = c.kappa;
    g.status = c.infinite ? GlobalCondition::Status::Infinite : GlobalCondition::Status::Ok;
    return g;
  }
  if (n > dense_limit)
  {
    g.status = GlobalCondition::Status::TooLarge;
    return g;
  }
  const Condition c = matrix_condition(A.to_dense());
  g.kappa = c.kappa;
  g.status = c.infinite ? GlobalCondition::Status::Infinite : GlobalCondition::Status::Ok;
  return g;
}

std::vector<CellCondition>
stencil_conditions(const CutCellMesh &mesh, const AggMap &map, const InjectionOperator &Q,
                   const BlockMatrix &agg_mass)
{
  const CartesianGrid &grid = mesh.grid();
  std::vector<CellCondition> out;
  for (CellIndex c : mesh.cut_cells())
  {
    if (!map.exists(c))
      continue;
    std::set<int> cols;
    cols.insert(Q.cols.index.at(map.final_target(c)));
    for (CellIndex n : grid.face_neighbors(c))
      if (map.exists(n))
        cols.insert(Q.cols.index.at(map.final_target(n)));
    std::vector<Matrix> blocks;
    for (int col : cols)
    {
      const Matrix *b = agg_mass.find(col, col);
      blocks.push_back(b ? *b : Matrix::Zero(agg_mass.block_size(), agg_mass.block_size()));
    }
    out.push_back({c, stencil_condition(blocks)});
  }
  return out;
}

StepMetrics
collect_step_metrics(int step, double alpha, int degree, const CutCellMesh &mesh, const AggMap &map,
                     const std::vector<CellCondition> &stencils, const GlobalCondition &global)
{
  StepMetrics m;
  m.step = step;
  m.species = map.species();
  m.alpha = alpha;
  m.degree = degree;
  const auto cut = mesh.cut_cells();
  m.n_cut = static_cast<int>(cut.size());
  m.n_src = static_cast<int>(map.pairs().size());
  std::vector<CellIndex> involved;
  std::vector<CellIndex> sources;
  for (const AggPair &p : map.pairs())
    sources.push_back(p.source);
  std::set_union(cut.begin(), cut.end(), sources.begin(), sources.end(), std::back_inserter(involved));
  m.pct_agg = involved.empty() ? 0.0 : 100.0 * m.n_src / static_cast<double>(involved.size());
  for (CellIndex c : cut)
  {
    const double f = mesh.fraction(c, map.species());
    if (std::isnan(m.min_frac) || f < m.min_frac)
      m.min_frac = f;
  }
  for (const CellCondition &sc : stencils)
  {
    if (sc.condition.infinite)
    {
      ++m.inf_count;
      continue;
    }
    if (std::isnan(m.max_kappa_s) || sc.condition.kappa > m.max_kappa_s)
      m.max_kappa_s = sc.condition.kappa;
  }
  if (global.status == GlobalCondition::Status::Ok)
    m.kappa_g = global.kappa;
  else if (global.status == GlobalCondition::Status::Infinite)
    m.kappa_g = std::numeric_limits<double>::infinity();
  return m;
}

std::string
format_double(double v)
{
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

void
write_metrics_csv(std::ostream &os, const std::vector<StepMetrics> &rows)
{
  os << kMetricsHeader << '\n';
  for (const StepMetrics &m : rows)
    os << m.step << ',' << to_string(m.species) << ',' << format_double(m.alpha) << ',' << m.degree << ','
       << m.n_cut << ',' << m.n_src << ',' << format_double(m.pct_agg) << ',' << format_double(m.min_frac) << ','
       << format_double(m.max_kappa_s) << ',' << format_double(m.kappa_g) << ',' << m.inf_count << '\n';
}

std::vector<StepMetrics>
read_metrics_csv(std::istream &is)
{
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("metrics file is empty");
  if (!line.empty() && line.back() == '\r')
    line.pop_back();
  if (line != kMetricsHeader)
    throw std::runtime_error("metrics header does not match the expected schema");
  std::vector<StepMetrics> rows;
  int lineno = 1;
  while (std::getline(is, line))
  {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
      f.push_back(cell);
    if (f.size() != 11)
      throw std::runtime_error("metrics line " + std::to_string(lineno) + " has " + std::to_string(f.size()) +
                               " fields, expected 11");
    auto num = [&](const std::string &s) {
      char *end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (end == s.c_str() || *end != '\0')
        throw std::runtime_error("bad number '" + s + "' on metrics line " + std::to_string(lineno));
      return v;
    };
    StepMetrics m;
    m.step = static_cast<int>(num(f[0]));
    if (f[1] == "A")
      m.species = Species::A;
    else if (f[1] == "B")
      m.species = Species::B;
    else
      throw std::runtime_error("bad species on metrics line " + std::to_string(lineno));
    m.alpha = num(f[2]);
    m.degree = static_cast<int>(num(f[3]));
    m.n_cut = static_cast<int>(num(f[4]));
    m.n_src = static_cast<int>(num(f[5]));
    m.pct_agg = num(f[6]);
    m.min_frac = num(f[7]);
    m.max_kappa_s = num(f[8]);
    m.kappa_g = num(f[9]);
    m.inf_count = static_cast<int>(num(f[10]));
    rows.push_back(m);
  }
  return rows;
}

TrendReport
compare_runs(const std::vector<StepMetrics> &a, const std::vector<StepMetrics> &b)
{
  if (a.size() != b.size())
    throw std::runtime_error("runs cover different numbers of rows");
  TrendReport rep;
  bool first = true;
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    if (a[i].step != b[i].step || a[i].species != b[i].species)
      throw std::runtime_error("runs disagree on step/species at row " + std::to_string(i + 1));
    if (std::isnan(a[i].max_kappa_s) || std::isnan(b[i].max_kappa_s))
      continue;
    TrendRow r{a[i].step, a[i].species, a[i].max_kappa_s, b[i].max_kappa_s, a[i].max_kappa_s / b[i].max_kappa_s};
    if (first)
    {
      rep.max_ratio = rep.min_ratio = r.ratio;
      first = false;
    }
    rep.max_ratio = std::max(rep.max_ratio, r.ratio);
    rep.min_ratio = std::min(rep.min_ratio, r.ratio);
    rep.non_decreasing = rep.non_decreasing && r.ratio >= 1.0;
    rep.rows.push_back(r);
  }
  return rep;
}

} // namespace cutagg
