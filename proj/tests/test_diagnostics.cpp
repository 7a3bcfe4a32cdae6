#include "cutagg/diagnostics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace cutagg;

TEST(Condition, DiagonalAndMultiBlock)
{
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 10.0;
  EXPECT_NEAR(matrix_condition(d).kappa, 10.0, 1e-12);
  EXPECT_NEAR(matrix_condition(Matrix::Identity(3, 3)).kappa, 1.0, 1e-15);
  const Condition c = stencil_condition({d, 0.5 * Matrix::Identity(2, 2)});
  EXPECT_NEAR(c.kappa, 20.0, 1e-12);
  EXPECT_FALSE(c.infinite);
  Matrix r(2, 2);
  r << 1.0, 2.0, 3.0, 4.0;
  const Eigen::JacobiSVD<Matrix> svd(r);
  EXPECT_NEAR(matrix_condition(r).kappa, svd.singularValues()(0) / svd.singularValues()(1), 1e-12);
}

TEST(Condition, SingularIsInfinite)
{
  const Condition c = stencil_condition({Matrix::Identity(2, 2), Matrix::Zero(2, 2)});
  EXPECT_TRUE(c.infinite);
  EXPECT_TRUE(std::isinf(c.kappa));
  EXPECT_THROW(stencil_condition({}), std::invalid_argument);
}

TEST(GlobalCondition, BlockDiagonalDenseAndTooLarge)
{
  BlockMatrix A(2, 2, 1);
  A.set(0, 0, Matrix::Constant(1, 1, 2.0));
  A.set(1, 1, Matrix::Constant(1, 1, 8.0));
  GlobalCondition g = global_condition(A);
  EXPECT_EQ(g.status, GlobalCondition::Status::Ok);
  EXPECT_NEAR(g.kappa, 4.0, 1e-14);
  A.set(0, 1, Matrix::Constant(1, 1, 1.0));
  g = global_condition(A);
  EXPECT_EQ(g.status, GlobalCondition::Status::Ok);
  EXPECT_NEAR(g.kappa, matrix_condition(A.to_dense()).kappa, 1e-12);
  EXPECT_EQ(global_condition(A, 1).status, GlobalCondition::Status::TooLarge);
  BlockMatrix S(2, 2, 1);
  S.set(0, 0, Matrix::Constant(1, 1, 1.0));
  EXPECT_EQ(global_condition(S).status, GlobalCondition::Status::Infinite);
}

TEST(Metrics, CountsAndFractions)
{
  const auto g = build_grid(2, {4, 1}, {0, 0, 0}, {4, 1, 0});
  const auto mesh = CutCellMesh::from_fractions(g, {0.05, 0.5, 1.0, 0.2});
  RankNetwork net(partition_strips(g, 1, 0));
  const AggMap map = build_agglomeration(mesh, mesh, 0.3, Mode::Static, Species::A, net);
  const std::vector<CellCondition> st{{CellIndex(0), {5.0, false}},
                                      {CellIndex(1), {std::numeric_limits<double>::infinity(), true}},
                                      {CellIndex(3), {7.0, false}}};
  const StepMetrics m = collect_step_metrics(4, 0.3, 1, mesh, map, st, {});
  EXPECT_EQ(m.n_cut, 3);
  EXPECT_EQ(m.n_src, 2);
  EXPECT_NEAR(m.pct_agg, 100.0 * 2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(m.min_frac, 0.05);
  EXPECT_DOUBLE_EQ(m.max_kappa_s, 7.0);
  EXPECT_EQ(m.inf_count, 1);
  EXPECT_TRUE(std::isnan(m.kappa_g));
}

TEST(Metrics, StencilPerCutCell)
{
  const auto g = build_grid(2, {6, 6}, {-0.5, -0.5, 0}, {1, 1, 0});
  const auto field = sphere(2, {0.0, 0.0, 0.0}, 0.3);
  const auto mesh = build_cutcell_mesh(g, field, 0.0);
  RankNetwork net(partition_strips(g, 1, 0));
  const AggMap map = build_agglomeration(mesh, mesh, 0.3, Mode::Static, Species::B, net);
  const CellBasis basis(2, 1);
  const InjectionOperator Q = assemble_injection(map, basis, g);
  const BlockMatrix Magg = agglomerate_matrix(mass_matrix(mesh, field, basis, Q.rows, {}), Q);
  const auto st = stencil_conditions(mesh, map, Q, Magg);
  EXPECT_EQ(st.size(), mesh.cut_cells().size());
  for (const CellCondition &c : st)
  {
    EXPECT_FALSE(c.condition.infinite);
    EXPECT_GE(c.condition.kappa, 1.0);
  }
}

TEST(Csv, RoundTripPreservesValues)
{
  StepMetrics a;
  a.step = 3;
  a.species = Species::B;
  a.alpha = 0.1;
  a.degree = 2;
  a.n_cut = 17;
  a.n_src = 4;
  a.pct_agg = 100.0 / 3.0;
  a.min_frac = 1e-7;
  a.max_kappa_s = 12345.678901234567;
  a.kappa_g = std::numeric_limits<double>::infinity();
  a.inf_count = 2;
  StepMetrics b;
  std::ostringstream os;
  write_metrics_csv(os, {a, b});
  std::istringstream is(os.str());
  const auto rows = read_metrics_csv(is);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].species, Species::B);
  EXPECT_EQ(rows[0].pct_agg, a.pct_agg);
  EXPECT_EQ(rows[0].max_kappa_s, a.max_kappa_s);
  EXPECT_TRUE(std::isinf(rows[0].kappa_g));
  EXPECT_TRUE(std::isnan(rows[1].min_frac));
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), kMetricsHeader);
}

TEST(Csv, RejectsMalformedInput)
{
  std::istringstream bad_header("step,species\n");
  EXPECT_THROW(read_metrics_csv(bad_header), std::runtime_error);
  std::istringstream short_row(std::string(kMetricsHeader) + "\n1,A,0.3\n");
  EXPECT_THROW(read_metrics_csv(short_row), std::runtime_error);
  std::istringstream bad_species(std::string(kMetricsHeader) + "\n1,C,0.3,1,1,1,1,1,1,1,0\n");
  EXPECT_THROW(read_metrics_csv(bad_species), std::runtime_error);
  std::istringstream empty("");
  EXPECT_THROW(read_metrics_csv(empty), std::runtime_error);
}

TEST(Compare, RatiosAndTrend)
{
  auto row = [](int step, double k) {
    StepMetrics m;
    m.step = step;
    m.max_kappa_s = k;
    return m;
  };
  const std::vector<StepMetrics> a{row(1, 100.0), row(2, 50.0), row(3, std::nan(""))};
  const std::vector<StepMetrics> b{row(1, 10.0), row(2, 50.0), row(3, 1.0)};
  const TrendReport r = compare_runs(a, b);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_DOUBLE_EQ(r.max_ratio, 10.0);
  EXPECT_DOUBLE_EQ(r.min_ratio, 1.0);
  EXPECT_TRUE(r.non_decreasing);
  EXPECT_FALSE(compare_runs(b, a).non_decreasing);
  EXPECT_THROW(compare_runs(a, {row(1, 1.0)}), std::runtime_error);
}
