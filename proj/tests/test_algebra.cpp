#include "cutagg/algebra.hpp"
#include "cutagg/aggmap.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace cutagg;

namespace {

double
max_abs(const Matrix &m)
{
  return m.cwiseAbs().maxCoeff();
}

double
dense_extended(const CellBasis &basis, const CartesianGrid &grid, CellIndex cell, const Vector &c, const Point &x)
{
  return evaluate_local(basis, grid, cell, c, x);
}

Point
random_point_in(std::mt19937_64 &rng, const CartesianGrid &g, CellIndex c)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Point lo = g.cell_lower(c);
  Point x{0, 0, 0};
  for (int a = 0; a < g.dim(); ++a)
    x[a] = lo[a] + u(rng) * g.spacing(a);
  return x;
}

struct Fixture
{
  CartesianGrid grid;
  LevelSetField field;
  CutCellMesh mesh;
  QuadratureRule rule{5, 3};
};

Fixture
disc_fixture(int dim)
{
  const std::vector<int> n(dim, dim == 2 ? 8 : 5);
  auto grid = build_grid(dim, n, {-0.5, -0.5, -0.5}, {1.0, 1.0, 1.0});
  auto field = sphere(dim, {0.03, -0.02, 0.01}, 0.31);
  QuadratureRule rule{dim == 2 ? 5 : 3, 3};
  auto mesh = build_cutcell_mesh(grid, field, 0.0, rule);
  return {grid, field, mesh, rule};
}

} // namespace

TEST(Gauss, ExactForDegreeTwoNMinusOne)
{
  for (int n = 1; n <= 8; ++n)
  {
    const GaussRule g = gauss_legendre_01(n);
    double wsum = 0.0;
    for (double w : g.weights)
      wsum += w;
    EXPECT_NEAR(wsum, 1.0, 1e-14);
    for (int k = 0; k <= 2 * n - 1; ++k)
    {
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        s += g.weights[i] * std::pow(g.nodes[i], k);
      EXPECT_NEAR(s, 1.0 / (k + 1), 1e-14) << "n=" << n << " k=" << k;
    }
  }
}

TEST(Basis, ScaledLegendreIsOrthonormal)
{
  const GaussRule g = gauss_legendre_01(10);
  for (int a = 0; a <= 6; ++a)
    for (int b = 0; b <= 6; ++b)
    {
      double s = 0.0;
      for (std::size_t i = 0; i < g.nodes.size(); ++i)
        s += g.weights[i] * scaled_legendre(a, g.nodes[i]) * scaled_legendre(b, g.nodes[i]);
      EXPECT_NEAR(s, a == b ? 1.0 : 0.0, 1e-13);
    }
  EXPECT_NEAR(scaled_legendre(1, 1.0), std::sqrt(3.0), 1e-15);
}

TEST(Basis, ModesOrderedByTotalDegreeThenLexicographic)
{
  for (int dim = 1; dim <= 3; ++dim)
    for (int p = 0; p <= 3; ++p)
    {
      const CellBasis b(dim, p);
      EXPECT_EQ(b.size(), static_cast<int>(std::pow(p + 1, dim)));
      for (int i = 1; i < b.size(); ++i)
      {
        const auto &x = b.modes()[i - 1];
        const auto &y = b.modes()[i];
        const int tx = x[0] + x[1] + x[2], ty = y[0] + y[1] + y[2];
        EXPECT_TRUE(tx < ty || (tx == ty && x < y));
      }
      EXPECT_EQ(b.modes()[0], (std::array<int, 3>{0, 0, 0}));
    }
  EXPECT_THROW(tensor_basis(2, 16), std::invalid_argument);
}

TEST(Basis, EvalAllMatchesEval)
{
  const CellBasis b(3, 2);
  const Point xi{0.3, 0.8, 0.1};
  const Vector v = b.eval_all(xi);
  for (int m = 0; m < b.size(); ++m)
    EXPECT_NEAR(v(m), b.eval(m, xi), 1e-14);
}

TEST(MassMatrix, FullAndEmptyCells)
{
  const auto g = build_grid(2, {2, 1}, {0, 0, 0}, {2, 1, 0});
  const auto field = axis_plane(2, 0, 1.0);
  const auto mesh = build_cutcell_mesh(g, field, 0.0);
  const CellBasis b(2, 2);
  EXPECT_LT(max_abs(phase_mass_matrix(mesh, field, b, CellIndex(0), Species::A, {}) - Matrix::Identity(9, 9)), 1e-15);
  EXPECT_EQ(max_abs(phase_mass_matrix(mesh, field, b, CellIndex(0), Species::B, {})), 0.0);
}

namespace {

Matrix
plane_oracle(const CellBasis &b, double x0)
{
  const GaussRule gx = gauss_legendre_01(6);
  Matrix O(b.size(), b.size());
  for (int i = 0; i < b.size(); ++i)
    for (int j = 0; j < b.size(); ++j)
    {
      double sx = 0.0;
      for (std::size_t k = 0; k < gx.nodes.size(); ++k)
      {
        const double x = x0 * gx.nodes[k];
        sx += x0 * gx.weights[k] * scaled_legendre(b.modes()[i][0], x) * scaled_legendre(b.modes()[j][0], x);
      }
      O(i, j) = b.modes()[i][1] == b.modes()[j][1] ? sx : 0.0;
    }
  return O;
}

} // namespace

TEST(MassMatrix, CutByPlaneMatchesTensorOracle)
{
  const auto g = build_grid(2, {1, 1}, {0, 0, 0}, {1, 1, 0});
  const CellBasis b(2, 1);
  const QuadratureRule rule{6, 3};
  // on a leaf boundary the lattice classifies every mixed leaf exactly
  const double aligned = 20.0 / 64.0;
  const auto fa = axis_plane(2, 0, aligned);
  const Matrix Ma = phase_mass_matrix(build_cutcell_mesh(g, fa, 0.0, rule), fa, b, CellIndex(0), Species::A, rule);
  EXPECT_LT(max_abs(Ma - plane_oracle(b, aligned)), 1e-5);
  // elsewhere each leaf row misplaces at most 1/6 of a leaf width; p=1 products are bounded by 3
  const double x0 = 0.3;
  const auto f = axis_plane(2, 0, x0);
  const Matrix M = phase_mass_matrix(build_cutcell_mesh(g, f, 0.0, rule), f, b, CellIndex(0), Species::A, rule);
  EXPECT_LT(max_abs(M - plane_oracle(b, x0)), 3.0 / (6.0 * 64.0));
  EXPECT_LT(max_abs(M - M.transpose()), 1e-15);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Matrix>(M).eigenvalues().minCoeff(), 0.0);
}

TEST(Coupling, ExtendsNeighbourPolynomialExactly)
{
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  for (int dim : {2, 3})
  {
    const auto g = build_grid(dim, std::vector<int>(dim, 5), {0, 0, 0}, {1.0, 0.7, 1.3});
    for (int p = 0; p <= 3; ++p)
    {
      const CellBasis b(dim, p);
      const CellIndex i = g.cell_at({2, 2, dim == 3 ? 2 : 0});
      for (MultiIndex jj : {MultiIndex{3, 2, dim == 3 ? 2 : 0}, MultiIndex{2, 0, 0}, MultiIndex{0, 4, dim == 3 ? 4 : 0}})
      {
        const CellIndex j = g.cell_at(jj);
        Vector c(b.size());
        for (int k = 0; k < b.size(); ++k)
          c(k) = n01(rng);
        const Vector ci = coupling_matrix(b, g, i, j) * c;
        for (int s = 0; s < 10; ++s)
        {
          const Point x = random_point_in(rng, g, i);
          const double want = dense_extended(b, g, j, c, x);
          EXPECT_NEAR(dense_extended(b, g, i, ci, x), want, 1e-12 * std::max(1.0, std::abs(want)));
        }
      }
      EXPECT_LT(max_abs(coupling_matrix(b, g, i, i) - Matrix::Identity(b.size(), b.size())), 1e-15);
    }
  }
}

TEST(Coupling, ChainCompositionEqualsDirectCoupling)
{
  const auto g = build_grid(2, {3, 1}, {0, 0, 0}, {3, 1, 0});
  for (int p = 0; p <= 4; ++p)
  {
    const CellBasis b(2, p);
    const Matrix q13 = coupling_matrix(b, g, CellIndex(0), CellIndex(2));
    const Matrix q12 = coupling_matrix(b, g, CellIndex(0), CellIndex(1));
    const Matrix q23 = coupling_matrix(b, g, CellIndex(1), CellIndex(2));
    EXPECT_LE(max_abs(q13 - q12 * q23), 1e-12) << "p=" << p;
  }
}

TEST(BlockMatrix, OperationsMatchDense)
{
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  BlockMatrix A(3, 2, 2), B(2, 4, 2);
  auto rnd = [&] {
    Matrix m(2, 2);
    for (int i = 0; i < 4; ++i)
      m(i / 2, i % 2) = n01(rng);
    return m;
  };
  A.set(0, 0, rnd());
  A.set(2, 1, rnd());
  A.add(2, 1, rnd());
  B.set(1, 3, rnd());
  B.set(0, 0, rnd());
  EXPECT_LT(max_abs((A * B).to_dense() - A.to_dense() * B.to_dense()), 1e-14);
  EXPECT_EQ(max_abs(A.transpose().to_dense() - A.to_dense().transpose()), 0.0);
  Vector x(4);
  x << 1, -2, 0.5, 3;
  EXPECT_LT((A * x - A.to_dense() * x).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_FALSE(A.is_block_diagonal());
  EXPECT_FALSE(to_coordinate_text(A).empty());
  EXPECT_THROW(A.set(3, 0, rnd()), std::invalid_argument);
}

class InjectionTest : public ::testing::TestWithParam<int>
{};

TEST_P(InjectionTest, RoundTripsAndPolynomialReproduction)
{
  const int dim = GetParam();
  Fixture fx = disc_fixture(dim);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n01;
  for (Species s : kAllSpecies)
    for (int p : {1, 2})
    {
      RankNetwork net(partition_strips(fx.grid, 1, 0));
      const AggMap map = build_agglomeration(fx.mesh, fx.mesh, 0.5, Mode::Static, s, net);
      ASSERT_FALSE(map.pairs().empty());
      const CellBasis basis(dim, p);
      const InjectionOperator Q = assemble_injection(map, basis, fx.grid);
      const InjectionOperator Qd = assemble_injection(map, basis, fx.grid, ChainComposition::Direct);
      EXPECT_LT(max_abs(Q.Q.to_dense() - Qd.Q.to_dense()), 1e-12);
      EXPECT_EQ(Q.cols.size(), Q.rows.size() - static_cast<int>(map.pairs().size()));

      const BlockMatrix M = mass_matrix(fx.mesh, fx.field, basis, Q.rows, fx.rule);
      const BlockMatrix Magg = agglomerate_matrix(M, Q);
      EXPECT_TRUE(Magg.is_block_diagonal());
      EXPECT_LT(max_abs(Magg.to_dense() - Q.Q.to_dense().transpose() * M.to_dense() * Q.Q.to_dense()), 1e-12);

      const int n = Q.cols.size() * basis.size();
      for (int trial = 0; trial < 5; ++trial)
      {
        Vector v(n);
        for (int k = 0; k < n; ++k)
          v(k) = n01(rng);
        const Vector back = restrict_coeffs(Q, M, inject(Q, v));
        EXPECT_LE((back - v).norm() / v.norm(), 1e-10);
      }

      auto poly = [p](const Point &x) { return 0.3 + x[0] - 2.0 * x[1] * (p > 1 ? x[0] : 1.0) + 0.5 * x[2]; };
      Vector agg(n);
      for (int c = 0; c < Q.cols.size(); ++c)
        agg.segment(c * basis.size(), basis.size()) = project_function(basis, fx.grid, Q.cols.cells[c], poly);
      const Vector full = inject(Q, agg);
      for (const AggPair &pr : map.pairs())
      {
        const int r = Q.rows.index.at(pr.source);
        const Vector local = full.segment(r * basis.size(), basis.size());
        for (int k = 0; k < 3; ++k)
        {
          const Point x = random_point_in(rng, fx.grid, pr.source);
          EXPECT_NEAR(evaluate_local(basis, fx.grid, pr.source, local, x), poly(x), 1e-10);
        }
      }
    }
}

INSTANTIATE_TEST_SUITE_P(Dims, InjectionTest, ::testing::Values(2, 3));

TEST(Injection, RejectsInvalidMap)
{
  const auto g = build_grid(2, {3, 1}, {0, 0, 0}, {3, 1, 0});
  const auto m = CutCellMesh::from_fractions(g, {0.1, 0.1, 1.0});
  RankNetwork net(partition_strips(g, 1, 0));
  AggMap map = build_agglomeration(m, m, 0.3, Mode::Static, Species::A, net);
  map.mutable_pairs()[0].target = CellIndex(0);
  EXPECT_THROW(assemble_injection(map, CellBasis(2, 1), g), std::invalid_argument);
}
