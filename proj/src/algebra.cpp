#include "cutagg/algebra.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace cutagg {

namespace {

struct GaussRuleLd
{
  std::vector<long double> nodes;
  std::vector<long double> weights;
};

long double
legendre_ld(int k, long double x)
{
  long double p0 = 1.0L, p1 = x;
  if (k == 0)
    return 1.0L;
  for (int n = 1; n < k; ++n)
  {
    const long double p2 = ((2.0L * n + 1.0L) * x * p1 - n * p0) / (n + 1.0L);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

long double
scaled_legendre_ld(int k, long double xi)
{
  return std::sqrt(2.0L * k + 1.0L) * legendre_ld(k, 2.0L * xi - 1.0L);
}

// Newton iteration on P_n in extended precision, mapped to [0,1]
GaussRuleLd
gauss_ld(int n)
{
  if (n < 1)
    throw std::invalid_argument("Gauss rule needs at least one point");
  const long double pi = 3.141592653589793238462643383279502884L;
  GaussRuleLd g;
  for (int i = n - 1; i >= 0; --i)
  {
    long double x = std::cos(pi * (i + 0.75L) / (n + 0.5L));
    long double dp = 1.0L;
    for (int it = 0; it < 100; ++it)
    {
      const long double p = legendre_ld(n, x);
      dp = n * (x * p - legendre_ld(n - 1, x)) / (x * x - 1.0L);
      const long double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-19L)
        break;
    }
    dp = n * (x * legendre_ld(n, x) - legendre_ld(n - 1, x)) / (x * x - 1.0L);
    g.nodes.push_back(0.5L * (x + 1.0L));
    g.weights.push_back(1.0L / ((1.0L - x * x) * dp * dp));
  }
  return g;
}

} // namespace

GaussRule
gauss_legendre_01(int n)
{
  const GaussRuleLd ld = gauss_ld(n);
  GaussRule g;
  for (std::size_t i = 0; i < ld.nodes.size(); ++i)
  {
    g.nodes.push_back(static_cast<double>(ld.nodes[i]));
    g.weights.push_back(static_cast<double>(ld.weights[i]));
  }
  return g;
}

double
scaled_legendre(int k, double xi)
{
  const double x = 2.0 * xi - 1.0;
  double p0 = 1.0, p1 = x;
  if (k == 0)
    return 1.0;
  for (int n = 1; n < k; ++n)
  {
    const double p2 = ((2.0 * n + 1.0) * x * p1 - n * p0) / (n + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return std::sqrt(2.0 * k + 1.0) * p1;
}

CellBasis::CellBasis(int dim, int degree) : dim_(dim), degree_(degree)
{
  if (dim < 1 || dim > 3)
    throw std::invalid_argument("basis dimension must be 1, 2 or 3");
  if (degree < 0)
    throw std::invalid_argument("basis degree must be non-negative");
  const int q = degree + 1;
  int count = 1;
  for (int a = 0; a < dim; ++a)
    count *= q;
  for (int i = 0; i < count; ++i)
  {
    std::array<int, 3> m{0, 0, 0};
    int rest = i;
    for (int a = 0; a < dim; ++a)
    {
      m[a] = rest % q;
      rest /= q;
    }
    modes_.push_back(m);
  }
  std::stable_sort(modes_.begin(), modes_.end(), [](const auto &a, const auto &b) {
    const int ta = a[0] + a[1] + a[2], tb = b[0] + b[1] + b[2];
    if (ta != tb)
      return ta < tb;
    return a < b;
  });
}

double
CellBasis::eval(int mode, const Point &xi) const
{
  double v = 1.0;
  for (int a = 0; a < dim_; ++a)
    v *= scaled_legendre(modes_[mode][a], xi[a]);
  return v;
}

Vector
CellBasis::eval_all(const Point &xi) const
{
  // per-axis tables, then tensor products
  std::array<std::array<double, 16>, 3> tab{};
  for (int a = 0; a < dim_; ++a)
    for (int k = 0; k <= degree_ && k < 16; ++k)
      tab[a][k] = scaled_legendre(k, xi[a]);
  Vector v(size());
  for (int m = 0; m < size(); ++m)
  {
    double s = 1.0;
    for (int a = 0; a < dim_; ++a)
      s *= tab[a][modes_[m][a]];
    v(m) = s;
  }
  return v;
}

CellBasis
tensor_basis(int dim, int p)
{
  if (p > 15)
    throw std::invalid_argument("basis degree above 15 is not supported");
  return CellBasis(dim, p);
}

Matrix
phase_mass_matrix(const CutCellMesh &mesh, const LevelSetField &field, const CellBasis &basis, CellIndex cell,
                  Species species, const QuadratureRule &rule)
{
  const int M = basis.size();
  const int dim = mesh.grid().dim();
  if (basis.dim() != dim)
    throw std::invalid_argument("basis and grid dimensions differ");
  const double f = mesh.fraction(cell, species);
  if (f == 0.0)
    return Matrix::Zero(M, M);
  if (f == 1.0)
    return Matrix::Identity(M, M);

  const GaussRule g = gauss_legendre_01(std::max(rule.gauss_order, basis.degree() + 1));
  const int q = static_cast<int>(g.nodes.size());
  int qn = 1;
  for (int a = 0; a < dim; ++a)
    qn *= q;
  const int ln = lattice_count(dim);
  const QuadBox::Kind mine = species == Species::A ? QuadBox::Kind::PureA : QuadBox::Kind::PureB;

  Matrix acc = Matrix::Zero(M, M);
  visit_cell_boxes(mesh.grid(), field, cell, mesh.time(), rule, [&](const QuadBox &box) {
    const double vol = std::pow(box.size, dim);
    if (box.kind == mine)
    {
      for (int i = 0; i < qn; ++i)
      {
        Point xi = box.lo;
        double w = vol;
        int rest = i;
        for (int a = 0; a < dim; ++a)
        {
          const int k = rest % q;
          rest /= q;
          xi[a] += g.nodes[k] * box.size;
          w *= g.weights[k];
        }
        const Vector phi = basis.eval_all(xi);
        acc.noalias() += w * phi * phi.transpose();
      }
    }
    else if (box.kind == QuadBox::Kind::Mixed)
    {
      const double w = vol / ln;
      for (int i = 0; i < ln; ++i)
      {
        if (box.negative[i] != (species == Species::A))
          continue;
        Point xi = box.lo;
        int rest = i;
        for (int a = 0; a < dim; ++a)
        {
          xi[a] += lattice_offset(rest % kLatticePerAxis) * box.size;
          rest /= kLatticePerAxis;
        }
        const Vector phi = basis.eval_all(xi);
        acc.noalias() += w * phi * phi.transpose();
      }
    }
  });
  return 0.5 * (acc + acc.transpose());
}

Matrix
coupling_matrix(const CellBasis &basis, const CartesianGrid &grid, CellIndex i, CellIndex j)
{
  const int M = basis.size();
  const int p = basis.degree();
  if (i == j)
    return Matrix::Identity(M, M);
  const MultiIndex ii = grid.multi_index(i);
  const MultiIndex jj = grid.multi_index(j);
  const GaussRuleLd g = gauss_ld(p + 1);

  std::array<Matrix, 3> q1;
  for (int a = 0; a < basis.dim(); ++a)
  {
    const int o = jj[a] - ii[a];
    q1[a] = Matrix::Zero(p + 1, p + 1);
    for (int x = 0; x <= p; ++x)
      for (int y = 0; y <= p; ++y)
      {
        long double s = 0.0L;
        for (std::size_t k = 0; k < g.nodes.size(); ++k)
          s += g.weights[k] * scaled_legendre_ld(x, g.nodes[k]) * scaled_legendre_ld(y, g.nodes[k] - o);
        q1[a](x, y) = static_cast<double>(s);
      }
  }
  Matrix Q(M, M);
  for (int m = 0; m < M; ++m)
    for (int n = 0; n < M; ++n)
    {
      double v = 1.0;
      for (int a = 0; a < basis.dim(); ++a)
        v *= q1[a](basis.modes()[m][a], basis.modes()[n][a]);
      Q(m, n) = v;
    }
  return Q;
}

BlockMatrix::BlockMatrix(int block_rows, int block_cols, int block_size)
  : rows_(block_rows), cols_(block_cols), bs_(block_size)
{
  if (block_rows < 0 || block_cols < 0 || block_size < 1)
    throw std::invalid_argument("invalid block matrix shape");
}

void
BlockMatrix::set(int r, int c, Matrix m)
{
  if (r < 0 || r >= rows_ || c < 0 || c >= cols_ || m.rows() != bs_ || m.cols() != bs_)
    throw std::invalid_argument("block outside matrix or of wrong size");
  blocks_[{r, c}] = std::move(m);
}

void
BlockMatrix::add(int r, int c, const Matrix &m)
{
  auto it = blocks_.find({r, c});
  if (it == blocks_.end())
    set(r, c, m);
  else
    it->second += m;
}

const Matrix *
BlockMatrix::find(int r, int c) const
{
  auto it = blocks_.find({r, c});
  return it == blocks_.end() ? nullptr : &it->second;
}

BlockMatrix
BlockMatrix::transpose() const
{
  BlockMatrix t(cols_, rows_, bs_);
  for (const auto &[rc, m] : blocks_)
    t.blocks_[{rc.second, rc.first}] = m.transpose();
  return t;
}

BlockMatrix
BlockMatrix::operator*(const BlockMatrix &rhs) const
{
  if (cols_ != rhs.rows_ || bs_ != rhs.bs_)
    throw std::invalid_argument("block matrix dimensions are not conformal");
  std::vector<std::vector<std::pair<int, const Matrix *>>> rhs_rows(rhs.rows_);
  for (const auto &[rc, m] : rhs.blocks_)
    rhs_rows[rc.first].push_back({rc.second, &m});
  BlockMatrix out(rows_, rhs.cols_, bs_);
  for (const auto &[rc, m] : blocks_)
    for (const auto &[col, b] : rhs_rows[rc.second])
      out.add(rc.first, col, m * *b);
  return out;
}

Vector
BlockMatrix::operator*(const Vector &x) const
{
  if (x.size() != static_cast<Eigen::Index>(cols_) * bs_)
    throw std::invalid_argument("vector length does not match block matrix");
  Vector y = Vector::Zero(static_cast<Eigen::Index>(rows_) * bs_);
  for (const auto &[rc, m] : blocks_)
    y.segment(rc.first * bs_, bs_) += m * x.segment(rc.second * bs_, bs_);
  return y;
}

Matrix
BlockMatrix::to_dense() const
{
  Matrix d = Matrix::Zero(static_cast<Eigen::Index>(rows_) * bs_, static_cast<Eigen::Index>(cols_) * bs_);
  for (const auto &[rc, m] : blocks_)
    d.block(rc.first * bs_, rc.second * bs_, bs_, bs_) = m;
  return d;
}

bool
BlockMatrix::is_block_diagonal() const
{
  return std::all_of(blocks_.begin(), blocks_.end(), [](const auto &kv) { return kv.first.first == kv.first.second; });
}

PhaseSpace
PhaseSpace::from(Species s, std::vector<CellIndex> cells)
{
  PhaseSpace ps;
  ps.species = s;
  std::sort(cells.begin(), cells.end());
  ps.cells = std::move(cells);
  for (int i = 0; i < ps.size(); ++i)
    ps.index.emplace(ps.cells[i], i);
  return ps;
}

InjectionOperator
assemble_injection(const AggMap &map, const CellBasis &basis, const CartesianGrid &grid, ChainComposition mode)
{
  const auto violations = validate_map(map, grid);
  if (!violations.empty())
    throw std::invalid_argument("cannot assemble injection from an invalid map: " + violations.front().kind +
                                " at cell " + std::to_string(violations.front().cell.value));
  const int M = basis.size();
  std::vector<CellIndex> rows, cols;
  for (std::int64_t i = 0; i < grid.cell_count(); ++i)
  {
    const CellIndex c{i};
    if (!map.exists(c))
      continue;
    rows.push_back(c);
    if (!map.is_mapped(c))
      cols.push_back(c);
  }
  InjectionOperator op;
  op.rows = PhaseSpace::from(map.species(), rows);
  op.cols = PhaseSpace::from(map.species(), cols);
  op.Q = BlockMatrix(op.rows.size(), op.cols.size(), M);

  if (mode == ChainComposition::Direct)
  {
    for (CellIndex c : op.rows.cells)
    {
      const CellIndex root = map.final_target(c);
      op.Q.set(op.rows.index.at(c), op.cols.index.at(root), coupling_matrix(basis, grid, c, root));
    }
    return op;
  }

  // representation of every still-live cell: (original cell, block) entries
  std::unordered_map<CellIndex, std::vector<std::pair<CellIndex, Matrix>>> rep;
  for (CellIndex c : op.rows.cells)
    rep[c].push_back({c, Matrix::Identity(M, M)});
  std::vector<const AggPair *> order;
  for (const AggPair &p : map.pairs())
    order.push_back(&p);
  std::stable_sort(order.begin(), order.end(), [](const AggPair *a, const AggPair *b) { return a->level < b->level; });
  for (const AggPair *p : order)
  {
    const Matrix Qst = coupling_matrix(basis, grid, p->source, p->target);
    auto moved = std::move(rep.at(p->source));
    rep.erase(p->source);
    auto &dst = rep.at(p->target);
    for (auto &[x, B] : moved)
      dst.push_back({x, B * Qst});
  }
  for (auto &[col, entries] : rep)
    for (auto &[x, B] : entries)
      op.Q.set(op.rows.index.at(x), op.cols.index.at(col), std::move(B));
  return op;
}

BlockMatrix
mass_matrix(const CutCellMesh &mesh, const LevelSetField &field, const CellBasis &basis, const PhaseSpace &space,
            const QuadratureRule &rule)
{
  BlockMatrix m(space.size(), space.size(), basis.size());
  for (int i = 0; i < space.size(); ++i)
    m.set(i, i, phase_mass_matrix(mesh, field, basis, space.cells[i], space.species, rule));
  return m;
}

BlockMatrix
agglomerate_matrix(const BlockMatrix &A, const InjectionOperator &Q)
{
  if (A.block_rows() != Q.Q.block_rows() || A.block_cols() != Q.Q.block_rows() || A.block_size() != Q.Q.block_size())
    throw std::invalid_argument("matrix does not conform to the injection operator");
  return Q.Q.transpose() * (A * Q.Q);
}

Vector
inject(const InjectionOperator &Q, const Vector &agg_coeffs)
{
  return Q.Q * agg_coeffs;
}

Vector
restrict_coeffs(const InjectionOperator &Q, const BlockMatrix &M, const Vector &orig_coeffs)
{
  const BlockMatrix Mq = M * Q.Q;
  const BlockMatrix A = Q.Q.transpose() * Mq;
  const Vector rhs = Mq.transpose() * orig_coeffs;
  if (!A.is_block_diagonal())
    throw std::logic_error("agglomerated mass matrix is not block diagonal");
  const int bs = A.block_size();
  Vector v = Vector::Zero(rhs.size());
  for (int c = 0; c < A.block_rows(); ++c)
  {
    const Matrix *blk = A.find(c, c);
    if (!blk)
      throw std::runtime_error("agglomerated cell " + std::to_string(c) + " has no mass block");
    Eigen::LLT<Matrix> llt(*blk);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("singular agglomerated mass block for cell " + std::to_string(Q.cols.cells[c].value));
    v.segment(c * bs, bs) = llt.solve(rhs.segment(c * bs, bs));
  }
  return v;
}

Vector
project_function(const CellBasis &basis, const CartesianGrid &grid, CellIndex cell,
                 const std::function<double(const Point &)> &f)
{
  const GaussRule g = gauss_legendre_01(basis.degree() + 2);
  const int q = static_cast<int>(g.nodes.size());
  const int dim = basis.dim();
  int qn = 1;
  for (int a = 0; a < dim; ++a)
    qn *= q;
  const Point lower = grid.cell_lower(cell);
  Vector c = Vector::Zero(basis.size());
  for (int i = 0; i < qn; ++i)
  {
    Point xi{0.0, 0.0, 0.0}, x{0.0, 0.0, 0.0};
    double w = 1.0;
    int rest = i;
    for (int a = 0; a < dim; ++a)
    {
      const int k = rest % q;
      rest /= q;
      xi[a] = g.nodes[k];
      x[a] = lower[a] + xi[a] * grid.spacing(a);
      w *= g.weights[k];
    }
    c += w * f(x) * basis.eval_all(xi);
  }
  return c;
}

double
evaluate_local(const CellBasis &basis, const CartesianGrid &grid, CellIndex cell, const Vector &coeffs, const Point &x)
{
  const Point lower = grid.cell_lower(cell);
  Point xi{0.0, 0.0, 0.0};
  for (int a = 0; a < basis.dim(); ++a)
    xi[a] = (x[a] - lower[a]) / grid.spacing(a);
  return basis.eval_all(xi).dot(coeffs);
}

std::string
to_coordinate_text(const BlockMatrix &A)
{
  std::ostringstream os;
  os.precision(17);
  os << std::scientific;
  const int bs = A.block_size();
  for (const auto &[rc, m] : A.blocks())
    for (int i = 0; i < bs; ++i)
      for (int j = 0; j < bs; ++j)
        if (m(i, j) != 0.0)
          os << rc.first * bs + i << ' ' << rc.second * bs + j << ' ' << m(i, j) << '\n';
  return os.str();
}

} // namespace cutagg
