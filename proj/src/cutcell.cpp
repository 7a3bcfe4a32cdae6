#include "cutagg/cutcell.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cutagg {

namespace {

Point
to_physical(const CartesianGrid &grid, const Point &lower, const Point &ref)
{
  Point x{0.0, 0.0, 0.0};
  for (int a = 0; a < grid.dim(); ++a)
    x[a] = lower[a] + ref[a] * grid.spacing(a);
  return x;
}

double
eval_checked(const LevelSetField &field, const Point &x, double t)
{
  const double v = field(x, t);
  if (!std::isfinite(v))
    throw std::domain_error("level set returned a non-finite value");
  return v;
}

struct Traversal
{
  const CartesianGrid &grid;
  const LevelSetField &field;
  const Point lower;
  double t;
  int max_depth;
  const std::function<void(const QuadBox &)> &visit;

  double psi(const Point &ref) const { return eval_checked(field, to_physical(grid, lower, ref), t); }

  void recurse(const Point &lo, double size, int depth) const
  {
    const int dim = grid.dim();
    const int corners = 1 << dim;
    int negatives = 0;
    int samples = 0;
    for (int m = 0; m < corners; ++m)
    {
      Point p = lo;
      for (int a = 0; a < dim; ++a)
        if (m & (1 << a))
          p[a] += size;
      negatives += psi(p) < 0.0;
      ++samples;
    }
    Point c = lo;
    for (int a = 0; a < dim; ++a)
      c[a] += 0.5 * size;
    negatives += psi(c) < 0.0;
    ++samples;

    QuadBox box;
    box.lo = lo;
    box.size = size;
    if (negatives == samples)
    {
      box.kind = QuadBox::Kind::PureA;
      visit(box);
      return;
    }
    if (negatives == 0)
    {
      box.kind = QuadBox::Kind::PureB;
      visit(box);
      return;
    }
    if (depth >= max_depth)
    {
      box.kind = QuadBox::Kind::Mixed;
      const int n = lattice_count(dim);
      for (int i = 0; i < n; ++i)
      {
        Point p = lo;
        int rest = i;
        for (int a = 0; a < dim; ++a)
        {
          p[a] += lattice_offset(rest % kLatticePerAxis) * size;
          rest /= kLatticePerAxis;
        }
        box.negative[i] = psi(p) < 0.0;
      }
      visit(box);
      return;
    }
    const double half = 0.5 * size;
    for (int m = 0; m < corners; ++m)
    {
      Point child = lo;
      for (int a = 0; a < dim; ++a)
        if (m & (1 << a))
          child[a] += half;
      recurse(child, half, depth + 1);
    }
  }
};

} // namespace

int
lattice_count(int dim)
{
  int n = 1;
  for (int a = 0; a < dim; ++a)
    n *= kLatticePerAxis;
  return n;
}

void
visit_cell_boxes(const CartesianGrid &grid, const LevelSetField &field, CellIndex cell, double t,
                 const QuadratureRule &rule, const std::function<void(const QuadBox &)> &visit)
{
  if (rule.max_depth < 0)
    throw std::invalid_argument("quadrature depth must be non-negative");
  if (field.dim() != grid.dim())
    throw std::invalid_argument("level set and grid dimensions differ");
  Traversal tr{grid, field, grid.cell_lower(cell), t, rule.max_depth, visit};
  tr.recurse({0.0, 0.0, 0.0}, 1.0, 0);
}

std::pair<double, double>
cell_fraction(const CartesianGrid &grid, const LevelSetField &field, CellIndex cell, double t,
              const QuadratureRule &rule)
{
  const int dim = grid.dim();
  const int n = lattice_count(dim);
  double a = 0.0;
  visit_cell_boxes(grid, field, cell, t, rule, [&](const QuadBox &box) {
    const double vol = std::pow(box.size, dim);
    if (box.kind == QuadBox::Kind::PureA)
      a += vol;
    else if (box.kind == QuadBox::Kind::Mixed)
    {
      const int neg = static_cast<int>(std::count(box.negative.begin(), box.negative.begin() + n, true));
      a += vol * neg / n;
    }
  });
  a = std::clamp(a, 0.0, 1.0);
  return {a, 1.0 - a};
}

CutCellMesh::CutCellMesh(CartesianGrid grid, double time, std::vector<double> frac_a, double zero_tol,
                         std::vector<CoincidingFace> coinciding)
  : grid_(std::move(grid)), time_(time), frac_a_(std::move(frac_a)), zero_tol_(zero_tol),
    coinciding_(std::move(coinciding))
{
  if (!(zero_tol >= 0.0 && zero_tol < 0.5))
    throw std::invalid_argument("zero_tol must lie in [0, 0.5)");
  if (static_cast<std::int64_t>(frac_a_.size()) != grid_.cell_count())
    throw std::invalid_argument("fraction vector must cover every cell");
  for (double &f : frac_a_)
  {
    if (!(f >= 0.0 && f <= 1.0))
      throw std::invalid_argument("fractions must lie in [0, 1]");
    if (f < zero_tol_)
      f = 0.0;
    else if (f > 1.0 - zero_tol_)
      f = 1.0;
  }
  derive();
}

CutCellMesh
CutCellMesh::from_fractions(CartesianGrid grid, std::vector<double> frac_a, double time, double zero_tol)
{
  return CutCellMesh(std::move(grid), time, std::move(frac_a), zero_tol, {});
}

void
CutCellMesh::derive()
{
  cut_.assign(frac_a_.size(), 0);
  for (std::size_t i = 0; i < frac_a_.size(); ++i)
    cut_[i] = frac_a_[i] > 0.0 && frac_a_[i] < 1.0;
  assign_coinciding_interface(coinciding_, grid_, frac_a_);
  coinciding_empty_ = detect_coinciding_fractions(*this);
  empty_mask_.assign(frac_a_.size(), 0);
  for (const PhaseCellRef &e : coinciding_empty_)
    empty_mask_[e.cell.value] |= static_cast<std::uint8_t>(1u << static_cast<int>(e.species));
}

double
CutCellMesh::fraction(CellIndex c, Species s) const
{
  const double a = frac_a_.at(static_cast<std::size_t>(c.value));
  return s == Species::A ? a : 1.0 - a;
}

std::vector<CellIndex>
CutCellMesh::cut_cells() const
{
  std::vector<CellIndex> out;
  for (std::size_t i = 0; i < cut_.size(); ++i)
    if (cut_[i])
      out.emplace_back(static_cast<std::int64_t>(i));
  return out;
}

bool
CutCellMesh::is_coinciding_empty(CellIndex c, Species s) const
{
  return (empty_mask_[static_cast<std::size_t>(c.value)] >> static_cast<int>(s)) & 1u;
}

std::vector<CoincidingFace>
find_coinciding_faces(const CartesianGrid &grid, const LevelSetField &field, double t)
{
  const int dim = grid.dim();
  const double tol = CutCellMesh::kCoincidingTol;
  std::vector<CoincidingFace> faces;
  for (std::int64_t i = 0; i < grid.cell_count(); ++i)
  {
    const CellIndex c{i};
    const MultiIndex idx = grid.multi_index(c);
    const Point lower = grid.cell_lower(c);
    for (int axis = 0; axis < dim; ++axis)
    {
      if (idx[axis] + 1 >= grid.cells_along(axis))
        continue;
      // face at the +axis side of c, parametrised by the remaining axes
      auto probe = [&](const Point &ref) {
        Point r = ref;
        r[axis] = 1.0;
        return std::abs(eval_checked(field, to_physical(grid, lower, r), t)) < tol;
      };
      if (!probe({0.5, 0.5, 0.5}))
        continue;
      bool all = true;
      for (int m = 0; all && m < (1 << dim); ++m)
      {
        if (m & (1 << axis))
          continue;
        Point r{0.0, 0.0, 0.0};
        for (int a = 0; a < dim; ++a)
          r[a] = (m & (1 << a)) ? 1.0 : 0.0;
        all = probe(r);
      }
      const int n = lattice_count(dim - 1);
      for (int k = 0; all && k < n; ++k)
      {
        Point r{0.5, 0.5, 0.5};
        int rest = k;
        for (int a = 0; a < dim; ++a)
        {
          if (a == axis)
            continue;
          r[a] = lattice_offset(rest % kLatticePerAxis);
          rest /= kLatticePerAxis;
        }
        all = probe(r);
      }
      if (!all)
        continue;
      MultiIndex up = idx;
      ++up[axis];
      CoincidingFace f;
      f.lower = c;
      f.upper = grid.cell_at(up);
      f.axis = axis;
      faces.push_back(f);
    }
  }
  return faces;
}

void
assign_coinciding_interface(std::vector<CoincidingFace> &faces, const CartesianGrid &grid,
                            const std::vector<double> &frac_a)
{
  for (CoincidingFace &f : faces)
  {
    if (!grid.contains(f.lower) || !grid.contains(f.upper) || !grid.are_face_neighbors(f.lower, f.upper))
      throw std::invalid_argument("coinciding face does not join two neighbouring cells");
    if (f.upper < f.lower)
      std::swap(f.lower, f.upper);
    f.owner = f.lower;
    const double lo = frac_a[f.lower.value];
    const double up = frac_a[f.upper.value];
    f.has_edge_species = false;
    if ((lo == 1.0 && up == 0.0) || (lo == 0.0 && up == 1.0))
    {
      f.has_edge_species = true;
      f.edge_species = up == 1.0 ? Species::A : Species::B;
    }
  }
  std::sort(faces.begin(), faces.end(), [](const CoincidingFace &a, const CoincidingFace &b) {
    return std::tie(a.lower, a.axis) < std::tie(b.lower, b.axis);
  });
}

std::vector<PhaseCellRef>
detect_coinciding_fractions(const CutCellMesh &mesh)
{
  std::vector<PhaseCellRef> out;
  for (const CoincidingFace &f : mesh.coinciding_faces())
    if (f.has_edge_species)
      out.push_back({f.owner, f.edge_species});
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

CutCellMesh
build_cutcell_mesh(const CartesianGrid &grid, const LevelSetField &field, double t, const QuadratureRule &rule,
                   double zero_tol)
{
  std::vector<double> frac(static_cast<std::size_t>(grid.cell_count()));
  for (std::int64_t i = 0; i < grid.cell_count(); ++i)
    frac[i] = cell_fraction(grid, field, CellIndex{i}, t, rule).first;
  return CutCellMesh(grid, t, std::move(frac), zero_tol, find_coinciding_faces(grid, field, t));
}

std::string
mesh_to_json(const CutCellMesh &mesh)
{
  using nlohmann::ordered_json;
  const CartesianGrid &g = mesh.grid();
  ordered_json j;
  j["time"] = mesh.time();
  ordered_json cells_per_axis = ordered_json::array();
  for (int a = 0; a < g.dim(); ++a)
    cells_per_axis.push_back(g.cells_along(a));
  j["dim"] = g.dim();
  j["cells-per-axis"] = cells_per_axis;
  ordered_json cells = ordered_json::array();
  for (std::int64_t i = 0; i < g.cell_count(); ++i)
  {
    const CellIndex c{i};
    const double fa = mesh.fraction(c, Species::A);
    if (fa == 1.0 || fa == 0.0)
    {
      if (!std::any_of(mesh.coinciding_empty().begin(), mesh.coinciding_empty().end(),
                       [&](const PhaseCellRef &e) { return e.cell == c; }))
        continue;
    }
    cells.push_back({{"cell", i}, {"frac-a", fa}, {"frac-b", mesh.fraction(c, Species::B)}, {"cut", mesh.is_cut(c)}});
  }
  j["non-pure-cells"] = cells;
  ordered_json faces = ordered_json::array();
  for (const CoincidingFace &f : mesh.coinciding_faces())
  {
    ordered_json jf{{"lower", f.lower.value}, {"upper", f.upper.value}, {"axis", f.axis}, {"owner", f.owner.value}};
    if (f.has_edge_species)
      jf["edge-species"] = std::string(to_string(f.edge_species));
    faces.push_back(jf);
  }
  j["coinciding-faces"] = faces;
  ordered_json empty = ordered_json::array();
  for (const PhaseCellRef &e : mesh.coinciding_empty())
    empty.push_back({{"cell", e.cell.value}, {"species", std::string(to_string(e.species))}});
  j["coinciding-empty"] = empty;
  return j.dump(1);
}

} // namespace cutagg
