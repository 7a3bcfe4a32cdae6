#include "cutagg/grid.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace cutagg {

CartesianGrid::CartesianGrid(int dim, std::vector<int> cells_per_axis, Point origin, Point extent)
  : dim_(dim), origin_(origin), extent_(extent)
{
  if (dim != 2 && dim != 3)
    throw std::invalid_argument("grid dimension must be 2 or 3, got " + std::to_string(dim));
  if (static_cast<int>(cells_per_axis.size()) != dim)
    throw std::invalid_argument("cells_per_axis must have one entry per axis");

  cell_count_ = 1;
  for (int a = 0; a < dim; ++a)
  {
    if (cells_per_axis[a] <= 0)
      throw std::invalid_argument("cells_per_axis must be positive on every axis");
    if (!(extent[a] > 0.0))
      throw std::invalid_argument("extent must be positive on every axis");
    cells_[a] = cells_per_axis[a];
    spacing_[a] = extent[a] / cells_per_axis[a];
    cell_count_ *= cells_per_axis[a];
  }
  for (int a = dim; a < 3; ++a)
  {
    origin_[a] = 0.0;
    extent_[a] = 0.0;
  }
}

double
CartesianGrid::h() const
{
  double h = 0.0;
  for (int a = 0; a < dim_; ++a)
    h = std::max(h, spacing_[a]);
  return h;
}

double
CartesianGrid::cell_volume() const
{
  double v = 1.0;
  for (int a = 0; a < dim_; ++a)
    v *= spacing_[a];
  return v;
}

void
CartesianGrid::check(CellIndex c) const
{
  if (!contains(c))
    throw std::out_of_range("cell index " + std::to_string(c.value) + " outside grid of " +
                            std::to_string(cell_count_) + " cells");
}

MultiIndex
CartesianGrid::multi_index(CellIndex c) const
{
  check(c);
  MultiIndex idx{0, 0, 0};
  std::int64_t rest = c.value;
  for (int a = 0; a < dim_; ++a)
  {
    idx[a] = static_cast<int>(rest % cells_[a]);
    rest /= cells_[a];
  }
  return idx;
}

CellIndex
CartesianGrid::cell_at(const MultiIndex &idx) const
{
  std::int64_t value = 0;
  for (int a = dim_ - 1; a >= 0; --a)
  {
    if (idx[a] < 0 || idx[a] >= cells_[a])
      throw std::out_of_range("multi-index outside grid");
    value = value * cells_[a] + idx[a];
  }
  return CellIndex{value};
}

Point
CartesianGrid::cell_lower(CellIndex c) const
{
  const MultiIndex idx = multi_index(c);
  Point x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a)
    x[a] = origin_[a] + idx[a] * spacing_[a];
  return x;
}

Point
CartesianGrid::cell_center(CellIndex c) const
{
  Point x = cell_lower(c);
  for (int a = 0; a < dim_; ++a)
    x[a] += 0.5 * spacing_[a];
  return x;
}

NeighborList
CartesianGrid::face_neighbors(CellIndex c) const
{
  const MultiIndex idx = multi_index(c);
  NeighborList out;
  std::int64_t stride = 1;
  for (int a = 0; a < dim_; ++a)
  {
    if (idx[a] > 0)
      out.push_back(CellIndex{c.value - stride});
    if (idx[a] + 1 < cells_[a])
      out.push_back(CellIndex{c.value + stride});
    stride *= cells_[a];
  }
  return out;
}

bool
CartesianGrid::are_face_neighbors(CellIndex a, CellIndex b) const
{
  const MultiIndex ia = multi_index(a);
  const MultiIndex ib = multi_index(b);
  int diff = 0;
  for (int d = 0; d < dim_; ++d)
  {
    const int delta = std::abs(ia[d] - ib[d]);
    if (delta > 1)
      return false;
    diff += delta;
  }
  return diff == 1;
}

CartesianGrid
build_grid(int dim, const std::vector<int> &cells_per_axis, const Point &origin, const Point &extent)
{
  return CartesianGrid(dim, cells_per_axis, origin, extent);
}

Partition::Partition(const CartesianGrid &grid, std::vector<int> owner_of, int rank_count)
  : rank_count_(rank_count), owner_(std::move(owner_of)), owned_(rank_count), ghosts_(rank_count),
    ghost_mask_(rank_count, std::vector<std::uint8_t>(static_cast<std::size_t>(grid.cell_count()), 0))
{
  if (rank_count < 1)
    throw std::invalid_argument("rank_count must be at least 1");
  if (static_cast<std::int64_t>(owner_.size()) != grid.cell_count())
    throw std::invalid_argument("owner map must cover every cell");

  for (std::int64_t i = 0; i < grid.cell_count(); ++i)
  {
    const int r = owner_[i];
    if (r < 0 || r >= rank_count)
      throw std::invalid_argument("owner rank out of range");
    owned_[r].push_back(CellIndex{i});
  }
  for (int r = 0; r < rank_count; ++r)
  {
    for (CellIndex c : owned_[r])
      for (CellIndex n : grid.face_neighbors(c))
        if (owner_[n.value] != r)
          ghost_mask_[r][n.value] = 1;
    for (std::int64_t i = 0; i < grid.cell_count(); ++i)
      if (ghost_mask_[r][i])
        ghosts_[r].push_back(CellIndex{i});
  }
}

bool
Partition::is_ghost(int rank, CellIndex c) const
{
  return ghost_mask_[rank][static_cast<std::size_t>(c.value)] != 0;
}

std::vector<int>
Partition::ghost_holders(CellIndex c) const
{
  std::vector<int> out;
  for (int r = 0; r < rank_count_; ++r)
    if (is_ghost(r, c))
      out.push_back(r);
  return out;
}

Partition
partition_strips(const CartesianGrid &grid, int rank_count, int axis)
{
  if (rank_count < 1)
    throw std::invalid_argument("rank_count must be at least 1");
  if (axis < 0 || axis >= grid.dim())
    throw std::invalid_argument("partition axis outside grid dimension");
  const int n = grid.cells_along(axis);
  if (rank_count > n)
    throw std::invalid_argument("rank_count " + std::to_string(rank_count) + " exceeds " + std::to_string(n) +
                                " cells along axis " + std::to_string(axis));

  std::vector<int> owner(static_cast<std::size_t>(grid.cell_count()));
  for (std::int64_t i = 0; i < grid.cell_count(); ++i)
  {
    const int k = grid.multi_index(CellIndex{i})[axis];
    // slab r covers [floor(r*n/R), floor((r+1)*n/R))
    int r = static_cast<int>((static_cast<std::int64_t>(k) * rank_count) / n);
    while (static_cast<std::int64_t>(r + 1) * n / rank_count <= k)
      ++r;
    while (static_cast<std::int64_t>(r) * n / rank_count > k)
      --r;
    owner[i] = r;
  }
  return Partition(grid, std::move(owner), rank_count);
}

} // namespace cutagg
