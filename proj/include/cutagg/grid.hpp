#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

namespace cutagg {

/// Global index of a background cell; x varies fastest.
struct CellIndex
{
  std::int64_t value = -1;

  constexpr CellIndex() = default;
  constexpr explicit CellIndex(std::int64_t v) : value(v) {}

  constexpr bool valid() const { return value >= 0; }
  constexpr auto operator<=>(const CellIndex &) const = default;
};

enum class Species : std::uint8_t
{
  A = 0, ///< psi < 0
  B = 1  ///< psi > 0
};

inline constexpr std::array<Species, 2> kAllSpecies{Species::A, Species::B};

constexpr Species
other(Species s)
{
  return s == Species::A ? Species::B : Species::A;
}

constexpr std::string_view
to_string(Species s)
{
  return s == Species::A ? "A" : "B";
}

/// Physical point; components beyond the grid dimension are zero.
using Point = std::array<double, 3>;
using MultiIndex = std::array<int, 3>;

/// Up to 2*dim face neighbours without heap allocation.
class NeighborList
{
public:
  void push_back(CellIndex c) { cells_[size_++] = c; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  const CellIndex *begin() const { return cells_.data(); }
  const CellIndex *end() const { return cells_.data() + size_; }
  CellIndex operator[](std::size_t i) const { return cells_[i]; }

private:
  std::array<CellIndex, 6> cells_{};
  std::size_t size_ = 0;
};

class CartesianGrid
{
public:
  CartesianGrid(int dim, std::vector<int> cells_per_axis, Point origin, Point extent);

  int dim() const { return dim_; }
  std::int64_t cell_count() const { return cell_count_; }
  int cells_along(int axis) const { return cells_[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }
  const Point &origin() const { return origin_; }
  const Point &extent() const { return extent_; }

  /// Largest spacing; the grid length scale h.
  double h() const;
  double cell_volume() const;

  bool contains(CellIndex c) const { return c.value >= 0 && c.value < cell_count_; }

  MultiIndex multi_index(CellIndex c) const;
  CellIndex cell_at(const MultiIndex &idx) const;

  Point cell_lower(CellIndex c) const;
  Point cell_center(CellIndex c) const;

  /// Ordered by axis, then direction (-1 before +1); out-of-domain skipped.
  NeighborList face_neighbors(CellIndex c) const;
  bool are_face_neighbors(CellIndex a, CellIndex b) const;

  bool operator==(const CartesianGrid &) const = default;

private:
  void check(CellIndex c) const;

  int dim_;
  std::array<int, 3> cells_{1, 1, 1};
  Point origin_{};
  Point extent_{};
  Point spacing_{1.0, 1.0, 1.0};
  std::int64_t cell_count_ = 0;
};

CartesianGrid build_grid(int dim, const std::vector<int> &cells_per_axis, const Point &origin, const Point &extent);

/// Static distribution of cells over logical ranks with 1-deep face ghosts.
class Partition
{
public:
  Partition(const CartesianGrid &grid, std::vector<int> owner_of, int rank_count);

  int rank_count() const { return rank_count_; }
  int owner_of(CellIndex c) const { return owner_[static_cast<std::size_t>(c.value)]; }

  const std::vector<CellIndex> &owned(int rank) const { return owned_[rank]; }
  const std::vector<CellIndex> &ghosts(int rank) const { return ghosts_[rank]; }

  bool owns(int rank, CellIndex c) const { return owner_of(c) == rank; }
  bool is_ghost(int rank, CellIndex c) const;
  /// Owned or ghost.
  bool is_visible(int rank, CellIndex c) const { return owns(rank, c) || is_ghost(rank, c); }

  /// Ranks (other than the owner) holding `c` as a ghost, ascending.
  std::vector<int> ghost_holders(CellIndex c) const;

private:
  int rank_count_;
  std::vector<int> owner_;
  std::vector<std::vector<CellIndex>> owned_;
  std::vector<std::vector<CellIndex>> ghosts_;
  std::vector<std::vector<std::uint8_t>> ghost_mask_;
};

/// Contiguous, equal-as-possible slabs along `axis`.
Partition partition_strips(const CartesianGrid &grid, int rank_count, int axis);

} // namespace cutagg

template <>
struct std::hash<cutagg::CellIndex>
{
  std::size_t operator()(const cutagg::CellIndex &c) const noexcept { return std::hash<std::int64_t>{}(c.value); }
};
