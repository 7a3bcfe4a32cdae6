#pragma once

#include "cutagg/geometry.hpp"
#include "cutagg/grid.hpp"

#include <array>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace cutagg {

struct QuadratureRule
{
  int max_depth = 6;
  int gauss_order = 2; ///< points per axis for polynomial integration on pure boxes
};

/// Leaf of the recursive bisection, in reference coordinates [0,1]^dim.
struct QuadBox
{
  enum class Kind : std::uint8_t { PureA, PureB, Mixed };

  Point lo{0.0, 0.0, 0.0};
  double size = 1.0;
  Kind kind = Kind::PureA;
  /// For Mixed leaves: lattice point (i,j,k) -> psi < 0, flattened i fastest.
  std::array<bool, 27> negative{};
};

inline constexpr int kLatticePerAxis = 3;

int lattice_count(int dim);
/// Reference-coordinate offset in [0,1] of lattice point `i` along one axis.
inline double
lattice_offset(int i)
{
  return (i + 0.5) / kLatticePerAxis;
}

/// Traverse the bisection leaves of `cell` in deterministic order.
void visit_cell_boxes(const CartesianGrid &grid, const LevelSetField &field, CellIndex cell, double t,
                      const QuadratureRule &rule, const std::function<void(const QuadBox &)> &visit);

/// Volume fraction of species A in `cell`; species B is exactly 1 - A.
std::pair<double, double> cell_fraction(const CartesianGrid &grid, const LevelSetField &field, CellIndex cell,
                                        double t, const QuadratureRule &rule);

struct CoincidingFace
{
  CellIndex lower;
  CellIndex upper;
  int axis = 0;
  CellIndex owner;
  /// Species coupling the two cells across the face (set only when they are full in different species).
  bool has_edge_species = false;
  Species edge_species = Species::A;
};

struct PhaseCellRef
{
  CellIndex cell;
  Species species = Species::A;
  auto operator<=>(const PhaseCellRef &) const = default;
};

class CutCellMesh
{
public:
  static constexpr double kDefaultZeroTol = 1e-12;
  static constexpr double kCoincidingTol = 1e-12;

  CutCellMesh(CartesianGrid grid, double time, std::vector<double> frac_a, double zero_tol,
              std::vector<CoincidingFace> coinciding);

  /// Fixture constructor: fractions given directly, no coinciding faces.
  static CutCellMesh from_fractions(CartesianGrid grid, std::vector<double> frac_a, double time = 0.0,
                                    double zero_tol = kDefaultZeroTol);

  const CartesianGrid &grid() const { return grid_; }
  double time() const { return time_; }
  double zero_tol() const { return zero_tol_; }

  double fraction(CellIndex c, Species s) const;
  const std::vector<double> &fractions_a() const { return frac_a_; }
  bool is_cut(CellIndex c) const { return cut_[static_cast<std::size_t>(c.value)] != 0; }
  std::vector<CellIndex> cut_cells() const;

  const std::vector<CoincidingFace> &coinciding_faces() const { return coinciding_; }

  /// Empty phase cells created by owning a coinciding interface.
  const std::vector<PhaseCellRef> &coinciding_empty() const { return coinciding_empty_; }
  bool is_coinciding_empty(CellIndex c, Species s) const;

private:
  void derive();

  CartesianGrid grid_;
  double time_;
  std::vector<double> frac_a_;
  double zero_tol_;
  std::vector<std::uint8_t> cut_;
  std::vector<CoincidingFace> coinciding_;
  std::vector<PhaseCellRef> coinciding_empty_;
  std::vector<std::uint8_t> empty_mask_; ///< bit s set -> (cell, s) coinciding empty
};

CutCellMesh build_cutcell_mesh(const CartesianGrid &grid, const LevelSetField &field, double t,
                               const QuadratureRule &rule = {}, double zero_tol = CutCellMesh::kDefaultZeroTol);

/// Interior faces on which |psi| vanishes at every probe point.
std::vector<CoincidingFace> find_coinciding_faces(const CartesianGrid &grid, const LevelSetField &field, double t);

/// Lower-index ownership; edge species for faces between full cells of different species.
void assign_coinciding_interface(std::vector<CoincidingFace> &faces, const CartesianGrid &grid,
                                 const std::vector<double> &frac_a);

std::vector<PhaseCellRef> detect_coinciding_fractions(const CutCellMesh &mesh);

std::string mesh_to_json(const CutCellMesh &mesh);

} // namespace cutagg
