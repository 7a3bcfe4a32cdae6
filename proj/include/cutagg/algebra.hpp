#pragma once

#include "cutagg/aggmap.hpp"
#include "cutagg/cutcell.hpp"
#include "cutagg/geometry.hpp"
#include "cutagg/grid.hpp"

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <unordered_map>
#include <vector>

namespace cutagg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Gauss-Legendre rule with `n` points mapped to [0,1].
struct GaussRule
{
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_legendre_01(int n);

/// sqrt(2k+1) P_k(2 xi - 1): orthonormal on [0,1].
double scaled_legendre(int k, double xi);

/// Tensor Legendre modes, orthonormal over the reference cell [0,1]^dim.
class CellBasis
{
public:
  CellBasis(int dim, int degree);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  int size() const { return static_cast<int>(modes_.size()); }
  /// Per-axis degrees of each mode, ordered by total degree then lexicographically.
  const std::vector<std::array<int, 3>> &modes() const { return modes_; }

  double eval(int mode, const Point &xi) const;
  Vector eval_all(const Point &xi) const;

private:
  int dim_;
  int degree_;
  std::vector<std::array<int, 3>> modes_;
};

CellBasis tensor_basis(int dim, int p);

/// Gram matrix of the basis over the phase region of `species` in `cell`.
Matrix phase_mass_matrix(const CutCellMesh &mesh, const LevelSetField &field, const CellBasis &basis, CellIndex cell,
                         Species species, const QuadratureRule &rule);

/// Coefficients of cell j's basis, polynomially extended, expressed in cell i's basis.
Matrix coupling_matrix(const CellBasis &basis, const CartesianGrid &grid, CellIndex i, CellIndex j);

/// Sparse matrix of dense square blocks.
class BlockMatrix
{
public:
  BlockMatrix() = default;
  BlockMatrix(int block_rows, int block_cols, int block_size);

  int block_rows() const { return rows_; }
  int block_cols() const { return cols_; }
  int block_size() const { return bs_; }

  void set(int r, int c, Matrix m);
  void add(int r, int c, const Matrix &m);
  const Matrix *find(int r, int c) const;
  const std::map<std::pair<int, int>, Matrix> &blocks() const { return blocks_; }

  BlockMatrix transpose() const;
  BlockMatrix operator*(const BlockMatrix &rhs) const;
  Vector operator*(const Vector &x) const;
  Matrix to_dense() const;
  bool is_block_diagonal() const;

private:
  int rows_ = 0;
  int cols_ = 0;
  int bs_ = 0;
  std::map<std::pair<int, int>, Matrix> blocks_;
};

/// Ordered list of phase cells of one species with reverse lookup.
struct PhaseSpace
{
  Species species = Species::A;
  std::vector<CellIndex> cells;
  std::unordered_map<CellIndex, int> index;

  static PhaseSpace from(Species s, std::vector<CellIndex> cells);
  int size() const { return static_cast<int>(cells.size()); }
};

struct InjectionOperator
{
  PhaseSpace rows; ///< existing phase cells
  PhaseSpace cols; ///< agglomerated cells (rows minus mapped sources)
  BlockMatrix Q;
};

enum class ChainComposition
{
  Sequential, ///< compose coupling matrices pair by pair in level order
  Direct      ///< couple every member straight to its final target
};

/// Validates the map first; throws std::invalid_argument on violations.
InjectionOperator assemble_injection(const AggMap &map, const CellBasis &basis, const CartesianGrid &grid,
                                     ChainComposition mode = ChainComposition::Sequential);

/// Block-diagonal phase mass matrix over `space`.
BlockMatrix mass_matrix(const CutCellMesh &mesh, const LevelSetField &field, const CellBasis &basis,
                        const PhaseSpace &space, const QuadratureRule &rule);

BlockMatrix agglomerate_matrix(const BlockMatrix &A, const InjectionOperator &Q);

Vector inject(const InjectionOperator &Q, const Vector &agg_coeffs);
/// L2 projection onto the agglomerated space with metric `M`.
Vector restrict_coeffs(const InjectionOperator &Q, const BlockMatrix &M, const Vector &orig_coeffs);

/// L2 projection of f onto the full-cell basis of `cell`.
Vector project_function(const CellBasis &basis, const CartesianGrid &grid, CellIndex cell,
                        const std::function<double(const Point &)> &f);
double evaluate_local(const CellBasis &basis, const CartesianGrid &grid, CellIndex cell, const Vector &coeffs,
                      const Point &x);

/// Row, column, value triplets, one per line.
std::string to_coordinate_text(const BlockMatrix &A);

} // namespace cutagg
