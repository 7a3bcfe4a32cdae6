#pragma once

#include "cutagg/cutcell.hpp"
#include "cutagg/grid.hpp"
#include "cutagg/parallel.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace cutagg {

enum class Mode
{
  Static,
  Splitting, ///< newborn cells become sources
  Moving     ///< newborn and vanishing cells become sources
};

std::string_view to_string(Mode m);
Mode parse_mode(std::string_view s);

/// Per-species source classification; vectors hold ascending cell indices.
struct SourceSets
{
  Species species = Species::A;
  std::vector<CellIndex> vanishing;
  std::vector<CellIndex> newborn;
  std::vector<CellIndex> small;
  std::vector<CellIndex> all;
};

/// Which phase cells of `s` take part in the step (dense, indexed by cell).
std::vector<std::uint8_t> existing_phase_cells(const CutCellMesh &prev, const CutCellMesh &next, Mode mode,
                                               Species s);

SourceSets identify_sources(const CutCellMesh &prev, const CutCellMesh &next, double alpha, Mode mode, Species s);

enum class PairKind : std::uint8_t
{
  Direct,
  Chain,
  Group
};

std::string_view to_string(PairKind k);

struct AggPair
{
  CellIndex source;
  CellIndex target;
  Species species = Species::A;
  int level = 0;
  PairKind kind = PairKind::Direct;
};

struct AggGroup
{
  CellIndex root;
  std::vector<CellIndex> members; ///< sources whose final target is root, ascending
};

/// Agglomeration forest of one species.
class AggMap
{
public:
  AggMap() = default;
  AggMap(SourceSets sets, std::vector<std::uint8_t> exists, std::vector<AggPair> pairs,
         std::vector<CellIndex> promoted_roots);

  Species species() const { return sets_.species; }
  const SourceSets &sources() const { return sets_; }
  const std::vector<AggPair> &pairs() const { return pairs_; }
  const std::vector<CellIndex> &promoted_roots() const { return promoted_; }
  bool exists(CellIndex c) const { return exists_[static_cast<std::size_t>(c.value)] != 0; }
  const std::vector<std::uint8_t> &exists_mask() const { return exists_; }

  const AggPair *pair_of(CellIndex source) const;
  bool is_mapped(CellIndex c) const { return pair_of(c) != nullptr; }
  /// Follows targets to the root; throws on a cycle.
  CellIndex final_target(CellIndex c) const;
  std::vector<AggGroup> groups() const;
  int max_level() const;

  /// Replace levels and kinds only for tests that need adversarial fixtures.
  std::vector<AggPair> &mutable_pairs() { return pairs_; }

private:
  SourceSets sets_;
  std::vector<std::uint8_t> exists_;
  std::vector<AggPair> pairs_; ///< sorted by source
  std::vector<CellIndex> promoted_;
};

/// An island of sources with no admissible root.
class UnresolvableIsland : public std::runtime_error
{
public:
  UnresolvableIsland(Species s, std::vector<CellIndex> cells);
  Species species() const { return species_; }
  const std::vector<CellIndex> &cells() const { return cells_; }

private:
  Species species_;
  std::vector<CellIndex> cells_;
};

struct AggStats
{
  int direct_pairs = 0;
  int chain_rounds = 0;
  int group_roots = 0;
  int level_rounds = 0;
};

/// Full pipeline for one species on the given rank network.
AggMap build_agglomeration(const CutCellMesh &prev, const CutCellMesh &next, double alpha, Mode mode, Species s,
                           RankNetwork &net, AggStats *stats = nullptr);

/// Same pipeline fed with precomputed sources and existence (fixtures, tests).
AggMap build_agglomeration(const CutCellMesh &next, const SourceSets &sets, const std::vector<std::uint8_t> &exists,
                           RankNetwork &net, AggStats *stats = nullptr);

/// Level of each pair: 0 without predecessors, else 1 + highest level targeting its source.
std::vector<int> determine_levels_reference(const std::vector<AggPair> &pairs);

struct Violation
{
  std::string kind;
  CellIndex cell;
  std::string detail;
};

std::vector<Violation> validate_map(const AggMap &map, const CartesianGrid &grid);

std::string map_to_dot(const AggMap &map);
/// Rank-invariant canonical form: sorted (source, final target) pairs.
std::string map_to_canonical_json(const AggMap &map);
/// Full pair list with levels and kinds.
std::string map_to_json(const AggMap &map);

} // namespace cutagg
