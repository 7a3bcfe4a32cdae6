#include "cutagg/aggmap.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace cutagg {

namespace {

std::string
cell_str(CellIndex c)
{
  return std::to_string(c.value);
}

} // namespace

std::vector<Violation>
validate_map(const AggMap &map, const CartesianGrid &grid)
{
  std::vector<Violation> v;
  auto report = [&](std::string kind, CellIndex c, std::string detail) {
    v.push_back({std::move(kind), c, std::move(detail)});
  };

  const SourceSets &sets = map.sources();
  const auto &pairs = map.pairs();
  const auto &promoted = map.promoted_roots();
  auto in = [](const std::vector<CellIndex> &sorted, CellIndex c) {
    return std::binary_search(sorted.begin(), sorted.end(), c);
  };
  std::vector<CellIndex> topological;
  std::set_union(sets.newborn.begin(), sets.newborn.end(), sets.vanishing.begin(), sets.vanishing.end(),
                 std::back_inserter(topological));

  std::map<CellIndex, int> out_degree;
  for (const AggPair &p : pairs)
  {
    if (!grid.contains(p.source) || !grid.contains(p.target))
    {
      report("out-of-grid", p.source, "pair references a cell outside the grid");
      continue;
    }
    if (p.source == p.target)
      report("self-pair", p.source, "source equals target");
    if (p.species != sets.species)
      report("species", p.source, "pair species differs from map species");
    if (++out_degree[p.source] > 1)
      report("multiple-mapping", p.source, "source appears in more than one pair");
    if (!in(sets.all, p.source))
      report("not-a-source", p.source, "pair source is not in the source set");
    if (in(promoted, p.source))
      report("root-is-source", p.source, "promoted root is mapped");
    if (!map.exists(p.target))
      report("target-missing", p.source, "target " + cell_str(p.target) + " has no phase cell");
  }
  if (!v.empty() && std::any_of(v.begin(), v.end(), [](const Violation &x) { return x.kind == "out-of-grid"; }))
    return v;

  for (CellIndex c : sets.all)
    if (!in(promoted, c) && !out_degree.count(c))
      report("unmapped-source", c, "source has no pair");
  for (CellIndex c : promoted)
    if (!in(sets.all, c))
      report("promoted-non-source", c, "promoted root was never a source");

  // cycle detection by pointer chasing with colouring
  std::map<CellIndex, CellIndex> next;
  for (const AggPair &p : pairs)
    next.emplace(p.source, p.target);
  std::map<CellIndex, int> colour; // 1 on stack, 2 done
  bool cyclic = false;
  for (const auto &[start, unused] : next)
  {
    (void)unused;
    std::vector<CellIndex> path;
    CellIndex cur = start;
    while (true)
    {
      auto col = colour.find(cur);
      if (col != colour.end())
      {
        if (col->second == 1)
        {
          report("cycle", cur, "cycle through this cell");
          cyclic = true;
        }
        break;
      }
      colour[cur] = 1;
      path.push_back(cur);
      auto it = next.find(cur);
      if (it == next.end())
        break;
      cur = it->second;
    }
    for (CellIndex c : path)
      colour[c] = 2;
  }
  if (cyclic)
    return v;

  // roots and group uniqueness
  std::map<CellIndex, std::vector<CellIndex>> members;
  for (const AggPair &p : pairs)
    members[map.final_target(p.source)].push_back(p.source);
  for (const auto &[root, group] : members)
  {
    (void)group;
    if (next.count(root))
      report("root-has-pair", root, "final target is itself mapped");
    if (in(sets.all, root) && !in(promoted, root))
      report("root-is-source", root, "final target is an unpromoted source");
    if (in(topological, root))
      report("root-topological", root, "final target is newborn or vanishing");
    if (!map.exists(root))
      report("root-missing", root, "final target has no phase cell");
  }
  // every group must reach exactly one root: components of the undirected pair graph
  {
    std::map<CellIndex, CellIndex> parent;
    std::function<CellIndex(CellIndex)> find = [&](CellIndex c) -> CellIndex {
      auto it = parent.find(c);
      if (it == parent.end() || it->second == c)
        return c;
      return it->second = find(it->second);
    };
    for (const AggPair &p : pairs)
    {
      const CellIndex a = find(p.source), b = find(p.target);
      parent.emplace(a, a);
      parent.emplace(b, b);
      if (a != b)
        parent[a] = b;
    }
    std::map<CellIndex, int> roots_per_component;
    for (const auto &[root, group] : members)
    {
      (void)group;
      ++roots_per_component[find(root)];
    }
    for (const auto &[comp, count] : roots_per_component)
      if (count != 1)
        report("multiple-roots", comp, "component has " + std::to_string(count) + " roots");
  }

  for (const AggPair &p : pairs)
    if (p.kind == PairKind::Direct)
    {
      if (!grid.are_face_neighbors(p.source, p.target))
        report("direct-not-adjacent", p.source, "direct target " + cell_str(p.target) + " shares no face");
      if (next.count(p.target))
        report("direct-not-final", p.source, "direct target " + cell_str(p.target) + " is not a root");
    }

  const std::vector<int> levels = determine_levels_reference(pairs);
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (levels[i] != pairs[i].level)
      report("level", pairs[i].source,
             "level " + std::to_string(pairs[i].level) + " expected " + std::to_string(levels[i]));
  return v;
}

} // namespace cutagg
