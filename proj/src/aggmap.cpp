#include "cutagg/aggmap.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

namespace cutagg {

std::string_view
to_string(Mode m)
{
  switch (m)
  {
  case Mode::Static:
    return "static";
  case Mode::Splitting:
    return "splitting";
  case Mode::Moving:
    return "moving";
  }
  return "?";
}

Mode
parse_mode(std::string_view s)
{
  if (s == "static")
    return Mode::Static;
  if (s == "splitting")
    return Mode::Splitting;
  if (s == "moving")
    return Mode::Moving;
  throw std::invalid_argument("unknown mode '" + std::string(s) + "'");
}

std::string_view
to_string(PairKind k)
{
  switch (k)
  {
  case PairKind::Direct:
    return "direct";
  case PairKind::Chain:
    return "chain";
  case PairKind::Group:
    return "group";
  }
  return "?";
}

namespace {

void
check_same_grid(const CutCellMesh &prev, const CutCellMesh &next)
{
  if (!(prev.grid() == next.grid()))
    throw std::invalid_argument("meshes of consecutive steps must share one grid");
}

bool
is_vanishing(const CutCellMesh &prev, const CutCellMesh &next, CellIndex c, Species s)
{
  return prev.fraction(c, s) > 0.0 && next.fraction(c, s) == 0.0 && !next.is_coinciding_empty(c, s);
}

bool
is_newborn(const CutCellMesh &prev, const CutCellMesh &next, CellIndex c, Species s)
{
  return prev.fraction(c, s) == 0.0 && next.fraction(c, s) > 0.0;
}

} // namespace

std::vector<std::uint8_t>
existing_phase_cells(const CutCellMesh &prev, const CutCellMesh &next, Mode mode, Species s)
{
  check_same_grid(prev, next);
  const std::int64_t n = next.grid().cell_count();
  std::vector<std::uint8_t> exists(static_cast<std::size_t>(n), 0);
  for (std::int64_t i = 0; i < n; ++i)
  {
    const CellIndex c{i};
    exists[i] = next.fraction(c, s) > 0.0 || next.is_coinciding_empty(c, s) ||
                (mode == Mode::Moving && is_vanishing(prev, next, c, s));
  }
  return exists;
}

SourceSets
identify_sources(const CutCellMesh &prev, const CutCellMesh &next, double alpha, Mode mode, Species s)
{
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("alpha must lie in [0, 1]");
  const auto exists = existing_phase_cells(prev, next, mode, s);
  SourceSets sets;
  sets.species = s;
  for (std::int64_t i = 0; i < next.grid().cell_count(); ++i)
  {
    const CellIndex c{i};
    if (!exists[i])
      continue;
    const double fp = prev.fraction(c, s);
    const double fn = next.fraction(c, s);
    if (mode == Mode::Moving && is_vanishing(prev, next, c, s))
      sets.vanishing.push_back(c);
    if (mode != Mode::Static && is_newborn(prev, next, c, s))
      sets.newborn.push_back(c);
    if (fn < alpha || (fp > 0.0 && fp < alpha) || next.is_coinciding_empty(c, s))
      sets.small.push_back(c);
  }
  std::set_union(sets.vanishing.begin(), sets.vanishing.end(), sets.newborn.begin(), sets.newborn.end(),
                 std::back_inserter(sets.all));
  std::vector<CellIndex> merged;
  std::set_union(sets.all.begin(), sets.all.end(), sets.small.begin(), sets.small.end(), std::back_inserter(merged));
  sets.all = std::move(merged);
  return sets;
}

AggMap::AggMap(SourceSets sets, std::vector<std::uint8_t> exists, std::vector<AggPair> pairs,
               std::vector<CellIndex> promoted_roots)
  : sets_(std::move(sets)), exists_(std::move(exists)), pairs_(std::move(pairs)), promoted_(std::move(promoted_roots))
{
  std::sort(pairs_.begin(), pairs_.end(), [](const AggPair &a, const AggPair &b) {
    return std::tie(a.source, a.target) < std::tie(b.source, b.target);
  });
  std::sort(promoted_.begin(), promoted_.end());
}

const AggPair *
AggMap::pair_of(CellIndex source) const
{
  auto it = std::lower_bound(pairs_.begin(), pairs_.end(), source,
                             [](const AggPair &p, CellIndex c) { return p.source < c; });
  if (it == pairs_.end() || it->source != source)
    return nullptr;
  return &*it;
}

CellIndex
AggMap::final_target(CellIndex c) const
{
  CellIndex cur = c;
  for (std::size_t hops = 0; hops <= pairs_.size(); ++hops)
  {
    const AggPair *p = pair_of(cur);
    if (!p)
      return cur;
    cur = p->target;
  }
  throw std::logic_error("agglomeration map contains a cycle through cell " + std::to_string(c.value));
}

std::vector<AggGroup>
AggMap::groups() const
{
  std::map<CellIndex, std::vector<CellIndex>> by_root;
  for (const AggPair &p : pairs_)
    by_root[final_target(p.source)].push_back(p.source);
  for (CellIndex r : promoted_)
    by_root[r];
  std::vector<AggGroup> out;
  for (auto &[root, members] : by_root)
  {
    std::sort(members.begin(), members.end());
    out.push_back({root, std::move(members)});
  }
  return out;
}

int
AggMap::max_level() const
{
  int m = 0;
  for (const AggPair &p : pairs_)
    m = std::max(m, p.level);
  return m;
}

UnresolvableIsland::UnresolvableIsland(Species s, std::vector<CellIndex> cells)
  : std::runtime_error([&] {
      std::ostringstream os;
      os << "no admissible agglomeration target for species " << to_string(s) << " island of cells";
      for (CellIndex c : cells)
        os << ' ' << c.value;
      return os.str();
    }()),
    species_(s), cells_(std::move(cells))
{
}

std::vector<int>
determine_levels_reference(const std::vector<AggPair> &pairs)
{
  std::map<CellIndex, std::vector<std::size_t>> into;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    into[pairs[i].target].push_back(i);

  std::vector<int> level(pairs.size(), -1);
  std::vector<std::uint8_t> active(pairs.size(), 0);
  std::function<int(std::size_t)> eval = [&](std::size_t i) -> int {
    if (level[i] >= 0)
      return level[i];
    if (active[i])
      throw std::logic_error("cycle while determining levels");
    active[i] = 1;
    int l = 0;
    if (auto it = into.find(pairs[i].source); it != into.end())
      for (std::size_t j : it->second)
        l = std::max(l, eval(j) + 1);
    active[i] = 0;
    return level[i] = l;
  };
  for (std::size_t i = 0; i < pairs.size(); ++i)
    eval(i);
  return level;
}

namespace {

struct Record
{
  bool known = false; ///< mapped source or root, as seen by this rank
  bool root = false;
  bool has_target = false;
  CellIndex target;
  int depth = 0;
  double final_frac = 0.0;
};

struct PairMsg
{
  CellIndex source;
  bool root = false;
  bool has_target = false;
  CellIndex target;
  int depth = 0;
  double final_frac = 0.0;
};

struct LevelMsg
{
  CellIndex target;
  int level = 0;
};

struct RankState
{
  std::vector<std::uint8_t> source;
  std::vector<Record> rec;
  std::vector<CellIndex> pending; ///< owned sources without a pair, ascending
  std::vector<CellIndex> fresh;   ///< owned records created since the last exchange
  std::vector<AggPair> pairs;
  std::vector<CellIndex> promoted;
};

class Builder
{
public:
  Builder(const CutCellMesh &mesh, const SourceSets &sets, const std::vector<std::uint8_t> &exists, RankNetwork &net)
    : mesh_(mesh), grid_(mesh.grid()), sets_(sets), exists_(exists), net_(net), part_(net.partition()),
      st_(net.rank_count())
  {
    if (static_cast<std::int64_t>(exists.size()) != grid_.cell_count())
      throw std::invalid_argument("existence mask must cover every cell");
    topological_.assign(exists.size(), 0);
    for (CellIndex c : sets.newborn)
      topological_[c.value] = 1;
    for (CellIndex c : sets.vanishing)
      topological_[c.value] = 1;
  }

  AggMap run(AggStats *stats)
  {
    init();
    direct_stage();
    exchange_fresh();
    if (stats)
      stats->direct_pairs = count_pairs();
    const int chain_rounds = chain_to_fixpoint(PairKind::Chain);
    const int roots = group_stage();
    const int level_rounds = determine_levels();
    if (stats)
    {
      stats->chain_rounds = chain_rounds;
      stats->group_roots = roots;
      stats->level_rounds = level_rounds;
    }
    return gather();
  }

private:
  double frac(CellIndex c) const { return mesh_.fraction(c, sets_.species); }
  bool exists(CellIndex c) const { return exists_[c.value] != 0; }

  void init()
  {
    const std::size_t n = static_cast<std::size_t>(grid_.cell_count());
    std::vector<std::vector<std::uint8_t>> flags(net_.rank_count(), std::vector<std::uint8_t>(n, 0));
    for (CellIndex c : sets_.all)
    {
      if (!exists(c))
        throw std::invalid_argument("source cell " + std::to_string(c.value) + " does not exist");
      flags[part_.owner_of(c)][c.value] = 1;
    }
    exchange_ghost_flags(net_, flags);
    net_.for_each_rank([&](int r) {
      RankState &s = st_[r];
      s.source = std::move(flags[r]);
      s.rec.assign(n, Record{});
      auto seed_root = [&](CellIndex c) {
        if (exists(c) && !s.source[c.value])
          s.rec[c.value] = Record{true, true, false, CellIndex{}, 0, frac(c)};
      };
      for (CellIndex c : part_.owned(r))
        seed_root(c);
      for (CellIndex c : part_.ghosts(r))
        seed_root(c);
    });
  }

  void direct_stage()
  {
    net_.for_each_rank([&](int r) {
      RankState &s = st_[r];
      for (CellIndex c : part_.owned(r))
      {
        if (!s.source[c.value])
          continue;
        CellIndex best;
        for (CellIndex n : grid_.face_neighbors(c))
        {
          if (!exists(n) || s.source[n.value])
            continue;
          if (!best.valid() || frac(n) > frac(best) || (frac(n) == frac(best) && n < best))
            best = n;
        }
        if (!best.valid())
        {
          s.pending.push_back(c);
          continue;
        }
        s.rec[c.value] = Record{true, false, true, best, 1, frac(best)};
        s.pairs.push_back({c, best, sets_.species, 0, PairKind::Direct});
        s.fresh.push_back(c);
      }
    });
  }

  void exchange_fresh()
  {
    auto inbox = net_.exchange<PairMsg>("boundary-pairs", [&](int r, Outbox<PairMsg> &out) {
      RankState &s = st_[r];
      for (CellIndex c : s.fresh)
      {
        const Record &rc = s.rec[c.value];
        for (int h : part_.ghost_holders(c))
        {
          PairMsg m{c, rc.root, false, CellIndex{}, rc.depth, rc.final_frac};
          std::vector<CellIndex> refs{c};
          if (rc.has_target && part_.is_visible(h, rc.target))
          {
            m.has_target = true;
            m.target = rc.target;
            refs.push_back(rc.target);
          }
          out.send(h, m, std::move(refs));
        }
      }
      s.fresh.clear();
    });
    net_.for_each_rank([&](int r) {
      for (const auto &env : inbox[r])
      {
        const PairMsg &m = env.payload;
        st_[r].rec[m.source.value] = Record{true, m.root, m.has_target, m.target, m.depth, m.final_frac};
      }
    });
  }

  std::int64_t count_pairs() const
  {
    std::int64_t n = 0;
    for (const RankState &s : st_)
      n += static_cast<std::int64_t>(s.pairs.size() + s.promoted.size());
    return n;
  }

  /// One BFS layer: pending cells next to a known record pair up, decided on the pre-round view.
  void chain_round(PairKind kind)
  {
    net_.for_each_rank([&](int r) {
      RankState &s = st_[r];
      struct Decision
      {
        CellIndex cell;
        Record rec;
      };
      std::vector<Decision> decided;
      std::vector<CellIndex> still;
      for (CellIndex c : s.pending)
      {
        CellIndex best;
        for (CellIndex n : grid_.face_neighbors(c))
        {
          if (!exists(n) || !s.rec[n.value].known)
            continue;
          if (!best.valid())
          {
            best = n;
            continue;
          }
          const Record &a = s.rec[n.value];
          const Record &b = s.rec[best.value];
          if (std::tuple(a.depth, -a.final_frac, n) < std::tuple(b.depth, -b.final_frac, best))
            best = n;
        }
        if (!best.valid())
        {
          still.push_back(c);
          continue;
        }
        const Record &nb = s.rec[best.value];
        CellIndex target = best;
        if (!nb.root && nb.has_target && part_.is_visible(r, nb.target))
          target = nb.target;
        decided.push_back({c, Record{true, false, true, target, nb.depth + 1, nb.final_frac}});
      }
      for (const Decision &d : decided)
      {
        s.rec[d.cell.value] = d.rec;
        s.pairs.push_back({d.cell, d.rec.target, sets_.species, 0, kind});
        s.fresh.push_back(d.cell);
      }
      s.pending = std::move(still);
    });
    exchange_fresh();
  }

  int chain_to_fixpoint(PairKind kind)
  {
    return run_rounds_to_fixpoint(count_pairs(), [&] {
      chain_round(kind);
      return count_pairs();
    });
  }

  int group_stage()
  {
    int roots = 0;
    for (;;)
    {
      std::vector<std::optional<Candidate>> cand(net_.rank_count());
      bool any_pending = false;
      net_.for_each_rank([&](int r) {
        for (CellIndex c : st_[r].pending)
        {
          if (topological_[c.value] || !(frac(c) > 0.0))
            continue;
          if (!cand[r] || frac(c) > cand[r]->fraction || (frac(c) == cand[r]->fraction && c < cand[r]->cell))
            cand[r] = Candidate{frac(c), c};
        }
      });
      for (const RankState &s : st_)
        any_pending = any_pending || !s.pending.empty();
      if (!any_pending)
        return roots;
      const std::optional<CellIndex> winner = global_agree_max(net_, cand);
      if (!winner)
      {
        std::vector<CellIndex> left;
        for (const RankState &s : st_)
          left.insert(left.end(), s.pending.begin(), s.pending.end());
        std::sort(left.begin(), left.end());
        throw UnresolvableIsland(sets_.species, std::move(left));
      }
      const int owner = part_.owner_of(*winner);
      RankState &s = st_[owner];
      s.pending.erase(std::find(s.pending.begin(), s.pending.end(), *winner));
      s.rec[winner->value] = Record{true, true, false, CellIndex{}, 0, frac(*winner)};
      s.promoted.push_back(*winner);
      s.fresh.push_back(*winner);
      exchange_fresh();
      ++roots;
      chain_to_fixpoint(PairKind::Group);
    }
  }

  int determine_levels()
  {
    const std::size_t n = static_cast<std::size_t>(grid_.cell_count());
    std::vector<std::vector<int>> into(net_.rank_count()); // highest level of any pair targeting a cell
    std::vector<std::vector<int>> sent(net_.rank_count());
    net_.for_each_rank([&](int r) {
      into[r].assign(n, -1);
      sent[r].assign(st_[r].pairs.size(), -1);
    });

    std::int64_t delivered = 0;
    // levels and recorded maxima only grow; delivered messages count as progress
    auto measure = [&] {
      std::int64_t sum = delivered;
      for (int r = 0; r < net_.rank_count(); ++r)
      {
        for (const AggPair &p : st_[r].pairs)
          sum += p.level;
        for (int v : into[r])
          sum += v + 1;
      }
      return sum;
    };

    return run_rounds_to_fixpoint(measure(), [&] {
      auto inbox = net_.exchange<LevelMsg>("levels", [&](int r, Outbox<LevelMsg> &out) {
        RankState &s = st_[r];
        bool changed = true;
        while (changed)
        {
          changed = false;
          for (AggPair &p : s.pairs)
          {
            const int l = into[r][p.source.value] + 1;
            if (l > p.level)
            {
              p.level = l;
              changed = true;
            }
            if (part_.owns(r, p.target) && p.level > into[r][p.target.value])
            {
              into[r][p.target.value] = p.level;
              changed = true;
            }
          }
        }
        for (std::size_t i = 0; i < s.pairs.size(); ++i)
        {
          const AggPair &p = s.pairs[i];
          if (!part_.owns(r, p.target) && p.level > sent[r][i])
          {
            out.send(part_.owner_of(p.target), {p.target, p.level}, {p.target});
            sent[r][i] = p.level;
          }
        }
      });
      net_.for_each_rank([&](int r) {
        for (const auto &env : inbox[r])
          into[r][env.payload.target.value] = std::max(into[r][env.payload.target.value], env.payload.level);
      });
      for (const auto &box : inbox)
        delivered += static_cast<std::int64_t>(box.size());
      return measure();
    });
  }

  AggMap gather() const
  {
    std::vector<AggPair> pairs;
    std::vector<CellIndex> promoted;
    for (const RankState &s : st_)
    {
      pairs.insert(pairs.end(), s.pairs.begin(), s.pairs.end());
      promoted.insert(promoted.end(), s.promoted.begin(), s.promoted.end());
    }
    return AggMap(sets_, exists_, std::move(pairs), std::move(promoted));
  }

  const CutCellMesh &mesh_;
  const CartesianGrid &grid_;
  const SourceSets &sets_;
  const std::vector<std::uint8_t> &exists_;
  RankNetwork &net_;
  const Partition &part_;
  std::vector<RankState> st_;
  std::vector<std::uint8_t> topological_;
};

} // namespace

AggMap
build_agglomeration(const CutCellMesh &next, const SourceSets &sets, const std::vector<std::uint8_t> &exists,
                    RankNetwork &net, AggStats *stats)
{
  std::size_t covered = 0;
  for (int r = 0; r < net.rank_count(); ++r)
    covered += net.partition().owned(r).size();
  if (static_cast<std::int64_t>(covered) != next.grid().cell_count())
    throw std::invalid_argument("rank network partition does not match the mesh grid");
  Builder b(next, sets, exists, net);
  return b.run(stats);
}

AggMap
build_agglomeration(const CutCellMesh &prev, const CutCellMesh &next, double alpha, Mode mode, Species s,
                    RankNetwork &net, AggStats *stats)
{
  const SourceSets sets = identify_sources(prev, next, alpha, mode, s);
  const auto exists = existing_phase_cells(prev, next, mode, s);
  return build_agglomeration(next, sets, exists, net, stats);
}

} // namespace cutagg
