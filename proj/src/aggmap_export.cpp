#include "cutagg/aggmap.hpp"

#include <nlohmann/json.hpp>

#include <sstream>

namespace cutagg {

std::string
map_to_dot(const AggMap &map)
{
  std::ostringstream os;
  os << "digraph agg_" << to_string(map.species()) << " {\n";
  for (CellIndex r : map.promoted_roots())
    os << "  " << r.value << " [shape=doublecircle];\n";
  for (const AggPair &p : map.pairs())
    os << "  " << p.source.value << " -> " << p.target.value << " [label=\"" << p.level << "\"];\n";
  os << "}\n";
  return os.str();
}

std::string
map_to_canonical_json(const AggMap &map)
{
  nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
  for (const AggPair &p : map.pairs())
    pairs.push_back({p.source.value, map.final_target(p.source).value});
  nlohmann::ordered_json roots = nlohmann::ordered_json::array();
  for (CellIndex r : map.promoted_roots())
    roots.push_back(r.value);
  nlohmann::ordered_json j{{"species", std::string(to_string(map.species()))}, {"pairs", pairs}, {"promoted-roots", roots}};
  return j.dump(1);
}

std::string
map_to_json(const AggMap &map)
{
  nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
  for (const AggPair &p : map.pairs())
    pairs.push_back({{"source", p.source.value},
                     {"target", p.target.value},
                     {"final-target", map.final_target(p.source).value},
                     {"level", p.level},
                     {"kind", std::string(to_string(p.kind))}});
  nlohmann::ordered_json j{{"species", std::string(to_string(map.species()))}, {"pairs", pairs}};
  return j.dump(1);
}

} // namespace cutagg
