#ifndef BSRSLI_PROPAGATE_HPP
#define BSRSLI_PROPAGATE_HPP

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ast.hpp"

namespace bsr {

// One argument position of a declared non-theory predicate, 1-based.
struct ArgPos {
  std::string pred;
  int index = 1;

  auto operator<=>(const ArgPos&) const = default;
};

std::string toString(const ArgPos& p);

// How instantiation points travel between argument positions. Within one
// clause, position q feeds position p when
//   (1) the same variable occurs at q and p (both directions),
//   (2) u at q, v at p are integer variables and the constraints contain
//       u = v or u <= v (a bound on u also bounds v), or
//   (3) u at q, v at p are element variables and u ~ v occurs as an
//       equation (both directions).
// The relation is the reflexive-transitive closure of those edges; confined
// to element positions it is symmetric. Placeholder atoms count as
// occurrences: they are exactly what anchors equation-only variables here.
struct PropagationPreorder {
  std::vector<ArgPos> positions;                    // sorted, all non-theory positions
  std::set<std::pair<ArgPos, ArgPos>> edges;        // generator pairs (q, p): q below p
  std::map<ArgPos, std::set<ArgPos>> below;         // closure: below[p] = all q with q below p
  std::map<ArgPos, std::set<ArgPos>> above;         // closure: above[p] = all q with p below q
  std::map<std::pair<uint32_t, std::string>, ArgPos> varHome;  // (clause id, var) -> least position

  // q below-or-equal p in the closure.
  bool le(const ArgPos& q, const ArgPos& p) const;
};

// Requires a certified normal-form set (every constraint variable anchored).
// Built once, immutable afterwards; queries are read-only.
PropagationPreorder buildProp(const ClauseSet& set);

// All positions feeding p (downward closure; contains p). Unknown p errors.
const std::set<ArgPos>& downcl(const PropagationPreorder& prop, const ArgPos& p);

// All positions fed by p (upward closure; contains p). Unknown p errors.
const std::set<ArgPos>& upcl(const PropagationPreorder& prop, const ArgPos& p);

// Generator edges and isolated positions as a DOT digraph.
std::string propDot(const PropagationPreorder& prop);

}  // namespace bsr

#endif
