#ifndef BSRSLI_INSTANTIATE_HPP
#define BSRSLI_INSTANTIATE_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ast.hpp"
#include "groundsolve.hpp"
#include "propagate.hpp"

namespace bsr {

// Turns a certified normal-form set into an essentially ground one by
// replacing each variable with finitely many instantiation points, preserving
// satisfiability. Integer variables draw their points from constant bounds
// reachable through the propagation preorder, closed off with a sentinel
// constant covering the unbounded side; element variables draw theirs from
// the constants reachable the same way. The sentinels are reserved names with
// a fixed order (below respectively above every other integer constant);
// the psi axiom clauses state that order so the ground solver sees it.

// Direction directive for one variable before resolution. Auto resolves to
// the direction with the smaller point set; ties go to Lower.
enum class DirChoice : uint8_t { Lower, Upper, Auto };

const char* dirChoiceName(DirChoice d);

// Provenance of a point set.
enum class PointDir : uint8_t { Lower, Upper, Free };

const char* pointDirName(PointDir d);

// A point set bundled with where it came from. Lower sets contain the low
// sentinel, Upper sets the high one; Free sets are nonempty.
struct VarPoints {
  std::string owner;  // position closure ("dn(T.1)", "up(T.1)") or variable
  PointDir dir = PointDir::Lower;
  InstantiationSet points;
};

// Per-position bound constants, no closure, no sentinel: every d such that
// some clause holds a variable x at position p and a constraint x = d or
// x >= d (Lower) respectively x = d or x <= d (Upper). Errors unless p is an
// integer position of a declared predicate.
InstantiationSet basePointsLower(const ClauseSet& set, const ArgPos& p);
InstantiationSet basePointsUpper(const ClauseSet& set, const ArgPos& p);

// Union of the per-position sets over the downward (Lower) or upward (Upper)
// closure of p, plus the matching sentinel. Errors unless p is an integer
// position.
VarPoints closurePoints(const ClauseSet& set, const PropagationPreorder& prop,
                        const ArgPos& p, Direction dir);

// Element-position points: union over the downward closure of p of the
// constants occurring at each position, widened to all declared element
// constants for positions holding a variable that some conclusion equates
// with a variable or constant. An empty union falls back to the
// lexicographically least declared element constant. Errors unless p is an
// element position.
VarPoints freePoints(const ClauseSet& set, const PropagationPreorder& prop, const ArgPos& p);

// Resolved points for one variable of one clause: the closure of the
// variable's home position, with Auto resolved by size (ties Lower). For
// element variables the direction directive is ignored.
VarPoints varClosure(const ClauseSet& set, const PropagationPreorder& prop, uint32_t clauseId,
                     const std::string& var, DirChoice dir);

// Sentinel order axioms for one direction: one falsum clause per integer
// constant occurring in the set (numerals included, the direction's own
// sentinel excluded), @minf >= c -> false respectively @pinf <= c -> false.
// When both sentinels are live the cross clause @minf >= @pinf -> false is
// included, always in that spelling.
std::vector<Clause> psiAxioms(const ClauseSet& set, Direction dir);

// Append whatever psiAxioms(set, dir) produces that the set lacks, declare
// the sentinel, and mark the corresponding flag.
void ensurePsi(ClauseSet& set, Direction dir);

// Replace clause clauseId by one instance per closure point of var (each
// instance pins var = point) and append the matching sentinel axioms.
// Requires a certified set; errors when the clause or variable is missing,
// the variable is not integer-sorted, or the direction is unresolved Auto.
// Instances of one clause share their remaining variable names; the
// certification flag survives because every consumer here treats variable
// disjointness per clause.
ClauseSet eliminateVar(const ClauseSet& set, uint32_t clauseId, const std::string& var,
                       DirChoice dir);

// Element analogue: rewrites the variable to each point; no pins, no
// sentinel axioms.
ClauseSet eliminateFreeVar(const ClauseSet& set, uint32_t clauseId, const std::string& var);

// Simplification to fixpoint:
//  S1  decide ground constraints: numerals by arithmetic, identical terms as
//      equal, @minf below and @pinf above every numeral, named constant and
//      other sentinel; other comparisons stay. True constraints leave the
//      clause, false ones delete it.
//  S2  delete duplicate clauses (variable renaming ignored), keeping the
//      oldest.
// Sentinel axiom clauses are exempt from both phases.
ClauseSet simplify(const ClauseSet& set);

enum class Baseline : uint8_t { None, Exhaustive, ArgFiltered };

// How groundAll picks variables, directions and points.
//  - directions: per-variable directive; defaultDirection covers the rest.
//  - order: explicit elimination order, consumed first; every remaining
//    variable follows smallest-point-set-first, ties by clause id then name.
//  - baseline None: closure points with sentinels (the default procedure).
//  - baseline Exhaustive: the designated variables take every integer
//    constant occurring in the input set (error when none occurs).
//  - baseline ArgFiltered: the designated variables take their lower+upper
//    closure points from the input set, sentinels stripped; a variable whose
//    filtered pool is empty falls back to the default procedure.
//  Variables not designated (and everything after a baseline pass) are
//  eliminated by the default procedure, so the result is always essentially
//  ground. Empty designate = all integer variables.
struct Strategy {
  std::map<std::string, DirChoice> directions;
  DirChoice defaultDirection = DirChoice::Auto;
  std::vector<std::string> order;
  Baseline baseline = Baseline::None;
  std::vector<std::string> designate;
};

struct GroundResult {
  ClauseSet set;
  InstantiationTrace trace;
};

// Eliminate until essentially ground, simplifying after every step. Each
// trace step records the variable, its points, the per-position points the
// step restricted (for model extrapolation; baseline steps record their pool
// but are meant for statistics, not extrapolation), and how many of its
// instances survived. An essentially ground input comes back unchanged.
GroundResult groundAll(const ClauseSet& set, const Strategy& strategy = {});

// True for the falsum clauses that only order a sentinel against another
// constant (the psi axiom shapes, the cross clause included).
bool isSentinelAxiom(const Clause& c);

// Every integer variable pinned by an equality, no element variables.
bool essentiallyGround(const ClauseSet& set);

// Clauses that are not sentinel axioms. Meaningful on essentially ground,
// simplified sets.
int countNonredundant(const ClauseSet& set);

// One deferred variable: instead of instantiating var in its clause, guard
// the clause and let the points travel as unit clauses.
struct DeferEntry {
  uint32_t clauseId = 0;
  std::string var;
  DirChoice dir = DirChoice::Auto;  // must be resolved by the caller
};

// For each entry: declare a fresh unary integer guard predicate for var, add
// the guard atom over var to the clause premise, and add one unit clause
// (v = point || -> guard(v)) per closure point, each over a fresh variable.
// Point sets are computed against the input set; sentinel axioms are added
// for the directions used. The deferred clause keeps its variable, so the
// result is meant for further grounding or export, not for the ground solver
// directly. An empty plan returns the set unchanged.
ClauseSet encodeSortPredicates(const ClauseSet& set, const std::vector<DeferEntry>& plan);

// One JSON object per elimination step: step, clause, variable, sort,
// direction, points, instances_after.
std::string traceToJsonLines(const InstantiationTrace& trace);

}  // namespace bsr

#endif
