#ifndef BSRSLI_GROUNDSOLVE_HPP
#define BSRSLI_GROUNDSOLVE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "ast.hpp"
#include "propagate.hpp"

namespace bsr {

// ---------------------------------------------------------------------------
// Exact feasibility of conjunctions of ground linear constraints.

struct LiaResult {
  bool feasible = false;
  // Integer witness for every named constant mentioned (feasible only).
  std::map<std::string, int64_t> sample;
};

// Decides a conjunction of ground-vs-ground constraints over the integers by
// exact rational elimination plus branch-and-bound on fractional gaps.
// Disequations must be split by the caller; branching depth is capped at
// 10 * #unknowns and exceeding the cap is an error, never a verdict.
LiaResult liaFeasible(const std::vector<Constraint>& constraints);

// ---------------------------------------------------------------------------
// Instantiation points and integer interval partitions.

// A point is a numeral or a named integer constant (sentinels included).
struct InstPoint {
  bool isNum = false;
  int64_t num = 0;
  std::string name;

  static InstPoint numeral(int64_t v);
  static InstPoint named(const std::string& n);
  auto operator<=>(const InstPoint&) const = default;
};

std::string toString(const InstPoint& p);

using InstantiationSet = std::set<InstPoint>;

// Which side of a variable's occurrences the points come from: Lower points
// are values the variable is bounded below by (cells close at points),
// Upper points bound it above (cells close just after points).
enum class Direction : uint8_t { Lower, Upper };

const char* directionName(Direction d);

// One cell of an integer interval partition. A missing bound is infinite.
// rep is a member value standing for the whole cell; repName names the point
// behind it (a constant, a numeral rendered in decimal, or a sentinel for
// the open cell).
struct PartitionCell {
  std::optional<int64_t> lo, hi;
  int64_t rep = 0;
  std::string repName;

  bool contains(int64_t v) const;
};

std::string toString(const PartitionCell& c);

// Partition of the integers induced by a point set with values r1 < .. < rk.
//   Lower: (-inf, r1-1], [r1, r2-1], .., [rk, +inf)
//   Upper: (-inf, r1], [r1+1, r2], .., [rk+1, +inf)
// The matching sentinel (low for Lower, high for Upper) marks the open cell
// and needs no value; every other point takes its value from baseValues
// (numerals are their own value). Points with equal values collapse into one
// boundary, numeral spelling preferred as the representative. The open
// cell's rep is the sentinel's value when baseValues has one, otherwise a
// synthesized member of the cell.
std::vector<PartitionCell> makePartition(const InstantiationSet& points, Direction dir,
                                         const std::map<std::string, int64_t>& baseValues);

// ---------------------------------------------------------------------------
// Hierarchic models: integer values for base constants plus a finite element
// universe, with predicate extensions given either explicitly (ground form)
// or through coordinatewise projection tables (uniform form).

// A tuple coordinate: an integer at base positions, an element name at free
// positions.
using MVal = std::variant<int64_t, std::string>;

std::string toString(const MVal& v);

// Projection of one free coordinate. Listed elements map to their entry,
// everything else to the fallback. A single instantiation step maps its
// known points to themselves and the rest to a default element; composed
// steps produce general entries. Empty map and fallback = identity.
struct FreeProjection {
  std::map<std::string, std::string> map;
  std::string fallback;
};

// Projection table for one argument position. An empty table (no cells, no
// map, no fallback) leaves the coordinate ground: values are looked up as
// they are.
struct PositionProjection {
  Sort sort = Sort::Base;
  std::vector<PartitionCell> cells;  // base positions: rep of the value's cell
  FreeProjection free;               // free positions
};

struct HierarchicModel {
  std::map<std::string, int64_t> baseValues;
  std::vector<std::string> freeDomain;  // nonempty element universe
  std::map<std::string, std::string> freeValues;
  // Explicit tuples per predicate; in uniform form these are the tuples of
  // the underlying instantiated model, queried through the projections.
  std::map<std::string, std::set<std::vector<MVal>>> extensions;
  // Empty for ground models. Uniform models list one table per argument
  // position of every predicate.
  std::map<std::string, std::vector<PositionProjection>> projections;

  bool uniform() const { return !projections.empty(); }
};

// Rep value of the cell containing v; identity for an empty table. Errors
// when a nonempty table has no cell containing v.
int64_t project(const std::vector<PartitionCell>& cells, int64_t v);
std::string project(const FreeProjection& p, const std::string& elem);

// Truth of pred(args) in the model. Uniform models project coordinatewise
// first, then look the projected tuple up in the extension.
bool holds(const HierarchicModel& m, const std::string& pred, const std::vector<MVal>& args);

std::string modelToJson(const HierarchicModel& m, int indent = 2);

// ---------------------------------------------------------------------------
// Boolean abstraction of an essentially ground clause set.

// One propositional variable per distinct ground atom: a predicate atom over
// evaluated-or-symbolic arguments, an equation between element constants, or
// an integer comparison. Integer atoms are kept as "a <= b" and "a = b"
// shapes only; a disequation acts through the equality atom's definitional
// triple, which splits it into the two strict sides once, at abstraction
// time.
struct AbsAtom {
  enum class Kind : uint8_t { Pred, ElemEq, IntLe, IntEq };

  struct Coord {
    Sort sort = Sort::Base;
    GTerm g;           // base coordinate, pins already substituted
    std::string elem;  // free coordinate: element constant name
  };

  Kind kind = Kind::Pred;
  std::string key;  // canonical spelling, bijective with the index
  std::string pred;
  std::vector<Coord> coords;  // Pred
  GTerm a, b;                 // IntLe: a <= b; IntEq: a = b (a <= b in key order)
  std::string ea, eb;         // ElemEq, sorted
};

struct GroundProblem {
  std::vector<AbsAtom> atoms;          // 1-based ids: atoms[id - 1]
  std::map<std::string, int> index;    // canonical key -> id
  std::vector<std::vector<int>> rows;  // clauses over signed atom ids
  std::vector<uint32_t> rowIds;        // input clause id, 0 for definitional rows
};

// Builds the abstraction. pre: the set is essentially ground (no element
// variables; every integer variable carries a defining "x = t" constraint),
// free of theory symbols, and atom arguments fold to ground terms.
// Trivially true clauses are dropped; trivially false literals are skipped.
GroundProblem abstractGround(const ClauseSet& set);

// ---------------------------------------------------------------------------
// Ground decision procedure.

struct Verdict {
  bool sat = false;
  HierarchicModel model;       // sat only; checked against the set before return
  std::vector<uint32_t> core;  // unsat only: responsible input clause ids, sorted
};

std::string verdictToJson(const Verdict& v, int indent = 2);

// Decides an essentially ground set. The propositional skeleton is searched
// with two-watched-literal propagation and chronological backtracking;
// asserted integer comparisons are checked for feasibility, element
// equations through congruence closure, and predicate atoms with equal
// argument values are forced to agree via guarded lemmas and restart.
// Unsat cores are sound but not minimized.
Verdict solveGround(const ClauseSet& set);

// ---------------------------------------------------------------------------
// Model extrapolation: from a model of the full instantiation back to a
// uniform model of the original set.

// What one variable elimination step must leave behind for extrapolation:
// the points of every argument position at the time the step ran, and how
// the step instantiated its variable.
struct TraceStep {
  uint32_t clauseId = 0;
  std::string var;
  Sort sort = Sort::Base;
  Direction dir = Direction::Lower;            // base steps
  InstantiationSet varPoints;                  // points substituted for var
  std::map<ArgPos, InstantiationSet> positionPoints;  // base steps: integer positions
  std::map<ArgPos, std::set<std::string>> freePositionPoints;  // free steps
  std::string freeFallback;                    // free steps: default element constant
  int64_t survivors = 0;                       // instances left after the step's simplify
};

struct InstantiationTrace {
  std::vector<TraceStep> steps;  // elimination order
};

// Composes the per-step coordinate projections in step order into one table
// per predicate position and restricts the element universe to the elements
// named by the original set's constants. An empty trace returns the model
// unchanged.
HierarchicModel extrapolateModel(const HierarchicModel& instantiated, const ClauseSet& original,
                                 const InstantiationTrace& trace);

// ---------------------------------------------------------------------------
// Model verification.

struct VerifyConfig {
  // Extra random integer samples per base variable, on top of the
  // deterministic boundary samples.
  int samplesPerVar = 8;
  int64_t randLo = -50;
  int64_t randHi = 50;
  uint64_t seed = 1;
  // Guard on total assignments checked per clause.
  size_t maxAssignments = 4'000'000;
};

struct Violation {
  uint32_t clauseId = 0;
  std::string assignment;  // rendered variable binding, empty for ground clauses
};

struct VerifyReport {
  std::vector<Violation> violations;
  size_t checkedAssignments = 0;

  bool ok() const { return violations.empty(); }
};

// Checks every clause of the set against the model. Clauses whose integer
// variables are all pinned are checked exactly; genuinely quantified clauses
// are sampled: element variables range over the whole universe, integer
// variables over every partition boundary and model value plus/minus one,
// plus random points. A clean report on a quantified set is evidence, not
// proof.
VerifyReport verifyModel(const ClauseSet& set, const HierarchicModel& m,
                         const VerifyConfig& cfg = {});

}  // namespace bsr

#endif
