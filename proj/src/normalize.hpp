#ifndef BSRSLI_NORMALIZE_HPP
#define BSRSLI_NORMALIZE_HPP

#include <string>
#include <vector>

#include "ast.hpp"

namespace bsr {

// Normal-form conditions a clause set must meet before instantiation:
//   Nf1          constraints are x <= c, x = c, x >= c (c a numeral or a
//                declared constant) or x <= y; nothing else non-ground
//   Nf4          every constraint variable also occurs in the premise or
//                conclusion part of its clause
//   Nf5          no premise equation has a plain variable side (equations
//                with a function-application side are opaque theory literals
//                and exempt)
//   VarDisjoint  distinct clauses share no variable names
//   HasFreeConst the signature declares at least one element constant
enum class NormalCondition : uint8_t { Nf1, Nf4, Nf5, VarDisjoint, HasFreeConst };

const char* conditionName(NormalCondition c);

struct NormalViolation {
  uint32_t clauseId = 0;  // 0 = set-level condition
  NormalCondition cond;
  std::string detail;
};

struct NormalFormReport {
  std::vector<NormalViolation> violations;
  bool ok() const { return violations.empty(); }
};

// Check the conditions above. Marks the set certified when clean.
NormalFormReport checkNormalForm(ClauseSet& set);

// Rewrite an arbitrary well-sorted set into normal form, preserving
// satisfiability:
//  - x != g splits a clause into x < g and x > g copies;
//  - bounds by a composite ground term or by a strict relation are renamed to
//    a fresh constant, pinned by a ground axiom (g != c || -> false);
//  - x = y merges the two variables;
//  - a constraint variable absent from the premise/conclusion part is
//    eliminated by combining its lower and upper bounds pairwise;
//  - premise equations with a variable side are resolved by substitution;
//  - clauses are renamed apart only where names collide;
//  - an element constant is invented if the signature has none;
//  - an element variable occurring only in equations gets a placeholder
//    conclusion atom over a fresh placeholder predicate so every variable
//    has a predicate occurrence.
// Output clauses carry origin Normalized (axioms: PinAxiom). The result of
// normalize is a fixpoint: running it again returns the same set.
ClauseSet normalize(const ClauseSet& in);

}  // namespace bsr

#endif
