#ifndef BSRSLI_TEXTIO_HPP
#define BSRSLI_TEXTIO_HPP

#include <string>

#include "ast.hpp"

namespace bsr {

// Surface syntax:
//   pred P : Z S;   pred P;   const c : Z;   fun f : Z -> S;   mark P;
//   theory pred le : S S;   theory fun inv : S -> S;
//   clause [?x <= 7, ?x <= ?y] || Q(?x, d) -> R(?y), ?u ~ d;
// '#' starts a line comment. '?x' is a variable, '~' is element equality,
// 'false' is the empty conclusion. '@minf'/'@pinf' are the reserved sentinel
// constants.

struct ParseOptions {
  // Relaxed mode admits ground integer terms at integer argument positions
  // (removed by purify); strict mode rejects them.
  bool strict = false;
};

ClauseSet parse(const std::string& text, const ParseOptions& opts = {});
ClauseSet parseFile(const std::string& path, const ParseOptions& opts = {});

// Canonical text: declarations sorted by name, clauses in id order. Synthetic
// placeholder atoms and their predicates are not part of the surface language
// and are omitted.
std::string print(const ClauseSet& set);

// Replaces every non-variable term at an integer argument position of a
// non-theory atom by a fresh variable pinned in the constraint part.
ClauseSet purify(const ClauseSet& set);

// SMT-LIB2 rendering, logic UFLIA. Clauses whose integer variables all carry
// a defining pin are emitted ground (pins substituted); otherwise an explicit
// quantifier block is emitted.
std::string exportSmt2(const ClauseSet& set);

}  // namespace bsr

#endif
