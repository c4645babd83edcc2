#ifndef BSRSLI_AST_HPP
#define BSRSLI_AST_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace bsr {

// ---------------------------------------------------------------------------
// Errors. Expected failures (parse errors, cycle witnesses, ...) travel as
// values; these exceptions are for caller contract violations and resource
// limits, mapped to error codes at the C boundary.

struct Error : std::runtime_error {
  explicit Error(const std::string& m) : std::runtime_error(m) {}
};
struct ParseError : Error {
  int line, col;
  ParseError(const std::string& m, int line_, int col_)
      : Error(m), line(line_), col(col_) {}
};
struct SortError : Error {
  using Error::Error;
};
struct PreconditionError : Error {
  using Error::Error;
};
struct LimitError : Error {
  using Error::Error;
};
struct OverflowError : LimitError {
  using LimitError::LimitError;
};

// Checked 64-bit arithmetic; overflow is an error, never a wrong value.
int64_t addCk(int64_t a, int64_t b);
int64_t subCk(int64_t a, int64_t b);
int64_t mulCk(int64_t a, int64_t b);

// ---------------------------------------------------------------------------
// Sorts. Exactly two: the integer sort and the uninterpreted element sort.

enum class Sort : uint8_t { Base, Free };

const char* sortName(Sort s);

// Relations usable in arithmetic constraints.
enum class Rel : uint8_t { Lt, Le, Eq, Ne, Ge, Gt };

const char* relName(Rel r);
Rel relFlip(Rel r);    // swaps sides: a R b  <->  b flip(R) a
Rel relNegate(Rel r);  // logical complement
bool relHolds(Rel r, int64_t lhs, int64_t rhs);

// Sentinel constant names. Reserved in the surface syntax; stand for a value
// strictly below (resp. above) every other named integer constant.
inline const std::string kMinf = "@minf";
inline const std::string kPinf = "@pinf";

// ---------------------------------------------------------------------------
// Ground linear terms: offset + sum of coeff * named integer constant.
// Numerals are plain offsets; named constants keep symbolic identity.

struct GTerm {
  int64_t offset = 0;
  std::map<std::string, int64_t> coeffs;  // name -> nonzero coefficient

  static GTerm number(int64_t v);
  static GTerm constant(const std::string& name);

  bool isNumeral() const { return coeffs.empty(); }
  // Single named constant with coefficient 1 and offset 0.
  std::optional<std::string> asConstant() const;

  GTerm plus(const GTerm& o) const;
  GTerm minus(const GTerm& o) const;
  GTerm plusConst(int64_t v) const;
  GTerm negated() const;

  int64_t eval(const std::map<std::string, int64_t>& values) const;
  bool operator==(const GTerm& o) const = default;
};

int cmp(const GTerm& a, const GTerm& b);
std::string toString(const GTerm& t);

// ---------------------------------------------------------------------------
// Argument terms for atoms and equations. After purification, integer
// argument positions hold variables only; element positions hold variables or
// declared constants. Function applications appear only in pre-flattening
// input and in opaque theory atoms.

struct Term {
  enum class K : uint8_t { Var, Const, Int, App } k = K::Int;
  std::string name;        // Var / Const / App symbol
  int64_t value = 0;       // Int
  std::vector<Term> args;  // App

  static Term var(const std::string& n);
  static Term cnst(const std::string& n);
  static Term num(int64_t v);
  static Term app(const std::string& f, std::vector<Term> as);

  bool isVar() const { return k == K::Var; }
  bool operator==(const Term& o) const;
};

int cmp(const Term& a, const Term& b);

// ---------------------------------------------------------------------------
// Arithmetic constraints. Three shapes: ground vs ground, variable vs ground,
// variable vs variable (the last restricted to <=, =, >=). Canonical
// orientation keeps a lone variable on the left.

struct Constraint {
  enum class Kind : uint8_t { GroundGround, VarGround, VarVar };

  Kind kind = Kind::GroundGround;
  Rel rel = Rel::Le;
  std::string v1, v2;  // VarGround: v1 only; VarVar: both
  GTerm g1, g2;        // GroundGround: both; VarGround: g2 only

  static Constraint groundGround(GTerm lhs, Rel r, GTerm rhs);
  static Constraint varGround(const std::string& x, Rel r, GTerm rhs);
  static Constraint varVar(const std::string& x, Rel r, const std::string& y);

  bool mentionsVar(const std::string& x) const;
  bool operator==(const Constraint& o) const = default;
};

int cmp(const Constraint& a, const Constraint& b);
std::string toString(const Constraint& c);

// ---------------------------------------------------------------------------
// Atoms over declared predicates, and equations between element terms.

struct Atom {
  std::string pred;
  std::vector<Term> args;
  // Placeholder atoms attached so that equation-only variables have a
  // predicate occurrence; every truth-evaluating consumer treats them as
  // absent.
  bool synthetic = false;

  bool operator==(const Atom& o) const;
};

int cmp(const Atom& a, const Atom& b);

struct Equation {
  Term lhs, rhs;  // canonical: lhs <= rhs in term order
  Equation() = default;
  Equation(Term l, Term r);
  bool operator==(const Equation& o) const;
};

int cmp(const Equation& a, const Equation& b);

// ---------------------------------------------------------------------------
// Clauses: constraints || premises -> conclusions. Premise/conclusion parts
// hold atoms and equations as sorted multisets. Empty conclusion = falsum.

enum class ClauseOrigin : uint8_t {
  Input,        // parsed
  Normalized,   // rewritten by normalization
  PinAxiom,     // ground axiom pinning an introduced constant
  Instance,     // produced by variable elimination
  RangeAxiom,   // sentinel ordering axiom
  FunAxiom,     // function-graph saturation clause
  SortGuard,    // guard-predicate encoding unit
};

struct Clause {
  std::vector<Constraint> lambda;
  std::vector<Atom> gamma;
  std::vector<Equation> gammaEq;
  std::vector<Atom> delta;
  std::vector<Equation> deltaEq;
  ClauseOrigin origin = ClauseOrigin::Input;
  uint32_t id = 0;

  bool falsum() const { return delta.empty() && deltaEq.empty(); }

  void sortParts();  // restore multiset order after edits

  // All variable names with their inferred sorts (base from constraints and
  // integer argument positions; free otherwise). Requires a signature for
  // argument sorts.
};

// Per-clause variable occurrence info is computed against a signature; see
// ClauseSet::varSorts.

std::string toString(const Clause& c, bool showSynthetic = false);

// ---------------------------------------------------------------------------
// Signature: declared predicates, constants, functions.

struct PredDecl {
  std::string name;
  std::vector<Sort> argSorts;
  bool marked = false;     // function-graph predicate
  bool theory = false;     // opaque background-theory predicate
  bool synthetic = false;  // introduced placeholder predicate
};

struct ConstDecl {
  std::string name;
  Sort sort = Sort::Base;
};

struct FunDecl {
  std::string name;
  std::vector<Sort> argSorts;
  Sort result = Sort::Free;
  bool theory = false;
};

struct Signature {
  std::map<std::string, PredDecl> preds;
  std::map<std::string, ConstDecl> consts;
  std::map<std::string, FunDecl> funs;

  bool knows(const std::string& name) const;
  const PredDecl* pred(const std::string& name) const;
  const ConstDecl* cnst(const std::string& name) const;
  const FunDecl* fun(const std::string& name) const;

  void declarePred(PredDecl d);
  void declareConst(ConstDecl d);
  void declareFun(FunDecl d);

  // Declared integer constants, sentinels included once live.
  std::vector<std::string> baseConsts() const;
  // Declared element constants, sorted.
  std::vector<std::string> freeConsts() const;
};

// Smallest numeric suffix >= 0 such that prefix+suffix is undeclared.
std::string freshName(const std::string& prefix, const Signature& sig);

// ---------------------------------------------------------------------------
// Clause sets.

struct ClauseSet {
  Signature sig;
  std::vector<Clause> clauses;
  bool psiMinus = false;  // low-sentinel ordering axioms present
  bool psiPlus = false;   // high-sentinel ordering axioms present
  bool normalCertified = false;
  uint32_t nextClauseId = 1;

  uint32_t addClause(Clause c);  // assigns id, sorts parts
  const Clause* byId(uint32_t id) const;
  Clause* byId(uint32_t id);

  // Sort of every variable of a clause. Errors on conflicting evidence.
  std::map<std::string, Sort> varSorts(const Clause& c) const;
};

// ---------------------------------------------------------------------------
// Substitution and renaming.

// Variable -> replacement constant (instantiation binds to constants only).
using Binding = std::map<std::string, std::string>;

// Instantiation-style substitution: integer bindings rewrite constraints and
// append a defining pin x = c; element bindings rewrite atom/equation
// arguments. Atom arguments at integer positions are never rewritten (the pin
// carries the binding).
Clause applySubstitution(const Clause& c, const Binding& b, const ClauseSet& set);

// Literal textual substitution var -> term everywhere, constraints included
// (term must be a variable or constant name of matching sort).
Clause substituteEverywhere(const Clause& c, const std::string& var, const Term& to,
                            const ClauseSet& set);

// Rename all variables with a deterministic suffix so clauses become
// variable-disjoint.
Clause renameVars(const Clause& c, const std::string& suffix);

// Canonical dedup key: literal multiset with variable names replaced by
// first-use indices. Alpha-variants of a clause map to one key.
std::string canonicalKey(const Clause& c);

// All variable names occurring in a clause, in first-occurrence order over
// the sorted parts.
std::vector<std::string> clauseVars(const Clause& c);

bool occursInFreePart(const Clause& c, const std::string& var);

}  // namespace bsr

#endif
