#include <set>

#include "doctest.h"
#include "support/ast_print.hpp"
#include "support/generators.hpp"
#include "support/window_oracle.hpp"
#include "textio.hpp"

using namespace bsr;

namespace {

std::string fixture(const std::string& name) { return std::string(FIXTURES_DIR "/") + name; }

// Signature equality on the observable fields.
void checkSameSignature(const Signature& a, const Signature& b) {
  REQUIRE(a.consts.size() == b.consts.size());
  for (const auto& [n, d] : a.consts) {
    REQUIRE(b.consts.count(n));
    CHECK(b.consts.at(n).sort == d.sort);
  }
  size_t realA = 0, realB = 0;
  for (const auto& [n, d] : a.preds) realA += d.synthetic ? 0 : 1;
  for (const auto& [n, d] : b.preds) realB += d.synthetic ? 0 : 1;
  REQUIRE(realA == realB);
  for (const auto& [n, d] : a.preds) {
    if (d.synthetic) continue;
    REQUIRE(b.preds.count(n));
    CHECK(b.preds.at(n).argSorts == d.argSorts);
    CHECK(b.preds.at(n).marked == d.marked);
    CHECK(b.preds.at(n).theory == d.theory);
  }
  REQUIRE(a.funs.size() == b.funs.size());
  for (const auto& [n, d] : a.funs) {
    REQUIRE(b.funs.count(n));
    CHECK(b.funs.at(n).argSorts == d.argSorts);
    CHECK(b.funs.at(n).result == d.result);
    CHECK(b.funs.at(n).theory == d.theory);
  }
}

}  // namespace

TEST_CASE("parse reads the two-clause fixture into the expected structure") {
  ClauseSet s = parseFile(fixture("intro.bsr"));
  REQUIRE(s.clauses.size() == 2);
  CHECK(s.sig.consts.at("d").sort == Sort::Free);
  CHECK(s.sig.preds.at("R").argSorts == std::vector<Sort>{Sort::Base});
  CHECK(s.sig.preds.at("Q").argSorts == (std::vector<Sort>{Sort::Free, Sort::Base}));

  const Clause& c0 = s.clauses[0];
  REQUIRE(c0.lambda.size() == 1);
  CHECK(c0.lambda[0].kind == Constraint::Kind::VarGround);
  CHECK(c0.lambda[0].v1 == "x2");
  CHECK(c0.lambda[0].rel == Rel::Ne);
  CHECK(c0.lambda[0].g2 == GTerm::number(5));
  REQUIRE(c0.gamma.size() == 1);
  CHECK(c0.gamma[0].pred == "R");
  CHECK(c0.gamma[0].args == std::vector<Term>{Term::var("x1")});
  REQUIRE(c0.delta.size() == 1);
  CHECK(c0.delta[0].pred == "Q");
  CHECK(c0.delta[0].args == (std::vector<Term>{Term::var("u1"), Term::var("x2")}));

  const Clause& c1 = s.clauses[1];
  REQUIRE(c1.lambda.size() == 2);
  CHECK(c1.lambda[0] == Constraint::varGround("y1", Rel::Lt, GTerm::number(7)));
  CHECK(c1.lambda[1] == Constraint::varGround("y2", Rel::Le, GTerm::number(2)));
  CHECK(c1.gamma.empty());
  REQUIRE(c1.delta.size() == 2);
  CHECK(c1.delta[0].pred == "Q");
  CHECK(c1.delta[1].pred == "R");

  auto sorts = s.varSorts(c0);
  CHECK(sorts.at("x1") == Sort::Base);
  CHECK(sorts.at("x2") == Sort::Base);
  CHECK(sorts.at("u1") == Sort::Free);
}

TEST_CASE("parse normalizes flipped and swapped constraint forms") {
  ClauseSet s = parse(
      "pred P : Z;\n"
      "clause [1 <= ?x] || -> P(?x);\n"
      "clause [?y >= ?z] || P(?y) -> P(?z);\n");
  CHECK(s.clauses[0].lambda[0] == Constraint::varGround("x", Rel::Ge, GTerm::number(1)));
  // ?y >= ?z is stored as ?z <= ?y
  CHECK(s.clauses[1].lambda[0] == Constraint::varVar("z", Rel::Le, "y"));
}

TEST_CASE("parse reports errors with positions") {
  auto expectError = [](const std::string& text, int line) {
    try {
      parse(text);
      FAIL_CHECK("expected a parse error for: " << text);
    } catch (const ParseError& e) {
      CHECK(e.line == line);
    }
  };
  expectError("clause [?x < ?y] || -> false;", 1);      // strict relation between variables
  expectError("pred P : Z;\nclause [] || P(?x, ?y) -> false;", 2);  // arity
  expectError("mark Nope;", 1);
  expectError("clause [] || Undecl(?x) -> false;", 1);
  expectError("pred P : Z;\nclause [] | -> P(?x);", 2);  // lone '|'
  expectError("const d : S;\nclause [] || -> d ~ 3;", 2);  // numeral on an element side
  expectError("pred P : Z;\npred Q : S;\nclause [] || P(?x) -> Q(?x);", 3);  // sort clash
  expectError("clause [@bogus <= 1] || -> false;", 1);  // unknown reserved name
  expectError("pred P : Z;\npred P : Z;\n", 2);         // duplicate declaration
  expectError("pred P : Z;\nclause [?x + 1 <= 2] || -> P(?x);", 2);  // var arithmetic
}

TEST_CASE("strict mode rejects ground integer arguments, relaxed accepts them") {
  CHECK_THROWS_AS(parseFile(fixture("intro_ground.bsr"), {.strict = true}), ParseError);
  ClauseSet s = parseFile(fixture("intro_ground.bsr"));
  REQUIRE(s.clauses.size() == 5);
  // @minf was referenced, so it is implicitly a declared integer constant
  CHECK(s.sig.consts.at(kMinf).sort == Sort::Base);
  // last clause is the pinning axiom [@minf >= 2] || -> false
  const Clause& ax = s.clauses[4];
  CHECK(ax.delta.empty());
  REQUIRE(ax.lambda.size() == 1);
  CHECK(ax.lambda[0].kind == Constraint::Kind::GroundGround);
}

TEST_CASE("print followed by parse reproduces every fixture") {
  for (const char* name :
       {"intro.bsr", "intro_ground.bsr", "ex3.bsr", "ex4.bsr", "ex5.bsr", "array.bsr",
        "array_rel.bsr"}) {
    CAPTURE(name);
    ClauseSet a = parseFile(fixture(name));
    ClauseSet b = parse(print(a));
    checkSameSignature(a.sig, b.sig);
    REQUIRE(a.clauses.size() == b.clauses.size());
    for (size_t i = 0; i < a.clauses.size(); i++)
      CHECK(canonicalKey(a.clauses[i]) == canonicalKey(b.clauses[i]));
  }
}

TEST_CASE("print of an empty set is just the header") {
  ClauseSet s;
  CHECK(print(s) == "# bsrsli problem\n");
}

TEST_CASE("purify replaces ground integer arguments by pinned variables") {
  ClauseSet s = parse(
      "const b : S;\nconst d : S;\npred P : Z;\npred Q : S Z;\n"
      "clause [] || -> P(3);\n"
      "clause [] || -> Q(d, 5 + 1);\n");
  ClauseSet p = purify(s);
  ClauseSet expect = parse(
      "const b : S;\nconst d : S;\npred P : Z;\npred Q : S Z;\n"
      "clause [?x0 = 3] || -> P(?x0);\n"
      "clause [?x0 = 6] || -> Q(d, ?x0);\n");
  REQUIRE(p.clauses.size() == 2);
  CHECK(canonicalKey(p.clauses[0]) == canonicalKey(expect.clauses[0]));
  CHECK(canonicalKey(p.clauses[1]) == canonicalKey(expect.clauses[1]));
}

TEST_CASE("purify leaves pure sets untouched and is idempotent") {
  for (const char* name : {"intro.bsr", "ex5.bsr"}) {
    ClauseSet a = parseFile(fixture(name));
    ClauseSet p = purify(a);
    REQUIRE(a.clauses.size() == p.clauses.size());
    for (size_t i = 0; i < a.clauses.size(); i++)
      CHECK(toString(a.clauses[i]) == toString(p.clauses[i]));
  }
  ClauseSet g = purify(parseFile(fixture("intro_ground.bsr")));
  ClauseSet g2 = purify(g);
  for (size_t i = 0; i < g.clauses.size(); i++)
    CHECK(toString(g.clauses[i]) == toString(g2.clauses[i]));
}

TEST_CASE("purified ground fixture pins every variable") {
  ClauseSet g = purify(parseFile(fixture("intro_ground.bsr")));
  for (const auto& c : g.clauses) {
    for (const auto& [v, sort] : g.varSorts(c)) {
      REQUIRE(sort == Sort::Base);
      bool pinned = false;
      for (const auto& cn : c.lambda)
        if (cn.kind == Constraint::Kind::VarGround && cn.rel == Rel::Eq && cn.v1 == v)
          pinned = true;
      CHECK(pinned);
    }
    for (const auto& a : c.gamma)
      for (const auto& t : a.args) CHECK(t.k != Term::K::Int);
    for (const auto& a : c.delta)
      for (const auto& t : a.args)
        CHECK((t.k == Term::K::Var || t.k == Term::K::Const));
  }
}

namespace {

// Random sets with ground integer arguments for the purification differential.
ClauseSet randomRelaxedSet(testsup::Rng& rng) {
  ClauseSet s;
  s.sig.declareConst({"b", Sort::Free});
  s.sig.declareConst({"c", Sort::Base});
  PredDecl p;
  p.name = "P";
  p.argSorts = {Sort::Base};
  s.sig.declarePred(p);
  PredDecl q;
  q.name = "Q";
  q.argSorts = {Sort::Free, Sort::Base};
  s.sig.declarePred(q);

  auto baseArg = [&]() -> Term {
    switch (rng.range(0, 5)) {
      case 0: return Term::var("x");
      case 1: return Term::var("y");
      case 2: return Term::num(rng.range(-3, 3));
      case 3: return Term::cnst("c");
      case 4: return Term::app("+", {Term::num(rng.range(-2, 2)), Term::num(rng.range(-2, 2))});
      default: return Term::app("+", {Term::cnst("c"), Term::num(1)});
    }
  };
  auto freeArg = [&]() -> Term {
    return rng.chance(0.5) ? Term::cnst("b") : Term::var("u");
  };
  auto atom = [&]() -> Atom {
    if (rng.chance(0.5)) return Atom{"P", {baseArg()}, false};
    return Atom{"Q", {freeArg(), baseArg()}, false};
  };

  std::vector<Rel> rels = {Rel::Lt, Rel::Le, Rel::Eq, Rel::Ne, Rel::Ge, Rel::Gt};
  int nclauses = static_cast<int>(rng.range(2, 4));
  for (int i = 0; i < nclauses; i++) {
    Clause c;
    int ncons = static_cast<int>(rng.range(0, 2));
    for (int j = 0; j < ncons; j++) {
      std::string v = rng.chance(0.5) ? "x" : "y";
      GTerm g = rng.chance(0.3) ? GTerm::constant("c") : GTerm::number(rng.range(-3, 3));
      c.lambda.push_back(Constraint::varGround(v, rng.pick(rels), g));
    }
    if (rng.chance(0.3)) c.lambda.push_back(Constraint::varVar("x", Rel::Le, "y"));
    int natoms = static_cast<int>(rng.range(1, 3));
    int groundArgs = 0;
    for (int j = 0; j < natoms; j++) {
      Atom a = atom();
      for (const auto& t : a.args)
        if (t.k == Term::K::Int || t.k == Term::K::Const || t.k == Term::K::App) groundArgs++;
      if (groundArgs > 2) {  // keep the purified clause small for the oracle
        a = Atom{"P", {Term::var("x")}, false};
      }
      (rng.chance(0.4) ? c.gamma : c.delta).push_back(std::move(a));
    }
    // every constrained variable must appear in an atom for well-sortedness
    std::set<std::string> inAtoms;
    auto note = [&](const Atom& a) {
      for (const auto& t : a.args)
        if (t.k == Term::K::Var) inAtoms.insert(t.name);
    };
    for (const auto& a : c.gamma) note(a);
    for (const auto& a : c.delta) note(a);
    std::vector<Constraint> kept;
    for (const auto& cn : c.lambda) {
      if (cn.kind == Constraint::Kind::VarGround && !inAtoms.count(cn.v1)) continue;
      if (cn.kind == Constraint::Kind::VarVar &&
          (!inAtoms.count(cn.v1) || !inAtoms.count(cn.v2)))
        continue;
      kept.push_back(cn);
    }
    c.lambda = std::move(kept);
    c.sortParts();
    s.addClause(std::move(c));
  }
  // contradiction-prone pair: a universal assertion and a point blocker
  if (rng.chance(0.5)) {
    Clause pos;
    if (rng.chance(0.5))
      pos.lambda.push_back(
          Constraint::varGround("x", rng.chance(0.5) ? Rel::Le : Rel::Ge, GTerm::number(rng.range(-2, 2))));
    pos.delta.push_back(Atom{"P", {Term::var("x")}, false});
    s.addClause(std::move(pos));
  }
  if (rng.chance(0.5)) {
    Clause neg;
    neg.gamma.push_back(Atom{"P", {Term::num(rng.range(-2, 2))}, false});
    s.addClause(std::move(neg));
  }
  return s;
}

}  // namespace

TEST_CASE("purify preserves satisfiability on random sets") {
  testsup::WindowOracle oracle;
  int satCount = 0, unsatCount = 0;
  for (uint64_t seed = 1; seed <= 60; seed++) {
    testsup::Rng rng(seed * 7919);
    ClauseSet s = randomRelaxedSet(rng);
    bool raw = oracle.sat(s);
    bool pure = oracle.sat(purify(s));
    CAPTURE(seed);
    CAPTURE(print(s));
    CHECK(raw == pure);
    (raw ? satCount : unsatCount)++;
  }
  // the sample must exercise both verdicts
  CHECK(satCount > 5);
  CHECK(unsatCount > 5);
}

TEST_CASE("smt export is deterministic and shaped as expected") {
  ClauseSet intro = parseFile(fixture("intro.bsr"));
  std::string out = exportSmt2(intro);
  CHECK(out == exportSmt2(intro));
  CHECK(out.find("(set-logic UFLIA)") != std::string::npos);
  CHECK(out.find("(declare-sort S 0)") != std::string::npos);
  CHECK(out.find("(declare-fun d () S)") != std::string::npos);
  CHECK(out.find("(declare-fun Q (S Int) Bool)") != std::string::npos);
  CHECK(out.find("(forall (") != std::string::npos);
  CHECK(out.rfind("(check-sat)\n") == out.size() - 12);
}

TEST_CASE("smt export substitutes pins when a clause is essentially ground") {
  ClauseSet g = purify(parseFile(fixture("intro_ground.bsr")));
  std::string out = exportSmt2(g);
  CHECK(out.find("forall") == std::string::npos);
  CHECK(out.find("@minf") != std::string::npos);
  // the pinned value 6 = 5+1 appears in place of its variable
  CHECK(out.find("(Q d 6)") != std::string::npos);
}

TEST_CASE("smt export prints negative numerals in functional form") {
  ClauseSet s = parse("pred P : Z;\nclause [?x = 0 - 2] || -> P(?x);\n");
  std::string out = exportSmt2(s);
  CHECK(out.find("(- 2)") != std::string::npos);
}

TEST_CASE("smt export omits synthetic atoms and predicates") {
  ClauseSet s = parse("const d : S;\npred P : S;\nclause [] || P(d) -> false;\n");
  PredDecl fv;
  fv.name = "FalseP";
  fv.argSorts = {Sort::Free};
  fv.synthetic = true;
  s.sig.declarePred(fv);
  s.clauses[0].delta.push_back(Atom{"FalseP", {Term::cnst("d")}, true});
  std::string out = exportSmt2(s);
  CHECK(out.find("FalseP") == std::string::npos);
  CHECK(out.find("false") != std::string::npos);
}
