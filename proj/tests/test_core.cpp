#include "doctest.h"

#include <random>

#include "ast.hpp"

using namespace bsr;

namespace {

ClauseSet exampleChainSet() {
  // y3 <= 7, y1 <= y3 || Q(y1, y2) -> R(y3)
  ClauseSet s;
  s.sig.declarePred({"Q", {Sort::Base, Sort::Base}, false, false, false});
  s.sig.declarePred({"R", {Sort::Base}, false, false, false});
  Clause c;
  c.lambda.push_back(Constraint::varGround("y3", Rel::Le, GTerm::number(7)));
  c.lambda.push_back(Constraint::varVar("y1", Rel::Le, "y3"));
  c.gamma.push_back(Atom{"Q", {Term::var("y1"), Term::var("y2")}, false});
  c.delta.push_back(Atom{"R", {Term::var("y3")}, false});
  s.addClause(c);
  return s;
}

}  // namespace

TEST_CASE("fresh name counter resumes past declared suffixes") {
  Signature sig;
  sig.declareConst({"c", Sort::Base});
  sig.declareConst({"c1", Sort::Base});
  CHECK(freshName("c", sig) == "c2");

  Signature empty;
  CHECK(freshName("d_Pa", empty) == "d_Pa0");
}

TEST_CASE("fresh name twice yields distinct names once declared") {
  std::mt19937 rng(7);
  for (int round = 0; round < 50; round++) {
    Signature sig;
    int n = static_cast<int>(rng() % 5);
    for (int i = 0; i < n; i++) {
      std::string name = "k" + std::to_string(rng() % 10);
      if (!sig.knows(name)) sig.declareConst({name, Sort::Base});
    }
    std::string a = freshName("k", sig);
    sig.declareConst({a, Sort::Base});
    std::string b = freshName("k", sig);
    CHECK(a != b);
    CHECK(!sig.knows(b));
  }
}

TEST_CASE("checked arithmetic reports overflow instead of wrapping") {
  CHECK(addCk(2, 3) == 5);
  CHECK(subCk(2, 3) == -1);
  CHECK(mulCk(-4, 5) == -20);
  CHECK_THROWS_AS(addCk(INT64_MAX, 1), OverflowError);
  CHECK_THROWS_AS(subCk(INT64_MIN, 1), OverflowError);
  CHECK_THROWS_AS(mulCk(INT64_MAX / 2, 3), OverflowError);
}

TEST_CASE("ground term arithmetic canonicalizes") {
  GTerm c = GTerm::constant("c");
  GTerm t = c.plus(GTerm::number(1));
  CHECK(t.offset == 1);
  CHECK(t.coeffs.at("c") == 1);
  GTerm z = t.minus(t);
  CHECK(z.isNumeral());
  CHECK(z.offset == 0);
  CHECK(toString(t) == "c + 1");
  CHECK(toString(GTerm::number(-3)) == "-3");
  CHECK(toString(c.negated()) == "0 - c");
}

TEST_CASE("integer binding pins the variable and rewrites constraints") {
  ClauseSet s = exampleChainSet();
  const Clause& c = s.clauses[0];
  Clause r = applySubstitution(c, {{"y3", "7"}}, s);

  // expected: 7 <= 7, y1 <= 7, y3 = 7 || Q(y1,y2) -> R(y3)
  REQUIRE(r.lambda.size() == 3);
  bool sawGround = false, sawUpper = false, sawPin = false;
  for (const auto& cn : r.lambda) {
    if (cn.kind == Constraint::Kind::GroundGround && cn.rel == Rel::Le &&
        cn.g1 == GTerm::number(7) && cn.g2 == GTerm::number(7))
      sawGround = true;
    if (cn.kind == Constraint::Kind::VarGround && cn.v1 == "y1" && cn.rel == Rel::Le &&
        cn.g2 == GTerm::number(7))
      sawUpper = true;
    if (cn.kind == Constraint::Kind::VarGround && cn.v1 == "y3" && cn.rel == Rel::Eq &&
        cn.g2 == GTerm::number(7))
      sawPin = true;
  }
  CHECK(sawGround);
  CHECK(sawUpper);
  CHECK(sawPin);

  // conclusion untouched: R still takes the variable, not the numeral
  REQUIRE(r.delta.size() == 1);
  CHECK(r.delta[0].args[0] == Term::var("y3"));
  REQUIRE(r.gamma.size() == 1);
  CHECK(r.gamma[0].args[0] == Term::var("y1"));
}

TEST_CASE("empty binding returns the clause unchanged") {
  ClauseSet s = exampleChainSet();
  Clause r = applySubstitution(s.clauses[0], {}, s);
  CHECK(canonicalKey(r) == canonicalKey(s.clauses[0]));
  CHECK(r.lambda.size() == 2);
}

TEST_CASE("element binding substitutes into atoms without a pin") {
  // || R(x1) -> Q(u1, x2)  with u1 -> d
  ClauseSet s;
  s.sig.declarePred({"R", {Sort::Base}, false, false, false});
  s.sig.declarePred({"Q", {Sort::Free, Sort::Base}, false, false, false});
  s.sig.declareConst({"d", Sort::Free});
  Clause c;
  c.gamma.push_back(Atom{"R", {Term::var("x1")}, false});
  c.delta.push_back(Atom{"Q", {Term::var("u1"), Term::var("x2")}, false});
  s.addClause(c);

  Clause r = applySubstitution(s.clauses[0], {{"u1", "d"}}, s);
  CHECK(r.lambda.empty());
  REQUIRE(r.delta.size() == 1);
  CHECK(r.delta[0].args[0] == Term::cnst("d"));
  CHECK(r.delta[0].args[1] == Term::var("x2"));
  CHECK(r.gamma.size() == 1);
}

TEST_CASE("substitution preserves atom counts") {
  std::mt19937 rng(21);
  ClauseSet s = exampleChainSet();
  for (int i = 0; i < 30; i++) {
    Binding b;
    if (rng() % 2) b["y3"] = std::to_string(static_cast<int>(rng() % 9) - 4);
    if (rng() % 2) b["y1"] = std::to_string(static_cast<int>(rng() % 9) - 4);
    Clause r = applySubstitution(s.clauses[0], b, s);
    CHECK(r.gamma.size() == s.clauses[0].gamma.size());
    CHECK(r.delta.size() == s.clauses[0].delta.size());
  }
}

TEST_CASE("clause key identifies alpha variants") {
  ClauseSet s = exampleChainSet();
  const Clause& c = s.clauses[0];
  Clause ren = renameVars(c, "_r1");
  CHECK(canonicalKey(c) == canonicalKey(ren));
  CHECK(canonicalKey(ren) == canonicalKey(renameVars(ren, "_r2")));  // transitive chain

  // a genuinely different clause gets a different key
  Clause other = c;
  other.lambda.push_back(Constraint::varGround("y1", Rel::Ge, GTerm::number(0)));
  other.sortParts();
  CHECK(canonicalKey(c) != canonicalKey(other));
}

TEST_CASE("multiset parts sort deterministically") {
  Clause c;
  c.lambda.push_back(Constraint::varGround("b", Rel::Le, GTerm::number(1)));
  c.lambda.push_back(Constraint::varGround("a", Rel::Le, GTerm::number(1)));
  c.lambda.push_back(Constraint::groundGround(GTerm::number(0), Rel::Lt, GTerm::number(2)));
  c.sortParts();
  std::vector<Constraint> once = c.lambda;
  c.sortParts();
  CHECK(c.lambda == once);
  CHECK(c.lambda[0].kind == Constraint::Kind::GroundGround);
}

TEST_CASE("conflicting sort evidence is an error") {
  ClauseSet s;
  s.sig.declarePred({"P", {Sort::Free}, false, false, false});
  Clause c;
  c.lambda.push_back(Constraint::varGround("x", Rel::Le, GTerm::number(0)));
  c.gamma.push_back(Atom{"P", {Term::var("x")}, false});
  s.addClause(c);
  CHECK_THROWS_AS(s.varSorts(s.clauses[0]), SortError);
}

TEST_CASE("variable-variable constraints canonicalize orientation") {
  Constraint ge = Constraint::varVar("x", Rel::Ge, "y");
  CHECK(ge.rel == Rel::Le);
  CHECK(ge.v1 == "y");
  CHECK(ge.v2 == "x");
  CHECK_THROWS_AS(Constraint::varVar("x", Rel::Lt, "y"), PreconditionError);
  Constraint eq = Constraint::varVar("z", Rel::Eq, "a");
  CHECK(eq.v1 == "a");
  CHECK(eq.v2 == "z");
}
