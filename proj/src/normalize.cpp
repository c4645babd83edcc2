#include "normalize.hpp"

#include <algorithm>
#include <set>
#include <utility>

namespace bsr {

const char* conditionName(NormalCondition c) {
  switch (c) {
    case NormalCondition::Nf1: return "NF1";
    case NormalCondition::Nf4: return "NF4";
    case NormalCondition::Nf5: return "NF5";
    case NormalCondition::VarDisjoint: return "VAR_DISJOINT";
    case NormalCondition::HasFreeConst: return "HAS_FREE_CONST";
  }
  return "?";
}

namespace {

// Splits every x != g into an x < g copy and an x > g copy, depth first so
// the lower branch of the first disequation comes out first.
void splitDisequations(const Clause& c, std::vector<Clause>& out) {
  for (size_t i = 0; i < c.lambda.size(); i++) {
    const Constraint& cn = c.lambda[i];
    if (cn.kind == Constraint::Kind::VarGround && cn.rel == Rel::Ne) {
      Clause lt = c, gt = c;
      lt.lambda[i] = Constraint::varGround(cn.v1, Rel::Lt, cn.g2);
      gt.lambda[i] = Constraint::varGround(cn.v1, Rel::Gt, cn.g2);
      splitDisequations(lt, out);
      splitDisequations(gt, out);
      return;
    }
  }
  out.push_back(c);
}

Clause pinAxiom(const GTerm& ground, const std::string& name) {
  Clause ax;
  ax.origin = ClauseOrigin::PinAxiom;
  ax.lambda.push_back(Constraint::groundGround(ground, Rel::Ne, GTerm::constant(name)));
  return ax;
}

std::string newPinConst(ClauseSet& out) {
  std::string name = freshName("c", out.sig);
  out.sig.declareConst({name, Sort::Base});
  return name;
}

// Bound by a composite ground term: rename the term to a fresh pinned
// constant. Only for variables the premise/conclusion part anchors; constraint
// internal variables are eliminated wholesale instead.
bool pinComposite(Clause& c, ClauseSet& out, std::vector<Clause>& axioms) {
  for (auto& cn : c.lambda) {
    if (cn.kind != Constraint::Kind::VarGround) continue;
    if (cn.rel != Rel::Le && cn.rel != Rel::Eq && cn.rel != Rel::Ge) continue;
    if (cn.g2.isNumeral() || cn.g2.asConstant()) continue;
    if (!occursInFreePart(c, cn.v1)) continue;
    std::string name = newPinConst(out);
    axioms.push_back(pinAxiom(cn.g2, name));
    cn = Constraint::varGround(cn.v1, cn.rel, GTerm::constant(name));
    return true;
  }
  return false;
}

// Strict bound: shift the ground side by one and pin the shifted value.
bool pinStrict(Clause& c, ClauseSet& out, std::vector<Clause>& axioms) {
  for (auto& cn : c.lambda) {
    if (cn.kind != Constraint::Kind::VarGround) continue;
    if (cn.rel != Rel::Lt && cn.rel != Rel::Gt) continue;
    if (!occursInFreePart(c, cn.v1)) continue;
    bool upper = cn.rel == Rel::Lt;
    std::string name = newPinConst(out);
    axioms.push_back(pinAxiom(cn.g2.plusConst(upper ? -1 : 1), name));
    cn = Constraint::varGround(cn.v1, upper ? Rel::Le : Rel::Ge, GTerm::constant(name));
    return true;
  }
  return false;
}

// x = y between variables: keep x, substitute y := x everywhere.
bool mergeVarEq(Clause& c, const ClauseSet& set) {
  for (size_t i = 0; i < c.lambda.size(); i++) {
    Constraint cn = c.lambda[i];
    if (cn.kind != Constraint::Kind::VarVar || cn.rel != Rel::Eq) continue;
    c.lambda.erase(c.lambda.begin() + i);
    if (cn.v1 != cn.v2) c = substituteEverywhere(c, cn.v2, Term::var(cn.v1), set);
    return true;
  }
  return false;
}

// A bound side: either another variable or a ground term.
struct Side {
  bool isVar = false;
  std::string var;
  GTerm g;
};

// Eliminates one constraint-only variable x by combining its bounds pairwise.
// Lower bounds t < x, t <= x; equalities x = t; upper bounds x < t, x <= t.
// The combinations keep exactly the consequences that do not mention x:
// strict/lax mixes give t < t', two lax give t <= t', two strict give
// t+1 < t', equalities chain. Strict bounds always have a ground side, so the
// +1 shift stays ground.
bool eliminateHiddenVar(Clause& c, const ClauseSet&) {
  std::set<std::string> lamVars;
  for (const auto& cn : c.lambda) {
    if (cn.kind == Constraint::Kind::VarGround) lamVars.insert(cn.v1);
    if (cn.kind == Constraint::Kind::VarVar) {
      lamVars.insert(cn.v1);
      lamVars.insert(cn.v2);
    }
  }
  std::string x;
  for (const auto& v : lamVars)
    if (!occursInFreePart(c, v)) {
      x = v;
      break;
    }
  if (x.empty()) return false;

  std::vector<Side> lowStrict, lowLax, eqs, upLax, upStrict;
  std::vector<Constraint> rest;
  for (const auto& cn : c.lambda) {
    if (!cn.mentionsVar(x)) {
      rest.push_back(cn);
      continue;
    }
    if (cn.kind == Constraint::Kind::VarGround) {
      Side s;
      s.g = cn.g2;
      switch (cn.rel) {
        case Rel::Lt: upStrict.push_back(s); break;
        case Rel::Le: upLax.push_back(s); break;
        case Rel::Eq: eqs.push_back(s); break;
        case Rel::Ge: lowLax.push_back(s); break;
        case Rel::Gt: lowStrict.push_back(s); break;
        case Rel::Ne: throw PreconditionError("disequation survived splitting");
      }
    } else {
      if (cn.v1 == cn.v2) continue;  // x <= x: trivially true
      if (cn.rel == Rel::Eq) throw PreconditionError("variable equality survived merging");
      Side s;
      s.isVar = true;
      s.var = cn.v1 == x ? cn.v2 : cn.v1;
      if (cn.v1 == x)
        upLax.push_back(s);  // x <= y
      else
        lowLax.push_back(s);  // y <= x
    }
  }

  std::vector<Constraint> shadow;
  auto emit = [&](const Side& a, Rel r, const Side& b) {
    if (!a.isVar && !b.isVar)
      shadow.push_back(Constraint::groundGround(a.g, r, b.g));
    else if (a.isVar && !b.isVar)
      shadow.push_back(Constraint::varGround(a.var, r, b.g));
    else if (!a.isVar && b.isVar)
      shadow.push_back(Constraint::varGround(b.var, relFlip(r), a.g));
    else
      shadow.push_back(Constraint::varVar(a.var, r, b.var));
  };
  for (const auto& a : lowStrict) {
    for (const auto& b : eqs) emit(a, Rel::Lt, b);
    for (const auto& b : upLax) emit(a, Rel::Lt, b);
  }
  for (const auto& b : upStrict) {
    for (const auto& a : lowLax) emit(a, Rel::Lt, b);
    for (const auto& a : eqs) emit(a, Rel::Lt, b);
  }
  for (const auto& a : lowStrict)
    for (const auto& b : upStrict) {
      Side lifted = a;
      lifted.g = a.g.plusConst(1);
      emit(lifted, Rel::Lt, b);
    }
  for (const auto& a : lowLax) {
    for (const auto& b : eqs) emit(a, Rel::Le, b);
    for (const auto& b : upLax) emit(a, Rel::Le, b);
  }
  for (const auto& a : eqs)
    for (const auto& b : upLax) emit(a, Rel::Le, b);
  for (size_t i = 0; i < eqs.size(); i++)
    for (size_t j = i + 1; j < eqs.size(); j++) emit(eqs[i], Rel::Eq, eqs[j]);

  std::sort(shadow.begin(), shadow.end(),
            [](const Constraint& a, const Constraint& b) { return cmp(a, b) < 0; });
  shadow.erase(std::unique(shadow.begin(), shadow.end()), shadow.end());
  rest.insert(rest.end(), shadow.begin(), shadow.end());
  c.lambda = std::move(rest);
  return true;
}

// Premise equation with a plain variable side: substitute it away. Equations
// with a function-application side are opaque theory literals and stay.
bool resolvePremiseEq(Clause& c, const ClauseSet& set) {
  for (size_t i = 0; i < c.gammaEq.size(); i++) {
    const Equation e = c.gammaEq[i];
    if (e.lhs.k == Term::K::App || e.rhs.k == Term::K::App) continue;
    bool lv = e.lhs.k == Term::K::Var, rv = e.rhs.k == Term::K::Var;
    if (!lv && !rv) continue;  // ground equation between constants stays
    const Term& u = lv ? e.lhs : e.rhs;
    const Term& t = lv ? e.rhs : e.lhs;
    c.gammaEq.erase(c.gammaEq.begin() + i);
    if (!(t.k == Term::K::Var && t.name == u.name))
      c = substituteEverywhere(c, u.name, t, set);
    return true;
  }
  return false;
}

// An element variable occurring only in equations gets a placeholder
// conclusion atom so that every variable anchors to a predicate position.
void attachPlaceholders(Clause& c, ClauseSet& out) {
  std::set<std::string> inAtoms;
  auto noteTerm = [&](const Term& t, auto&& self) -> void {
    if (t.k == Term::K::Var) inAtoms.insert(t.name);
    for (const auto& a : t.args) self(a, self);
  };
  for (const auto& a : c.gamma)
    for (const auto& t : a.args) noteTerm(t, noteTerm);
  for (const auto& a : c.delta)
    for (const auto& t : a.args) noteTerm(t, noteTerm);

  std::vector<std::string> eqVars;
  std::set<std::string> seen;
  auto noteEqTerm = [&](const Term& t, auto&& self) -> void {
    if (t.k == Term::K::Var && seen.insert(t.name).second) eqVars.push_back(t.name);
    for (const auto& a : t.args) self(a, self);
  };
  for (const auto& e : c.gammaEq) {
    noteEqTerm(e.lhs, noteEqTerm);
    noteEqTerm(e.rhs, noteEqTerm);
  }
  for (const auto& e : c.deltaEq) {
    noteEqTerm(e.lhs, noteEqTerm);
    noteEqTerm(e.rhs, noteEqTerm);
  }
  if (eqVars.empty()) return;

  auto sorts = out.varSorts(c);
  bool changed = false;
  for (const auto& v : eqVars) {
    if (inAtoms.count(v)) continue;
    if (sorts.at(v) != Sort::Free) continue;
    std::string pname = "False_" + v;
    if (out.sig.knows(pname)) pname = freshName(pname, out.sig);
    PredDecl d;
    d.name = pname;
    d.argSorts = {Sort::Free};
    d.synthetic = true;
    out.sig.declarePred(d);
    Atom a;
    a.pred = pname;
    a.args = {Term::var(v)};
    a.synthetic = true;
    c.delta.push_back(a);
    changed = true;
  }
  if (changed) c.sortParts();
}

}  // namespace

ClauseSet normalize(const ClauseSet& in) {
  ClauseSet out;
  out.sig = in.sig;

  std::vector<Clause> split;
  for (const auto& c : in.clauses) splitDisequations(c, split);

  // Per clause: pin composite and strict bounds, merge variable equalities,
  // eliminate constraint-only variables, to a fixpoint (elimination can emit
  // strict or composite bounds onto anchored variables); then resolve premise
  // equations. Pin axioms precede their clause in the output.
  std::vector<std::pair<std::vector<Clause>, Clause>> done;
  for (Clause c : split) {
    std::vector<Clause> axioms;
    while (pinComposite(c, out, axioms) || pinStrict(c, out, axioms) || mergeVarEq(c, out) ||
           eliminateHiddenVar(c, out)) {
    }
    while (resolvePremiseEq(c, out)) {
    }
    c.sortParts();
    done.emplace_back(std::move(axioms), std::move(c));
  }

  // Rename apart lazily: only clauses colliding with an earlier one change.
  std::set<std::string> used;
  int renameCounter = 0;
  for (auto& [axs, c] : done) {
    auto vars = clauseVars(c);
    bool collide =
        std::any_of(vars.begin(), vars.end(), [&](const std::string& v) { return used.count(v) > 0; });
    if (collide) {
      for (;;) {
        Clause r = renameVars(c, "_r" + std::to_string(renameCounter++));
        auto rv = clauseVars(r);
        if (std::none_of(rv.begin(), rv.end(),
                         [&](const std::string& v) { return used.count(v) > 0; })) {
          c = std::move(r);
          break;
        }
      }
    }
    for (const auto& v : clauseVars(c)) used.insert(v);
  }

  for (auto& [axs, c] : done) attachPlaceholders(c, out);

  if (out.sig.freeConsts().empty())
    out.sig.declareConst({freshName("b", out.sig), Sort::Free});

  for (auto& [axs, c] : done) {
    for (Clause& ax : axs) out.addClause(std::move(ax));
    c.origin = c.origin == ClauseOrigin::PinAxiom ? ClauseOrigin::PinAxiom
                                                  : ClauseOrigin::Normalized;
    out.addClause(std::move(c));
  }
  return out;
}

NormalFormReport checkNormalForm(ClauseSet& set) {
  NormalFormReport rep;
  std::map<std::string, uint32_t> owner;
  for (const auto& c : set.clauses) {
    for (const auto& cn : c.lambda) {
      if (cn.kind == Constraint::Kind::VarGround) {
        bool relOk = cn.rel == Rel::Le || cn.rel == Rel::Eq || cn.rel == Rel::Ge;
        bool sideOk = cn.g2.isNumeral() || cn.g2.asConstant().has_value();
        if (!relOk || !sideOk)
          rep.violations.push_back({c.id, NormalCondition::Nf1, toString(cn)});
      } else if (cn.kind == Constraint::Kind::VarVar && cn.rel != Rel::Le) {
        rep.violations.push_back({c.id, NormalCondition::Nf1, toString(cn)});
      }
    }
    std::set<std::string> lamVars;
    for (const auto& cn : c.lambda) {
      if (cn.kind == Constraint::Kind::VarGround) lamVars.insert(cn.v1);
      if (cn.kind == Constraint::Kind::VarVar) {
        lamVars.insert(cn.v1);
        lamVars.insert(cn.v2);
      }
    }
    for (const auto& v : lamVars)
      if (!occursInFreePart(c, v))
        rep.violations.push_back({c.id, NormalCondition::Nf4, "?" + v});
    for (const auto& e : c.gammaEq) {
      if (e.lhs.k == Term::K::App || e.rhs.k == Term::K::App) continue;
      if (e.lhs.k == Term::K::Var || e.rhs.k == Term::K::Var) {
        std::string v = e.lhs.k == Term::K::Var ? e.lhs.name : e.rhs.name;
        rep.violations.push_back({c.id, NormalCondition::Nf5, "?" + v});
      }
    }
    for (const auto& v : clauseVars(c)) {
      auto [it, fresh] = owner.emplace(v, c.id);
      if (!fresh && it->second != c.id)
        rep.violations.push_back({c.id, NormalCondition::VarDisjoint,
                                  "?" + v + " also in clause " + std::to_string(it->second)});
    }
  }
  if (set.sig.freeConsts().empty())
    rep.violations.push_back({0, NormalCondition::HasFreeConst, "no element constant declared"});
  set.normalCertified = rep.ok();
  return rep;
}

}  // namespace bsr
