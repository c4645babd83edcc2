#include "instantiate.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <tuple>

#include "json.hpp"

namespace bsr {

const char* dirChoiceName(DirChoice d) {
  switch (d) {
    case DirChoice::Lower: return "lower";
    case DirChoice::Upper: return "upper";
    case DirChoice::Auto: return "auto";
  }
  return "?";
}

const char* pointDirName(PointDir d) {
  switch (d) {
    case PointDir::Lower: return "lower";
    case PointDir::Upper: return "upper";
    case PointDir::Free: return "free";
  }
  return "?";
}

namespace {

std::string bindingString(const InstPoint& p) {
  return p.isNum ? std::to_string(p.num) : p.name;
}

GTerm pointTermOf(const InstPoint& p) {
  return p.isNum ? GTerm::number(p.num) : GTerm::constant(p.name);
}

// A point drawn from a constraint bound: the bound side must be a numeral or
// a lone constant, anything else is not in normal form and contributes
// nothing.
std::optional<InstPoint> boundPoint(const GTerm& g) {
  if (g.isNumeral()) return InstPoint::numeral(g.offset);
  if (auto c = g.asConstant()) return InstPoint::named(*c);
  return std::nullopt;
}

const PredDecl& positionPred(const ClauseSet& set, const ArgPos& p) {
  const PredDecl* d = set.sig.pred(p.pred);
  if (!d) throw PreconditionError("unknown predicate in position " + toString(p));
  if (p.index < 1 || p.index > static_cast<int>(d->argSorts.size()))
    throw PreconditionError("argument index out of range in position " + toString(p));
  return *d;
}

void requireSort(const ClauseSet& set, const ArgPos& p, Sort s) {
  if (positionPred(set, p).argSorts[p.index - 1] != s)
    throw PreconditionError(toString(p) + " is not an " +
                            (s == Sort::Base ? std::string("integer") : std::string("element")) +
                            " position");
}

// Bound constants of variables sitting at position p, one scan per clause.
InstantiationSet basePointsDir(const ClauseSet& set, const ArgPos& p, Direction dir) {
  requireSort(set, p, Sort::Base);
  Rel side = dir == Direction::Lower ? Rel::Ge : Rel::Le;
  InstantiationSet out;
  auto scanAtom = [&](const Clause& c, const Atom& a) {
    if (a.pred != p.pred) return;
    const Term& t = a.args[p.index - 1];
    if (!t.isVar()) return;
    for (const Constraint& cn : c.lambda) {
      if (cn.kind != Constraint::Kind::VarGround || cn.v1 != t.name) continue;
      if (cn.rel != Rel::Eq && cn.rel != side) continue;
      if (auto pt = boundPoint(cn.g2)) out.insert(*pt);
    }
  };
  for (const Clause& c : set.clauses) {
    for (const Atom& a : c.gamma) scanAtom(c, a);
    for (const Atom& a : c.delta) scanAtom(c, a);
  }
  return out;
}

// Integer constants occurring anywhere in the clauses: constraint sides give
// numerals and coefficient names; atom arguments can carry numerals and
// integer constants in pre-purification sets.
InstantiationSet occurringBaseConsts(const ClauseSet& set) {
  InstantiationSet out;
  auto addGTerm = [&](const GTerm& g) {
    if (g.isNumeral()) {
      out.insert(InstPoint::numeral(g.offset));
      return;
    }
    for (const auto& [name, coeff] : g.coeffs) out.insert(InstPoint::named(name));
  };
  std::function<void(const Term&, Sort)> addTerm = [&](const Term& t, Sort s) {
    switch (t.k) {
      case Term::K::Int:
        if (s == Sort::Base) out.insert(InstPoint::numeral(t.value));
        break;
      case Term::K::Const: {
        const ConstDecl* d = set.sig.cnst(t.name);
        if (d && d->sort == Sort::Base) out.insert(InstPoint::named(t.name));
        break;
      }
      case Term::K::App:
        for (const Term& a : t.args) addTerm(a, Sort::Base);
        break;
      case Term::K::Var:
        break;
    }
  };
  auto addAtom = [&](const Atom& a) {
    const PredDecl* d = set.sig.pred(a.pred);
    for (size_t i = 0; i < a.args.size(); i++)
      addTerm(a.args[i], d && i < d->argSorts.size() ? d->argSorts[i] : Sort::Free);
  };
  for (const Clause& c : set.clauses) {
    for (const Constraint& cn : c.lambda) {
      switch (cn.kind) {
        case Constraint::Kind::GroundGround:
          addGTerm(cn.g1);
          addGTerm(cn.g2);
          break;
        case Constraint::Kind::VarGround:
          addGTerm(cn.g2);
          break;
        case Constraint::Kind::VarVar:
          break;
      }
    }
    for (const Atom& a : c.gamma) addAtom(a);
    for (const Atom& a : c.delta) addAtom(a);
  }
  return out;
}

Clause sentinelAxiom(const std::string& sentinel, const InstPoint& other) {
  Clause ax;
  if (sentinel == kMinf)
    ax.lambda.push_back(Constraint::groundGround(GTerm::constant(kMinf), Rel::Ge, pointTermOf(other)));
  else
    ax.lambda.push_back(Constraint::groundGround(GTerm::constant(kPinf), Rel::Le, pointTermOf(other)));
  ax.origin = ClauseOrigin::RangeAxiom;
  return ax;
}

void declareSentinel(ClauseSet& set, const std::string& name) {
  if (!set.sig.cnst(name)) set.sig.declareConst({name, Sort::Base});
}

// Erase the clause with this id, keeping everything else in place.
void eraseClause(ClauseSet& set, uint32_t id) {
  for (auto it = set.clauses.begin(); it != set.clauses.end(); ++it) {
    if (it->id == id) {
      set.clauses.erase(it);
      return;
    }
  }
  throw PreconditionError("no clause with id " + std::to_string(id));
}

// Replace one clause by its instances; returns the new ids.
std::vector<uint32_t> applyPoints(ClauseSet& set, uint32_t clauseId, const std::string& var,
                                  const InstantiationSet& points) {
  const Clause* cl = set.byId(clauseId);
  if (!cl) throw PreconditionError("no clause with id " + std::to_string(clauseId));
  for (const InstPoint& p : points)
    if (!p.isNum && (p.name == kMinf || p.name == kPinf)) declareSentinel(set, p.name);
  Clause original = *cl;
  eraseClause(set, clauseId);
  std::vector<uint32_t> ids;
  for (const InstPoint& p : points) {
    if (!p.isNum && !set.sig.cnst(p.name))
      throw PreconditionError("instantiation point is not a declared constant: " + p.name);
    Clause inst = applySubstitution(original, {{var, bindingString(p)}}, set);
    inst.origin = ClauseOrigin::Instance;
    ids.push_back(set.addClause(std::move(inst)));
  }
  return ids;
}

// Pinned integer variables are already defined and need no elimination.
bool pinnedIn(const Clause& c, const std::string& var) {
  for (const Constraint& cn : c.lambda)
    if (cn.kind == Constraint::Kind::VarGround && cn.v1 == var && cn.rel == Rel::Eq &&
        boundPoint(cn.g2))
      return true;
  return false;
}

enum class GGVerdict : uint8_t { True, False, Open };

// Order class of a ground side for the sentinel order.
enum class SideKind : uint8_t { Low, Value, Named, High, Opaque };

struct SideClass {
  SideKind kind = SideKind::Opaque;
  int64_t value = 0;
  std::string name;
};

SideClass classifySide(const GTerm& g) {
  if (g.isNumeral()) return {SideKind::Value, g.offset, ""};
  if (auto c = g.asConstant()) {
    if (*c == kMinf) return {SideKind::Low, 0, *c};
    if (*c == kPinf) return {SideKind::High, 0, *c};
    return {SideKind::Named, 0, *c};
  }
  return {SideKind::Opaque, 0, ""};
}

GGVerdict fromCmp(Rel rel, int c) {
  bool holds = relHolds(rel, c, 0);
  return holds ? GGVerdict::True : GGVerdict::False;
}

// Decide a ground comparison where the sentinel order can: numerals by
// value, identical terms as equal, the low sentinel below and the high
// sentinel above every numeral, named constant and opposite sentinel.
GGVerdict evalGroundGround(const GTerm& g1, Rel rel, const GTerm& g2) {
  if (g1 == g2) return fromCmp(rel, 0);
  SideClass a = classifySide(g1), b = classifySide(g2);
  if (a.kind == SideKind::Value && b.kind == SideKind::Value)
    return fromCmp(rel, a.value < b.value ? -1 : a.value > b.value ? 1 : 0);
  auto comparable = [](SideKind k) { return k != SideKind::Opaque; };
  if (a.kind == SideKind::Low && comparable(b.kind)) return fromCmp(rel, -1);
  if (b.kind == SideKind::Low && comparable(a.kind)) return fromCmp(rel, 1);
  if (a.kind == SideKind::High && comparable(b.kind)) return fromCmp(rel, 1);
  if (b.kind == SideKind::High && comparable(a.kind)) return fromCmp(rel, -1);
  return GGVerdict::Open;
}

}  // namespace

InstantiationSet basePointsLower(const ClauseSet& set, const ArgPos& p) {
  return basePointsDir(set, p, Direction::Lower);
}

InstantiationSet basePointsUpper(const ClauseSet& set, const ArgPos& p) {
  return basePointsDir(set, p, Direction::Upper);
}

VarPoints closurePoints(const ClauseSet& set, const PropagationPreorder& prop, const ArgPos& p,
                        Direction dir) {
  requireSort(set, p, Sort::Base);
  VarPoints out;
  out.dir = dir == Direction::Lower ? PointDir::Lower : PointDir::Upper;
  out.owner = (dir == Direction::Lower ? "dn(" : "up(") + toString(p) + ")";
  out.points.insert(InstPoint::named(dir == Direction::Lower ? kMinf : kPinf));
  const std::set<ArgPos>& cls = dir == Direction::Lower ? downcl(prop, p) : upcl(prop, p);
  for (const ArgPos& q : cls) {
    InstantiationSet part = basePointsDir(set, q, dir);
    out.points.insert(part.begin(), part.end());
  }
  return out;
}

VarPoints freePoints(const ClauseSet& set, const PropagationPreorder& prop, const ArgPos& p) {
  requireSort(set, p, Sort::Free);
  VarPoints out;
  out.dir = PointDir::Free;
  out.owner = "dn(" + toString(p) + ")";
  bool widen = false;
  for (const ArgPos& q : downcl(prop, p)) {
    auto scanAtom = [&](const Clause& c, const Atom& a) {
      if (a.pred != q.pred) return;
      const Term& t = a.args[q.index - 1];
      if (t.k == Term::K::Const) {
        out.points.insert(InstPoint::named(t.name));
        return;
      }
      if (!t.isVar()) return;
      for (const Equation& e : c.deltaEq) {
        bool lv = e.lhs.isVar() && e.lhs.name == t.name;
        bool rv = e.rhs.isVar() && e.rhs.name == t.name;
        const Term& other = lv ? e.rhs : e.lhs;
        if ((lv || rv) && (other.isVar() || other.k == Term::K::Const)) {
          widen = true;
          return;
        }
      }
    };
    for (const Clause& c : set.clauses) {
      for (const Atom& a : c.gamma) scanAtom(c, a);
      for (const Atom& a : c.delta) scanAtom(c, a);
    }
    if (widen) break;
  }
  if (widen) {
    out.points.clear();
    for (const std::string& n : set.sig.freeConsts()) out.points.insert(InstPoint::named(n));
  }
  if (out.points.empty()) {
    auto fc = set.sig.freeConsts();
    if (fc.empty())
      throw PreconditionError("no element constant declared; cannot pick a fallback point");
    out.points.insert(InstPoint::named(fc.front()));
  }
  return out;
}

VarPoints varClosure(const ClauseSet& set, const PropagationPreorder& prop, uint32_t clauseId,
                     const std::string& var, DirChoice dir) {
  const Clause* cl = set.byId(clauseId);
  if (!cl) throw PreconditionError("no clause with id " + std::to_string(clauseId));
  auto home = prop.varHome.find({clauseId, var});
  if (home == prop.varHome.end())
    throw PreconditionError("variable ?" + var + " does not occur in clause " +
                            std::to_string(clauseId));
  Sort s = positionPred(set, home->second).argSorts[home->second.index - 1];
  if (s == Sort::Free) return freePoints(set, prop, home->second);
  switch (dir) {
    case DirChoice::Lower: return closurePoints(set, prop, home->second, Direction::Lower);
    case DirChoice::Upper: return closurePoints(set, prop, home->second, Direction::Upper);
    case DirChoice::Auto: {
      VarPoints lo = closurePoints(set, prop, home->second, Direction::Lower);
      VarPoints hi = closurePoints(set, prop, home->second, Direction::Upper);
      return hi.points.size() < lo.points.size() ? hi : lo;
    }
  }
  throw PreconditionError("unreachable direction");
}

std::vector<Clause> psiAxioms(const ClauseSet& set, Direction dir) {
  const std::string& self = dir == Direction::Lower ? kMinf : kPinf;
  const std::string& other = dir == Direction::Lower ? kPinf : kMinf;
  bool otherLive = dir == Direction::Lower ? set.psiPlus : set.psiMinus;
  std::vector<Clause> out;
  for (const InstPoint& c : occurringBaseConsts(set)) {
    if (!c.isNum && c.name == self) continue;
    if (!c.isNum && c.name == other) {
      otherLive = true;
      continue;
    }
    out.push_back(sentinelAxiom(self, c));
  }
  if (otherLive) out.push_back(sentinelAxiom(kMinf, InstPoint::named(kPinf)));
  return out;
}

void ensurePsi(ClauseSet& set, Direction dir) {
  declareSentinel(set, dir == Direction::Lower ? kMinf : kPinf);
  std::set<std::string> have;
  for (const Clause& c : set.clauses)
    if (isSentinelAxiom(c)) have.insert(canonicalKey(c));
  for (Clause& ax : psiAxioms(set, dir)) {
    if (have.count(canonicalKey(ax))) continue;
    have.insert(canonicalKey(ax));
    set.addClause(std::move(ax));
  }
  (dir == Direction::Lower ? set.psiMinus : set.psiPlus) = true;
}

ClauseSet eliminateVar(const ClauseSet& set, uint32_t clauseId, const std::string& var,
                       DirChoice dir) {
  if (dir == DirChoice::Auto)
    throw PreconditionError("direction unresolved: pick lower or upper for ?" + var);
  const Clause* cl = set.byId(clauseId);
  if (!cl) throw PreconditionError("no clause with id " + std::to_string(clauseId));
  auto sorts = set.varSorts(*cl);
  auto it = sorts.find(var);
  if (it == sorts.end())
    throw PreconditionError("variable ?" + var + " does not occur in clause " +
                            std::to_string(clauseId));
  if (it->second != Sort::Base)
    throw PreconditionError("variable ?" + var + " is element-sorted; no direction applies");
  PropagationPreorder prop = buildProp(set);
  VarPoints vp = varClosure(set, prop, clauseId, var, dir);
  ClauseSet out = set;
  applyPoints(out, clauseId, var, vp.points);
  ensurePsi(out, dir == DirChoice::Lower ? Direction::Lower : Direction::Upper);
  return out;
}

ClauseSet eliminateFreeVar(const ClauseSet& set, uint32_t clauseId, const std::string& var) {
  const Clause* cl = set.byId(clauseId);
  if (!cl) throw PreconditionError("no clause with id " + std::to_string(clauseId));
  auto sorts = set.varSorts(*cl);
  auto it = sorts.find(var);
  if (it == sorts.end())
    throw PreconditionError("variable ?" + var + " does not occur in clause " +
                            std::to_string(clauseId));
  if (it->second != Sort::Free)
    throw PreconditionError("variable ?" + var + " is integer-sorted; use a direction");
  PropagationPreorder prop = buildProp(set);
  VarPoints vp = varClosure(set, prop, clauseId, var, DirChoice::Auto);
  ClauseSet out = set;
  applyPoints(out, clauseId, var, vp.points);
  return out;
}

ClauseSet simplify(const ClauseSet& set) {
  ClauseSet out = set;
  std::vector<Clause> kept;
  kept.reserve(out.clauses.size());
  for (Clause& c : out.clauses) {
    if (isSentinelAxiom(c)) {
      kept.push_back(std::move(c));
      continue;
    }
    bool dead = false;
    std::vector<Constraint> lam;
    lam.reserve(c.lambda.size());
    for (const Constraint& cn : c.lambda) {
      GGVerdict v = GGVerdict::Open;
      if (cn.kind == Constraint::Kind::GroundGround)
        v = evalGroundGround(cn.g1, cn.rel, cn.g2);
      else if (cn.kind == Constraint::Kind::VarVar && cn.v1 == cn.v2)
        v = fromCmp(cn.rel, 0);
      if (v == GGVerdict::False) {
        dead = true;
        break;
      }
      if (v == GGVerdict::Open) lam.push_back(cn);
    }
    if (dead) continue;
    c.lambda = std::move(lam);
    kept.push_back(std::move(c));
  }
  out.clauses = std::move(kept);
  std::set<std::string> seen;
  std::vector<Clause> unique;
  unique.reserve(out.clauses.size());
  for (Clause& c : out.clauses) {
    if (!isSentinelAxiom(c)) {
      std::string key = canonicalKey(c);
      if (!seen.insert(key).second) continue;
    }
    unique.push_back(std::move(c));
  }
  out.clauses = std::move(unique);
  return out;
}

bool isSentinelAxiom(const Clause& c) {
  if (!c.falsum() || !c.gamma.empty() || !c.gammaEq.empty()) return false;
  if (c.lambda.size() != 1) return false;
  const Constraint& cn = c.lambda[0];
  if (cn.kind != Constraint::Kind::GroundGround) return false;
  auto a = cn.g1.asConstant();
  auto b = cn.g2.asConstant();
  if (a == kMinf && cn.rel == Rel::Ge) return true;   // @minf >= x
  if (b == kMinf && cn.rel == Rel::Le) return true;   // x <= @minf
  if (a == kPinf && cn.rel == Rel::Le) return true;   // @pinf <= x
  if (b == kPinf && cn.rel == Rel::Ge) return true;   // x >= @pinf
  return false;
}

bool essentiallyGround(const ClauseSet& set) {
  for (const Clause& c : set.clauses) {
    for (const auto& [var, sort] : set.varSorts(c)) {
      if (sort == Sort::Free) return false;
      if (!pinnedIn(c, var)) return false;
    }
  }
  return true;
}

int countNonredundant(const ClauseSet& set) {
  int n = 0;
  for (const Clause& c : set.clauses)
    if (!isSentinelAxiom(c)) n++;
  return n;
}

namespace {

struct PendingVar {
  uint32_t clauseId = 0;
  std::string var;
  Sort sort = Sort::Base;
};

// Unpinned integer variables and all element variables, clause id then first
// occurrence order.
std::vector<PendingVar> pendingVars(const ClauseSet& set) {
  std::vector<PendingVar> out;
  for (const Clause& c : set.clauses) {
    auto sorts = set.varSorts(c);
    for (const std::string& v : clauseVars(c)) {
      auto it = sorts.find(v);
      if (it == sorts.end()) continue;
      if (it->second == Sort::Base && pinnedIn(c, v)) continue;
      out.push_back({c.id, v, it->second});
    }
  }
  return out;
}

DirChoice directiveFor(const Strategy& st, const std::string& var) {
  auto it = st.directions.find(var);
  return it == st.directions.end() ? st.defaultDirection : it->second;
}

// One elimination with trace bookkeeping: replaces the clause, adds sentinel
// axioms when asked, simplifies, and records the step.
void runStep(ClauseSet& set, InstantiationTrace& trace, const PendingVar& pv,
             const VarPoints& vp, const PropagationPreorder& prop, bool withPsi,
             bool recordPositions) {
  TraceStep step;
  step.clauseId = pv.clauseId;
  step.var = pv.var;
  step.sort = pv.sort;
  step.dir = vp.dir == PointDir::Upper ? Direction::Upper : Direction::Lower;
  step.varPoints = vp.points;
  if (recordPositions) {
    const ArgPos& home = prop.varHome.at({pv.clauseId, pv.var});
    if (pv.sort == Sort::Base) {
      Direction d = vp.dir == PointDir::Upper ? Direction::Upper : Direction::Lower;
      const std::set<ArgPos>& cls =
          d == Direction::Lower ? downcl(prop, home) : upcl(prop, home);
      for (const ArgPos& q : cls)
        step.positionPoints[q] = closurePoints(set, prop, q, d).points;
    } else {
      std::set<std::string> names;
      for (const InstPoint& p : vp.points) names.insert(p.name);
      for (const ArgPos& q : downcl(prop, home)) step.freePositionPoints[q] = names;
      step.freeFallback = *names.begin();
    }
  }
  std::vector<uint32_t> ids = applyPoints(set, pv.clauseId, pv.var, vp.points);
  if (withPsi && pv.sort == Sort::Base)
    ensurePsi(set, vp.dir == PointDir::Upper ? Direction::Upper : Direction::Lower);
  set = simplify(set);
  for (uint32_t id : ids)
    if (set.byId(id)) step.survivors++;
  trace.steps.push_back(std::move(step));
}

}  // namespace

GroundResult groundAll(const ClauseSet& set, const Strategy& strategy) {
  if (!set.normalCertified)
    throw PreconditionError("grounding requires a certified normal-form set");
  GroundResult res;
  res.set = set;

  // Baseline pass: designated integer variables take their frozen pools,
  // computed once against the input set.
  if (strategy.baseline != Baseline::None) {
    PropagationPreorder prop0 = buildProp(set);
    InstantiationSet exhaustivePool;
    if (strategy.baseline == Baseline::Exhaustive) {
      exhaustivePool = occurringBaseConsts(set);
      if (exhaustivePool.empty())
        throw PreconditionError("exhaustive grounding needs an occurring integer constant");
    }
    std::vector<std::string> targets = strategy.designate;
    if (targets.empty()) {
      for (const PendingVar& pv : pendingVars(set))
        if (pv.sort == Sort::Base) targets.push_back(pv.var);
    }
    std::map<std::string, InstantiationSet> pool;
    for (const std::string& var : targets) {
      if (pool.count(var)) continue;
      std::optional<PendingVar> found;
      for (const PendingVar& pv : pendingVars(set))
        if (pv.var == var) {
          found = pv;
          break;
        }
      if (!found)
        throw PreconditionError("designated variable ?" + var +
                                " is not an open integer variable of the set");
      if (found->sort != Sort::Base)
        throw PreconditionError("designated variable ?" + var + " is element-sorted");
      if (strategy.baseline == Baseline::Exhaustive) {
        pool[var] = exhaustivePool;
      } else {
        VarPoints lo = varClosure(set, prop0, found->clauseId, var, DirChoice::Lower);
        VarPoints hi = varClosure(set, prop0, found->clauseId, var, DirChoice::Upper);
        InstantiationSet u;
        for (const InstPoint& p : lo.points)
          if (p.isNum || (p.name != kMinf && p.name != kPinf)) u.insert(p);
        for (const InstPoint& p : hi.points)
          if (p.isNum || (p.name != kMinf && p.name != kPinf)) u.insert(p);
        pool[var] = std::move(u);  // empty pool: fall through to the default pass
      }
    }
    for (const std::string& var : targets) {
      if (pool[var].empty()) continue;
      for (;;) {
        auto pend = pendingVars(res.set);
        auto it = std::find_if(pend.begin(), pend.end(),
                               [&](const PendingVar& pv) { return pv.var == var; });
        if (it == pend.end()) break;
        PropagationPreorder prop = buildProp(res.set);
        VarPoints vp;
        vp.owner = var;
        vp.dir = PointDir::Lower;
        vp.points = pool[var];
        runStep(res.set, res.trace, *it, vp, prop, false, false);
      }
    }
  }

  // Default pass: explicit order first, then smallest point set first.
  std::vector<std::string> order = strategy.order;
  {
    std::set<std::string> known;
    for (const PendingVar& pv : pendingVars(set)) known.insert(pv.var);
    for (const std::string& o : order)
      if (!known.count(o))
        throw PreconditionError("order names ?" + o + ", which is not an open variable of the set");
  }
  size_t orderAt = 0;
  // Each step replaces one clause with k open variables by instances with
  // k - 1 apiece, so the per-clause counts shrink in the multiset order and
  // the loop terminates; the cap turns a regression into an error instead of
  // a hang.
  constexpr size_t kStepCap = 100000;
  for (size_t steps = 0;; ++steps) {
    if (steps >= kStepCap) throw LimitError("instantiation did not converge");
    auto pend = pendingVars(res.set);
    if (pend.empty()) break;
    PropagationPreorder prop = buildProp(res.set);
    std::optional<PendingVar> chosen;
    VarPoints chosenPoints;
    while (orderAt < order.size() && !chosen) {
      const std::string& want = order[orderAt];
      auto it = std::find_if(pend.begin(), pend.end(),
                             [&](const PendingVar& pv) { return pv.var == want; });
      if (it == pend.end()) {
        orderAt++;  // already eliminated or its clause died
        continue;
      }
      chosen = *it;
      chosenPoints = varClosure(res.set, prop, it->clauseId, it->var, directiveFor(strategy, want));
    }
    if (!chosen) {
      for (const PendingVar& pv : pend) {
        VarPoints vp = varClosure(res.set, prop, pv.clauseId, pv.var,
                                  directiveFor(strategy, pv.var));
        if (!chosen ||
            std::make_tuple(vp.points.size(), pv.clauseId, pv.var) <
                std::make_tuple(chosenPoints.points.size(), chosen->clauseId, chosen->var)) {
          chosen = pv;
          chosenPoints = vp;
        }
      }
    }
    runStep(res.set, res.trace, *chosen, chosenPoints, prop, chosen->sort == Sort::Base, true);
  }
  return res;
}

ClauseSet encodeSortPredicates(const ClauseSet& set, const std::vector<DeferEntry>& plan) {
  if (plan.empty()) return set;
  if (!set.normalCertified)
    throw PreconditionError("guard encoding requires a certified normal-form set");
  PropagationPreorder prop = buildProp(set);

  // Resolve every entry against the input set before touching anything.
  struct Resolved {
    DeferEntry entry;
    VarPoints points;
    Direction dir = Direction::Lower;
  };
  std::vector<Resolved> todo;
  for (const DeferEntry& e : plan) {
    if (e.dir == DirChoice::Auto)
      throw PreconditionError("defer plan requires resolved directions; got auto for ?" + e.var);
    const Clause* cl = set.byId(e.clauseId);
    if (!cl) throw PreconditionError("no clause with id " + std::to_string(e.clauseId));
    auto sorts = set.varSorts(*cl);
    auto it = sorts.find(e.var);
    if (it == sorts.end())
      throw PreconditionError("variable ?" + e.var + " does not occur in clause " +
                              std::to_string(e.clauseId));
    if (it->second != Sort::Base)
      throw PreconditionError("variable ?" + e.var + " is element-sorted; guards cover integer variables");
    Resolved r;
    r.entry = e;
    r.points = varClosure(set, prop, e.clauseId, e.var, e.dir);
    r.dir = e.dir == DirChoice::Lower ? Direction::Lower : Direction::Upper;
    todo.push_back(std::move(r));
  }

  ClauseSet out = set;
  std::set<std::string> allVars;
  for (const Clause& c : out.clauses)
    for (const std::string& v : clauseVars(c)) allVars.insert(v);
  bool usedLow = false, usedHigh = false;
  for (const Resolved& r : todo) {
    std::string guard = "S_" + r.entry.var;
    if (out.sig.knows(guard)) guard = freshName(guard + "_", out.sig);
    out.sig.declarePred({guard, {Sort::Base}, false, false, false});
    Clause* cl = out.byId(r.entry.clauseId);
    cl->gamma.push_back(Atom{guard, {Term::var(r.entry.var)}, false});
    cl->sortParts();
    int k = 0;
    for (const InstPoint& p : r.points.points) {
      if (!p.isNum) {
        declareSentinel(out, p.name);
        if (p.name == kMinf) usedLow = true;
        if (p.name == kPinf) usedHigh = true;
      }
      std::string uv;
      do {
        uv = r.entry.var + "_s" + std::to_string(k++);
      } while (allVars.count(uv));
      allVars.insert(uv);
      Clause unit;
      unit.lambda.push_back(Constraint::varGround(uv, Rel::Eq, pointTermOf(p)));
      unit.delta.push_back(Atom{guard, {Term::var(uv)}, false});
      unit.origin = ClauseOrigin::SortGuard;
      out.addClause(std::move(unit));
    }
    usedLow = usedLow || r.dir == Direction::Lower;
    usedHigh = usedHigh || r.dir == Direction::Upper;
  }
  if (usedLow) ensurePsi(out, Direction::Lower);
  if (usedHigh) ensurePsi(out, Direction::Upper);
  return out;
}

std::string traceToJsonLines(const InstantiationTrace& trace) {
  std::string out;
  int n = 0;
  for (const TraceStep& s : trace.steps) {
    nlohmann::json j;
    j["step"] = ++n;
    j["clause"] = s.clauseId;
    j["variable"] = s.var;
    j["sort"] = s.sort == Sort::Base ? "Z" : "S";
    j["direction"] = s.sort == Sort::Free ? "free" : directionName(s.dir);
    nlohmann::json pts = nlohmann::json::array();
    for (const InstPoint& p : s.varPoints) pts.push_back(toString(p));
    j["points"] = std::move(pts);
    j["instances_after"] = s.survivors;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace bsr
