#include "groundsolve.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

namespace bsr {

namespace {

// ---------------------------------------------------------------------------
// Exact rationals with overflow-checked arithmetic.

struct Rat {
  int64_t n = 0;
  int64_t d = 1;  // always > 0, gcd(|n|, d) == 1

  Rat() = default;
  Rat(int64_t v) : n(v), d(1) {}
  Rat(int64_t nn, int64_t dd) {
    if (dd == 0) throw Error("rational with zero denominator");
    if (dd < 0) {
      nn = subCk(0, nn);
      dd = subCk(0, dd);
    }
    int64_t g = std::gcd(nn < 0 ? -nn : nn, dd);
    if (g > 1) {
      nn /= g;
      dd /= g;
    }
    n = nn;
    d = dd;
  }

  bool isInt() const { return d == 1; }
};

Rat add(const Rat& a, const Rat& b) {
  return Rat(addCk(mulCk(a.n, b.d), mulCk(b.n, a.d)), mulCk(a.d, b.d));
}
Rat sub(const Rat& a, const Rat& b) {
  return Rat(subCk(mulCk(a.n, b.d), mulCk(b.n, a.d)), mulCk(a.d, b.d));
}
Rat mul(const Rat& a, const Rat& b) { return Rat(mulCk(a.n, b.n), mulCk(a.d, b.d)); }
Rat div(const Rat& a, const Rat& b) {
  if (b.n == 0) throw Error("rational division by zero");
  return Rat(mulCk(a.n, b.d), mulCk(a.d, b.n));
}
int cmp(const Rat& a, const Rat& b) {
  int64_t l = mulCk(a.n, b.d), r = mulCk(b.n, a.d);
  return l < r ? -1 : l > r ? 1 : 0;
}

int64_t floorDiv(int64_t n, int64_t d) {
  int64_t q = n / d, r = n % d;
  return (r != 0 && (r < 0) != (d < 0)) ? q - 1 : q;
}
int64_t floorRat(const Rat& a) { return floorDiv(a.n, a.d); }
int64_t ceilRat(const Rat& a) { return subCk(0, floorDiv(subCk(0, a.n), a.d)); }

// ---------------------------------------------------------------------------
// Fourier-Motzkin elimination over rows "sum coeff * unknown <= rhs".

struct Row {
  std::map<std::string, Rat> c;
  Rat rhs;
};

void addTerm(Row& row, const std::string& name, const Rat& k) {
  auto it = row.c.find(name);
  if (it == row.c.end()) {
    if (k.n != 0) row.c.emplace(name, k);
    return;
  }
  it->second = add(it->second, k);
  if (it->second.n == 0) row.c.erase(it);
}

// g1 <= g2 + adjust, as a row.
Row rowOf(const GTerm& g1, const GTerm& g2, int64_t adjust) {
  Row r;
  for (const auto& [name, k] : g1.coeffs) addTerm(r, name, Rat(k));
  for (const auto& [name, k] : g2.coeffs) addTerm(r, name, Rat(subCk(0, k)));
  r.rhs = Rat(addCk(subCk(g2.offset, g1.offset), adjust));
  return r;
}

// Appends the rows for one constraint; disequations are the caller's job.
void constraintRows(const Constraint& cn, std::vector<Row>& out) {
  if (cn.kind != Constraint::Kind::GroundGround)
    throw PreconditionError("feasibility check needs ground constraints");
  switch (cn.rel) {
    case Rel::Le: out.push_back(rowOf(cn.g1, cn.g2, 0)); return;
    case Rel::Lt: out.push_back(rowOf(cn.g1, cn.g2, -1)); return;
    case Rel::Ge: out.push_back(rowOf(cn.g2, cn.g1, 0)); return;
    case Rel::Gt: out.push_back(rowOf(cn.g2, cn.g1, -1)); return;
    case Rel::Eq:
      out.push_back(rowOf(cn.g1, cn.g2, 0));
      out.push_back(rowOf(cn.g2, cn.g1, 0));
      return;
    case Rel::Ne: throw PreconditionError("split disequations before the feasibility check");
  }
}

constexpr size_t kMaxRows = 200000;

// Rational feasibility with a witness. Eliminates unknowns pairwise, then
// back-substitutes, preferring integer values inside each interval.
std::optional<std::map<std::string, Rat>> feasRational(std::vector<Row> work) {
  struct Level {
    std::string name;
    std::vector<Row> lowers, uppers;  // rows mentioning the unknown
  };
  std::vector<Level> levels;

  std::set<std::string> unknowns;
  for (const auto& r : work)
    for (const auto& [name, k] : r.c) unknowns.insert(name);

  while (true) {
    // Constant rows decide themselves.
    std::vector<Row> next;
    for (auto& r : work) {
      if (!r.c.empty()) {
        next.push_back(std::move(r));
        continue;
      }
      if (r.rhs.n < 0) return std::nullopt;  // 0 <= negative
    }
    work = std::move(next);
    if (unknowns.empty()) break;

    // Cheapest unknown first keeps the blowup down.
    std::string best;
    size_t bestCost = SIZE_MAX;
    for (const auto& u : unknowns) {
      size_t lo = 0, hi = 0;
      for (const auto& r : work) {
        auto it = r.c.find(u);
        if (it == r.c.end()) continue;
        (it->second.n < 0 ? lo : hi)++;
      }
      size_t cost = lo * hi;
      if (cost < bestCost) {
        bestCost = cost;
        best = u;
      }
    }
    unknowns.erase(best);

    Level lvl;
    lvl.name = best;
    std::vector<Row> rest;
    for (auto& r : work) {
      auto it = r.c.find(best);
      if (it == r.c.end())
        rest.push_back(std::move(r));
      else
        (it->second.n < 0 ? lvl.lowers : lvl.uppers).push_back(std::move(r));
    }
    for (const auto& l : lvl.lowers)
      for (const auto& u : lvl.uppers) {
        // scale so the eliminated coefficients cancel
        Rat cl = l.c.at(best), cu = u.c.at(best);  // cl < 0 < cu
        Row combined;
        for (const auto& [name, k] : l.c)
          if (name != best) addTerm(combined, name, mul(k, cu));
        for (const auto& [name, k] : u.c)
          if (name != best) addTerm(combined, name, mul(k, Rat(subCk(0, cl.n), cl.d)));
        combined.rhs =
            add(mul(l.rhs, cu), mul(u.rhs, Rat(subCk(0, cl.n), cl.d)));
        rest.push_back(std::move(combined));
        if (rest.size() > kMaxRows) throw LimitError("feasibility row blowup");
      }
    work = std::move(rest);
    levels.push_back(std::move(lvl));
  }

  // Back-substitute, reverse elimination order.
  std::map<std::string, Rat> val;
  auto evalRest = [&](const Row& r, const std::string& skip) {
    Rat s(0);
    for (const auto& [name, k] : r.c)
      if (name != skip) s = add(s, mul(k, val.at(name)));
    return s;
  };
  for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
    std::optional<Rat> lo, hi;
    for (const auto& r : it->lowers) {
      // c*x <= rhs - rest with c < 0: x >= (rhs - rest)/c
      Rat bound = div(sub(r.rhs, evalRest(r, it->name)), r.c.at(it->name));
      if (!lo || cmp(bound, *lo) > 0) lo = bound;
    }
    for (const auto& r : it->uppers) {
      Rat bound = div(sub(r.rhs, evalRest(r, it->name)), r.c.at(it->name));
      if (!hi || cmp(bound, *hi) < 0) hi = bound;
    }
    Rat v(0);
    if (lo && hi) {
      Rat c = Rat(ceilRat(*lo));
      v = cmp(c, *hi) <= 0 ? c : *lo;  // prefer an integer inside
    } else if (lo) {
      v = Rat(ceilRat(*lo));
    } else if (hi) {
      v = Rat(floorRat(*hi));
    }
    val.emplace(it->name, v);
  }
  return val;
}

std::optional<std::map<std::string, int64_t>> bnb(const std::vector<Row>& rows, int depth,
                                                  int cap) {
  auto r = feasRational(rows);
  if (!r) return std::nullopt;
  for (const auto& [name, v] : *r) {
    if (v.isInt()) continue;
    if (depth >= cap) throw LimitError("integer branching depth cap exceeded");
    // branch below and above the fractional witness
    int64_t fl = floorRat(v);
    std::vector<Row> left = rows;
    Row bound;
    bound.c.emplace(name, Rat(1));
    bound.rhs = Rat(fl);
    left.push_back(bound);
    if (auto got = bnb(left, depth + 1, cap)) return got;
    std::vector<Row> right = rows;
    Row lower;
    lower.c.emplace(name, Rat(-1));
    lower.rhs = Rat(subCk(0, addCk(fl, 1)));
    right.push_back(lower);
    return bnb(right, depth + 1, cap);
  }
  std::map<std::string, int64_t> out;
  for (const auto& [name, v] : *r) out.emplace(name, v.n);
  return out;
}

}  // namespace

LiaResult liaFeasible(const std::vector<Constraint>& constraints) {
  std::vector<Row> rows;
  std::set<std::string> unknowns;
  for (const auto& cn : constraints) {
    constraintRows(cn, rows);
    for (const auto& [name, k] : cn.g1.coeffs) unknowns.insert(name);
    for (const auto& [name, k] : cn.g2.coeffs) unknowns.insert(name);
  }
  int cap = 10 * static_cast<int>(unknowns.size());
  auto got = bnb(rows, 0, cap);
  LiaResult res;
  res.feasible = got.has_value();
  if (got) {
    res.sample = std::move(*got);
    for (const auto& u : unknowns) res.sample.emplace(u, 0);  // unconstrained
  }
  return res;
}

// ---------------------------------------------------------------------------
// Instantiation points and partitions.

InstPoint InstPoint::numeral(int64_t v) {
  InstPoint p;
  p.isNum = true;
  p.num = v;
  return p;
}

InstPoint InstPoint::named(const std::string& n) {
  InstPoint p;
  p.name = n;
  return p;
}

std::string toString(const InstPoint& p) { return p.isNum ? std::to_string(p.num) : p.name; }

const char* directionName(Direction d) { return d == Direction::Lower ? "lower" : "upper"; }

bool PartitionCell::contains(int64_t v) const {
  if (lo && v < *lo) return false;
  if (hi && v > *hi) return false;
  return true;
}

std::string toString(const PartitionCell& c) {
  std::string s = c.lo ? "[" + std::to_string(*c.lo) : "(-inf";
  s += ", ";
  s += c.hi ? std::to_string(*c.hi) + "]" : "+inf)";
  return s;
}

std::vector<PartitionCell> makePartition(const InstantiationSet& points, Direction dir,
                                         const std::map<std::string, int64_t>& baseValues) {
  const std::string& marker = dir == Direction::Lower ? kMinf : kPinf;
  // value -> preferred spelling (numerals win, then lexicographic)
  std::map<int64_t, std::pair<bool, std::string>> reps;
  for (const auto& p : points) {
    if (!p.isNum && p.name == marker) continue;  // stands for the open cell
    int64_t v;
    std::pair<bool, std::string> spell;
    if (p.isNum) {
      v = p.num;
      spell = {true, std::to_string(p.num)};
    } else {
      auto it = baseValues.find(p.name);
      if (it == baseValues.end())
        throw PreconditionError("no value for instantiation point " + p.name);
      v = it->second;
      spell = {false, p.name};
    }
    auto [it, fresh] = reps.emplace(v, spell);
    if (!fresh && (spell.first > it->second.first ||
                   (spell.first == it->second.first && spell.second < it->second.second)))
      it->second = spell;
  }

  auto markerRep = [&](int64_t inside) {
    auto it = baseValues.find(marker);
    return it != baseValues.end() ? it->second : inside;
  };

  std::vector<PartitionCell> cells;
  if (reps.empty()) {
    PartitionCell all;
    all.repName = marker;
    all.rep = markerRep(0);
    cells.push_back(all);
    return cells;
  }
  std::vector<std::pair<int64_t, std::string>> rs;
  for (const auto& [v, spell] : reps) rs.emplace_back(v, spell.second);

  if (dir == Direction::Lower) {
    PartitionCell open;
    open.hi = subCk(rs.front().first, 1);
    open.repName = marker;
    open.rep = markerRep(*open.hi);
    cells.push_back(open);
    for (size_t i = 0; i < rs.size(); i++) {
      PartitionCell c;
      c.lo = rs[i].first;
      if (i + 1 < rs.size()) c.hi = subCk(rs[i + 1].first, 1);
      c.rep = rs[i].first;
      c.repName = rs[i].second;
      cells.push_back(c);
    }
  } else {
    for (size_t i = 0; i < rs.size(); i++) {
      PartitionCell c;
      if (i > 0) c.lo = addCk(rs[i - 1].first, 1);
      c.hi = rs[i].first;
      c.rep = rs[i].first;
      c.repName = rs[i].second;
      cells.push_back(c);
    }
    PartitionCell open;
    open.lo = addCk(rs.back().first, 1);
    open.repName = marker;
    open.rep = markerRep(*open.lo);
    cells.push_back(open);
  }
  return cells;
}

// ---------------------------------------------------------------------------
// Hierarchic models.

std::string toString(const MVal& v) {
  if (std::holds_alternative<int64_t>(v)) return std::to_string(std::get<int64_t>(v));
  return std::get<std::string>(v);
}

int64_t project(const std::vector<PartitionCell>& cells, int64_t v) {
  if (cells.empty()) return v;
  for (const auto& c : cells)
    if (c.contains(v)) return c.rep;
  throw Error("value " + std::to_string(v) + " outside every partition cell");
}

std::string project(const FreeProjection& p, const std::string& elem) {
  auto it = p.map.find(elem);
  if (it != p.map.end()) return it->second;
  if (!p.fallback.empty()) return p.fallback;
  return elem;
}

bool holds(const HierarchicModel& m, const std::string& pred, const std::vector<MVal>& args) {
  auto ext = m.extensions.find(pred);
  auto tables = m.projections.find(pred);
  if (tables == m.projections.end())
    return ext != m.extensions.end() && ext->second.count(args) > 0;
  if (tables->second.size() != args.size())
    throw PreconditionError("arity mismatch against projection tables of " + pred);
  std::vector<MVal> proj;
  proj.reserve(args.size());
  for (size_t i = 0; i < args.size(); i++) {
    const PositionProjection& t = tables->second[i];
    if (std::holds_alternative<int64_t>(args[i]))
      proj.emplace_back(project(t.cells, std::get<int64_t>(args[i])));
    else
      proj.emplace_back(project(t.free, std::get<std::string>(args[i])));
  }
  return ext != m.extensions.end() && ext->second.count(proj) > 0;
}

// ---------------------------------------------------------------------------
// JSON serialization.

namespace {

using nlohmann::json;

json cellJson(const PartitionCell& c) {
  json j;
  j["lo"] = c.lo ? json(*c.lo) : json();
  j["hi"] = c.hi ? json(*c.hi) : json();
  j["rep"] = c.rep;
  j["rep_name"] = c.repName;
  return j;
}

json mvalJson(const MVal& v) {
  if (std::holds_alternative<int64_t>(v)) return json(std::get<int64_t>(v));
  return json(std::get<std::string>(v));
}

json modelJson(const HierarchicModel& m) {
  json j;
  j["base_values"] = json::object();
  for (const auto& [name, v] : m.baseValues) j["base_values"][name] = v;
  j["free_domain"] = m.freeDomain;
  j["free_values"] = json::object();
  for (const auto& [name, e] : m.freeValues) j["free_values"][name] = e;
  j["extensions"] = json::object();
  for (const auto& [pred, tuples] : m.extensions) {
    json rows = json::array();
    for (const auto& t : tuples) {
      json row = json::array();
      for (const auto& v : t) row.push_back(mvalJson(v));
      rows.push_back(std::move(row));
    }
    j["extensions"][pred] = std::move(rows);
  }
  j["projections"] = json::object();
  for (const auto& [pred, tables] : m.projections) {
    json list = json::array();
    for (const auto& t : tables) {
      json tj;
      tj["sort"] = t.sort == Sort::Base ? "Z" : "S";
      if (t.sort == Sort::Base) {
        json cs = json::array();
        for (const auto& c : t.cells) cs.push_back(cellJson(c));
        tj["cells"] = std::move(cs);
      } else {
        tj["map"] = json::object();
        for (const auto& [from, to] : t.free.map) tj["map"][from] = to;
        tj["fallback"] = t.free.fallback;
      }
      list.push_back(std::move(tj));
    }
    j["projections"][pred] = std::move(list);
  }
  return j;
}

}  // namespace

std::string modelToJson(const HierarchicModel& m, int indent) {
  return modelJson(m).dump(indent);
}

std::string verdictToJson(const Verdict& v, int indent) {
  json j;
  j["verdict"] = v.sat ? "sat" : "unsat";
  if (v.sat)
    j["model"] = modelJson(v.model);
  else
    j["core"] = v.core;
  return j.dump(indent);
}

// ---------------------------------------------------------------------------
// Boolean abstraction.

namespace {

// Mutable atom table shared by abstraction and solving; lemmas extend it.
struct AtomTable {
  std::vector<AbsAtom> atoms;
  std::map<std::string, int> index;
  std::vector<std::vector<int>> rows;
  std::vector<uint32_t> rowIds;

  int intern(AbsAtom a) {
    auto it = index.find(a.key);
    if (it != index.end()) return it->second;
    atoms.push_back(std::move(a));
    int id = static_cast<int>(atoms.size());
    index.emplace(atoms.back().key, id);
    return id;
  }

  int le(const GTerm& a, const GTerm& b) {
    AbsAtom at;
    at.kind = AbsAtom::Kind::IntLe;
    at.a = a;
    at.b = b;
    at.key = "le|" + toString(a) + "|" + toString(b);
    return intern(std::move(at));
  }

  // equality over integer terms; creating one lays down the definitional
  // triple  eq <-> (a <= b and b <= a), which is where a disequation splits
  // into its two strict sides
  int intEq(GTerm a, GTerm b) {
    if (toString(a) > toString(b)) std::swap(a, b);
    AbsAtom at;
    at.kind = AbsAtom::Kind::IntEq;
    at.a = a;
    at.b = b;
    at.key = "eq|" + toString(a) + "|" + toString(b);
    auto it = index.find(at.key);
    if (it != index.end()) return it->second;
    int eq = intern(std::move(at));
    int ab = le(a, b), ba = le(b, a);
    rows.push_back({-eq, ab});
    rowIds.push_back(0);
    rows.push_back({-eq, ba});
    rowIds.push_back(0);
    rows.push_back({eq, -ab, -ba});
    rowIds.push_back(0);
    return eq;
  }

  int elemEq(std::string x, std::string y) {
    if (x > y) std::swap(x, y);
    AbsAtom at;
    at.kind = AbsAtom::Kind::ElemEq;
    at.ea = x;
    at.eb = y;
    at.key = "ee|" + x + "|" + y;
    return intern(std::move(at));
  }

  int predAtom(const std::string& pred, std::vector<AbsAtom::Coord> coords) {
    AbsAtom at;
    at.kind = AbsAtom::Kind::Pred;
    at.pred = pred;
    at.key = pred + "(";
    for (size_t i = 0; i < coords.size(); i++) {
      if (i) at.key += ",";
      at.key += coords[i].sort == Sort::Base ? "z:" + toString(coords[i].g)
                                             : "s:" + coords[i].elem;
    }
    at.key += ")";
    at.coords = std::move(coords);
    return intern(std::move(at));
  }
};

// Folds an argument term at an integer position to a ground linear term,
// substituting pinned variables.
GTerm foldBaseArg(const Term& t, const std::map<std::string, GTerm>& pins) {
  switch (t.k) {
    case Term::K::Int: return GTerm::number(t.value);
    case Term::K::Const: return GTerm::constant(t.name);
    case Term::K::Var: {
      auto it = pins.find(t.name);
      if (it == pins.end()) throw PreconditionError("unpinned integer variable ?" + t.name);
      return it->second;
    }
    case Term::K::App:
      if ((t.name == "+" || t.name == "-") && t.args.size() == 2) {
        GTerm l = foldBaseArg(t.args[0], pins);
        GTerm r = foldBaseArg(t.args[1], pins);
        return t.name == "+" ? l.plus(r) : l.minus(r);
      }
      throw PreconditionError("function application " + t.name + " in a ground atom");
  }
  throw Error("unreachable term kind");
}

// Usage check, not a declaration check: function applications are caught
// while folding the argument terms.
void rejectTheorySymbols(const ClauseSet& set) {
  for (const auto& c : set.clauses) {
    auto scan = [&](const std::vector<Atom>& atoms) {
      for (const auto& a : atoms) {
        const PredDecl* d = set.sig.pred(a.pred);
        if (d && d->theory)
          throw PreconditionError("theory atom " + a.pred + " cannot be decided here");
      }
    };
    scan(c.gamma);
    scan(c.delta);
  }
}

// Per-clause abstraction. Returns false when the clause is trivially true
// (dropped); otherwise fills lits.
bool abstractClause(const ClauseSet& set, const Clause& c, AtomTable& tab,
                    std::vector<int>& lits) {
  auto sorts = set.varSorts(c);
  std::map<std::string, GTerm> pins;
  for (const auto& [v, s] : sorts) {
    if (s == Sort::Free)
      throw PreconditionError("element variable ?" + v + " in clause " + std::to_string(c.id) +
                              "; instantiate first");
  }
  for (const auto& cn : c.lambda) {
    if (cn.kind == Constraint::Kind::VarGround && cn.rel == Rel::Eq) pins.emplace(cn.v1, cn.g2);
  }
  for (const auto& [v, s] : sorts) {
    if (!pins.count(v))
      throw PreconditionError("integer variable ?" + v + " has no defining equation in clause " +
                              std::to_string(c.id));
  }

  auto ground = [&](const Constraint& cn) {
    switch (cn.kind) {
      case Constraint::Kind::GroundGround: return cn;
      case Constraint::Kind::VarGround:
        return Constraint::groundGround(pins.at(cn.v1), cn.rel, cn.g2);
      case Constraint::Kind::VarVar:
        return Constraint::groundGround(pins.at(cn.v1), cn.rel, pins.at(cn.v2));
    }
    throw Error("unreachable constraint kind");
  };

  // A constraint sits in the antecedent, so the clause carries its negation.
  for (const auto& raw : c.lambda) {
    Constraint cn = ground(raw);
    if (cn.g1.isNumeral() && cn.g2.isNumeral()) {
      if (relHolds(cn.rel, cn.g1.offset, cn.g2.offset)) continue;  // negation is false
      return false;                                                // antecedent already false
    }
    if (cn.g1 == cn.g2) {
      bool reflexive = cn.rel == Rel::Le || cn.rel == Rel::Ge || cn.rel == Rel::Eq;
      if (reflexive) continue;
      return false;
    }
    switch (cn.rel) {
      case Rel::Le: lits.push_back(-tab.le(cn.g1, cn.g2)); break;
      case Rel::Lt: lits.push_back(tab.le(cn.g2, cn.g1)); break;
      case Rel::Ge: lits.push_back(-tab.le(cn.g2, cn.g1)); break;
      case Rel::Gt: lits.push_back(tab.le(cn.g1, cn.g2)); break;
      case Rel::Eq: lits.push_back(-tab.intEq(cn.g1, cn.g2)); break;
      case Rel::Ne: lits.push_back(tab.intEq(cn.g1, cn.g2)); break;
    }
  }

  auto coordsOf = [&](const Atom& a) {
    const PredDecl* d = set.sig.pred(a.pred);
    if (!d) throw PreconditionError("undeclared predicate " + a.pred);
    std::vector<AbsAtom::Coord> coords;
    for (size_t i = 0; i < a.args.size(); i++) {
      AbsAtom::Coord co;
      co.sort = d->argSorts[i];
      if (co.sort == Sort::Base) {
        co.g = foldBaseArg(a.args[i], pins);
      } else {
        if (a.args[i].k != Term::K::Const)
          throw PreconditionError("non-constant element argument in a ground atom of " + a.pred);
        co.elem = a.args[i].name;
      }
      coords.push_back(std::move(co));
    }
    return coords;
  };

  auto elemSide = [&](const Term& t) {
    if (t.k != Term::K::Const)
      throw PreconditionError("non-constant side in a ground equation");
    return t.name;
  };

  for (const auto& a : c.gamma) {
    if (a.synthetic) return false;  // placeholder premises never hold
    lits.push_back(-tab.predAtom(a.pred, coordsOf(a)));
  }
  for (const auto& e : c.gammaEq) {
    std::string l = elemSide(e.lhs), r = elemSide(e.rhs);
    if (l == r) continue;  // premise trivially holds, negation drops
    lits.push_back(-tab.elemEq(l, r));
  }
  for (const auto& a : c.delta) {
    if (a.synthetic) continue;  // placeholder conclusions never hold
    lits.push_back(tab.predAtom(a.pred, coordsOf(a)));
  }
  for (const auto& e : c.deltaEq) {
    std::string l = elemSide(e.lhs), r = elemSide(e.rhs);
    if (l == r) return false;  // conclusion trivially holds
    lits.push_back(tab.elemEq(l, r));
  }

  // sort by variable so complementary literals end up adjacent
  std::sort(lits.begin(), lits.end(),
            [](int a, int b) { return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b) : a < b; });
  lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
  for (size_t i = 0; i + 1 < lits.size(); i++)
    if (lits[i] == -lits[i + 1]) return false;  // tautology
  return true;
}

AtomTable buildAbstraction(const ClauseSet& set) {
  rejectTheorySymbols(set);
  AtomTable tab;
  for (const auto& c : set.clauses) {
    std::vector<int> lits;
    if (!abstractClause(set, c, tab, lits)) continue;
    tab.rows.push_back(std::move(lits));
    tab.rowIds.push_back(c.id);
  }
  return tab;
}

}  // namespace

GroundProblem abstractGround(const ClauseSet& set) {
  AtomTable tab = buildAbstraction(set);
  GroundProblem p;
  p.atoms = std::move(tab.atoms);
  p.index = std::move(tab.index);
  p.rows = std::move(tab.rows);
  p.rowIds = std::move(tab.rowIds);
  return p;
}

// ---------------------------------------------------------------------------
// The search: two-watched-literal propagation, chronological backtracking,
// theory checks at every propagation fixpoint, congruence lemmas on total
// assignments.

namespace {

struct UnionFind {
  std::map<std::string, std::string> parent;

  const std::string& find(const std::string& x) {
    auto it = parent.find(x);
    if (it == parent.end()) {
      parent.emplace(x, x);
      return find(x);
    }
    if (it->second == x) return it->second;
    const std::string& root = find(it->second);
    it->second = root;
    return it->second;
  }

  void unite(const std::string& a, const std::string& b) {
    std::string ra = find(a), rb = find(b);
    if (ra == rb) return;
    if (rb < ra) std::swap(ra, rb);  // lexicographically least root wins
    parent[rb] = ra;
  }
};

enum class RunOut { Sat, Unsat, Restart };

class Search {
 public:
  Search(AtomTable& tab, const ClauseSet& set, std::set<std::pair<int, int>>& lemmaDone)
      : tab(tab), set(set), lemmaDone(lemmaDone) {}

  RunOut run();

  std::vector<int8_t> assignment;            // Sat: 1-based truth values
  std::map<std::string, int64_t> sample;     // Sat: witness for integer atoms
  std::set<int> coreRows;                    // Unsat: responsible row indices

 private:
  AtomTable& tab;
  const ClauseSet& set;
  std::set<std::pair<int, int>>& lemmaDone;

  static constexpr int kDecision = -1;
  static constexpr int kFlipBase = -2;  // kFlipBase - i = flip of decision i

  int nv = 0;
  std::vector<int8_t> val;          // 1-based
  std::vector<int> reason;          // 1-based: row index, kDecision, or flip marker
  std::vector<int> trail;
  size_t qhead = 0;
  struct Dec {
    size_t pos;  // trail index of the decision literal
    bool flipped = false;
    std::set<int> just;  // conflict rows of the first branch, once flipped
  };
  std::vector<Dec> decs;
  std::vector<std::vector<int>> watchers;  // watch(lit) -> row indices

  size_t watchIdx(int lit) const { return 2 * (std::abs(lit) - 1) + (lit < 0 ? 1 : 0); }
  int8_t value(int lit) const {
    int8_t v = val[std::abs(lit)];
    return lit > 0 ? v : static_cast<int8_t>(-v);
  }

  void assign(int lit, int why) {
    val[std::abs(lit)] = lit > 0 ? 1 : -1;
    reason[std::abs(lit)] = why;
    trail.push_back(lit);
  }

  void unwind(size_t pos) {
    while (trail.size() > pos) {
      int lit = trail.back();
      trail.pop_back();
      val[std::abs(lit)] = 0;
      reason[std::abs(lit)] = kDecision;
    }
    qhead = pos;
  }

  // Input-responsibility cone: rows reached through reasons, flip
  // justifications absorbed.
  void coneInto(int lit, std::set<int>& out, std::set<int>& seen) {
    int v = std::abs(lit);
    if (!seen.insert(v).second) return;
    int why = reason[v];
    if (why >= 0) {
      out.insert(why);
      for (int l : tab.rows[why]) coneInto(l, out, seen);
    } else if (why <= kFlipBase) {
      const std::set<int>& just = decs[kFlipBase - why].just;
      out.insert(just.begin(), just.end());
    }
  }

  std::set<int> coneOfRow(int row) {
    std::set<int> out, seen;
    out.insert(row);
    for (int l : tab.rows[row]) coneInto(l, out, seen);
    return out;
  }

  std::set<int> coneOfLits(const std::vector<int>& lits) {
    std::set<int> out, seen;
    for (int l : lits) coneInto(l, out, seen);
    return out;
  }

  // Chronological: flip the deepest unflipped decision, shedding exhausted
  // ones. Returns false when decisions run out (conflict set is the core).
  bool resolveConflict(std::set<int> s) {
    while (!decs.empty()) {
      Dec& d = decs.back();
      if (!d.flipped) {
        int decLit = trail[d.pos];
        unwind(d.pos);
        d.flipped = true;
        d.just = std::move(s);
        assign(-decLit, kFlipBase - static_cast<int>(decs.size() - 1));
        return true;
      }
      unwind(d.pos);
      decs.pop_back();
    }
    coreRows = std::move(s);
    return false;
  }

  // Returns the conflicting row, or -1.
  int propagate() {
    while (qhead < trail.size()) {
      int falsified = -trail[qhead++];
      std::vector<int>& ws = watchers[watchIdx(falsified)];
      size_t keep = 0;
      for (size_t wi = 0; wi < ws.size(); wi++) {
        int row = ws[wi];
        std::vector<int>& lits = tab.rows[row];
        if (lits[0] == falsified) std::swap(lits[0], lits[1]);
        if (value(lits[0]) == 1) {
          ws[keep++] = row;
          continue;
        }
        bool moved = false;
        for (size_t k = 2; k < lits.size(); k++) {
          if (value(lits[k]) != -1) {
            std::swap(lits[1], lits[k]);
            watchers[watchIdx(lits[1])].push_back(row);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[keep++] = row;
        if (value(lits[0]) == -1) {
          while (++wi < ws.size()) ws[keep++] = ws[wi];
          ws.resize(keep);
          return row;
        }
        assign(lits[0], row);
      }
      ws.resize(keep);
    }
    return -1;
  }

  // T1: conjunction of the asserted integer comparisons.
  std::vector<Constraint> assertedIntConstraints(std::vector<int>* litsOut) const {
    std::vector<Constraint> cs;
    for (int v = 1; v <= nv; v++) {
      if (val[v] == 0) continue;
      const AbsAtom& a = tab.atoms[v - 1];
      if (a.kind == AbsAtom::Kind::IntLe) {
        cs.push_back(val[v] > 0 ? Constraint::groundGround(a.a, Rel::Le, a.b)
                                : Constraint::groundGround(a.a, Rel::Gt, a.b));
        if (litsOut) litsOut->push_back(val[v] > 0 ? v : -v);
      } else if (a.kind == AbsAtom::Kind::IntEq && val[v] > 0) {
        // a false equality acts through its definitional strict sides
        cs.push_back(Constraint::groundGround(a.a, Rel::Eq, a.b));
        if (litsOut) litsOut->push_back(v);
      }
    }
    return cs;
  }

  // Union-find over element constants from asserted equations; a false
  // equation inside one class is a conflict. Returns the involved literals
  // on conflict.
  std::optional<std::vector<int>> elemConflict(UnionFind& uf) const {
    std::vector<int> merges;
    for (int v = 1; v <= nv; v++) {
      if (val[v] != 1) continue;
      const AbsAtom& a = tab.atoms[v - 1];
      if (a.kind != AbsAtom::Kind::ElemEq) continue;
      uf.unite(a.ea, a.eb);
      merges.push_back(v);
    }
    for (int v = 1; v <= nv; v++) {
      if (val[v] != -1) continue;
      const AbsAtom& a = tab.atoms[v - 1];
      if (a.kind != AbsAtom::Kind::ElemEq) continue;
      if (uf.find(a.ea) == uf.find(a.eb)) {
        std::vector<int> lits = merges;
        lits.push_back(-v);
        return lits;
      }
    }
    return std::nullopt;
  }

  // Theory checks at a propagation fixpoint. Returns a conflict set, or
  // nothing when the asserted literals are theory-consistent.
  std::optional<std::set<int>> theoryConflict() {
    UnionFind uf;
    if (auto lits = elemConflict(uf)) return coneOfLits(*lits);
    std::vector<int> lits;
    std::vector<Constraint> cs = assertedIntConstraints(&lits);
    LiaResult r = liaFeasible(cs);
    if (!r.feasible) return coneOfLits(lits);
    lastSample = std::move(r.sample);
    return std::nullopt;
  }

  std::map<std::string, int64_t> lastSample;

  std::map<std::string, int64_t> fullSample() const {
    std::map<std::string, int64_t> s = lastSample;
    for (const auto& name : set.sig.baseConsts()) s.emplace(name, 0);
    return s;
  }

  // Congruence over the final assignment: predicate atoms whose arguments
  // coincide under the witness must agree. Each violating pair gets a pair
  // of guarded lemmas, once; returns true when lemmas were added.
  bool congruenceLemmas() {
    std::map<std::string, int64_t> s = fullSample();
    UnionFind uf;
    for (int v = 1; v <= nv; v++) {
      if (val[v] != 1) continue;
      const AbsAtom& a = tab.atoms[v - 1];
      if (a.kind == AbsAtom::Kind::ElemEq) uf.unite(a.ea, a.eb);
    }
    std::map<std::string, std::vector<int>> byPred;
    for (int v = 1; v <= nv; v++)
      if (tab.atoms[v - 1].kind == AbsAtom::Kind::Pred)
        byPred[tab.atoms[v - 1].pred].push_back(v);

    bool added = false;
    for (const auto& [pred, ids] : byPred) {
      for (size_t i = 0; i < ids.size(); i++) {
        for (size_t j = i + 1; j < ids.size(); j++) {
          int x = ids[i], y = ids[j];
          if (val[x] == val[y]) continue;
          if (lemmaDone.count({x, y})) continue;
          const AbsAtom& ax = tab.atoms[x - 1];
          const AbsAtom& ay = tab.atoms[y - 1];
          bool same = true;
          for (size_t k = 0; k < ax.coords.size() && same; k++) {
            if (ax.coords[k].sort == Sort::Base)
              same = ax.coords[k].g.eval(s) == ay.coords[k].g.eval(s);
            else
              same = uf.find(ax.coords[k].elem) == uf.find(ay.coords[k].elem);
          }
          if (!same) continue;
          // guards: the coordinatewise equalities that force agreement
          std::vector<int> guards;
          for (size_t k = 0; k < ax.coords.size(); k++) {
            if (ax.coords[k].sort == Sort::Base) {
              if (ax.coords[k].g == ay.coords[k].g) continue;
              guards.push_back(tab.intEq(ax.coords[k].g, ay.coords[k].g));
            } else {
              if (ax.coords[k].elem == ay.coords[k].elem) continue;
              guards.push_back(tab.elemEq(ax.coords[k].elem, ay.coords[k].elem));
            }
          }
          std::vector<int> one, two;
          for (int g : guards) {
            one.push_back(-g);
            two.push_back(-g);
          }
          one.push_back(-x);
          one.push_back(y);
          two.push_back(x);
          two.push_back(-y);
          tab.rows.push_back(std::move(one));
          tab.rowIds.push_back(0);
          tab.rows.push_back(std::move(two));
          tab.rowIds.push_back(0);
          lemmaDone.insert({x, y});
          added = true;
        }
      }
    }
    return added;
  }
};

RunOut Search::run() {
  nv = static_cast<int>(tab.atoms.size());
  val.assign(nv + 1, 0);
  reason.assign(nv + 1, kDecision);
  watchers.assign(2 * nv, {});
  trail.clear();
  decs.clear();
  qhead = 0;

  // Seed: units propagate, empty rows conflict outright.
  for (size_t r = 0; r < tab.rows.size(); r++) {
    const std::vector<int>& lits = tab.rows[r];
    if (lits.empty()) {
      coreRows = {static_cast<int>(r)};
      return RunOut::Unsat;
    }
    if (lits.size() == 1) {
      int8_t v = value(lits[0]);
      if (v == -1) {
        std::set<int> s = coneOfRow(static_cast<int>(r));
        if (!resolveConflict(std::move(s))) return RunOut::Unsat;
        continue;
      }
      if (v == 0) assign(lits[0], static_cast<int>(r));
      continue;
    }
    watchers[watchIdx(lits[0])].push_back(static_cast<int>(r));
    watchers[watchIdx(lits[1])].push_back(static_cast<int>(r));
  }

  for (;;) {
    int confl = propagate();
    if (confl >= 0) {
      if (!resolveConflict(coneOfRow(confl))) return RunOut::Unsat;
      continue;
    }
    if (auto ts = theoryConflict()) {
      if (!resolveConflict(std::move(*ts))) return RunOut::Unsat;
      continue;
    }
    if (trail.size() == static_cast<size_t>(nv)) {
      if (congruenceLemmas()) return RunOut::Restart;
      assignment = val;
      sample = fullSample();
      return RunOut::Sat;
    }
    int pick = 0;
    for (int v = 1; v <= nv; v++)
      if (val[v] == 0) {
        pick = v;
        break;
      }
    decs.push_back({trail.size(), false, {}});
    assign(-pick, kDecision);  // lean towards small extensions
  }
}

// Model from a satisfying assignment: integer witness, one element per
// equivalence class of the element constants, explicit tuples for the
// assigned-true predicate atoms.
HierarchicModel buildModel(const AtomTable& tab, const ClauseSet& set,
                           const std::vector<int8_t>& val,
                           const std::map<std::string, int64_t>& sample) {
  HierarchicModel m;
  m.baseValues = sample;
  for (const auto& name : set.sig.baseConsts()) m.baseValues.emplace(name, 0);

  UnionFind uf;
  for (size_t i = 0; i < tab.atoms.size(); i++) {
    if (val[i + 1] != 1) continue;
    const AbsAtom& a = tab.atoms[i];
    if (a.kind == AbsAtom::Kind::ElemEq) uf.unite(a.ea, a.eb);
  }
  std::map<std::string, std::vector<std::string>> classes;
  for (const auto& name : set.sig.freeConsts()) classes[uf.find(name)].push_back(name);
  if (classes.empty()) {
    m.freeDomain.push_back("e0");
  } else {
    size_t n = 0;
    for (const auto& [root, members] : classes) {
      std::string elem = "e" + std::to_string(n++);
      m.freeDomain.push_back(elem);
      for (const auto& c : members) m.freeValues.emplace(c, elem);
    }
  }

  for (size_t i = 0; i < tab.atoms.size(); i++) {
    if (val[i + 1] != 1) continue;
    const AbsAtom& a = tab.atoms[i];
    if (a.kind != AbsAtom::Kind::Pred) continue;
    std::vector<MVal> tuple;
    for (const auto& co : a.coords) {
      if (co.sort == Sort::Base)
        tuple.emplace_back(co.g.eval(m.baseValues));
      else
        tuple.emplace_back(m.freeValues.at(co.elem));
    }
    m.extensions[a.pred].insert(std::move(tuple));
  }
  return m;
}

}  // namespace

Verdict solveGround(const ClauseSet& set) {
  AtomTable tab = buildAbstraction(set);
  std::set<std::pair<int, int>> lemmaDone;

  constexpr int kMaxRestarts = 10000;
  for (int round = 0; round < kMaxRestarts; round++) {
    Search search(tab, set, lemmaDone);
    RunOut out = search.run();
    if (out == RunOut::Restart) continue;
    Verdict v;
    if (out == RunOut::Sat) {
      v.sat = true;
      v.model = buildModel(tab, set, search.assignment, search.sample);
      VerifyConfig exact;
      exact.samplesPerVar = 0;
      VerifyReport rep = verifyModel(set, v.model, exact);
      if (!rep.ok())
        throw Error("internal: ground model failed verification on clause " +
                    std::to_string(rep.violations.front().clauseId));
    } else {
      std::set<uint32_t> ids;
      for (int r : search.coreRows)
        if (tab.rowIds[r] != 0) ids.insert(tab.rowIds[r]);
      v.core.assign(ids.begin(), ids.end());
      if (v.core.empty()) throw Error("internal: empty unsatisfiable core");
    }
    return v;
  }
  throw LimitError("congruence lemma restarts exceeded");
}

// ---------------------------------------------------------------------------
// Extrapolation.

HierarchicModel extrapolateModel(const HierarchicModel& instantiated, const ClauseSet& original,
                                 const InstantiationTrace& trace) {
  if (trace.steps.empty()) return instantiated;

  HierarchicModel out;
  out.baseValues = instantiated.baseValues;
  out.extensions = instantiated.extensions;

  // The original set's constants name the kept universe.
  std::set<std::string> keep;
  for (const auto& name : original.sig.freeConsts()) {
    auto it = instantiated.freeValues.find(name);
    if (it == instantiated.freeValues.end())
      throw PreconditionError("model lacks element constant " + name);
    out.freeValues.emplace(name, it->second);
    keep.insert(it->second);
  }
  if (keep.empty()) {
    out.freeDomain = instantiated.freeDomain;
  } else {
    for (const auto& e : instantiated.freeDomain)
      if (keep.count(e)) out.freeDomain.push_back(e);
  }

  auto elemOf = [&](const std::string& constant) {
    auto it = instantiated.freeValues.find(constant);
    if (it == instantiated.freeValues.end())
      throw PreconditionError("trace names unvalued element constant " + constant);
    return it->second;
  };

  for (const auto& [name, d] : original.sig.preds) {
    if (d.theory) continue;
    std::vector<PositionProjection> tables;
    for (size_t i = 0; i < d.argSorts.size(); i++) {
      ArgPos pos{name, static_cast<int>(i) + 1};
      PositionProjection table;
      table.sort = d.argSorts[i];
      if (d.argSorts[i] == Sort::Base) {
        // first projecting step fixes the cells; later steps move the reps
        size_t first = trace.steps.size();
        for (size_t k = 0; k < trace.steps.size(); k++) {
          if (trace.steps[k].positionPoints.count(pos)) {
            first = k;
            break;
          }
        }
        if (first == trace.steps.size()) {
          tables.push_back(std::move(table));  // never projected: stays ground
          continue;
        }
        const TraceStep& s0 = trace.steps[first];
        table.cells =
            makePartition(s0.positionPoints.at(pos), s0.dir, instantiated.baseValues);
        for (auto& cell : table.cells) {
          int64_t v = cell.rep;
          std::string nm = cell.repName;
          for (size_t k = first + 1; k < trace.steps.size(); k++) {
            auto it = trace.steps[k].positionPoints.find(pos);
            if (it == trace.steps[k].positionPoints.end()) continue;
            auto cells =
                makePartition(it->second, trace.steps[k].dir, instantiated.baseValues);
            for (const auto& c : cells)
              if (c.contains(v)) {
                v = c.rep;
                nm = c.repName;
                break;
              }
          }
          cell.rep = v;
          cell.repName = nm;
        }
      } else {
        bool touched = false;
        std::map<std::string, std::string> composed;
        for (const auto& e : instantiated.freeDomain) composed.emplace(e, e);
        for (const auto& step : trace.steps) {
          auto it = step.freePositionPoints.find(pos);
          if (it == step.freePositionPoints.end()) continue;
          touched = true;
          std::set<std::string> pts;
          for (const auto& c : it->second) pts.insert(elemOf(c));
          std::string fb = elemOf(step.freeFallback);
          for (auto& [from, to] : composed) to = pts.count(to) ? to : fb;
        }
        if (touched) table.free.map = std::move(composed);
      }
      tables.push_back(std::move(table));
    }
    out.projections.emplace(name, std::move(tables));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Verification.

namespace {

struct Evaluator {
  const ClauseSet& set;
  const HierarchicModel& m;

  int64_t baseConst(const std::string& name) const {
    auto it = m.baseValues.find(name);
    if (it == m.baseValues.end())
      throw PreconditionError("model does not value integer constant " + name);
    return it->second;
  }

  const std::string& freeConst(const std::string& name) const {
    auto it = m.freeValues.find(name);
    if (it == m.freeValues.end())
      throw PreconditionError("model does not value element constant " + name);
    return it->second;
  }

  int64_t gval(const GTerm& g) const {
    int64_t v = g.offset;
    for (const auto& [name, k] : g.coeffs) v = addCk(v, mulCk(k, baseConst(name)));
    return v;
  }

  int64_t baseArg(const Term& t, const std::map<std::string, MVal>& sigma) const {
    switch (t.k) {
      case Term::K::Int: return t.value;
      case Term::K::Const: return baseConst(t.name);
      case Term::K::Var: return std::get<int64_t>(sigma.at(t.name));
      case Term::K::App:
        if ((t.name == "+" || t.name == "-") && t.args.size() == 2) {
          int64_t l = baseArg(t.args[0], sigma), r = baseArg(t.args[1], sigma);
          return t.name == "+" ? addCk(l, r) : subCk(l, r);
        }
        throw PreconditionError("function application " + t.name + "; flatten first");
    }
    throw Error("unreachable term kind");
  }

  std::string freeArg(const Term& t, const std::map<std::string, MVal>& sigma) const {
    switch (t.k) {
      case Term::K::Const: return freeConst(t.name);
      case Term::K::Var: return std::get<std::string>(sigma.at(t.name));
      default: throw PreconditionError("non-element term at an element position");
    }
  }

  bool constraintHolds(const Constraint& cn, const std::map<std::string, MVal>& sigma) const {
    auto vv = [&](const std::string& v) { return std::get<int64_t>(sigma.at(v)); };
    switch (cn.kind) {
      case Constraint::Kind::GroundGround: return relHolds(cn.rel, gval(cn.g1), gval(cn.g2));
      case Constraint::Kind::VarGround: return relHolds(cn.rel, vv(cn.v1), gval(cn.g2));
      case Constraint::Kind::VarVar: return relHolds(cn.rel, vv(cn.v1), vv(cn.v2));
    }
    throw Error("unreachable constraint kind");
  }

  bool atomHolds(const Atom& a, const std::map<std::string, MVal>& sigma) const {
    if (a.synthetic) return false;
    const PredDecl* d = set.sig.pred(a.pred);
    if (!d) throw PreconditionError("undeclared predicate " + a.pred);
    std::vector<MVal> args;
    for (size_t i = 0; i < a.args.size(); i++) {
      if (d->argSorts[i] == Sort::Base)
        args.emplace_back(baseArg(a.args[i], sigma));
      else
        args.emplace_back(freeArg(a.args[i], sigma));
    }
    return holds(m, a.pred, args);
  }

  bool clauseHolds(const Clause& c, const std::map<std::string, MVal>& sigma) const {
    for (const auto& cn : c.lambda)
      if (!constraintHolds(cn, sigma)) return true;
    for (const auto& a : c.gamma)
      if (!atomHolds(a, sigma)) return true;
    for (const auto& e : c.gammaEq)
      if (freeArg(e.lhs, sigma) != freeArg(e.rhs, sigma)) return true;
    for (const auto& a : c.delta)
      if (atomHolds(a, sigma)) return true;
    for (const auto& e : c.deltaEq)
      if (freeArg(e.lhs, sigma) == freeArg(e.rhs, sigma)) return true;
    return false;
  }
};

std::string renderSigma(const std::map<std::string, MVal>& sigma) {
  std::string s;
  for (const auto& [v, mv] : sigma) {
    if (!s.empty()) s += ", ";
    s += "?" + v + " = " + toString(mv);
  }
  return s;
}

}  // namespace

VerifyReport verifyModel(const ClauseSet& set, const HierarchicModel& m,
                         const VerifyConfig& cfg) {
  rejectTheorySymbols(set);

  Evaluator ev{set, m};
  VerifyReport report;

  // Deterministic integer samples: every partition boundary and model value,
  // each with both neighbours.
  std::set<int64_t> detSamples{0};
  auto addAround = [&](int64_t v) {
    detSamples.insert(v);
    if (v > INT64_MIN) detSamples.insert(v - 1);
    if (v < INT64_MAX) detSamples.insert(v + 1);
  };
  for (const auto& [name, v] : m.baseValues) addAround(v);
  for (const auto& [pred, tables] : m.projections)
    for (const auto& t : tables)
      for (const auto& c : t.cells) {
        if (c.lo) addAround(*c.lo);
        if (c.hi) addAround(*c.hi);
        addAround(c.rep);
      }

  std::mt19937_64 rng(cfg.seed);

  for (const auto& c : set.clauses) {
    auto sorts = set.varSorts(c);
    std::map<std::string, GTerm> pins;
    for (const auto& cn : c.lambda)
      if (cn.kind == Constraint::Kind::VarGround && cn.rel == Rel::Eq)
        pins.emplace(cn.v1, cn.g2);

    std::vector<std::string> freeVars, openBase;
    std::map<std::string, MVal> sigma;
    for (const auto& [v, s] : sorts) {
      if (s == Sort::Free) {
        freeVars.push_back(v);
      } else if (auto it = pins.find(v); it != pins.end()) {
        sigma.emplace(v, ev.gval(it->second));
      } else {
        openBase.push_back(v);
      }
    }

    if (freeVars.empty() && openBase.empty()) {
      report.checkedAssignments++;
      if (!ev.clauseHolds(c, sigma)) report.violations.push_back({c.id, renderSigma(sigma)});
      continue;
    }

    std::vector<int64_t> samples(detSamples.begin(), detSamples.end());
    if (cfg.samplesPerVar > 0) {
      std::uniform_int_distribution<int64_t> dist(cfg.randLo, cfg.randHi);
      for (size_t i = 0; i < openBase.size() * static_cast<size_t>(cfg.samplesPerVar); i++)
        samples.push_back(dist(rng));
      std::sort(samples.begin(), samples.end());
      samples.erase(std::unique(samples.begin(), samples.end()), samples.end());
    }

    double total = 1;
    for (size_t i = 0; i < freeVars.size(); i++) total *= m.freeDomain.size();
    for (size_t i = 0; i < openBase.size(); i++) total *= samples.size();
    if (total > static_cast<double>(cfg.maxAssignments))
      throw LimitError("verification sample space too large for clause " + std::to_string(c.id));

    size_t clauseViolations = 0;
    std::function<void(size_t)> enumerate = [&](size_t idx) {
      if (clauseViolations >= 25) return;
      if (idx < freeVars.size()) {
        for (const auto& e : m.freeDomain) {
          sigma[freeVars[idx]] = e;
          enumerate(idx + 1);
        }
        sigma.erase(freeVars[idx]);
        return;
      }
      size_t b = idx - freeVars.size();
      if (b < openBase.size()) {
        for (int64_t v : samples) {
          sigma[openBase[b]] = v;
          enumerate(idx + 1);
        }
        sigma.erase(openBase[b]);
        return;
      }
      report.checkedAssignments++;
      if (!ev.clauseHolds(c, sigma)) {
        report.violations.push_back({c.id, renderSigma(sigma)});
        clauseViolations++;
      }
    };
    enumerate(0);
  }
  return report;
}

}  // namespace bsr
