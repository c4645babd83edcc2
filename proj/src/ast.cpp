#include "ast.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace bsr {

// ---------------------------------------------------------------------------
// Checked arithmetic

int64_t addCk(int64_t a, int64_t b) {
  int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw OverflowError("integer overflow in addition");
  return r;
}
int64_t subCk(int64_t a, int64_t b) {
  int64_t r;
  if (__builtin_sub_overflow(a, b, &r)) throw OverflowError("integer overflow in subtraction");
  return r;
}
int64_t mulCk(int64_t a, int64_t b) {
  int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("integer overflow in multiplication");
  return r;
}

// ---------------------------------------------------------------------------
// Sorts and relations

const char* sortName(Sort s) { return s == Sort::Base ? "Z" : "S"; }

const char* relName(Rel r) {
  switch (r) {
    case Rel::Lt: return "<";
    case Rel::Le: return "<=";
    case Rel::Eq: return "=";
    case Rel::Ne: return "!=";
    case Rel::Ge: return ">=";
    case Rel::Gt: return ">";
  }
  return "?";
}

Rel relFlip(Rel r) {
  switch (r) {
    case Rel::Lt: return Rel::Gt;
    case Rel::Le: return Rel::Ge;
    case Rel::Ge: return Rel::Le;
    case Rel::Gt: return Rel::Lt;
    default: return r;  // =, != symmetric
  }
}

Rel relNegate(Rel r) {
  switch (r) {
    case Rel::Lt: return Rel::Ge;
    case Rel::Le: return Rel::Gt;
    case Rel::Eq: return Rel::Ne;
    case Rel::Ne: return Rel::Eq;
    case Rel::Ge: return Rel::Lt;
    case Rel::Gt: return Rel::Le;
  }
  return r;
}

bool relHolds(Rel r, int64_t lhs, int64_t rhs) {
  switch (r) {
    case Rel::Lt: return lhs < rhs;
    case Rel::Le: return lhs <= rhs;
    case Rel::Eq: return lhs == rhs;
    case Rel::Ne: return lhs != rhs;
    case Rel::Ge: return lhs >= rhs;
    case Rel::Gt: return lhs > rhs;
  }
  return false;
}

// ---------------------------------------------------------------------------
// GTerm

GTerm GTerm::number(int64_t v) {
  GTerm t;
  t.offset = v;
  return t;
}

GTerm GTerm::constant(const std::string& name) {
  GTerm t;
  t.coeffs[name] = 1;
  return t;
}

std::optional<std::string> GTerm::asConstant() const {
  if (offset != 0 || coeffs.size() != 1) return std::nullopt;
  const auto& [name, k] = *coeffs.begin();
  if (k != 1) return std::nullopt;
  return name;
}

GTerm GTerm::plus(const GTerm& o) const {
  GTerm r = *this;
  r.offset = addCk(r.offset, o.offset);
  for (const auto& [n, k] : o.coeffs) {
    int64_t nk = addCk(r.coeffs.count(n) ? r.coeffs[n] : 0, k);
    if (nk == 0)
      r.coeffs.erase(n);
    else
      r.coeffs[n] = nk;
  }
  return r;
}

GTerm GTerm::minus(const GTerm& o) const { return plus(o.negated()); }

GTerm GTerm::plusConst(int64_t v) const {
  GTerm r = *this;
  r.offset = addCk(r.offset, v);
  return r;
}

GTerm GTerm::negated() const {
  GTerm r;
  r.offset = subCk(0, offset);
  for (const auto& [n, k] : coeffs) r.coeffs[n] = subCk(0, k);
  return r;
}

int64_t GTerm::eval(const std::map<std::string, int64_t>& values) const {
  int64_t acc = offset;
  for (const auto& [n, k] : coeffs) {
    auto it = values.find(n);
    if (it == values.end()) throw PreconditionError("no value for constant " + n);
    acc = addCk(acc, mulCk(k, it->second));
  }
  return acc;
}

int cmp(const GTerm& a, const GTerm& b) {
  if (a.coeffs != b.coeffs) return a.coeffs < b.coeffs ? -1 : 1;
  if (a.offset != b.offset) return a.offset < b.offset ? -1 : 1;
  return 0;
}

std::string toString(const GTerm& t) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [n, k] : t.coeffs) {
    int64_t reps = k < 0 ? -k : k;
    for (int64_t i = 0; i < reps; i++) {
      if (first) {
        if (k < 0) os << "0 - " << n;
        else os << n;
      } else {
        os << (k < 0 ? " - " : " + ") << n;
      }
      first = false;
    }
  }
  if (first) {
    os << t.offset;
  } else if (t.offset > 0) {
    os << " + " << t.offset;
  } else if (t.offset < 0) {
    os << " - " << -t.offset;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Term

Term Term::var(const std::string& n) {
  Term t;
  t.k = K::Var;
  t.name = n;
  return t;
}
Term Term::cnst(const std::string& n) {
  Term t;
  t.k = K::Const;
  t.name = n;
  return t;
}
Term Term::num(int64_t v) {
  Term t;
  t.k = K::Int;
  t.value = v;
  return t;
}
Term Term::app(const std::string& f, std::vector<Term> as) {
  Term t;
  t.k = K::App;
  t.name = f;
  t.args = std::move(as);
  return t;
}

bool Term::operator==(const Term& o) const { return cmp(*this, o) == 0; }

int cmp(const Term& a, const Term& b) {
  if (a.k != b.k) return static_cast<int>(a.k) < static_cast<int>(b.k) ? -1 : 1;
  switch (a.k) {
    case Term::K::Int:
      if (a.value != b.value) return a.value < b.value ? -1 : 1;
      return 0;
    case Term::K::Var:
    case Term::K::Const:
      return a.name.compare(b.name) < 0 ? -1 : (a.name == b.name ? 0 : 1);
    case Term::K::App: {
      if (int c = a.name.compare(b.name); c != 0) return c < 0 ? -1 : 1;
      if (a.args.size() != b.args.size()) return a.args.size() < b.args.size() ? -1 : 1;
      for (size_t i = 0; i < a.args.size(); i++)
        if (int c = cmp(a.args[i], b.args[i]); c != 0) return c;
      return 0;
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Constraint

Constraint Constraint::groundGround(GTerm lhs, Rel r, GTerm rhs) {
  Constraint c;
  c.kind = Kind::GroundGround;
  c.g1 = std::move(lhs);
  c.rel = r;
  c.g2 = std::move(rhs);
  return c;
}

Constraint Constraint::varGround(const std::string& x, Rel r, GTerm rhs) {
  Constraint c;
  c.kind = Kind::VarGround;
  c.v1 = x;
  c.rel = r;
  c.g2 = std::move(rhs);
  return c;
}

Constraint Constraint::varVar(const std::string& x, Rel r, const std::string& y) {
  if (r != Rel::Le && r != Rel::Eq && r != Rel::Ge)
    throw PreconditionError("variable-variable constraints admit only <=, =, >=");
  Constraint c;
  c.kind = Kind::VarVar;
  if (r == Rel::Ge) {  // canonical: <= with swapped sides
    c.v1 = y;
    c.v2 = x;
    c.rel = Rel::Le;
  } else if (r == Rel::Eq && y < x) {
    c.v1 = y;
    c.v2 = x;
    c.rel = Rel::Eq;
  } else {
    c.v1 = x;
    c.v2 = y;
    c.rel = r;
  }
  return c;
}

bool Constraint::mentionsVar(const std::string& x) const {
  switch (kind) {
    case Kind::GroundGround: return false;
    case Kind::VarGround: return v1 == x;
    case Kind::VarVar: return v1 == x || v2 == x;
  }
  return false;
}

int cmp(const Constraint& a, const Constraint& b) {
  if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind) ? -1 : 1;
  if (a.rel != b.rel) return static_cast<int>(a.rel) < static_cast<int>(b.rel) ? -1 : 1;
  if (int c = a.v1.compare(b.v1); c != 0) return c < 0 ? -1 : 1;
  if (int c = a.v2.compare(b.v2); c != 0) return c < 0 ? -1 : 1;
  if (int c = cmp(a.g1, b.g1); c != 0) return c;
  return cmp(a.g2, b.g2);
}

std::string toString(const Constraint& c) {
  std::ostringstream os;
  switch (c.kind) {
    case Constraint::Kind::GroundGround:
      os << toString(c.g1) << " " << relName(c.rel) << " " << toString(c.g2);
      break;
    case Constraint::Kind::VarGround:
      os << "?" << c.v1 << " " << relName(c.rel) << " " << toString(c.g2);
      break;
    case Constraint::Kind::VarVar:
      os << "?" << c.v1 << " " << relName(c.rel) << " ?" << c.v2;
      break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Atom / Equation

bool Atom::operator==(const Atom& o) const { return cmp(*this, o) == 0; }

int cmp(const Atom& a, const Atom& b) {
  if (int c = a.pred.compare(b.pred); c != 0) return c < 0 ? -1 : 1;
  if (a.args.size() != b.args.size()) return a.args.size() < b.args.size() ? -1 : 1;
  for (size_t i = 0; i < a.args.size(); i++)
    if (int c = cmp(a.args[i], b.args[i]); c != 0) return c;
  if (a.synthetic != b.synthetic) return a.synthetic < b.synthetic ? -1 : 1;
  return 0;
}

Equation::Equation(Term l, Term r) {
  if (cmp(l, r) <= 0) {
    lhs = std::move(l);
    rhs = std::move(r);
  } else {
    lhs = std::move(r);
    rhs = std::move(l);
  }
}

bool Equation::operator==(const Equation& o) const { return cmp(*this, o) == 0; }

int cmp(const Equation& a, const Equation& b) {
  if (int c = cmp(a.lhs, b.lhs); c != 0) return c;
  return cmp(a.rhs, b.rhs);
}

// ---------------------------------------------------------------------------
// Clause

void Clause::sortParts() {
  auto lt = [](const auto& a, const auto& b) { return cmp(a, b) < 0; };
  std::sort(lambda.begin(), lambda.end(), lt);
  std::sort(gamma.begin(), gamma.end(), lt);
  std::sort(gammaEq.begin(), gammaEq.end(), lt);
  std::sort(delta.begin(), delta.end(), lt);
  std::sort(deltaEq.begin(), deltaEq.end(), lt);
}

static std::string termText(const Term& t) {
  switch (t.k) {
    case Term::K::Var: return "?" + t.name;
    case Term::K::Const: return t.name;
    case Term::K::Int: return std::to_string(t.value);
    case Term::K::App: {
      // builtin sums stay infix so argument terms reparse under the grammar
      if ((t.name == "+" || t.name == "-") && t.args.size() == 2)
        return termText(t.args[0]) + " " + t.name + " " + termText(t.args[1]);
      std::string s = t.name + "(";
      for (size_t i = 0; i < t.args.size(); i++) {
        if (i) s += ", ";
        s += termText(t.args[i]);
      }
      return s + ")";
    }
  }
  return "?";
}

static std::string atomText(const Atom& a) {
  if (a.args.empty()) return a.pred;
  std::string s = a.pred + "(";
  for (size_t i = 0; i < a.args.size(); i++) {
    if (i) s += ", ";
    s += termText(a.args[i]);
  }
  return s + ")";
}

std::string toString(const Clause& c, bool showSynthetic) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < c.lambda.size(); i++) {
    if (i) os << ", ";
    os << toString(c.lambda[i]);
  }
  os << "] || ";
  bool first = true;
  for (const auto& a : c.gamma) {
    if (!first) os << ", ";
    os << atomText(a);
    first = false;
  }
  for (const auto& e : c.gammaEq) {
    if (!first) os << ", ";
    os << termText(e.lhs) << " ~ " << termText(e.rhs);
    first = false;
  }
  os << " -> ";
  first = true;
  for (const auto& a : c.delta) {
    if (a.synthetic && !showSynthetic) continue;
    if (!first) os << ", ";
    os << atomText(a);
    first = false;
  }
  for (const auto& e : c.deltaEq) {
    if (!first) os << ", ";
    os << termText(e.lhs) << " ~ " << termText(e.rhs);
    first = false;
  }
  if (first) os << "false";
  return os.str();
}

// ---------------------------------------------------------------------------
// Signature

bool Signature::knows(const std::string& name) const {
  return preds.count(name) || consts.count(name) || funs.count(name);
}
const PredDecl* Signature::pred(const std::string& n) const {
  auto it = preds.find(n);
  return it == preds.end() ? nullptr : &it->second;
}
const ConstDecl* Signature::cnst(const std::string& n) const {
  auto it = consts.find(n);
  return it == consts.end() ? nullptr : &it->second;
}
const FunDecl* Signature::fun(const std::string& n) const {
  auto it = funs.find(n);
  return it == funs.end() ? nullptr : &it->second;
}

void Signature::declarePred(PredDecl d) {
  if (knows(d.name)) throw SortError("symbol already declared: " + d.name);
  preds.emplace(d.name, std::move(d));
}
void Signature::declareConst(ConstDecl d) {
  if (knows(d.name)) throw SortError("symbol already declared: " + d.name);
  consts.emplace(d.name, std::move(d));
}
void Signature::declareFun(FunDecl d) {
  if (knows(d.name)) throw SortError("symbol already declared: " + d.name);
  funs.emplace(d.name, std::move(d));
}

std::vector<std::string> Signature::baseConsts() const {
  std::vector<std::string> out;
  for (const auto& [n, d] : consts)
    if (d.sort == Sort::Base) out.push_back(n);
  return out;
}

std::vector<std::string> Signature::freeConsts() const {
  std::vector<std::string> out;
  for (const auto& [n, d] : consts)
    if (d.sort == Sort::Free) out.push_back(n);
  return out;
}

std::string freshName(const std::string& prefix, const Signature& sig) {
  // Counter per prefix: resumes past the largest numeric suffix already
  // declared, so repeated calls hand out increasing names.
  int64_t next = 0;
  auto consider = [&](const std::string& n) {
    if (n.size() < prefix.size() || n.compare(0, prefix.size(), prefix) != 0) return;
    std::string suf = n.substr(prefix.size());
    if (suf.empty()) return;  // the bare prefix itself blocks nothing numeric
    for (char ch : suf)
      if (!std::isdigit(static_cast<unsigned char>(ch))) return;
    if (suf.size() > 18) return;
    next = std::max(next, static_cast<int64_t>(std::stoll(suf)) + 1);
  };
  for (const auto& [n, d] : sig.preds) consider(n);
  for (const auto& [n, d] : sig.consts) consider(n);
  for (const auto& [n, d] : sig.funs) consider(n);
  while (sig.knows(prefix + std::to_string(next))) next++;
  return prefix + std::to_string(next);
}

// ---------------------------------------------------------------------------
// ClauseSet

uint32_t ClauseSet::addClause(Clause c) {
  c.id = nextClauseId++;
  c.sortParts();
  clauses.push_back(std::move(c));
  return clauses.back().id;
}

const Clause* ClauseSet::byId(uint32_t id) const {
  for (const auto& c : clauses)
    if (c.id == id) return &c;
  return nullptr;
}
Clause* ClauseSet::byId(uint32_t id) {
  for (auto& c : clauses)
    if (c.id == id) return &c;
  return nullptr;
}

namespace {

void noteSort(std::map<std::string, Sort>& m, const std::string& v, Sort s) {
  auto it = m.find(v);
  if (it == m.end()) {
    m.emplace(v, s);
  } else if (it->second != s) {
    throw SortError("variable ?" + v + " used at both integer and element positions");
  }
}

void collectTermSorts(const Term& t, Sort expected, const Signature& sig,
                      std::map<std::string, Sort>& m) {
  switch (t.k) {
    case Term::K::Var:
      noteSort(m, t.name, expected);
      break;
    case Term::K::Const: {
      const ConstDecl* d = sig.cnst(t.name);
      if (!d) throw SortError("undeclared constant " + t.name);
      if (d->sort != expected)
        throw SortError("constant " + t.name + " used at a " +
                        std::string(sortName(expected)) + " position");
      break;
    }
    case Term::K::Int:
      if (expected != Sort::Base) throw SortError("numeral used at an element position");
      break;
    case Term::K::App: {
      if (t.name == "+" || t.name == "-") {  // ground arithmetic, pre-purification
        if (expected != Sort::Base) throw SortError("arithmetic used at an element position");
        for (const auto& a : t.args) collectTermSorts(a, Sort::Base, sig, m);
        break;
      }
      const FunDecl* f = sig.fun(t.name);
      if (!f) throw SortError("undeclared function " + t.name);
      if (f->result != expected)
        throw SortError("function " + t.name + " used at a " +
                        std::string(sortName(expected)) + " position");
      if (f->argSorts.size() != t.args.size())
        throw SortError("function " + t.name + " arity mismatch");
      for (size_t i = 0; i < t.args.size(); i++)
        collectTermSorts(t.args[i], f->argSorts[i], sig, m);
      break;
    }
  }
}

}  // namespace

std::map<std::string, Sort> ClauseSet::varSorts(const Clause& c) const {
  std::map<std::string, Sort> m;
  for (const auto& cn : c.lambda) {
    if (cn.kind == Constraint::Kind::VarGround) noteSort(m, cn.v1, Sort::Base);
    if (cn.kind == Constraint::Kind::VarVar) {
      noteSort(m, cn.v1, Sort::Base);
      noteSort(m, cn.v2, Sort::Base);
    }
  }
  auto doAtom = [&](const Atom& a) {
    const PredDecl* d = sig.pred(a.pred);
    if (!d) throw SortError("undeclared predicate " + a.pred);
    if (d->argSorts.size() != a.args.size())
      throw SortError("predicate " + a.pred + " arity mismatch");
    for (size_t i = 0; i < a.args.size(); i++)
      collectTermSorts(a.args[i], d->argSorts[i], sig, m);
  };
  for (const auto& a : c.gamma) doAtom(a);
  for (const auto& a : c.delta) doAtom(a);
  for (const auto& e : c.gammaEq) {
    collectTermSorts(e.lhs, Sort::Free, sig, m);
    collectTermSorts(e.rhs, Sort::Free, sig, m);
  }
  for (const auto& e : c.deltaEq) {
    collectTermSorts(e.lhs, Sort::Free, sig, m);
    collectTermSorts(e.rhs, Sort::Free, sig, m);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Substitution

namespace {

// A binding target is a numeral or a declared constant.
GTerm pointGTerm(const std::string& point) {
  if (!point.empty() && (std::isdigit(static_cast<unsigned char>(point[0])) ||
                         (point[0] == '-' && point.size() > 1)))
    return GTerm::number(std::stoll(point));
  return GTerm::constant(point);
}

Term pointTerm(const std::string& point) {
  if (!point.empty() && (std::isdigit(static_cast<unsigned char>(point[0])) ||
                         (point[0] == '-' && point.size() > 1)))
    return Term::num(std::stoll(point));
  return Term::cnst(point);
}

Term substTerm(const Term& t, const std::string& var, const Term& to) {
  switch (t.k) {
    case Term::K::Var: return t.name == var ? to : t;
    case Term::K::App: {
      Term r = t;
      for (auto& a : r.args) a = substTerm(a, var, to);
      return r;
    }
    default: return t;
  }
}

// Rewrites one constraint under var -> ground term, keeping canonical shape.
Constraint substConstraintGround(const Constraint& cn, const std::string& var, const GTerm& g) {
  switch (cn.kind) {
    case Constraint::Kind::GroundGround: return cn;
    case Constraint::Kind::VarGround:
      if (cn.v1 == var) return Constraint::groundGround(g, cn.rel, cn.g2);
      return cn;
    case Constraint::Kind::VarVar: {
      bool l = cn.v1 == var, r = cn.v2 == var;
      if (l && r) return Constraint::groundGround(g, cn.rel, g);
      if (l) return Constraint::varGround(cn.v2, relFlip(cn.rel), g);
      if (r) return Constraint::varGround(cn.v1, cn.rel, g);
      return cn;
    }
  }
  return cn;
}

}  // namespace

Clause applySubstitution(const Clause& c, const Binding& b, const ClauseSet& set) {
  auto sorts = set.varSorts(c);
  Clause out = c;
  for (const auto& [var, point] : b) {
    auto it = sorts.find(var);
    if (it == sorts.end()) continue;  // variable absent: binding is a no-op
    if (!point.empty() && point[0] == '?') {
      // Variable target: rewrite inside the matching part and append the
      // defining pin for integer variables.
      std::string to = point.substr(1);
      if (it->second == Sort::Base) {
        for (auto& cons : out.lambda) {
          if (cons.kind == Constraint::Kind::VarGround && cons.v1 == var)
            cons = Constraint::varGround(to, cons.rel, cons.g2);
          else if (cons.kind == Constraint::Kind::VarVar && cons.mentionsVar(var))
            cons = Constraint::varVar(cons.v1 == var ? to : cons.v1, cons.rel,
                                      cons.v2 == var ? to : cons.v2);
        }
        out.lambda.push_back(Constraint::varVar(var, Rel::Eq, to));
      } else {
        Term tv = Term::var(to);
        for (auto& a : out.gamma)
          for (auto& t : a.args) t = substTerm(t, var, tv);
        for (auto& a : out.delta)
          for (auto& t : a.args) t = substTerm(t, var, tv);
        for (auto& e : out.gammaEq)
          e = Equation(substTerm(e.lhs, var, tv), substTerm(e.rhs, var, tv));
        for (auto& e : out.deltaEq)
          e = Equation(substTerm(e.lhs, var, tv), substTerm(e.rhs, var, tv));
      }
      continue;
    }
    if (it->second == Sort::Base) {
      GTerm g = pointGTerm(point);
      if (auto cn = g.asConstant()) {
        const ConstDecl* d = set.sig.cnst(*cn);
        if (!d || d->sort != Sort::Base)
          throw PreconditionError("binding target is not an integer constant: " + point);
      }
      for (auto& cons : out.lambda) cons = substConstraintGround(cons, var, g);
      out.lambda.push_back(Constraint::varGround(var, Rel::Eq, g));
    } else {
      Term to = pointTerm(point);
      if (to.k == Term::K::Int)
        throw PreconditionError("numeral bound to an element variable ?" + var);
      const ConstDecl* d = set.sig.cnst(to.name);
      if (!d || d->sort != Sort::Free)
        throw PreconditionError("binding target is not an element constant: " + point);
      for (auto& a : out.gamma)
        for (auto& t : a.args) t = substTerm(t, var, to);
      for (auto& a : out.delta)
        for (auto& t : a.args) t = substTerm(t, var, to);
      for (auto& e : out.gammaEq) e = Equation(substTerm(e.lhs, var, to), substTerm(e.rhs, var, to));
      for (auto& e : out.deltaEq) e = Equation(substTerm(e.lhs, var, to), substTerm(e.rhs, var, to));
    }
  }
  out.sortParts();
  return out;
}

Clause substituteEverywhere(const Clause& c, const std::string& var, const Term& to,
                            const ClauseSet& set) {
  Clause out = c;
  if (to.k == Term::K::Var) {
    for (auto& cons : out.lambda) {
      if (cons.kind == Constraint::Kind::VarGround && cons.v1 == var) {
        cons = Constraint::varGround(to.name, cons.rel, cons.g2);
      } else if (cons.kind == Constraint::Kind::VarVar) {
        std::string a = cons.v1 == var ? to.name : cons.v1;
        std::string bn = cons.v2 == var ? to.name : cons.v2;
        if (a != cons.v1 || bn != cons.v2) cons = Constraint::varVar(a, cons.rel, bn);
      }
    }
  } else {
    GTerm g = to.k == Term::K::Int ? GTerm::number(to.value) : GTerm::constant(to.name);
    bool base = to.k == Term::K::Int ||
                (set.sig.cnst(to.name) && set.sig.cnst(to.name)->sort == Sort::Base);
    if (base)
      for (auto& cons : out.lambda) cons = substConstraintGround(cons, var, g);
  }
  for (auto& a : out.gamma)
    for (auto& t : a.args) t = substTerm(t, var, to);
  for (auto& a : out.delta)
    for (auto& t : a.args) t = substTerm(t, var, to);
  for (auto& e : out.gammaEq) e = Equation(substTerm(e.lhs, var, to), substTerm(e.rhs, var, to));
  for (auto& e : out.deltaEq) e = Equation(substTerm(e.lhs, var, to), substTerm(e.rhs, var, to));
  out.sortParts();
  return out;
}

Clause renameVars(const Clause& c, const std::string& suffix) {
  Clause out = c;
  auto ren = [&](const std::string& v) { return v + suffix; };
  for (auto& cons : out.lambda) {
    if (!cons.v1.empty()) cons.v1 = ren(cons.v1);
    if (!cons.v2.empty()) cons.v2 = ren(cons.v2);
  }
  struct Walk {
    const decltype(ren)& f;
    void term(Term& t) const {
      if (t.k == Term::K::Var) t.name = f(t.name);
      for (auto& a : t.args) term(a);
    }
  } w{ren};
  for (auto& a : out.gamma)
    for (auto& t : a.args) w.term(t);
  for (auto& a : out.delta)
    for (auto& t : a.args) w.term(t);
  for (auto& e : out.gammaEq) {
    Term l = e.lhs, r = e.rhs;
    w.term(l);
    w.term(r);
    e = Equation(l, r);
  }
  for (auto& e : out.deltaEq) {
    Term l = e.lhs, r = e.rhs;
    w.term(l);
    w.term(r);
    e = Equation(l, r);
  }
  out.sortParts();
  return out;
}

std::vector<std::string> clauseVars(const Clause& c) {
  std::vector<std::string> order;
  std::set<std::string> seen;
  auto note = [&](const std::string& v) {
    if (seen.insert(v).second) order.push_back(v);
  };
  auto noteTerm = [&](const Term& t, auto&& self) -> void {
    if (t.k == Term::K::Var) note(t.name);
    for (const auto& a : t.args) self(a, self);
  };
  for (const auto& cons : c.lambda) {
    if (cons.kind == Constraint::Kind::VarGround) note(cons.v1);
    if (cons.kind == Constraint::Kind::VarVar) {
      note(cons.v1);
      note(cons.v2);
    }
  }
  for (const auto& a : c.gamma)
    for (const auto& t : a.args) noteTerm(t, noteTerm);
  for (const auto& e : c.gammaEq) {
    noteTerm(e.lhs, noteTerm);
    noteTerm(e.rhs, noteTerm);
  }
  for (const auto& a : c.delta)
    for (const auto& t : a.args) noteTerm(t, noteTerm);
  for (const auto& e : c.deltaEq) {
    noteTerm(e.lhs, noteTerm);
    noteTerm(e.rhs, noteTerm);
  }
  return order;
}

bool occursInFreePart(const Clause& c, const std::string& var) {
  auto inTerm = [&](const Term& t, auto&& self) -> bool {
    if (t.k == Term::K::Var && t.name == var) return true;
    for (const auto& a : t.args)
      if (self(a, self)) return true;
    return false;
  };
  for (const auto& a : c.gamma)
    for (const auto& t : a.args)
      if (inTerm(t, inTerm)) return true;
  for (const auto& a : c.delta)
    for (const auto& t : a.args)
      if (inTerm(t, inTerm)) return true;
  for (const auto& e : c.gammaEq)
    if (inTerm(e.lhs, inTerm) || inTerm(e.rhs, inTerm)) return true;
  for (const auto& e : c.deltaEq)
    if (inTerm(e.lhs, inTerm) || inTerm(e.rhs, inTerm)) return true;
  return false;
}

std::string canonicalKey(const Clause& c) {
  // Rename variables by first occurrence, re-sort, repeat once: sibling
  // instances that differ only in variable naming collapse to one key.
  Clause work = c;
  for (int pass = 0; pass < 2; pass++) {
    auto vars = clauseVars(work);
    Clause renamed = work;
    for (size_t i = 0; i < vars.size(); i++)
      renamed = substituteEverywhere(renamed, vars[i], Term::var("#" + std::to_string(i)),
                                     ClauseSet{});
    // strip the marker so a second pass renames cleanly
    for (size_t i = 0; i < vars.size(); i++)
      renamed = substituteEverywhere(renamed, "#" + std::to_string(i),
                                     Term::var("v" + std::to_string(i)), ClauseSet{});
    renamed.sortParts();
    work = renamed;
  }
  return toString(work, true);
}

}  // namespace bsr
