#include "textio.hpp"

#include <fstream>
#include <functional>
#include <sstream>

namespace bsr {

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok : uint8_t {
  Ident, Var, Int,
  LBrack, RBrack, LParen, RParen, Comma, Semi, Colon, Tilde,
  PipePipe, Arrow, Plus, Minus,
  Lt, Le, Eq, Ne, Ge, Gt,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  int64_t value = 0;
  int line = 1, col = 1;
};

struct Lexer {
  const std::string& src;
  size_t pos = 0;
  int line = 1, col = 1;

  explicit Lexer(const std::string& s) : src(s) {}

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, line, col); }

  char peek() const { return pos < src.size() ? src[pos] : '\0'; }
  char get() {
    char c = src[pos++];
    if (c == '\n') {
      line++;
      col = 1;
    } else {
      col++;
    }
    return c;
  }

  Token next() {
    for (;;) {
      while (pos < src.size() && std::isspace(static_cast<unsigned char>(peek()))) get();
      if (peek() == '#') {
        while (pos < src.size() && peek() != '\n') get();
        continue;
      }
      break;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (pos >= src.size()) {
      t.kind = Tok::End;
      return t;
    }
    char c = get();
    auto two = [&](char nxt) {
      if (peek() == nxt) {
        get();
        return true;
      }
      return false;
    };
    switch (c) {
      case '[': t.kind = Tok::LBrack; return t;
      case ']': t.kind = Tok::RBrack; return t;
      case '(': t.kind = Tok::LParen; return t;
      case ')': t.kind = Tok::RParen; return t;
      case ',': t.kind = Tok::Comma; return t;
      case ';': t.kind = Tok::Semi; return t;
      case ':': t.kind = Tok::Colon; return t;
      case '~': t.kind = Tok::Tilde; return t;
      case '+': t.kind = Tok::Plus; return t;
      case '-':
        if (two('>')) {
          t.kind = Tok::Arrow;
          return t;
        }
        t.kind = Tok::Minus;
        return t;
      case '|':
        if (two('|')) {
          t.kind = Tok::PipePipe;
          return t;
        }
        fail("single '|' (expected '||')");
      case '<':
        t.kind = two('=') ? Tok::Le : Tok::Lt;
        return t;
      case '>':
        t.kind = two('=') ? Tok::Ge : Tok::Gt;
        return t;
      case '=': t.kind = Tok::Eq; return t;
      case '!':
        if (two('=')) {
          t.kind = Tok::Ne;
          return t;
        }
        fail("'!' without '='");
      case '?': {
        if (!std::isalpha(static_cast<unsigned char>(peek())) && peek() != '_')
          fail("'?' must start a variable name");
        std::string name;
        while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')
          name += get();
        t.kind = Tok::Var;
        t.text = name;
        return t;
      }
      default:
        if (std::isdigit(static_cast<unsigned char>(c))) {
          std::string num(1, c);
          while (std::isdigit(static_cast<unsigned char>(peek()))) num += get();
          t.kind = Tok::Int;
          try {
            t.value = std::stoll(num);
          } catch (const std::out_of_range&) {
            fail("integer literal out of range");
          }
          return t;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '@') {
          std::string name(1, c);
          while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')
            name += get();
          if (c == '@' && name != kMinf && name != kPinf)
            fail("unknown reserved name " + name);
          t.kind = Tok::Ident;
          t.text = name;
          return t;
        }
        fail(std::string("unexpected character '") + c + "'");
    }
  }
};

// ---------------------------------------------------------------------------
// Parser

struct Parser {
  Lexer lex;
  Token tok;
  ParseOptions opts;
  ClauseSet set;

  Parser(const std::string& text, const ParseOptions& o) : lex(text), opts(o) {
    tok = lex.next();
  }

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, tok.line, tok.col); }

  void advance() { tok = lex.next(); }

  bool at(Tok k) const { return tok.kind == k; }
  bool atIdent(const char* kw) const { return tok.kind == Tok::Ident && tok.text == kw; }

  void expect(Tok k, const char* what) {
    if (!at(k)) fail(std::string("expected ") + what);
    advance();
  }

  std::string expectIdent(const char* what) {
    if (!at(Tok::Ident)) fail(std::string("expected ") + what);
    std::string s = tok.text;
    advance();
    return s;
  }

  void touchReserved(const std::string& name) {
    if ((name == kMinf || name == kPinf) && !set.sig.knows(name))
      set.sig.declareConst({name, Sort::Base});
  }

  ClauseSet run() {
    while (!at(Tok::End)) {
      if (atIdent("pred")) {
        advance();
        declPred(false);
      } else if (atIdent("const")) {
        advance();
        declConst();
      } else if (atIdent("fun")) {
        advance();
        declFun(false);
      } else if (atIdent("theory")) {
        advance();
        if (atIdent("pred")) {
          advance();
          declPred(true);
        } else if (atIdent("fun")) {
          advance();
          declFun(true);
        } else {
          fail("expected 'pred' or 'fun' after 'theory'");
        }
      } else if (atIdent("mark")) {
        advance();
        std::string name = expectIdent("predicate name");
        auto it = set.sig.preds.find(name);
        if (it == set.sig.preds.end()) fail("mark of undeclared predicate " + name);
        it->second.marked = true;
        expect(Tok::Semi, "';'");
      } else if (atIdent("clause")) {
        advance();
        parseClause();
      } else {
        fail("expected a declaration or clause");
      }
    }
    return std::move(set);
  }

  Sort parseSort() {
    if (atIdent("Z")) {
      advance();
      return Sort::Base;
    }
    if (atIdent("S")) {
      advance();
      return Sort::Free;
    }
    fail("expected sort 'Z' or 'S'");
  }

  void declPred(bool theory) {
    std::string name = expectIdent("predicate name");
    PredDecl d;
    d.name = name;
    d.theory = theory;
    if (at(Tok::Colon)) {
      advance();
      while (atIdent("Z") || atIdent("S")) d.argSorts.push_back(parseSort());
      if (d.argSorts.empty()) fail("expected sorts after ':'");
    }
    try {
      set.sig.declarePred(std::move(d));
    } catch (const SortError& e) {
      fail(e.what());
    }
    expect(Tok::Semi, "';'");
  }

  void declConst() {
    std::string name = expectIdent("constant name");
    expect(Tok::Colon, "':'");
    Sort s = parseSort();
    try {
      set.sig.declareConst({name, s});
    } catch (const SortError& e) {
      fail(e.what());
    }
    expect(Tok::Semi, "';'");
  }

  void declFun(bool theory) {
    std::string name = expectIdent("function name");
    expect(Tok::Colon, "':'");
    FunDecl d;
    d.name = name;
    d.theory = theory;
    d.argSorts.push_back(parseSort());
    while (atIdent("Z") || atIdent("S")) d.argSorts.push_back(parseSort());
    expect(Tok::Arrow, "'->'");
    d.result = parseSort();
    try {
      set.sig.declareFun(std::move(d));
    } catch (const SortError& e) {
      fail(e.what());
    }
    expect(Tok::Semi, "';'");
  }

  // Term for atom arguments and equation sides; function applications allowed.
  Term parseArgTerm() {
    auto primary = [&]() -> Term {
      if (at(Tok::Int)) {
        int64_t v = tok.value;
        advance();
        return Term::num(v);
      }
      if (at(Tok::Minus)) {
        advance();
        if (!at(Tok::Int)) fail("expected numeral after unary '-'");
        int64_t v = tok.value;
        advance();
        return Term::num(-v);
      }
      if (at(Tok::Var)) {
        std::string v = tok.text;
        advance();
        return Term::var(v);
      }
      if (at(Tok::Ident)) {
        std::string name = tok.text;
        advance();
        touchReserved(name);
        if (at(Tok::LParen)) {
          advance();
          std::vector<Term> args;
          if (!at(Tok::RParen)) {
            args.push_back(parseArgTerm());
            while (at(Tok::Comma)) {
              advance();
              args.push_back(parseArgTerm());
            }
          }
          expect(Tok::RParen, "')'");
          return Term::app(name, std::move(args));
        }
        return Term::cnst(name);
      }
      fail("expected a term");
    };
    Term t = primary();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      bool plus = at(Tok::Plus);
      advance();
      Term rhs = primary();
      t = Term::app(plus ? "+" : "-", {std::move(t), std::move(rhs)});
    }
    return t;
  }

  // Constraint side: a lone variable or a ground linear term.
  struct CSide {
    bool isVar = false;
    std::string var;
    GTerm g;
  };

  CSide parseConstraintSide() {
    Token start = tok;
    Term t = parseArgTerm();
    if (t.k == Term::K::Var) return {true, t.name, {}};
    CSide s;
    s.isVar = false;
    std::function<GTerm(const Term&)> fold = [&](const Term& u) -> GTerm {
      switch (u.k) {
        case Term::K::Int: return GTerm::number(u.value);
        case Term::K::Const: return GTerm::constant(u.name);
        case Term::K::App:
          if (u.name == "+" && u.args.size() == 2) return fold(u.args[0]).plus(fold(u.args[1]));
          if (u.name == "-" && u.args.size() == 2) return fold(u.args[0]).minus(fold(u.args[1]));
          throw ParseError("function application in a constraint", start.line, start.col);
        case Term::K::Var:
          throw ParseError("arithmetic over variables in a constraint", start.line, start.col);
      }
      throw ParseError("bad constraint term", start.line, start.col);
    };
    s.g = fold(t);
    return s;
  }

  Rel parseRel() {
    switch (tok.kind) {
      case Tok::Lt: advance(); return Rel::Lt;
      case Tok::Le: advance(); return Rel::Le;
      case Tok::Eq: advance(); return Rel::Eq;
      case Tok::Ne: advance(); return Rel::Ne;
      case Tok::Ge: advance(); return Rel::Ge;
      case Tok::Gt: advance(); return Rel::Gt;
      default: fail("expected a relation");
    }
  }

  Constraint parseConstraint() {
    Token start = tok;
    CSide l = parseConstraintSide();
    Rel r = parseRel();
    CSide rhs = parseConstraintSide();
    try {
      if (l.isVar && rhs.isVar) return Constraint::varVar(l.var, r, rhs.var);
      if (l.isVar) return Constraint::varGround(l.var, r, rhs.g);
      if (rhs.isVar) return Constraint::varGround(rhs.var, relFlip(r), l.g);
      return Constraint::groundGround(l.g, r, rhs.g);
    } catch (const PreconditionError& e) {
      throw ParseError(e.what(), start.line, start.col);
    }
  }

  // Atom or equation.
  void parseAtomOrEq(std::vector<Atom>& atoms, std::vector<Equation>& eqs) {
    Token start = tok;
    Term t = parseArgTerm();
    if (at(Tok::Tilde)) {
      advance();
      Term rhs = parseArgTerm();
      eqs.emplace_back(std::move(t), std::move(rhs));
      return;
    }
    if (t.k == Term::K::App) {
      if (set.sig.pred(t.name)) {
        atoms.push_back(Atom{t.name, std::move(t.args), false});
        return;
      }
      throw ParseError("undeclared predicate " + t.name, start.line, start.col);
    }
    if (t.k == Term::K::Const && set.sig.pred(t.name)) {
      atoms.push_back(Atom{t.name, {}, false});
      return;
    }
    throw ParseError("expected an atom or equation", start.line, start.col);
  }

  void parseClause() {
    Token start = tok;
    Clause c;
    expect(Tok::LBrack, "'['");
    if (!at(Tok::RBrack)) {
      c.lambda.push_back(parseConstraint());
      while (at(Tok::Comma)) {
        advance();
        c.lambda.push_back(parseConstraint());
      }
    }
    expect(Tok::RBrack, "']'");
    expect(Tok::PipePipe, "'||'");
    if (!at(Tok::Arrow)) {
      parseAtomOrEq(c.gamma, c.gammaEq);
      while (at(Tok::Comma)) {
        advance();
        parseAtomOrEq(c.gamma, c.gammaEq);
      }
    }
    expect(Tok::Arrow, "'->'");
    if (atIdent("false")) {
      advance();
    } else {
      parseAtomOrEq(c.delta, c.deltaEq);
      while (at(Tok::Comma)) {
        advance();
        parseAtomOrEq(c.delta, c.deltaEq);
      }
    }
    expect(Tok::Semi, "';'");

    set.addClause(std::move(c));
    // validate sorts and arities now so errors carry a location
    try {
      auto sorts = set.varSorts(set.clauses.back());
      if (opts.strict) {
        for (const auto& a : set.clauses.back().gamma) checkStrictArgs(a);
        for (const auto& a : set.clauses.back().delta) checkStrictArgs(a);
      }
      (void)sorts;
    } catch (const Error& e) {
      throw ParseError(e.what(), start.line, start.col);
    }
  }

  void checkStrictArgs(const Atom& a) {
    const PredDecl* d = set.sig.pred(a.pred);
    if (!d || d->theory) return;
    for (size_t i = 0; i < a.args.size(); i++) {
      if (d->argSorts[i] == Sort::Base && a.args[i].k != Term::K::Var &&
          a.args[i].k != Term::K::App)
        throw SortError("ground integer argument in strict mode (use a variable)");
    }
  }
};

}  // namespace

ClauseSet parse(const std::string& text, const ParseOptions& opts) {
  Parser p(text, opts);
  return p.run();
}

ClauseSet parseFile(const std::string& path, const ParseOptions& opts) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), opts);
}

// ---------------------------------------------------------------------------
// Printer

std::string print(const ClauseSet& set) {
  std::ostringstream os;
  os << "# bsrsli problem\n";
  for (const auto& [n, d] : set.sig.consts) {
    if (n == kMinf || n == kPinf) continue;  // implicitly declared
    os << "const " << n << " : " << sortName(d.sort) << ";\n";
  }
  for (const auto& [n, d] : set.sig.preds) {
    if (d.synthetic) continue;
    os << (d.theory ? "theory pred " : "pred ") << n;
    if (!d.argSorts.empty()) {
      os << " :";
      for (Sort s : d.argSorts) os << " " << sortName(s);
    }
    os << ";\n";
  }
  for (const auto& [n, d] : set.sig.funs) {
    os << (d.theory ? "theory fun " : "fun ") << n << " :";
    for (Sort s : d.argSorts) os << " " << sortName(s);
    os << " -> " << sortName(d.result) << ";\n";
  }
  for (const auto& [n, d] : set.sig.preds)
    if (d.marked) os << "mark " << n << ";\n";
  for (const auto& c : set.clauses) os << "clause " << toString(c, false) << ";\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Purification

namespace {

GTerm foldGroundArg(const Term& t) {
  switch (t.k) {
    case Term::K::Int: return GTerm::number(t.value);
    case Term::K::Const: return GTerm::constant(t.name);
    case Term::K::App:
      if (t.name == "+" && t.args.size() == 2)
        return foldGroundArg(t.args[0]).plus(foldGroundArg(t.args[1]));
      if (t.name == "-" && t.args.size() == 2)
        return foldGroundArg(t.args[0]).minus(foldGroundArg(t.args[1]));
      throw PreconditionError("non-arithmetic application at an integer position: " + t.name);
    case Term::K::Var: throw PreconditionError("variable inside arithmetic argument");
  }
  throw PreconditionError("bad argument term");
}

}  // namespace

ClauseSet purify(const ClauseSet& set) {
  ClauseSet out = set;
  for (auto& c : out.clauses) {
    std::set<std::string> used;
    for (const auto& v : clauseVars(c)) used.insert(v);
    int counter = 0;
    auto freshVar = [&]() {
      for (;;) {
        std::string name = "x" + std::to_string(counter++);
        if (used.insert(name).second) return name;
      }
    };
    auto fixAtom = [&](Atom& a) {
      const PredDecl* d = out.sig.pred(a.pred);
      if (!d || d->theory) return;
      for (size_t i = 0; i < a.args.size(); i++) {
        if (d->argSorts[i] != Sort::Base) continue;
        if (a.args[i].k == Term::K::Var) continue;
        GTerm g = foldGroundArg(a.args[i]);
        std::string v = freshVar();
        c.lambda.push_back(Constraint::varGround(v, Rel::Eq, g));
        a.args[i] = Term::var(v);
      }
    };
    for (auto& a : c.gamma) fixAtom(a);
    for (auto& a : c.delta) fixAtom(a);
    c.sortParts();
  }
  return out;
}

// ---------------------------------------------------------------------------
// SMT-LIB2 export

namespace {

std::string smtSym(const std::string& name) {
  bool plain = !name.empty() && !std::isdigit(static_cast<unsigned char>(name[0]));
  for (char c : name)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '@' || c == '.' ||
          c == '-'))
      plain = false;
  if (plain) return name;
  return "|" + name + "|";
}

std::string smtInt(int64_t v) {
  if (v < 0) return "(- " + std::to_string(-v) + ")";
  return std::to_string(v);
}

std::string smtGTerm(const GTerm& g) {
  std::vector<std::string> parts;
  for (const auto& [n, k] : g.coeffs) {
    if (k == 1)
      parts.push_back(smtSym(n));
    else
      parts.push_back("(* " + smtInt(k) + " " + smtSym(n) + ")");
  }
  if (g.offset != 0 || parts.empty()) parts.push_back(smtInt(g.offset));
  if (parts.size() == 1) return parts[0];
  std::string s = "(+";
  for (const auto& p : parts) s += " " + p;
  return s + ")";
}

std::string smtRelExpr(Rel r, const std::string& l, const std::string& rhs) {
  switch (r) {
    case Rel::Lt: return "(< " + l + " " + rhs + ")";
    case Rel::Le: return "(<= " + l + " " + rhs + ")";
    case Rel::Eq: return "(= " + l + " " + rhs + ")";
    case Rel::Ne: return "(not (= " + l + " " + rhs + "))";
    case Rel::Ge: return "(>= " + l + " " + rhs + ")";
    case Rel::Gt: return "(> " + l + " " + rhs + ")";
  }
  return "";
}

struct SmtClauseCtx {
  const ClauseSet& set;
  // integer variables substituted by their pin when the clause is ground
  std::map<std::string, GTerm> pins;
  bool ground = false;

  std::string term(const Term& t) const {
    switch (t.k) {
      case Term::K::Var: {
        if (ground) {
          auto it = pins.find(t.name);
          if (it != pins.end()) return smtGTerm(it->second);
        }
        return smtSym("v_" + t.name);
      }
      case Term::K::Const: return smtSym(t.name);
      case Term::K::Int: return smtInt(t.value);
      case Term::K::App: {
        if ((t.name == "+" || t.name == "-") && t.args.size() == 2)
          return "(" + t.name + " " + term(t.args[0]) + " " + term(t.args[1]) + ")";
        std::string s = "(" + smtSym(t.name);
        for (const auto& a : t.args) s += " " + term(a);
        return s + ")";
      }
    }
    return "";
  }

  std::string cside(bool isVar, const std::string& v, const GTerm& g) const {
    if (!isVar) return smtGTerm(g);
    if (ground) {
      auto it = pins.find(v);
      if (it != pins.end()) return smtGTerm(it->second);
    }
    return smtSym("v_" + v);
  }

  std::string constraint(const Constraint& c) const {
    switch (c.kind) {
      case Constraint::Kind::GroundGround:
        return smtRelExpr(c.rel, smtGTerm(c.g1), smtGTerm(c.g2));
      case Constraint::Kind::VarGround:
        return smtRelExpr(c.rel, cside(true, c.v1, {}), smtGTerm(c.g2));
      case Constraint::Kind::VarVar:
        return smtRelExpr(c.rel, cside(true, c.v1, {}), cside(true, c.v2, {}));
    }
    return "";
  }

  std::string atom(const Atom& a) const {
    if (a.args.empty()) return smtSym(a.pred);
    std::string s = "(" + smtSym(a.pred);
    for (const auto& t : a.args) s += " " + term(t);
    return s + ")";
  }
};

}  // namespace

std::string exportSmt2(const ClauseSet& set) {
  std::ostringstream os;
  os << "; bsrsli export\n(set-logic UFLIA)\n(declare-sort S 0)\n";
  for (const auto& [n, d] : set.sig.consts)
    os << "(declare-fun " << smtSym(n) << " () " << (d.sort == Sort::Base ? "Int" : "S")
       << ")\n";
  for (const auto& [n, d] : set.sig.preds) {
    if (d.synthetic) continue;
    os << "(declare-fun " << smtSym(n) << " (";
    for (size_t i = 0; i < d.argSorts.size(); i++)
      os << (i ? " " : "") << (d.argSorts[i] == Sort::Base ? "Int" : "S");
    os << ") Bool)\n";
  }
  for (const auto& [n, d] : set.sig.funs) {
    os << "(declare-fun " << smtSym(n) << " (";
    for (size_t i = 0; i < d.argSorts.size(); i++)
      os << (i ? " " : "") << (d.argSorts[i] == Sort::Base ? "Int" : "S");
    os << ") " << (d.result == Sort::Base ? "Int" : "S") << ")\n";
  }

  for (const auto& c : set.clauses) {
    SmtClauseCtx ctx{set, {}, false};
    auto sorts = set.varSorts(c);
    bool allPinned = true;
    for (const auto& [v, s] : sorts) {
      if (s == Sort::Free) {
        allPinned = false;
        continue;
      }
      bool pinned = false;
      for (const auto& cn : c.lambda) {
        if (cn.kind == Constraint::Kind::VarGround && cn.rel == Rel::Eq && cn.v1 == v) {
          ctx.pins[v] = cn.g2;
          pinned = true;
          break;
        }
      }
      if (!pinned) allPinned = false;
    }
    ctx.ground = allPinned;

    std::vector<std::string> ante;
    for (const auto& cn : c.lambda) ante.push_back(ctx.constraint(cn));
    for (const auto& a : c.gamma)
      if (!a.synthetic) ante.push_back(ctx.atom(a));
    for (const auto& e : c.gammaEq)
      ante.push_back("(= " + ctx.term(e.lhs) + " " + ctx.term(e.rhs) + ")");
    std::vector<std::string> cons;
    for (const auto& a : c.delta)
      if (!a.synthetic) cons.push_back(ctx.atom(a));
    for (const auto& e : c.deltaEq)
      cons.push_back("(= " + ctx.term(e.lhs) + " " + ctx.term(e.rhs) + ")");

    auto join = [](const char* op, const std::vector<std::string>& xs, const char* empty) {
      if (xs.empty()) return std::string(empty);
      if (xs.size() == 1) return xs[0];
      std::string s = std::string("(") + op;
      for (const auto& x : xs) s += " " + x;
      return s + ")";
    };
    std::string body;
    if (ante.empty())
      body = join("or", cons, "false");
    else
      body = "(=> " + join("and", ante, "true") + " " + join("or", cons, "false") + ")";

    if (!ctx.ground || !sorts.empty()) {
      // collect quantified variables: all free-sort vars, and base vars when
      // the clause is not fully pinned
      std::vector<std::string> binders;
      for (const auto& [v, s] : sorts) {
        if (ctx.ground && s == Sort::Base) continue;
        binders.push_back("(" + smtSym("v_" + v) + " " + (s == Sort::Base ? "Int" : "S") +
                          ")");
      }
      if (!binders.empty()) {
        std::string b = "(forall (";
        for (size_t i = 0; i < binders.size(); i++) b += (i ? " " : "") + binders[i];
        body = b + ") " + body + ")";
      }
    }
    os << "(assert " << body << ")\n";
  }
  os << "(check-sat)\n";
  return os.str();
}

}  // namespace bsr
