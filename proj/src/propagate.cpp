#include "propagate.hpp"

#include <algorithm>

namespace bsr {

std::string toString(const ArgPos& p) { return p.pred + "." + std::to_string(p.index); }

bool PropagationPreorder::le(const ArgPos& q, const ArgPos& p) const {
  auto it = below.find(p);
  return it != below.end() && it->second.count(q) > 0;
}

PropagationPreorder buildProp(const ClauseSet& set) {
  if (!set.normalCertified)
    throw PreconditionError("propagation preorder requires a certified normal-form set");

  PropagationPreorder pr;
  for (const auto& [name, d] : set.sig.preds) {
    if (d.theory) continue;
    for (size_t i = 1; i <= d.argSorts.size(); i++)
      pr.positions.push_back({name, static_cast<int>(i)});
  }

  auto link = [&](const ArgPos& q, const ArgPos& p) {
    if (q != p) pr.edges.emplace(q, p);
  };

  for (const auto& c : set.clauses) {
    // direct variable occurrences in non-theory atoms, placeholders included
    std::map<std::string, std::vector<ArgPos>> occ;
    auto scan = [&](const std::vector<Atom>& atoms) {
      for (const auto& a : atoms) {
        const PredDecl* pd = set.sig.pred(a.pred);
        if (!pd || pd->theory) continue;
        for (size_t i = 0; i < a.args.size(); i++)
          if (a.args[i].isVar()) occ[a.args[i].name].push_back({a.pred, static_cast<int>(i + 1)});
      }
    };
    scan(c.gamma);
    scan(c.delta);
    for (auto& [v, ps] : occ) {
      std::sort(ps.begin(), ps.end());
      ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
      for (const auto& a : ps)
        for (const auto& b : ps) link(a, b);
      pr.varHome.emplace(std::make_pair(c.id, v), ps.front());
    }
    for (const auto& cn : c.lambda) {
      if (cn.kind != Constraint::Kind::VarVar || cn.v1 == cn.v2) continue;
      auto u = occ.find(cn.v1), v = occ.find(cn.v2);
      if (u == occ.end() || v == occ.end()) continue;
      for (const auto& a : u->second)
        for (const auto& b : v->second) {
          link(a, b);  // v1 <= v2 and v1 = v2: a bound on v1 bounds v2
          if (cn.rel == Rel::Eq) link(b, a);
        }
    }
    auto equationLinks = [&](const std::vector<Equation>& eqs) {
      for (const auto& e : eqs) {
        if (!e.lhs.isVar() || !e.rhs.isVar() || e.lhs.name == e.rhs.name) continue;
        auto u = occ.find(e.lhs.name), v = occ.find(e.rhs.name);
        if (u == occ.end() || v == occ.end()) continue;
        for (const auto& a : u->second)
          for (const auto& b : v->second) {
            link(a, b);
            link(b, a);
          }
      }
    };
    equationLinks(c.gammaEq);
    equationLinks(c.deltaEq);
  }

  // reflexive-transitive closure over the (small) position set
  std::map<ArgPos, size_t> idx;
  for (size_t i = 0; i < pr.positions.size(); i++) idx[pr.positions[i]] = i;
  size_t n = pr.positions.size();
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (size_t i = 0; i < n; i++) reach[i][i] = true;
  for (const auto& [q, p] : pr.edges) reach[idx.at(q)][idx.at(p)] = true;
  for (size_t k = 0; k < n; k++)
    for (size_t i = 0; i < n; i++) {
      if (!reach[i][k]) continue;
      for (size_t j = 0; j < n; j++)
        if (reach[k][j]) reach[i][j] = true;
    }
  for (size_t i = 0; i < n; i++) {
    auto& bel = pr.below[pr.positions[i]];
    auto& abv = pr.above[pr.positions[i]];
    for (size_t j = 0; j < n; j++) {
      if (reach[j][i]) bel.insert(pr.positions[j]);
      if (reach[i][j]) abv.insert(pr.positions[j]);
    }
  }
  return pr;
}

const std::set<ArgPos>& downcl(const PropagationPreorder& prop, const ArgPos& p) {
  auto it = prop.below.find(p);
  if (it == prop.below.end())
    throw PreconditionError("unknown argument position " + toString(p));
  return it->second;
}

const std::set<ArgPos>& upcl(const PropagationPreorder& prop, const ArgPos& p) {
  auto it = prop.above.find(p);
  if (it == prop.above.end())
    throw PreconditionError("unknown argument position " + toString(p));
  return it->second;
}

std::string propDot(const PropagationPreorder& prop) {
  std::string out = "digraph propagation {\n  rankdir=LR;\n";
  for (const auto& p : prop.positions) out += "  \"" + toString(p) + "\";\n";
  for (const auto& [q, p] : prop.edges)
    out += "  \"" + toString(q) + "\" -> \"" + toString(p) + "\";\n";
  out += "}\n";
  return out;
}

}  // namespace bsr
