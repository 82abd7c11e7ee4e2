#include "rdf/flat.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <set>

#include "rdf/parser.hpp"

namespace rdf {

std::string FlatLiteral::str() const {
  std::string n = neg ? "!" : "";
  switch (kind) {
    case Kind::AddDef: return z.str() + " = " + x.str() + " + " + y.str();
    case Kind::MulDef: return z.str() + " = " + x.str() + " * " + y.str();
    case Kind::Cmp: return x.str() + " " + rel_text(rel) + " " + y.str();
    case Kind::AppDef: return z.str() + " = " + f + "(" + x.str() + ")";
    case Kind::DAppDef: return z.str() + " = D[" + f + "](" + x.str() + ")";
    case Kind::FunEq: return n + "Eq(" + f + ", " + g + ") on " + iv.str();
    case Kind::FunGt: return n + "Gt(" + f + ", " + g + ") on " + iv.str();
    case Kind::StrictUp: return n + "StrictUp(" + f + ") on " + iv.str();
    case Kind::StrictDown: return n + "StrictDown(" + f + ") on " + iv.str();
    case Kind::Convex: return n + "Convex(" + f + ") on " + iv.str();
    case Kind::StrictConvex: return n + "StrictConvex(" + f + ") on " + iv.str();
    case Kind::Concave: return n + "Concave(" + f + ") on " + iv.str();
    case Kind::StrictConcave: return n + "StrictConcave(" + f + ") on " + iv.str();
    case Kind::DerivCmp:
      return n + "(D[" + f + "] " + rel_text(rel) + " " + z.str() + ") on " + iv.str();
  }
  return "?";
}

// ---------------------------------------------------------------------------
// NNF and DNF
// ---------------------------------------------------------------------------

namespace {

FormulaPtr nnf(const FormulaPtr& f, bool positive) {
  switch (f->kind) {
    case Formula::Kind::Atom: {
      const Atom& a = *f->atom;
      if (positive) return f;
      if (a.kind == Atom::Kind::NumCmp) {
        // not(s = t) ~> s > t or t > s ; not(s > t) ~> t > s or s = t
        if (a.rel == NumRel::Eq)
          return f_or(f_atom(a_numcmp(NumRel::Gt, a.s, a.t)),
                      f_atom(a_numcmp(NumRel::Gt, a.t, a.s)));
        if (a.rel == NumRel::Gt)
          return f_or(f_atom(a_numcmp(NumRel::Gt, a.t, a.s)),
                      f_atom(a_numcmp(NumRel::Eq, a.s, a.t)));
        throw std::logic_error("nnf: non-primitive numeric atom");
      }
      if (!atom_is_primitive(a)) throw std::logic_error("nnf: derived atom survived expansion");
      return f_not(f);
    }
    case Formula::Kind::Not:
      return nnf(f->a, !positive);
    case Formula::Kind::And:
      return positive ? f_and(nnf(f->a, true), nnf(f->b, true))
                      : f_or(nnf(f->a, false), nnf(f->b, false));
    case Formula::Kind::Or:
      return positive ? f_or(nnf(f->a, true), nnf(f->b, true))
                      : f_and(nnf(f->a, false), nnf(f->b, false));
    case Formula::Kind::Imp:
      return positive ? f_or(nnf(f->a, false), nnf(f->b, true))
                      : f_and(nnf(f->a, true), nnf(f->b, false));
    case Formula::Kind::Iff:
      return positive ? f_or(f_and(nnf(f->a, true), nnf(f->b, true)),
                             f_and(nnf(f->a, false), nnf(f->b, false)))
                      : f_or(f_and(nnf(f->a, true), nnf(f->b, false)),
                             f_and(nnf(f->a, false), nnf(f->b, true)));
  }
  return f;
}

bool signed_atom_equal(const SignedAtom& a, const SignedAtom& b) {
  if (a.neg != b.neg) return false;
  return formula_equal(f_atom(a.atom), f_atom(b.atom));
}

// Conjunction merge; returns false if the result is trivially inconsistent.
bool merge_conj(const std::vector<SignedAtom>& a, const std::vector<SignedAtom>& b,
                std::vector<SignedAtom>& out) {
  out = a;
  for (const auto& lit : b) {
    bool dup = false;
    for (const auto& have : out) {
      if (signed_atom_equal(have, lit)) { dup = true; break; }
      if (have.neg != lit.neg && formula_equal(f_atom(have.atom), f_atom(lit.atom))) return false;
    }
    if (!dup) out.push_back(lit);
  }
  return true;
}

std::vector<std::vector<SignedAtom>> dnf_rec(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::Atom:
      return {{SignedAtom{*f->atom, false}}};
    case Formula::Kind::Not:
      assert(f->a->kind == Formula::Kind::Atom);
      return {{SignedAtom{*f->a->atom, true}}};
    case Formula::Kind::Or: {
      auto l = dnf_rec(f->a), r = dnf_rec(f->b);
      l.insert(l.end(), r.begin(), r.end());
      return l;
    }
    case Formula::Kind::And: {
      auto l = dnf_rec(f->a), r = dnf_rec(f->b);
      std::vector<std::vector<SignedAtom>> out;
      for (const auto& x : l)
        for (const auto& y : r) {
          std::vector<SignedAtom> m;
          if (merge_conj(x, y, m)) out.push_back(std::move(m));
        }
      return out;
    }
    default:
      throw std::logic_error("dnf: formula not in NNF");
  }
}

}  // namespace

FormulaPtr push_negations(const FormulaPtr& formula) { return nnf(formula, true); }

std::vector<std::vector<SignedAtom>> to_dnf(const FormulaPtr& formula) {
  return dnf_rec(push_negations(formula));
}

// ---------------------------------------------------------------------------
// Flattening
// ---------------------------------------------------------------------------

namespace {

struct Flattener {
  FreshNames& fresh;
  std::vector<FlatLiteral>& out;
  std::map<std::string, FlatArg> cache;  // rendered term -> name

  FlatArg name_term(const TermPtr& t) {
    switch (t->kind) {
      case NumTerm::Kind::Var: return FlatArg::var(t->name);
      case NumTerm::Kind::Zero: return FlatArg::zero();
      case NumTerm::Kind::One: return FlatArg::one();
      default: break;
    }
    std::string key = render_term(t);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    FlatLiteral lit;
    FlatArg z = FlatArg::var(fresh.make("t"));
    switch (t->kind) {
      case NumTerm::Kind::Add: {
        lit.kind = FlatLiteral::Kind::AddDef;
        lit.z = z;
        lit.x = name_term(t->lhs);
        lit.y = name_term(t->rhs);
        break;
      }
      case NumTerm::Kind::Sub: {
        // z = a - b  as  a = z + b
        lit.kind = FlatLiteral::Kind::AddDef;
        lit.z = name_term(t->lhs);
        lit.x = z;
        lit.y = name_term(t->rhs);
        break;
      }
      case NumTerm::Kind::Mul: {
        lit.kind = FlatLiteral::Kind::MulDef;
        lit.z = z;
        lit.x = name_term(t->lhs);
        lit.y = name_term(t->rhs);
        break;
      }
      case NumTerm::Kind::Apply:
      case NumTerm::Kind::DApply: {
        lit.kind = t->kind == NumTerm::Kind::Apply ? FlatLiteral::Kind::AppDef
                                                   : FlatLiteral::Kind::DAppDef;
        lit.z = z;
        lit.f = t->name;
        lit.x = domain_arg(t->lhs);
        break;
      }
      default:
        throw std::logic_error("unreachable");
    }
    out.push_back(lit);
    cache.emplace(std::move(key), z);
    return z;
  }

  // Function arguments and interval ends must be honest variables.
  FlatArg domain_arg(const TermPtr& t) {
    FlatArg a = name_term(t);
    if (a.is_var()) return a;
    std::string key = std::string("#const") + a.str();
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    FlatArg v = FlatArg::var(fresh.make("t"));
    FlatLiteral lit;
    lit.kind = FlatLiteral::Kind::Cmp;
    lit.rel = NumRel::Eq;
    lit.x = v;
    lit.y = a;
    out.push_back(lit);
    cache.emplace(key, v);
    return v;
  }

  FlatEnd flat_end(const ExtEnd& e) {
    switch (e.kind) {
      case ExtEnd::Kind::NegInf: return FlatEnd::neg_inf();
      case ExtEnd::Kind::PosInf: return FlatEnd::pos_inf();
      case ExtEnd::Kind::Term: return FlatEnd::var(domain_arg(e.term).name);
    }
    return FlatEnd::neg_inf();
  }

  FlatIv flat_iv(const IntervalSpec& iv) {
    FlatIv r;
    r.lo = flat_end(iv.lo);
    r.hi = flat_end(iv.hi);
    r.lo_closed = iv.lo_closed;
    r.hi_closed = iv.hi_closed;
    return r;
  }

  static bool simple(const TermPtr& t) {
    return t->kind == NumTerm::Kind::Var || t->kind == NumTerm::Kind::Zero ||
           t->kind == NumTerm::Kind::One;
  }

  // z = f(x), z = D[f](x), z = x + y, z = x - y, z = x * y are already flat
  // shapes; emit them directly so flat input is a fixpoint.
  bool direct_def(const TermPtr& z, const TermPtr& t) {
    if (!simple(z)) return false;
    FlatLiteral lit;
    switch (t->kind) {
      case NumTerm::Kind::Apply:
      case NumTerm::Kind::DApply:
        if (t->lhs->kind != NumTerm::Kind::Var) return false;
        lit.kind = t->kind == NumTerm::Kind::Apply ? FlatLiteral::Kind::AppDef
                                                   : FlatLiteral::Kind::DAppDef;
        lit.z = name_term(z);
        lit.f = t->name;
        lit.x = FlatArg::var(t->lhs->name);
        break;
      case NumTerm::Kind::Add:
        if (!simple(t->lhs) || !simple(t->rhs)) return false;
        lit.kind = FlatLiteral::Kind::AddDef;
        lit.z = name_term(z);
        lit.x = name_term(t->lhs);
        lit.y = name_term(t->rhs);
        break;
      case NumTerm::Kind::Sub:
        if (!simple(t->lhs) || !simple(t->rhs)) return false;
        // z = a - b  as  a = z + b
        lit.kind = FlatLiteral::Kind::AddDef;
        lit.z = name_term(t->lhs);
        lit.x = name_term(z);
        lit.y = name_term(t->rhs);
        break;
      case NumTerm::Kind::Mul:
        if (!simple(t->lhs) || !simple(t->rhs)) return false;
        lit.kind = FlatLiteral::Kind::MulDef;
        lit.z = name_term(z);
        lit.x = name_term(t->lhs);
        lit.y = name_term(t->rhs);
        break;
      default:
        return false;
    }
    out.push_back(std::move(lit));
    return true;
  }

  void add_atom(const SignedAtom& sa) {
    const Atom& a = sa.atom;
    FlatLiteral lit;
    lit.neg = sa.neg;
    switch (a.kind) {
      case Atom::Kind::NumCmp:
        assert(!sa.neg && "numeric negation must be rewritten by NNF");
        if (a.rel == NumRel::Eq && (direct_def(a.s, a.t) || direct_def(a.t, a.s))) return;
        lit.kind = FlatLiteral::Kind::Cmp;
        lit.rel = a.rel;
        lit.x = name_term(a.s);
        lit.y = name_term(a.t);
        break;
      case Atom::Kind::FunEq: lit.kind = FlatLiteral::Kind::FunEq; break;
      case Atom::Kind::FunGt: lit.kind = FlatLiteral::Kind::FunGt; break;
      case Atom::Kind::StrictUp: lit.kind = FlatLiteral::Kind::StrictUp; break;
      case Atom::Kind::StrictDown: lit.kind = FlatLiteral::Kind::StrictDown; break;
      case Atom::Kind::Convex: lit.kind = FlatLiteral::Kind::Convex; break;
      case Atom::Kind::StrictConvex: lit.kind = FlatLiteral::Kind::StrictConvex; break;
      case Atom::Kind::Concave: lit.kind = FlatLiteral::Kind::Concave; break;
      case Atom::Kind::StrictConcave: lit.kind = FlatLiteral::Kind::StrictConcave; break;
      case Atom::Kind::DerivCmp:
        lit.kind = FlatLiteral::Kind::DerivCmp;
        lit.rel = a.rel;
        lit.z = name_term(a.t);
        break;
      default:
        throw std::logic_error("flatten: derived atom survived expansion: " + render_atom(a));
    }
    if (a.kind != Atom::Kind::NumCmp) {
      lit.f = a.f;
      lit.g = a.g;
      lit.iv = flat_iv(*a.iv);
    }
    out.push_back(std::move(lit));
  }
};

}  // namespace

std::vector<FlatLiteral> flatten(const std::vector<SignedAtom>& conjunction, FreshNames& fresh) {
  std::vector<FlatLiteral> out;
  Flattener fl{fresh, out, {}};
  for (const auto& sa : conjunction) fl.add_atom(sa);
  return out;
}

std::vector<std::string> flat_domain_vars(const std::vector<FlatLiteral>& literals) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  auto add = [&](const std::string& n) {
    if (seen.insert(n).second) out.push_back(n);
  };
  for (const auto& l : literals) {
    if (l.kind == FlatLiteral::Kind::AppDef || l.kind == FlatLiteral::Kind::DAppDef) {
      if (l.x.is_var()) add(l.x.name);
    } else if (l.has_interval()) {
      if (l.iv.lo.is_var()) add(l.iv.lo.name);
      if (l.iv.hi.is_var()) add(l.iv.hi.name);
    }
  }
  return out;
}

namespace {

FlatArg subst_arg(const FlatArg& a, const std::map<std::string, std::string>& ren) {
  if (!a.is_var()) return a;
  auto it = ren.find(a.name);
  return it == ren.end() ? a : FlatArg::var(it->second);
}
FlatEnd subst_end(const FlatEnd& e, const std::map<std::string, std::string>& ren) {
  if (!e.is_var()) return e;
  auto it = ren.find(e.name);
  return it == ren.end() ? e : FlatEnd::var(it->second);
}

}  // namespace

std::vector<FlatLiteral> substitute_flat(const std::vector<FlatLiteral>& literals,
                                         const std::map<std::string, std::string>& renaming) {
  std::vector<FlatLiteral> out;
  out.reserve(literals.size());
  for (FlatLiteral l : literals) {
    l.z = subst_arg(l.z, renaming);
    l.x = subst_arg(l.x, renaming);
    l.y = subst_arg(l.y, renaming);
    if (l.has_interval()) {
      l.iv.lo = subst_end(l.iv.lo, renaming);
      l.iv.hi = subst_end(l.iv.hi, renaming);
    }
    out.push_back(std::move(l));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ordered form
// ---------------------------------------------------------------------------

OrderedConjunction OrderedConjunction::checked(std::vector<FlatLiteral> literals,
                                               std::vector<std::string> chain,
                                               std::map<std::string, std::string> merged) {
  std::set<std::string> chain_set(chain.begin(), chain.end());
  if (chain_set.size() != chain.size())
    throw std::invalid_argument("ordered form: duplicate chain variable");
  auto dvars = flat_domain_vars(literals);
  for (const auto& v : dvars)
    if (!chain_set.count(v))
      throw std::invalid_argument("ordered form: domain variable " + v + " missing from chain");
  for (size_t i = 0; i + 1 < chain.size(); ++i) {
    bool found = false;
    for (const auto& l : literals)
      if (l.kind == FlatLiteral::Kind::Cmp && l.rel == NumRel::Lt && l.x.is_var() &&
          l.y.is_var() && l.x.name == chain[i] && l.y.name == chain[i + 1]) {
        found = true;
        break;
      }
    if (!found)
      throw std::invalid_argument("ordered form: missing chain literal " + chain[i] + " < " +
                                  chain[i + 1]);
  }
  OrderedConjunction oc;
  oc.literals = std::move(literals);
  oc.chain = std::move(chain);
  oc.merged = std::move(merged);
  return oc;
}

namespace {

FlatLiteral chain_literal(const std::string& a, const std::string& b) {
  FlatLiteral l;
  l.kind = FlatLiteral::Kind::Cmp;
  l.rel = NumRel::Lt;
  l.x = FlatArg::var(a);
  l.y = FlatArg::var(b);
  return l;
}

// Consistency of a literal set against chain positions; also removes
// trivially true numeric literals. Returns false when inconsistent.
bool prune_against_chain(std::vector<FlatLiteral>& literals,
                         const std::vector<std::string>& chain) {
  std::map<std::string, int> pos;
  for (size_t i = 0; i < chain.size(); ++i) pos[chain[i]] = static_cast<int>(i);
  std::vector<FlatLiteral> kept;
  for (const auto& l : literals) {
    if (l.kind == FlatLiteral::Kind::Cmp && l.x.is_var() && l.y.is_var()) {
      auto px = pos.find(l.x.name);
      auto py = pos.find(l.y.name);
      if (px != pos.end() && py != pos.end()) {
        int dx = px->second, dy = py->second;
        bool ok = true, trivial = false;
        switch (l.rel) {
          case NumRel::Lt: ok = dx < dy; trivial = ok; break;
          case NumRel::Le: ok = dx <= dy; trivial = ok; break;
          case NumRel::Gt: ok = dx > dy; trivial = ok; break;
          case NumRel::Ge: ok = dx >= dy; trivial = ok; break;
          case NumRel::Eq: ok = dx == dy; trivial = ok; break;
          default: break;
        }
        if (!ok) return false;
        if (trivial) continue;  // implied by the chain
      }
    }
    kept.push_back(l);
  }
  literals = std::move(kept);
  return true;
}

void dedupe_literals(std::vector<FlatLiteral>& literals) {
  std::vector<FlatLiteral> out;
  std::set<std::string> seen;
  for (auto& l : literals)
    if (seen.insert(l.str()).second) out.push_back(std::move(l));
  literals = std::move(out);
}

}  // namespace

std::vector<OrderedConjunction> enumerate_orderings(const std::vector<FlatLiteral>& literals,
                                                    int branch_cap) {
  auto dvars = flat_domain_vars(literals);
  if (static_cast<int>(dvars.size()) > branch_cap)
    throw BranchExplosion("domain-variable count " + std::to_string(dvars.size()) +
                          " exceeds branch cap " + std::to_string(branch_cap));

  std::vector<OrderedConjunction> out;
  std::vector<std::vector<int>> blocks;

  std::function<void()> emit = [&]() {
    std::map<std::string, std::string> merged;
    std::map<std::string, std::string> ren;
    std::vector<std::string> chain;
    for (const auto& b : blocks) {
      int rep = *std::min_element(b.begin(), b.end());
      chain.push_back(dvars[rep]);
      for (int m : b)
        if (m != rep) {
          merged[dvars[m]] = dvars[rep];
          ren[dvars[m]] = dvars[rep];
        }
    }
    auto lits = ren.empty() ? literals : substitute_flat(literals, ren);
    if (!prune_against_chain(lits, chain)) return;
    for (size_t i = 0; i + 1 < chain.size(); ++i) lits.push_back(chain_literal(chain[i], chain[i + 1]));
    dedupe_literals(lits);
    out.push_back(OrderedConjunction::checked(std::move(lits), std::move(chain), std::move(merged)));
  };

  std::function<void(size_t)> rec = [&](size_t i) {
    if (i == dvars.size()) {
      emit();
      return;
    }
    for (size_t p = 0; p <= blocks.size(); ++p) {
      blocks.insert(blocks.begin() + p, {static_cast<int>(i)});
      rec(i + 1);
      blocks.erase(blocks.begin() + p);
    }
    for (auto& b : blocks) {
      b.push_back(static_cast<int>(i));
      rec(i + 1);
      b.pop_back();
    }
  };
  rec(0);
  return out;
}

std::vector<ChainExtension> enumerate_chain_extensions(
    const std::vector<std::string>& chain, const std::vector<std::string>& new_vars,
    const std::vector<OrderConstraint>& constraints) {
  // Blocks are either a locked old chain variable or a set of new variables.
  struct Block {
    std::string old_name;  // empty for new blocks
    std::vector<int> members;
  };
  std::vector<Block> blocks;
  for (const auto& v : chain) blocks.push_back({v, {}});

  std::vector<ChainExtension> out;

  auto emit = [&]() {
    std::map<std::string, int> pos;
    ChainExtension ext;
    for (const auto& b : blocks) {
      std::string rep = b.old_name.empty() ? new_vars[*std::min_element(b.members.begin(), b.members.end())]
                                           : b.old_name;
      for (int m : b.members)
        if (new_vars[m] != rep) ext.merged[new_vars[m]] = rep;
      pos[rep] = static_cast<int>(ext.chain.size());
      if (!b.old_name.empty())
        for (int m : b.members) pos[new_vars[m]] = static_cast<int>(ext.chain.size());
      ext.chain.push_back(rep);
    }
    auto position = [&](const std::string& v) -> int {
      auto it = pos.find(v);
      if (it != pos.end()) return it->second;
      auto mit = ext.merged.find(v);
      if (mit != ext.merged.end()) return pos.at(mit->second);
      return -1;
    };
    for (const auto& c : constraints) {
      int pa = position(c.a), pb = position(c.b);
      if (pa < 0 || pb < 0) continue;
      bool ok = true;
      switch (c.rel) {
        case NumRel::Lt: ok = pa < pb; break;
        case NumRel::Le: ok = pa <= pb; break;
        case NumRel::Eq: ok = pa == pb; break;
        default: ok = true; break;
      }
      if (!ok) return;
    }
    out.push_back(std::move(ext));
  };

  std::function<void(size_t)> rec = [&](size_t i) {
    if (i == new_vars.size()) {
      emit();
      return;
    }
    for (size_t p = 0; p <= blocks.size(); ++p) {
      blocks.insert(blocks.begin() + p, Block{"", {static_cast<int>(i)}});
      rec(i + 1);
      blocks.erase(blocks.begin() + p);
    }
    for (auto& b : blocks) {
      b.members.push_back(static_cast<int>(i));
      rec(i + 1);
      b.members.pop_back();
    }
  };
  rec(0);
  return out;
}

}  // namespace rdf
