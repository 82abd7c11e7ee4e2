#include "rdf/ast.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <set>

namespace rdf {

TermPtr t_var(std::string name) {
  auto t = std::make_shared<NumTerm>();
  t->kind = NumTerm::Kind::Var;
  t->name = std::move(name);
  return t;
}
TermPtr t_zero() {
  auto t = std::make_shared<NumTerm>();
  t->kind = NumTerm::Kind::Zero;
  return t;
}
TermPtr t_one() {
  auto t = std::make_shared<NumTerm>();
  t->kind = NumTerm::Kind::One;
  return t;
}
static TermPtr t_bin(NumTerm::Kind k, TermPtr a, TermPtr b) {
  auto t = std::make_shared<NumTerm>();
  t->kind = k;
  t->lhs = std::move(a);
  t->rhs = std::move(b);
  return t;
}
TermPtr t_add(TermPtr a, TermPtr b) { return t_bin(NumTerm::Kind::Add, std::move(a), std::move(b)); }
TermPtr t_sub(TermPtr a, TermPtr b) { return t_bin(NumTerm::Kind::Sub, std::move(a), std::move(b)); }
TermPtr t_mul(TermPtr a, TermPtr b) { return t_bin(NumTerm::Kind::Mul, std::move(a), std::move(b)); }
TermPtr t_apply(std::string f, TermPtr arg) {
  auto t = std::make_shared<NumTerm>();
  t->kind = NumTerm::Kind::Apply;
  t->name = std::move(f);
  t->lhs = std::move(arg);
  return t;
}
TermPtr t_dapply(std::string f, TermPtr arg) {
  auto t = std::make_shared<NumTerm>();
  t->kind = NumTerm::Kind::DApply;
  t->name = std::move(f);
  t->lhs = std::move(arg);
  return t;
}

TermPtr t_int(long n) {
  assert(n >= 0);
  if (n == 0) return t_zero();
  TermPtr acc = t_one();
  for (long i = 1; i < n; ++i) acc = t_add(std::move(acc), t_one());
  return acc;
}

bool term_equal(const TermPtr& a, const TermPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind || a->name != b->name) return false;
  return term_equal(a->lhs, b->lhs) && term_equal(a->rhs, b->rhs);
}

NumRel flip(NumRel r) {
  switch (r) {
    case NumRel::Lt: return NumRel::Gt;
    case NumRel::Le: return NumRel::Ge;
    case NumRel::Gt: return NumRel::Lt;
    case NumRel::Ge: return NumRel::Le;
    default: return r;
  }
}
NumRel negate(NumRel r) {
  switch (r) {
    case NumRel::Eq: return NumRel::Ne;
    case NumRel::Ne: return NumRel::Eq;
    case NumRel::Lt: return NumRel::Ge;
    case NumRel::Le: return NumRel::Gt;
    case NumRel::Gt: return NumRel::Le;
    case NumRel::Ge: return NumRel::Lt;
  }
  return r;
}
const char* rel_text(NumRel r) {
  switch (r) {
    case NumRel::Eq: return "=";
    case NumRel::Ne: return "!=";
    case NumRel::Lt: return "<";
    case NumRel::Le: return "<=";
    case NumRel::Gt: return ">";
    case NumRel::Ge: return ">=";
  }
  return "?";
}

bool atom_has_interval(Atom::Kind k) {
  switch (k) {
    case Atom::Kind::NumCmp:
    case Atom::Kind::DivCmp:
      return false;
    default:
      return true;
  }
}

bool atom_is_primitive(const Atom& a) {
  switch (a.kind) {
    case Atom::Kind::NumCmp:
      return a.rel == NumRel::Eq || a.rel == NumRel::Gt;
    case Atom::Kind::FunEq:
    case Atom::Kind::FunGt:
    case Atom::Kind::StrictUp:
    case Atom::Kind::StrictDown:
    case Atom::Kind::Convex:
    case Atom::Kind::StrictConvex:
    case Atom::Kind::Concave:
    case Atom::Kind::StrictConcave:
      return true;
    case Atom::Kind::DerivCmp:
      return a.rel != NumRel::Ne;
    default:
      return false;
  }
}

FormulaPtr f_atom(Atom a) {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::Atom;
  f->atom = std::move(a);
  return f;
}
FormulaPtr f_not(FormulaPtr a) {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::Not;
  f->a = std::move(a);
  return f;
}
static FormulaPtr f_bin(Formula::Kind k, FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  f->a = std::move(a);
  f->b = std::move(b);
  return f;
}
FormulaPtr f_and(FormulaPtr a, FormulaPtr b) { return f_bin(Formula::Kind::And, std::move(a), std::move(b)); }
FormulaPtr f_or(FormulaPtr a, FormulaPtr b) { return f_bin(Formula::Kind::Or, std::move(a), std::move(b)); }
FormulaPtr f_imp(FormulaPtr a, FormulaPtr b) { return f_bin(Formula::Kind::Imp, std::move(a), std::move(b)); }
FormulaPtr f_iff(FormulaPtr a, FormulaPtr b) { return f_bin(Formula::Kind::Iff, std::move(a), std::move(b)); }

FormulaPtr f_and_all(const std::vector<FormulaPtr>& parts) {
  if (parts.empty()) return f_atom(a_numcmp(NumRel::Eq, t_zero(), t_zero()));
  FormulaPtr acc = parts[0];
  for (size_t i = 1; i < parts.size(); ++i) acc = f_and(acc, parts[i]);
  return acc;
}
FormulaPtr f_or_all(const std::vector<FormulaPtr>& parts) {
  if (parts.empty()) return f_atom(a_numcmp(NumRel::Gt, t_zero(), t_zero()));
  FormulaPtr acc = parts[0];
  for (size_t i = 1; i < parts.size(); ++i) acc = f_or(acc, parts[i]);
  return acc;
}

Atom a_numcmp(NumRel r, TermPtr s, TermPtr t) {
  Atom a;
  a.kind = Atom::Kind::NumCmp;
  a.rel = r;
  a.s = std::move(s);
  a.t = std::move(t);
  return a;
}
Atom a_funpred(Atom::Kind k, std::string f, IntervalSpec iv) {
  Atom a;
  a.kind = k;
  a.f = std::move(f);
  a.iv = std::move(iv);
  return a;
}
Atom a_funcmp(Atom::Kind k, std::string f, std::string g, IntervalSpec iv) {
  Atom a;
  a.kind = k;
  a.f = std::move(f);
  a.g = std::move(g);
  a.iv = std::move(iv);
  return a;
}
Atom a_derivcmp(NumRel r, std::string f, TermPtr bound, IntervalSpec iv) {
  Atom a;
  a.kind = Atom::Kind::DerivCmp;
  a.rel = r;
  a.f = std::move(f);
  a.t = std::move(bound);
  a.iv = std::move(iv);
  return a;
}

static bool interval_equal(const std::optional<IntervalSpec>& x, const std::optional<IntervalSpec>& y) {
  if (x.has_value() != y.has_value()) return false;
  if (!x) return true;
  auto end_eq = [](const ExtEnd& a, const ExtEnd& b) {
    return a.kind == b.kind && (a.kind != ExtEnd::Kind::Term || term_equal(a.term, b.term));
  };
  return end_eq(x->lo, y->lo) && end_eq(x->hi, y->hi) && x->lo_closed == y->lo_closed &&
         x->hi_closed == y->hi_closed;
}

static bool atom_equal(const Atom& x, const Atom& y) {
  return x.kind == y.kind && x.rel == y.rel && x.f == y.f && x.g == y.g &&
         term_equal(x.s, y.s) && term_equal(x.t, y.t) && term_equal(x.t2, y.t2) &&
         interval_equal(x.iv, y.iv);
}

bool formula_equal(const FormulaPtr& a, const FormulaPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  if (a->kind == Formula::Kind::Atom) return atom_equal(*a->atom, *b->atom);
  return formula_equal(a->a, b->a) && formula_equal(a->b, b->b);
}

// ---------------------------------------------------------------------------
// expand_derived
// ---------------------------------------------------------------------------

namespace {

FormulaPtr prim_cmp(NumRel r, const TermPtr& s, const TermPtr& t) {
  // Lower a numeric comparison to {=, >} atoms.
  switch (r) {
    case NumRel::Eq: return f_atom(a_numcmp(NumRel::Eq, s, t));
    case NumRel::Gt: return f_atom(a_numcmp(NumRel::Gt, s, t));
    case NumRel::Lt: return f_atom(a_numcmp(NumRel::Gt, t, s));
    case NumRel::Ne:
      return f_or(f_atom(a_numcmp(NumRel::Gt, s, t)), f_atom(a_numcmp(NumRel::Gt, t, s)));
    case NumRel::Ge:
      return f_or(f_atom(a_numcmp(NumRel::Gt, s, t)), f_atom(a_numcmp(NumRel::Eq, s, t)));
    case NumRel::Le:
      return f_or(f_atom(a_numcmp(NumRel::Gt, t, s)), f_atom(a_numcmp(NumRel::Eq, s, t)));
  }
  return nullptr;
}

FormulaPtr expand_atom(const Atom& a);

FormulaPtr expand_div(NumRel rel, const TermPtr& s, const TermPtr& t1, const TermPtr& t2) {
  const TermPtr prod = t_mul(s, t2);
  const TermPtr zero = t_zero();
  switch (rel) {
    case NumRel::Eq:
      return f_and(f_atom(a_numcmp(NumRel::Eq, t1, prod)),
                   f_atom(a_numcmp(NumRel::Gt, t_mul(t2, t2), zero)));
    case NumRel::Gt:
      return f_or(f_and(prim_cmp(NumRel::Lt, t1, prod), prim_cmp(NumRel::Gt, t2, zero)),
                  f_and(prim_cmp(NumRel::Gt, t1, prod), prim_cmp(NumRel::Lt, t2, zero)));
    case NumRel::Lt:
      return f_or(f_and(prim_cmp(NumRel::Gt, t1, prod), prim_cmp(NumRel::Gt, t2, zero)),
                  f_and(prim_cmp(NumRel::Lt, t1, prod), prim_cmp(NumRel::Lt, t2, zero)));
    case NumRel::Ge:
      return f_or(f_and(prim_cmp(NumRel::Le, t1, prod), prim_cmp(NumRel::Gt, t2, zero)),
                  f_and(prim_cmp(NumRel::Ge, t1, prod), prim_cmp(NumRel::Lt, t2, zero)));
    case NumRel::Le:
      return f_or(f_and(prim_cmp(NumRel::Ge, t1, prod), prim_cmp(NumRel::Gt, t2, zero)),
                  f_and(prim_cmp(NumRel::Le, t1, prod), prim_cmp(NumRel::Lt, t2, zero)));
    case NumRel::Ne:
      return f_or(expand_div(NumRel::Gt, s, t1, t2), expand_div(NumRel::Lt, s, t1, t2));
  }
  return nullptr;
}

FormulaPtr expand_atom(const Atom& a) {
  switch (a.kind) {
    case Atom::Kind::NumCmp:
      return prim_cmp(a.rel, a.s, a.t);
    case Atom::Kind::DivCmp:
      return expand_div(a.rel, a.s, a.t, a.t2);
    case Atom::Kind::DerivCmp:
      if (a.rel == NumRel::Ne)
        return f_or(f_atom(a_derivcmp(NumRel::Lt, a.f, a.t, *a.iv)),
                    f_atom(a_derivcmp(NumRel::Gt, a.f, a.t, *a.iv)));
      return f_atom(a);
    case Atom::Kind::Up:
    case Atom::Kind::Down: {
      NumRel r = a.kind == Atom::Kind::Up ? NumRel::Ge : NumRel::Le;
      FormulaPtr d = f_atom(a_derivcmp(r, a.f, t_zero(), *a.iv));
      // The endpoint disjunct is dropped when either end is infinite.
      if (a.iv->lo.infinite() || a.iv->hi.infinite()) return d;
      return f_or(d, f_atom(a_numcmp(NumRel::Eq, a.iv->lo.term, a.iv->hi.term)));
    }
    case Atom::Kind::Constant:
      return f_atom(a_derivcmp(NumRel::Eq, a.f, t_zero(), *a.iv));
    case Atom::Kind::Linear:
      return f_and(f_atom(a_funpred(Atom::Kind::Concave, a.f, *a.iv)),
                   f_atom(a_funpred(Atom::Kind::Convex, a.f, *a.iv)));
    case Atom::Kind::Affine: {
      Atom c = a;
      c.kind = Atom::Kind::Constant;
      Atom l = a;
      l.kind = Atom::Kind::Linear;
      return f_or(expand_atom(c), expand_atom(l));
    }
    case Atom::Kind::PointUp:
    case Atom::Kind::PointDown: {
      NumRel r = a.kind == Atom::Kind::PointUp ? NumRel::Ge : NumRel::Le;
      std::vector<FormulaPtr> parts;
      parts.push_back(prim_cmp(r, t_dapply(a.f, a.s), t_zero()));
      if (!a.iv->lo.infinite()) parts.push_back(prim_cmp(NumRel::Lt, a.iv->lo.term, a.s));
      if (!a.iv->hi.infinite()) parts.push_back(prim_cmp(NumRel::Lt, a.s, a.iv->hi.term));
      return f_and_all(parts);
    }
    default:
      return f_atom(a);
  }
}

}  // namespace

FormulaPtr expand_derived(const FormulaPtr& formula) {
  switch (formula->kind) {
    case Formula::Kind::Atom:
      return expand_atom(*formula->atom);
    case Formula::Kind::Not:
      return f_not(expand_derived(formula->a));
    case Formula::Kind::And:
      return f_and(expand_derived(formula->a), expand_derived(formula->b));
    case Formula::Kind::Or:
      return f_or(expand_derived(formula->a), expand_derived(formula->b));
    case Formula::Kind::Imp:
      return f_imp(expand_derived(formula->a), expand_derived(formula->b));
    case Formula::Kind::Iff:
      return f_iff(expand_derived(formula->a), expand_derived(formula->b));
  }
  return formula;
}

// ---------------------------------------------------------------------------
// Variable walks
// ---------------------------------------------------------------------------

namespace {

struct Collector {
  std::vector<std::string> out;
  std::set<std::string> seen;
  void add(const std::string& n) {
    if (seen.insert(n).second) out.push_back(n);
  }
};

void walk_terms(const TermPtr& t, const std::function<void(const NumTerm&)>& fn) {
  if (!t) return;
  fn(*t);
  walk_terms(t->lhs, fn);
  walk_terms(t->rhs, fn);
}

void walk_atoms(const FormulaPtr& f, const std::function<void(const Atom&)>& fn) {
  if (!f) return;
  if (f->kind == Formula::Kind::Atom) {
    fn(*f->atom);
    return;
  }
  walk_atoms(f->a, fn);
  walk_atoms(f->b, fn);
}

void for_each_atom_term(const Atom& a, const std::function<void(const TermPtr&)>& fn) {
  if (a.s) fn(a.s);
  if (a.t) fn(a.t);
  if (a.t2) fn(a.t2);
  if (a.iv) {
    if (a.iv->lo.term) fn(a.iv->lo.term);
    if (a.iv->hi.term) fn(a.iv->hi.term);
  }
}

}  // namespace

std::vector<std::string> collect_domain_vars(const FormulaPtr& formula) {
  Collector c;
  walk_atoms(formula, [&](const Atom& a) {
    // Arguments of f(x)/D[f](x), anywhere inside the atom's terms.
    for_each_atom_term(a, [&](const TermPtr& t) {
      walk_terms(t, [&](const NumTerm& n) {
        if ((n.kind == NumTerm::Kind::Apply || n.kind == NumTerm::Kind::DApply) && n.lhs &&
            n.lhs->kind == NumTerm::Kind::Var)
          c.add(n.lhs->name);
      });
    });
    // Interval ends that are plain variables.
    if (a.iv) {
      for (const ExtEnd* e : {&a.iv->lo, &a.iv->hi})
        if (e->kind == ExtEnd::Kind::Term && e->term->kind == NumTerm::Kind::Var)
          c.add(e->term->name);
    }
  });
  return c.out;
}

std::vector<std::string> collect_num_vars(const FormulaPtr& formula) {
  Collector c;
  walk_atoms(formula, [&](const Atom& a) {
    for_each_atom_term(a, [&](const TermPtr& t) {
      walk_terms(t, [&](const NumTerm& n) {
        if (n.kind == NumTerm::Kind::Var) c.add(n.name);
      });
    });
  });
  return c.out;
}

std::vector<std::string> collect_fun_vars(const FormulaPtr& formula) {
  Collector c;
  walk_atoms(formula, [&](const Atom& a) {
    if (!a.f.empty()) c.add(a.f);
    if (!a.g.empty()) c.add(a.g);
    for_each_atom_term(a, [&](const TermPtr& t) {
      walk_terms(t, [&](const NumTerm& n) {
        if (n.kind == NumTerm::Kind::Apply || n.kind == NumTerm::Kind::DApply) c.add(n.name);
      });
    });
  });
  return c.out;
}

namespace {

TermPtr subst_term(const TermPtr& t, const std::string& from, const std::string& to) {
  if (!t) return t;
  if (t->kind == NumTerm::Kind::Var) return t->name == from ? t_var(to) : t;
  auto lhs = subst_term(t->lhs, from, to);
  auto rhs = subst_term(t->rhs, from, to);
  if (lhs == t->lhs && rhs == t->rhs) return t;
  auto n = std::make_shared<NumTerm>(*t);
  n->lhs = lhs;
  n->rhs = rhs;
  return n;
}

}  // namespace

FormulaPtr substitute_var(const FormulaPtr& formula, const std::string& old_name,
                          const std::string& new_name) {
  if (!formula) return formula;
  if (formula->kind != Formula::Kind::Atom) {
    auto a = formula->a ? substitute_var(formula->a, old_name, new_name) : nullptr;
    auto b = formula->b ? substitute_var(formula->b, old_name, new_name) : nullptr;
    if (a == formula->a && b == formula->b) return formula;
    auto n = std::make_shared<Formula>(*formula);
    n->a = a;
    n->b = b;
    return n;
  }
  Atom a = *formula->atom;
  a.s = subst_term(a.s, old_name, new_name);
  a.t = subst_term(a.t, old_name, new_name);
  a.t2 = subst_term(a.t2, old_name, new_name);
  if (a.iv) {
    IntervalSpec iv = *a.iv;
    if (iv.lo.term) iv.lo.term = subst_term(iv.lo.term, old_name, new_name);
    if (iv.hi.term) iv.hi.term = subst_term(iv.hi.term, old_name, new_name);
    a.iv = iv;
  }
  return f_atom(std::move(a));
}

}  // namespace rdf
