#include "rdf/tarski.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace rdf {

Poly Poly::constant(const Rat& c) {
  Poly p;
  if (c != 0) p.coef[{}] = c;
  return p;
}
Poly Poly::var(const std::string& name) {
  Poly p;
  p.coef[{name}] = 1;
  return p;
}

Poly Poly::operator+(const Poly& o) const {
  Poly r = *this;
  for (const auto& [m, c] : o.coef) {
    Rat& slot = r.coef[m];
    slot += c;
    if (slot == 0) r.coef.erase(m);
  }
  return r;
}
Poly Poly::operator-() const {
  Poly r;
  for (const auto& [m, c] : coef) r.coef[m] = -c;
  return r;
}
Poly Poly::operator-(const Poly& o) const { return *this + (-o); }
Poly Poly::operator*(const Poly& o) const {
  Poly r;
  for (const auto& [m1, c1] : coef)
    for (const auto& [m2, c2] : o.coef) {
      Monomial m = m1;
      m.insert(m.end(), m2.begin(), m2.end());
      std::sort(m.begin(), m.end());
      Rat& slot = r.coef[m];
      slot += c1 * c2;
      if (slot == 0) r.coef.erase(m);
    }
  return r;
}

bool Poly::is_constant() const {
  return coef.empty() || (coef.size() == 1 && coef.begin()->first.empty());
}
Rat Poly::constant_value() const {
  auto it = coef.find({});
  return it == coef.end() ? Rat(0) : it->second;
}
int Poly::degree() const {
  int d = 0;
  for (const auto& [m, c] : coef) d = std::max<int>(d, static_cast<int>(m.size()));
  return d;
}
std::vector<std::string> Poly::free_vars() const {
  std::set<std::string> s;
  for (const auto& [m, c] : coef) s.insert(m.begin(), m.end());
  return {s.begin(), s.end()};
}
Rat Poly::eval(const std::map<std::string, Rat>& model) const {
  Rat total = 0;
  for (const auto& [m, c] : coef) {
    Rat term = c;
    for (const auto& v : m) {
      auto it = model.find(v);
      if (it == model.end()) throw MissingVariable(v);
      term *= it->second;
    }
    total += term;
  }
  return total;
}
std::string Poly::str() const {
  if (coef.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : coef) {
    if (!first) os << " + ";
    first = false;
    os << rat_str(c);
    for (const auto& v : m) os << "*" << v;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Nodes
// ---------------------------------------------------------------------------

namespace {

TPtr mk(TNode::Kind k) {
  auto n = std::make_shared<TNode>();
  n->kind = k;
  return n;
}

// Scale to integer coefficients with content 1, keeping the sign.
Poly canonical_int(const Poly& p) {
  if (p.coef.empty()) return p;
  mpz_class lcm_den = 1, gcd_num = 0;
  for (const auto& [m, c] : p.coef) {
    mpz_class den = c.get_den();
    mpz_lcm(lcm_den.get_mpz_t(), lcm_den.get_mpz_t(), den.get_mpz_t());
  }
  Poly scaled;
  for (const auto& [m, c] : p.coef) scaled.coef[m] = c * Rat(lcm_den);
  for (const auto& [m, c] : scaled.coef) {
    mpz_class num = abs(c.get_num());
    mpz_gcd(gcd_num.get_mpz_t(), gcd_num.get_mpz_t(), num.get_mpz_t());
  }
  if (gcd_num > 1) {
    Poly reduced;
    for (const auto& [m, c] : scaled.coef) reduced.coef[m] = c / Rat(gcd_num);
    return reduced;
  }
  return scaled;
}

bool const_holds(const Rat& v, NumRel rel) {
  switch (rel) {
    case NumRel::Eq: return v == 0;
    case NumRel::Ne: return v != 0;
    case NumRel::Lt: return v < 0;
    case NumRel::Le: return v <= 0;
    case NumRel::Gt: return v > 0;
    case NumRel::Ge: return v >= 0;
  }
  return false;
}

}  // namespace

TPtr t_true() {
  static TPtr n = mk(TNode::Kind::True);
  return n;
}
TPtr t_false() {
  static TPtr n = mk(TNode::Kind::False);
  return n;
}

TPtr t_polyatom(Poly lhs, NumRel rel) {
  if (lhs.is_constant()) return const_holds(lhs.constant_value(), rel) ? t_true() : t_false();
  auto n = mk(TNode::Kind::Atom);
  auto m = std::const_pointer_cast<TNode>(n);
  m->atom.lhs = canonical_int(lhs);
  m->atom.rel = rel;
  return n;
}

TPtr t_divatom(Poly num, Poly den, NumRel rel, Poly rhs) {
  auto n = mk(TNode::Kind::Div);
  auto m = std::const_pointer_cast<TNode>(n);
  m->div.num = std::move(num);
  m->div.den = std::move(den);
  m->div.rel = rel;
  m->div.rhs = std::move(rhs);
  return n;
}

TPtr t_not_n(TPtr a) {
  if (a->kind == TNode::Kind::True) return t_false();
  if (a->kind == TNode::Kind::False) return t_true();
  auto n = mk(TNode::Kind::Not);
  std::const_pointer_cast<TNode>(n)->kids = {std::move(a)};
  return n;
}

TPtr t_and_n(std::vector<TPtr> kids) {
  std::vector<TPtr> flat;
  for (auto& k : kids) {
    if (k->kind == TNode::Kind::True) continue;
    if (k->kind == TNode::Kind::False) return t_false();
    if (k->kind == TNode::Kind::And) {
      flat.insert(flat.end(), k->kids.begin(), k->kids.end());
    } else {
      flat.push_back(std::move(k));
    }
  }
  if (flat.empty()) return t_true();
  if (flat.size() == 1) return flat[0];
  auto n = mk(TNode::Kind::And);
  std::const_pointer_cast<TNode>(n)->kids = std::move(flat);
  return n;
}

TPtr t_or_n(std::vector<TPtr> kids) {
  std::vector<TPtr> flat;
  for (auto& k : kids) {
    if (k->kind == TNode::Kind::False) continue;
    if (k->kind == TNode::Kind::True) return t_true();
    if (k->kind == TNode::Kind::Or) {
      flat.insert(flat.end(), k->kids.begin(), k->kids.end());
    } else {
      flat.push_back(std::move(k));
    }
  }
  if (flat.empty()) return t_false();
  if (flat.size() == 1) return flat[0];
  auto n = mk(TNode::Kind::Or);
  std::const_pointer_cast<TNode>(n)->kids = std::move(flat);
  return n;
}

TPtr t_imp_n(TPtr a, TPtr b) {
  if (a->kind == TNode::Kind::False) return t_true();
  if (a->kind == TNode::Kind::True) return b;
  if (b->kind == TNode::Kind::True) return t_true();
  auto n = mk(TNode::Kind::Imp);
  std::const_pointer_cast<TNode>(n)->kids = {std::move(a), std::move(b)};
  return n;
}

std::vector<TPtr> conjuncts(const TPtr& f) {
  if (f->kind == TNode::Kind::And) {
    std::vector<TPtr> out;
    for (const auto& k : f->kids) {
      auto sub = conjuncts(k);
      out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
  }
  return {f};
}

static void collect_vars(const TPtr& f, std::set<std::string>& out) {
  switch (f->kind) {
    case TNode::Kind::Atom: {
      auto v = f->atom.lhs.free_vars();
      out.insert(v.begin(), v.end());
      break;
    }
    case TNode::Kind::Div: {
      for (const Poly* p : {&f->div.num, &f->div.den, &f->div.rhs}) {
        auto v = p->free_vars();
        out.insert(v.begin(), v.end());
      }
      break;
    }
    default:
      for (const auto& k : f->kids) collect_vars(k, out);
  }
}

std::vector<std::string> tarski_free_vars(const TPtr& f) {
  std::set<std::string> s;
  collect_vars(f, s);
  return {s.begin(), s.end()};
}

std::string tarski_str(const TPtr& f) {
  switch (f->kind) {
    case TNode::Kind::True: return "true";
    case TNode::Kind::False: return "false";
    case TNode::Kind::Atom: return f->atom.lhs.str() + " " + rel_text(f->atom.rel) + " 0";
    case TNode::Kind::Div:
      return "(" + f->div.num.str() + ")/(" + f->div.den.str() + ") " + rel_text(f->div.rel) +
             " " + f->div.rhs.str();
    case TNode::Kind::Not: return "!(" + tarski_str(f->kids[0]) + ")";
    case TNode::Kind::And:
    case TNode::Kind::Or: {
      std::string sep = f->kind == TNode::Kind::And ? " & " : " | ";
      std::string out = "(";
      for (size_t i = 0; i < f->kids.size(); ++i) {
        if (i) out += sep;
        out += tarski_str(f->kids[i]);
      }
      return out + ")";
    }
    case TNode::Kind::Imp:
      return "(" + tarski_str(f->kids[0]) + " -> " + tarski_str(f->kids[1]) + ")";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Division clearing
// ---------------------------------------------------------------------------

namespace {

// num/den rel rhs with den > 0:  num rel rhs*den
TPtr clear_known_positive(const DivCmpAtom& d) {
  return t_polyatom(d.num - d.rhs * d.den, d.rel);
}

// Sign-split product encoding (mirrors the derived divisions):
//   num/den = rhs  ~>  num = rhs*den  and  den*den > 0
//   num/den > rhs  ~>  (num > rhs*den and den > 0) or (num < rhs*den and den < 0)
TPtr clear_product(const DivCmpAtom& d) {
  Poly diff = d.num - d.rhs * d.den;
  switch (d.rel) {
    case NumRel::Eq:
      return t_and_n({t_polyatom(diff, NumRel::Eq), t_polyatom(d.den * d.den, NumRel::Gt)});
    case NumRel::Ne:
      return t_and_n({t_polyatom(diff, NumRel::Ne), t_polyatom(d.den * d.den, NumRel::Gt)});
    default: {
      TPtr pos = t_and_n({t_polyatom(diff, d.rel), t_polyatom(d.den, NumRel::Gt)});
      NumRel flipped = d.rel == NumRel::Lt   ? NumRel::Gt
                       : d.rel == NumRel::Le ? NumRel::Ge
                       : d.rel == NumRel::Gt ? NumRel::Lt
                                             : NumRel::Le;
      TPtr neg = t_and_n({t_polyatom(diff, flipped), t_polyatom(d.den, NumRel::Lt)});
      return t_or_n({pos, neg});
    }
  }
}

}  // namespace

TPtr clear_divisions(const TPtr& formula, const std::vector<Poly>& known_positive,
                     bool product_encoding) {
  switch (formula->kind) {
    case TNode::Kind::Div: {
      const DivCmpAtom& d = formula->div;
      for (const auto& p : known_positive)
        if (p == d.den) return clear_known_positive(d);
      if (!product_encoding)
        throw UnknownSignDenominator("denominator not known positive: " + d.den.str());
      return clear_product(d);
    }
    case TNode::Kind::Not:
      return t_not_n(clear_divisions(formula->kids[0], known_positive, product_encoding));
    case TNode::Kind::And:
    case TNode::Kind::Or: {
      std::vector<TPtr> kids;
      for (const auto& k : formula->kids)
        kids.push_back(clear_divisions(k, known_positive, product_encoding));
      return formula->kind == TNode::Kind::And ? t_and_n(std::move(kids)) : t_or_n(std::move(kids));
    }
    case TNode::Kind::Imp:
      return t_imp_n(clear_divisions(formula->kids[0], known_positive, product_encoding),
                     clear_divisions(formula->kids[1], known_positive, product_encoding));
    default:
      return formula;
  }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

bool eval_polyatom(const PolyAtom& a, const NumericModel& model) {
  return const_holds(a.lhs.eval(model.values), a.rel);
}

bool eval_tarski(const TPtr& formula, const NumericModel& model) {
  switch (formula->kind) {
    case TNode::Kind::True: return true;
    case TNode::Kind::False: return false;
    case TNode::Kind::Atom: return eval_polyatom(formula->atom, model);
    case TNode::Kind::Div: {
      const DivCmpAtom& d = formula->div;
      Rat den = d.den.eval(model.values);
      if (den == 0) return false;  // product-encoding semantics
      Rat q = d.num.eval(model.values) / den - d.rhs.eval(model.values);
      return const_holds(q, d.rel);
    }
    case TNode::Kind::Not: return !eval_tarski(formula->kids[0], model);
    case TNode::Kind::And:
      for (const auto& k : formula->kids)
        if (!eval_tarski(k, model)) return false;
      return true;
    case TNode::Kind::Or:
      for (const auto& k : formula->kids)
        if (eval_tarski(k, model)) return true;
      return false;
    case TNode::Kind::Imp:
      return !eval_tarski(formula->kids[0], model) || eval_tarski(formula->kids[1], model);
  }
  return false;
}

}  // namespace rdf
