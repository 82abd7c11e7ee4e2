#include "rdf/eliminate.hpp"

#include <algorithm>
#include <cassert>
#include <set>

namespace rdf {

// ---------------------------------------------------------------------------
// VarTable
// ---------------------------------------------------------------------------

int VarTable::position(const std::string& v) const {
  for (size_t i = 0; i < chain.size(); ++i)
    if (chain[i] == v) return static_cast<int>(i) + 1;
  return 0;
}

int VarTable::ind(const FlatEnd& e) const {
  switch (e.k) {
    case FlatEnd::K::NegInf: return 1;
    case FlatEnd::K::PosInf: return r();
    case FlatEnd::K::Var: {
      int p = position(e.name);
      if (p == 0) throw std::logic_error("ind: " + e.name + " is not a chain variable");
      return p;
    }
  }
  return 0;
}

std::string VarTable::y_name(const std::string& f, int j) {
  auto key = std::make_pair(f, j);
  auto it = y_names.find(key);
  if (it != y_names.end()) return it->second;
  std::string n = "_y" + std::to_string(j) + "_" + f;
  y_names.emplace(key, n);
  return n;
}
std::string VarTable::t_name(const std::string& f, int j) {
  auto key = std::make_pair(f, j);
  auto it = t_names.find(key);
  if (it != t_names.end()) return it->second;
  std::string n = "_s" + std::to_string(j) + "_" + f;
  t_names.emplace(key, n);
  return n;
}
std::string VarTable::gamma_name(const std::string& f, int side) {
  auto& m = side == 0 ? gamma0_names : gammar_names;
  auto it = m.find(f);
  if (it != m.end()) return it->second;
  std::string n = std::string("_g") + (side == 0 ? "0_" : "r_") + f;
  m.emplace(f, n);
  return n;
}
std::string VarTable::k_name(const std::string& f, int side) {
  auto& m = side == 0 ? k0_names : kr_names;
  auto it = m.find(f);
  if (it != m.end()) return it->second;
  std::string n = std::string("_k") + (side == 0 ? "0_" : "r_") + f;
  m.emplace(f, n);
  return n;
}

static const std::string* find_in(const std::map<std::string, std::string>& m, const std::string& f) {
  auto it = m.find(f);
  return it == m.end() ? nullptr : &it->second;
}
const std::string* VarTable::find_y(const std::string& f, int j) const {
  auto it = y_names.find({f, j});
  return it == y_names.end() ? nullptr : &it->second;
}
const std::string* VarTable::find_t(const std::string& f, int j) const {
  auto it = t_names.find({f, j});
  return it == t_names.end() ? nullptr : &it->second;
}
const std::string* VarTable::find_gamma(const std::string& f, int side) const {
  return find_in(side == 0 ? gamma0_names : gammar_names, f);
}
const std::string* VarTable::find_k(const std::string& f, int side) const {
  return find_in(side == 0 ? k0_names : kr_names, f);
}

Poly poly_of_arg(const FlatArg& a) {
  switch (a.k) {
    case FlatArg::K::Var: return Poly::var(a.name);
    case FlatArg::K::Zero: return Poly::constant(0);
    case FlatArg::K::One: return Poly::constant(1);
  }
  return Poly::constant(0);
}

std::vector<Poly> chain_positive_diffs(const VarTable& table) {
  std::vector<Poly> out;
  for (size_t j = 0; j + 1 < table.chain.size(); ++j)
    out.push_back(Poly::var(table.chain[j + 1]) - Poly::var(table.chain[j]));
  return out;
}

std::pair<int, int> literal_index_range(const VarTable& table, const FlatIv& iv) {
  int lo = table.ind(iv.lo);
  int hi = table.ind(iv.hi);
  if (iv.lo.is_var() && !iv.lo_closed) ++lo;
  if (iv.hi.is_var() && !iv.hi_closed) --hi;
  return {lo, hi};
}

Branch branch_of(const OrderedConjunction& oc, const FreshNames& fresh) {
  Branch b;
  b.literals = oc.literals;
  b.table.chain = oc.chain;
  b.merged = oc.merged;
  b.fresh = fresh;
  return b;
}

// ---------------------------------------------------------------------------
// Small literal builders
// ---------------------------------------------------------------------------

namespace {

FlatLiteral mk_cmp(NumRel rel, FlatArg x, FlatArg y) {
  FlatLiteral l;
  l.kind = FlatLiteral::Kind::Cmp;
  l.rel = rel;
  l.x = std::move(x);
  l.y = std::move(y);
  return l;
}
FlatLiteral mk_app(std::string z, std::string f, std::string x) {
  FlatLiteral l;
  l.kind = FlatLiteral::Kind::AppDef;
  l.z = FlatArg::var(std::move(z));
  l.f = std::move(f);
  l.x = FlatArg::var(std::move(x));
  return l;
}
FlatLiteral mk_dapp(std::string z, std::string f, std::string x) {
  FlatLiteral l;
  l.kind = FlatLiteral::Kind::DAppDef;
  l.z = FlatArg::var(std::move(z));
  l.f = std::move(f);
  l.x = FlatArg::var(std::move(x));
  return l;
}

bool is_split_kind(const FlatLiteral& l) {
  if (l.neg) return false;
  if (l.kind == FlatLiteral::Kind::FunGt) return true;
  return l.kind == FlatLiteral::Kind::DerivCmp && (l.rel == NumRel::Gt || l.rel == NumRel::Lt);
}

bool closure_kind(const FlatLiteral& l) {
  if (l.neg) return false;       // step 2 consumes the interval as written
  if (!l.has_interval()) return false;
  return !is_split_kind(l);
}

void add_adjacent_chain_literals(Branch& b) {
  for (size_t i = 0; i + 1 < b.table.chain.size(); ++i) {
    FlatLiteral want = mk_cmp(NumRel::Lt, FlatArg::var(b.table.chain[i]),
                              FlatArg::var(b.table.chain[i + 1]));
    bool have = false;
    for (const auto& l : b.literals)
      if (l.str() == want.str()) { have = true; break; }
    if (!have) b.literals.push_back(want);
  }
}

void dedupe(Branch& b) {
  std::set<std::string> seen;
  std::vector<FlatLiteral> out;
  for (auto& l : b.literals)
    if (seen.insert(l.str()).second) out.push_back(std::move(l));
  b.literals = std::move(out);
}

}  // namespace

// ---------------------------------------------------------------------------
// Step 1 — behavior at the endpoints
// ---------------------------------------------------------------------------

namespace {

// Emptiness of a var/var interval under the branch's chain.
enum class IvState { Normal, Empty };

IvState iv_state(const VarTable& t, const FlatIv& iv) {
  if (!iv.lo.is_var() || !iv.hi.is_var()) return IvState::Normal;
  int plo = t.position(iv.lo.name), phi = t.position(iv.hi.name);
  if (plo > phi) return IvState::Empty;
  if (plo == phi && !(iv.lo_closed && iv.hi_closed)) return IvState::Empty;
  return IvState::Normal;
}

// Touch literal at w: f(w)=g(w) for function comparisons, D[f](w)=bound for
// derivative comparisons.
void add_touch(Branch& b, const FlatLiteral& l, const std::string& w) {
  if (l.kind == FlatLiteral::Kind::FunGt) {
    std::string u1 = b.fresh.make("u"), u2 = b.fresh.make("u");
    b.literals.push_back(mk_app(u1, l.f, w));
    b.literals.push_back(mk_app(u2, l.g, w));
    b.literals.push_back(mk_cmp(NumRel::Eq, FlatArg::var(u1), FlatArg::var(u2)));
  } else {
    std::string u = b.fresh.make("u");
    b.literals.push_back(mk_dapp(u, l.f, w));
    b.literals.push_back(mk_cmp(NumRel::Eq, FlatArg::var(u), l.z));
  }
}

}  // namespace

std::vector<Branch> step1_endpoints(const Branch& input) {
  Branch base = input;

  // Vacuity and closure normalization.
  {
    std::vector<FlatLiteral> kept;
    for (auto& l : base.literals) {
      if (l.has_interval() && iv_state(base.table, l.iv) == IvState::Empty) {
        if (l.neg) return {};  // not(vacuously true)
        base.tag("vacuous", l.str());
        continue;
      }
      if (closure_kind(l)) {
        FlatLiteral c = l;
        if (c.iv.lo.is_var()) c.iv.lo_closed = true;
        if (c.iv.hi.is_var()) c.iv.hi_closed = true;
        kept.push_back(std::move(c));
        continue;
      }
      kept.push_back(std::move(l));
    }
    base.literals = std::move(kept);
  }

  // 1a / 1c: cut unbounded-open comparison intervals at a neighboring domain
  // variable, introducing one when the end has no neighbor yet.
  {
    std::vector<FlatLiteral> out;
    for (size_t idx = 0; idx < base.literals.size(); ++idx) {
      FlatLiteral l = base.literals[idx];
      if (!is_split_kind(l)) { out.push_back(std::move(l)); continue; }
      bool left_cut = l.iv.lo.k == FlatEnd::K::NegInf && l.iv.hi.is_var() && !l.iv.hi_closed;
      bool right_cut = l.iv.hi.k == FlatEnd::K::PosInf && l.iv.lo.is_var() && !l.iv.lo_closed;
      if (!left_cut && !right_cut) { out.push_back(std::move(l)); continue; }
      const char* rule = l.kind == FlatLiteral::Kind::FunGt ? "1a" : "1c";
      base.tag(rule, l.str());
      if (left_cut) {
        const std::string w2 = l.iv.hi.name;
        int p = base.table.position(w2);
        std::string w1;
        if (p > 1) {
          w1 = base.table.chain[p - 2];
        } else {
          w1 = base.fresh.make("w");
          base.table.chain.insert(base.table.chain.begin() + (p - 1), w1);
        }
        FlatLiteral l1 = l;
        l1.iv = FlatIv{FlatEnd::neg_inf(), FlatEnd::var(w1), false, true};
        FlatLiteral l2 = l;
        l2.iv = FlatIv{FlatEnd::var(w1), FlatEnd::var(w2), true, false};
        out.push_back(std::move(l1));
        out.push_back(std::move(l2));
        out.push_back(mk_cmp(NumRel::Lt, FlatArg::var(w1), FlatArg::var(w2)));
      } else {
        const std::string w1 = l.iv.lo.name;
        int p = base.table.position(w1);
        std::string w2;
        if (p < base.table.r()) {
          w2 = base.table.chain[p];
        } else {
          w2 = base.fresh.make("w");
          base.table.chain.insert(base.table.chain.begin() + p, w2);
        }
        FlatLiteral l1 = l;
        l1.iv = FlatIv{FlatEnd::var(w1), FlatEnd::var(w2), false, true};
        FlatLiteral l2 = l;
        l2.iv = FlatIv{FlatEnd::var(w2), FlatEnd::pos_inf(), true, false};
        out.push_back(std::move(l1));
        out.push_back(std::move(l2));
        out.push_back(mk_cmp(NumRel::Lt, FlatArg::var(w1), FlatArg::var(w2)));
      }
    }
    base.literals = std::move(out);
  }

  // 1b1/1d1 + 1b2/1d2: case split bounded non-closed comparison intervals and
  // keep the result in disjunctive normal form (one branch per alternative).
  std::vector<Branch> branches{base};
  for (;;) {
    bool any = false;
    std::vector<Branch> next;
    for (Branch& br : branches) {
      size_t found = br.literals.size();
      for (size_t i = 0; i < br.literals.size(); ++i) {
        const FlatLiteral& l = br.literals[i];
        if (!l.split_done && is_split_kind(l) && l.iv.lo.is_var() && l.iv.hi.is_var() &&
            !(l.iv.lo_closed && l.iv.hi_closed)) {
          found = i;
          break;
        }
      }
      if (found == br.literals.size()) { next.push_back(std::move(br)); continue; }
      any = true;
      FlatLiteral l = br.literals[found];
      br.literals.erase(br.literals.begin() + found);
      const bool deriv = l.kind != FlatLiteral::Kind::FunGt;
      const char* rule = deriv ? "1d1" : "1b1";
      const std::string w1 = l.iv.lo.name, w2 = l.iv.hi.name;

      auto closed_alt = [&]() {
        Branch alt = br;
        FlatLiteral c = l;
        c.iv.lo_closed = c.iv.hi_closed = true;
        c.split_done = true;
        alt.literals.insert(alt.literals.begin() + found, c);
        alt.tag(rule, l.str() + " ~> " + c.str());
        return alt;
      };
      auto touch_alt = [&](bool touch_lo, bool touch_hi) {
        Branch alt = br;
        FlatLiteral c = l;
        c.iv.lo_closed = !touch_lo;
        c.iv.hi_closed = !touch_hi;
        c.split_done = true;
        alt.literals.insert(alt.literals.begin() + found, c);
        if (touch_lo) add_touch(alt, l, w1);
        if (touch_hi) add_touch(alt, l, w2);
        alt.tag(rule, l.str() + " ~> " + c.str() + (touch_lo ? " + touch lo" : "") +
                          (touch_hi ? " + touch hi" : ""));
        if (touch_lo && touch_hi)
          alt.midpoint_todo.push_back({deriv, l.f, w1, w2});
        return alt;
      };

      next.push_back(closed_alt());
      if (!l.iv.hi_closed) next.push_back(touch_alt(false, true));
      if (!l.iv.lo_closed) next.push_back(touch_alt(true, false));
      if (!l.iv.lo_closed && !l.iv.hi_closed) next.push_back(touch_alt(true, true));
    }
    branches = std::move(next);
    if (!any) break;
  }

  // 1b3/1d3: the doubly open alternative gets a fresh domain variable strictly
  // between its ends when no other domain variable separates them.
  for (Branch& br : branches) {
    for (const auto& todo : br.midpoint_todo) {
      int p1 = br.table.position(todo.w1), p2 = br.table.position(todo.w2);
      if (p1 == 0 || p2 == 0 || p2 != p1 + 1) continue;
      std::string w = br.fresh.make("w"), z = br.fresh.make("z");
      br.table.chain.insert(br.table.chain.begin() + p1, w);
      br.literals.push_back(mk_cmp(NumRel::Lt, FlatArg::var(todo.w1), FlatArg::var(w)));
      br.literals.push_back(mk_cmp(NumRel::Lt, FlatArg::var(w), FlatArg::var(todo.w2)));
      br.literals.push_back(mk_app(z, todo.f, w));
      br.tag(todo.deriv ? "1d3" : "1b3", todo.f + " midpoint " + todo.w1 + " < " + w + " < " + todo.w2);
    }
    br.midpoint_todo.clear();
    add_adjacent_chain_literals(br);
    dedupe(br);
  }
  return branches;
}

// ---------------------------------------------------------------------------
// Step 2 — negative-clause removal
// ---------------------------------------------------------------------------

namespace {

struct NegExpansion {
  std::vector<FlatLiteral> literals;                  // common witness literals
  std::vector<std::vector<FlatLiteral>> choices;      // pending disjunctions (one pick each)
  std::vector<OrderConstraint> constraints;
  std::vector<std::string> new_domain_vars;
};

// z1 <= x (or <) on the left, x <= z2 on the right; nothing at an infinity.
void add_bounds(NegExpansion& e, const FlatIv& iv, const std::string& x) {
  if (iv.lo.is_var()) {
    NumRel r = iv.lo_closed ? NumRel::Le : NumRel::Lt;
    e.literals.push_back(mk_cmp(r, FlatArg::var(iv.lo.name), FlatArg::var(x)));
    e.constraints.push_back({iv.lo.name, x, r});
  }
  if (iv.hi.is_var()) {
    NumRel r = iv.hi_closed ? NumRel::Le : NumRel::Lt;
    e.literals.push_back(mk_cmp(r, FlatArg::var(x), FlatArg::var(iv.hi.name)));
    e.constraints.push_back({x, iv.hi.name, r});
  }
}

}  // namespace

std::vector<Branch> step2_negatives(const Branch& input) {
  Branch base = input;
  NegExpansion e;

  std::vector<FlatLiteral> kept;
  for (const FlatLiteral& l : base.literals) {
    if (!l.neg) { kept.push_back(l); continue; }
    switch (l.kind) {
      case FlatLiteral::Kind::FunEq: {
        std::string x = base.fresh.make("x"), y1 = base.fresh.make("y"), y2 = base.fresh.make("y");
        add_bounds(e, l.iv, x);
        e.literals.push_back(mk_app(y1, l.f, x));
        e.literals.push_back(mk_app(y2, l.g, x));
        e.choices.push_back({mk_cmp(NumRel::Gt, FlatArg::var(y1), FlatArg::var(y2)),
                             mk_cmp(NumRel::Gt, FlatArg::var(y2), FlatArg::var(y1))});
        e.new_domain_vars.push_back(x);
        base.tag("2a", l.str());
        break;
      }
      case FlatLiteral::Kind::FunGt: {
        std::string x = base.fresh.make("x"), y1 = base.fresh.make("y"), y2 = base.fresh.make("y");
        add_bounds(e, l.iv, x);
        e.literals.push_back(mk_app(y1, l.f, x));
        e.literals.push_back(mk_app(y2, l.g, x));
        e.literals.push_back(mk_cmp(NumRel::Le, FlatArg::var(y1), FlatArg::var(y2)));
        e.new_domain_vars.push_back(x);
        base.tag("2b", l.str());
        break;
      }
      case FlatLiteral::Kind::DerivCmp: {
        std::string x = base.fresh.make("x"), y1 = base.fresh.make("y");
        add_bounds(e, l.iv, x);
        e.literals.push_back(mk_dapp(y1, l.f, x));
        NumRel nr = negate(l.rel);
        if (nr == NumRel::Ne) {
          e.choices.push_back({mk_cmp(NumRel::Gt, FlatArg::var(y1), l.z),
                               mk_cmp(NumRel::Lt, FlatArg::var(y1), l.z)});
        } else {
          e.literals.push_back(mk_cmp(nr, FlatArg::var(y1), l.z));
        }
        e.new_domain_vars.push_back(x);
        base.tag("2c", l.str());
        break;
      }
      case FlatLiteral::Kind::StrictUp:
      case FlatLiteral::Kind::StrictDown: {
        std::string x1 = base.fresh.make("x"), x2 = base.fresh.make("x");
        std::string y1 = base.fresh.make("y"), y2 = base.fresh.make("y");
        if (l.iv.lo.is_var()) {
          NumRel r = l.iv.lo_closed ? NumRel::Le : NumRel::Lt;
          e.literals.push_back(mk_cmp(r, FlatArg::var(l.iv.lo.name), FlatArg::var(x1)));
          e.constraints.push_back({l.iv.lo.name, x1, r});
        }
        e.literals.push_back(mk_cmp(NumRel::Lt, FlatArg::var(x1), FlatArg::var(x2)));
        e.constraints.push_back({x1, x2, NumRel::Lt});
        if (l.iv.hi.is_var()) {
          NumRel r = l.iv.hi_closed ? NumRel::Le : NumRel::Lt;
          e.literals.push_back(mk_cmp(r, FlatArg::var(x2), FlatArg::var(l.iv.hi.name)));
          e.constraints.push_back({x2, l.iv.hi.name, r});
        }
        e.literals.push_back(mk_app(y1, l.f, x1));
        e.literals.push_back(mk_app(y2, l.f, x2));
        e.literals.push_back(mk_cmp(l.kind == FlatLiteral::Kind::StrictUp ? NumRel::Ge : NumRel::Le,
                                    FlatArg::var(y1), FlatArg::var(y2)));
        e.new_domain_vars.push_back(x1);
        e.new_domain_vars.push_back(x2);
        base.tag("2d", l.str());
        break;
      }
      case FlatLiteral::Kind::Convex:
      case FlatLiteral::Kind::StrictConvex:
      case FlatLiteral::Kind::Concave:
      case FlatLiteral::Kind::StrictConcave: {
        std::string x1 = base.fresh.make("x"), x2 = base.fresh.make("x"), x3 = base.fresh.make("x");
        std::string y1 = base.fresh.make("y"), y2 = base.fresh.make("y"), y3 = base.fresh.make("y");
        if (l.iv.lo.is_var()) {
          NumRel r = l.iv.lo_closed ? NumRel::Le : NumRel::Lt;
          e.literals.push_back(mk_cmp(r, FlatArg::var(l.iv.lo.name), FlatArg::var(x1)));
          e.constraints.push_back({l.iv.lo.name, x1, r});
        }
        e.literals.push_back(mk_cmp(NumRel::Lt, FlatArg::var(x1), FlatArg::var(x2)));
        e.literals.push_back(mk_cmp(NumRel::Lt, FlatArg::var(x2), FlatArg::var(x3)));
        e.constraints.push_back({x1, x2, NumRel::Lt});
        e.constraints.push_back({x2, x3, NumRel::Lt});
        if (l.iv.hi.is_var()) {
          NumRel r = l.iv.hi_closed ? NumRel::Le : NumRel::Lt;
          e.literals.push_back(mk_cmp(r, FlatArg::var(x3), FlatArg::var(l.iv.hi.name)));
          e.constraints.push_back({x3, l.iv.hi.name, r});
        }
        e.literals.push_back(mk_app(y1, l.f, x1));
        e.literals.push_back(mk_app(y2, l.f, x2));
        e.literals.push_back(mk_app(y3, l.f, x3));
        // (y2-y1)(x3-x1) cmp (x2-x1)(y3-y1)
        std::string d1 = base.fresh.make("d"), e1 = base.fresh.make("d");
        std::string d2 = base.fresh.make("d"), e2 = base.fresh.make("d");
        std::string p1 = base.fresh.make("p"), p2 = base.fresh.make("p");
        auto diff = [&](const std::string& hi, const std::string& dname, const std::string& lo) {
          FlatLiteral a;  // hi = dname + lo
          a.kind = FlatLiteral::Kind::AddDef;
          a.z = FlatArg::var(hi);
          a.x = FlatArg::var(dname);
          a.y = FlatArg::var(lo);
          return a;
        };
        e.literals.push_back(diff(y2, d1, y1));
        e.literals.push_back(diff(x3, e1, x1));
        e.literals.push_back(diff(x2, d2, x1));
        e.literals.push_back(diff(y3, e2, y1));
        FlatLiteral m1;
        m1.kind = FlatLiteral::Kind::MulDef;
        m1.z = FlatArg::var(p1);
        m1.x = FlatArg::var(d1);
        m1.y = FlatArg::var(e1);
        FlatLiteral m2 = m1;
        m2.z = FlatArg::var(p2);
        m2.x = FlatArg::var(d2);
        m2.y = FlatArg::var(e2);
        e.literals.push_back(m1);
        e.literals.push_back(m2);
        NumRel r = l.kind == FlatLiteral::Kind::Convex        ? NumRel::Gt
                   : l.kind == FlatLiteral::Kind::StrictConvex ? NumRel::Ge
                   : l.kind == FlatLiteral::Kind::Concave      ? NumRel::Lt
                                                               : NumRel::Le;
        e.literals.push_back(mk_cmp(r, FlatArg::var(p1), FlatArg::var(p2)));
        e.new_domain_vars.push_back(x1);
        e.new_domain_vars.push_back(x2);
        e.new_domain_vars.push_back(x3);
        base.tag("2e", l.str());
        break;
      }
      default:
        throw std::logic_error("step2: unexpected negated literal " + l.str());
    }
  }

  if (e.new_domain_vars.empty() && e.choices.empty() && e.literals.empty()) return {base};
  base.literals = std::move(kept);

  // Expand the pending numeric disjunctions.
  std::vector<std::vector<FlatLiteral>> variants{{}};
  for (const auto& choice : e.choices) {
    std::vector<std::vector<FlatLiteral>> next;
    for (const auto& v : variants)
      for (const auto& pick : choice) {
        auto w = v;
        w.push_back(pick);
        next.push_back(std::move(w));
      }
    variants = std::move(next);
  }

  // Re-ordering: fan out over consistent chain insertions of the fresh
  // witness points.
  auto extensions = enumerate_chain_extensions(base.table.chain, e.new_domain_vars, e.constraints);

  std::vector<Branch> out;
  for (const auto& variant : variants) {
    for (const auto& ext : extensions) {
      Branch br = base;
      br.literals.insert(br.literals.end(), e.literals.begin(), e.literals.end());
      br.literals.insert(br.literals.end(), variant.begin(), variant.end());
      if (!ext.merged.empty()) br.literals = substitute_flat(br.literals, ext.merged);
      br.table.chain = ext.chain;
      for (const auto& [from, to] : ext.merged) br.merged[from] = to;
      add_adjacent_chain_literals(br);
      dedupe(br);
      // Syntactic consistency against the extended chain.
      bool ok = true;
      {
        std::map<std::string, int> pos;
        for (size_t i = 0; i < br.table.chain.size(); ++i) pos[br.table.chain[i]] = (int)i;
        for (const auto& l : br.literals) {
          if (l.kind != FlatLiteral::Kind::Cmp || !l.x.is_var() || !l.y.is_var()) continue;
          auto px = pos.find(l.x.name), py = pos.find(l.y.name);
          if (px == pos.end() || py == pos.end()) continue;
          switch (l.rel) {
            case NumRel::Lt: ok = px->second < py->second; break;
            case NumRel::Le: ok = px->second <= py->second; break;
            case NumRel::Gt: ok = px->second > py->second; break;
            case NumRel::Ge: ok = px->second >= py->second; break;
            case NumRel::Eq: ok = px->second == py->second; break;
            default: break;
          }
          if (!ok) break;
        }
      }
      if (ok) out.push_back(std::move(br));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Step 3 — explicit evaluation of function variables
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> branch_functions(const Branch& b) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& l : b.literals) {
    if (!l.f.empty() && seen.insert(l.f).second) out.push_back(l.f);
    if (!l.g.empty() && seen.insert(l.g).second) out.push_back(l.g);
  }
  return out;
}

}  // namespace

Branch step3_evaluate(const Branch& input) {
  Branch b = input;
  auto funs = branch_functions(b);
  if (funs.empty()) return b;

  const auto existing = b.literals;  // link only literals present before this step
  for (const auto& f : funs) {
    for (int j = 1; j <= b.table.r(); ++j) {
      b.literals.push_back(mk_app(b.table.y_name(f, j), f, b.table.chain[j - 1]));
      b.literals.push_back(mk_dapp(b.table.t_name(f, j), f, b.table.chain[j - 1]));
    }
  }
  for (const auto& l : existing) {
    if (l.kind != FlatLiteral::Kind::AppDef && l.kind != FlatLiteral::Kind::DAppDef) continue;
    int j = b.table.position(l.x.name);
    if (j == 0) throw std::logic_error("step3: application argument not in chain: " + l.str());
    const std::string stub = l.kind == FlatLiteral::Kind::AppDef ? b.table.y_name(l.f, j)
                                                                 : b.table.t_name(l.f, j);
    b.literals.push_back(mk_cmp(NumRel::Eq, l.z, FlatArg::var(stub)));
  }
  b.tag("3", "evaluate " + std::to_string(funs.size()) + " function(s) at " +
                 std::to_string(b.table.r()) + " point(s)");
  dedupe(b);
  return b;
}

// ---------------------------------------------------------------------------
// Step 4 — elimination of function variables
// ---------------------------------------------------------------------------

namespace {

struct Step4 {
  Branch& b;
  VarTable& t;
  std::vector<TPtr> added;

  Poly yv(const std::string& f, int i) { return Poly::var(t.y_name(f, i)); }
  Poly tv(const std::string& f, int i) { return Poly::var(t.t_name(f, i)); }
  Poly vv(int i) { return Poly::var(t.chain[i - 1]); }

  void add(TPtr n) { added.push_back(std::move(n)); }

  TPtr secant(const std::string& f, int j, NumRel rel, const Poly& rhs) {
    return t_divatom(yv(f, j + 1) - yv(f, j), vv(j + 1) - vv(j), rel, rhs);
  }

  // (secant_j = bound) -> (t_j = bound and t_{j+1} = bound)
  TPtr secant_guard(const std::string& f, int j, const Poly& bound) {
    return t_imp_n(secant(f, j, NumRel::Eq, bound),
                   t_and_n({t_polyatom(tv(f, j) - bound, NumRel::Eq),
                            t_polyatom(tv(f, j + 1) - bound, NumRel::Eq)}));
  }

  void gamma_cmp(const std::string& f, int side, NumRel rel, const FlatArg& bound) {
    Poly g = Poly::var(t.gamma_name(f, side));
    add(t_polyatom(g - poly_of_arg(bound), rel));
    b.gamma_bounds.push_back({f, side, rel, bound});
  }
  void gamma_gamma_eq(const std::string& f, const std::string& g, int side) {
    std::string gf = t.gamma_name(f, side), gg = t.gamma_name(g, side);
    add(t_polyatom(Poly::var(gf) - Poly::var(gg), NumRel::Eq));
    b.gamma_bounds.push_back({f, side, NumRel::Eq, FlatArg::var(gg)});
    b.gamma_bounds.push_back({g, side, NumRel::Eq, FlatArg::var(gf)});
  }

  void fun_eq(const FlatLiteral& l) {
    auto [lo, hi] = literal_index_range(t, l.iv);
    for (int i = lo; i <= hi; ++i) {
      add(t_polyatom(yv(l.f, i) - yv(l.g, i), NumRel::Eq));
      add(t_polyatom(tv(l.f, i) - tv(l.g, i), NumRel::Eq));
    }
    if (l.iv.lo.k == FlatEnd::K::NegInf) gamma_gamma_eq(l.f, l.g, 0);
    if (l.iv.hi.k == FlatEnd::K::PosInf) gamma_gamma_eq(l.f, l.g, 1);
    b.tag("4a", l.str());
  }

  void fun_gt(const FlatLiteral& l) {
    const bool lo_inf = l.iv.lo.k == FlatEnd::K::NegInf;
    const bool hi_inf = l.iv.hi.k == FlatEnd::K::PosInf;
    auto [lo, hi] = literal_index_range(t, l.iv);
    for (int i = lo; i <= hi; ++i) add(t_polyatom(yv(l.f, i) - yv(l.g, i), NumRel::Gt));
    if (lo_inf || hi_inf) {
      if (lo_inf) {
        add(t_polyatom(Poly::var(t.k_name(l.f, 0)) - Poly::var(t.k_name(l.g, 0)), NumRel::Ge));
        b.k_orders.push_back({0, l.f, l.g});
      }
      if (hi_inf) {
        add(t_polyatom(Poly::var(t.k_name(l.f, 1)) - Poly::var(t.k_name(l.g, 1)), NumRel::Ge));
        b.k_orders.push_back({1, l.f, l.g});
      }
      b.tag("4b2", l.str());
      return;
    }
    int p1 = t.position(l.iv.lo.name), p2 = t.position(l.iv.hi.name);
    if (p1 < p2) {
      if (!l.iv.lo_closed)
        add(t_polyatom(tv(l.f, p1) - tv(l.g, p1), NumRel::Ge));
      if (!l.iv.hi_closed)
        add(t_polyatom(tv(l.f, p2) - tv(l.g, p2), NumRel::Le));
    }
    b.tag("4b1", l.str());
  }

  void deriv_cmp(const FlatLiteral& l) {
    const Poly bound = poly_of_arg(l.z);
    const bool bounded_open = l.iv.lo.is_var() && l.iv.hi.is_var() &&
                              !(l.iv.lo_closed && l.iv.hi_closed);
    auto [lo, hi] = literal_index_range(t, l.iv);
    for (int i = lo; i <= hi; ++i) add(t_polyatom(tv(l.f, i) - bound, l.rel));
    int jlo = t.ind(l.iv.lo), jhi = t.ind(l.iv.hi) - 1;
    for (int j = jlo; j <= jhi; ++j) {
      add(secant(l.f, j, l.rel, bound));
      if (l.rel == NumRel::Le || l.rel == NumRel::Ge) add(secant_guard(l.f, j, bound));
    }
    if (!bounded_open) {
      if (l.iv.lo.k == FlatEnd::K::NegInf) gamma_cmp(l.f, 0, l.rel, l.z);
      if (l.iv.hi.k == FlatEnd::K::PosInf) gamma_cmp(l.f, 1, l.rel, l.z);
      b.tag("4c", l.str());
    } else {
      b.tag("4d", l.str());
    }
  }

  void strict_mono(const FlatLiteral& l) {
    const bool up = l.kind == FlatLiteral::Kind::StrictUp;
    auto [lo, hi] = literal_index_range(t, l.iv);
    for (int i = lo; i <= hi; ++i) add(t_polyatom(tv(l.f, i), up ? NumRel::Ge : NumRel::Le));
    for (int j = lo; j < hi; ++j)
      add(t_polyatom(yv(l.f, j + 1) - yv(l.f, j), up ? NumRel::Gt : NumRel::Lt));
    if (l.iv.lo.k == FlatEnd::K::NegInf)
      gamma_cmp(l.f, 0, up ? NumRel::Gt : NumRel::Lt, FlatArg::zero());
    if (l.iv.hi.k == FlatEnd::K::PosInf)
      gamma_cmp(l.f, 1, up ? NumRel::Gt : NumRel::Lt, FlatArg::zero());
    b.tag("4e", l.str());
  }

  void convexity(const FlatLiteral& l) {
    const bool strict = l.kind == FlatLiteral::Kind::StrictConvex ||
                        l.kind == FlatLiteral::Kind::StrictConcave;
    const bool convex = l.kind == FlatLiteral::Kind::Convex ||
                        l.kind == FlatLiteral::Kind::StrictConvex;
    auto [lo, hi] = literal_index_range(t, l.iv);
    for (int i = lo; i < hi; ++i) {
      NumRel lower = strict ? NumRel::Gt : NumRel::Ge;  // secant vs t_i for convex
      NumRel upper = strict ? NumRel::Lt : NumRel::Le;  // secant vs t_{i+1}
      if (!convex) std::swap(lower, upper);
      add(secant(l.f, i, lower, tv(l.f, i)));
      add(secant(l.f, i, upper, tv(l.f, i + 1)));
      if (!strict) {
        // (secant = t_i or secant = t_{i+1}) -> t_i = t_{i+1}
        add(t_imp_n(t_or_n({secant(l.f, i, NumRel::Eq, tv(l.f, i)),
                            secant(l.f, i, NumRel::Eq, tv(l.f, i + 1))}),
                    t_polyatom(tv(l.f, i) - tv(l.f, i + 1), NumRel::Eq)));
      }
    }
    if (l.iv.lo.k == FlatEnd::K::NegInf) {
      NumRel r = convex ? (strict ? NumRel::Lt : NumRel::Le) : (strict ? NumRel::Gt : NumRel::Ge);
      gamma_cmp(l.f, 0, r, FlatArg::var(t.t_name(l.f, 1)));
    }
    if (l.iv.hi.k == FlatEnd::K::PosInf) {
      NumRel r = convex ? (strict ? NumRel::Gt : NumRel::Ge) : (strict ? NumRel::Lt : NumRel::Le);
      gamma_cmp(l.f, 1, r, FlatArg::var(t.t_name(l.f, t.r())));
    }
    b.tag(strict ? "4g" : "4f", l.str());
  }

  void k_rules() {
    if (b.k_orders.empty()) return;
    // (i) box every k variable.
    std::set<std::string> kvars;
    for (const auto& ko : b.k_orders) {
      kvars.insert(t.k_name(ko.f, ko.side));
      kvars.insert(t.k_name(ko.g, ko.side));
    }
    for (const auto& k : kvars) {
      add(t_polyatom(Poly::var(k) + Poly::constant(1), NumRel::Ge));
      add(t_polyatom(Poly::var(k) - Poly::constant(1), NumRel::Le));
    }
    // (ii) transitive closure, each new pair also ordering the end values.
    auto have = [&](int side, const std::string& f, const std::string& g) {
      for (const auto& ko : b.k_orders)
        if (ko.side == side && ko.f == f && ko.g == g) return true;
      return false;
    };
    bool changed = true;
    while (changed) {
      changed = false;
      auto snapshot = b.k_orders;
      for (const auto& a : snapshot)
        for (const auto& c : snapshot) {
          if (a.side != c.side || a.g != c.f || a.f == c.g) continue;
          if (have(a.side, a.f, c.g)) continue;
          b.k_orders.push_back({a.side, a.f, c.g});
          add(t_polyatom(Poly::var(t.k_name(a.f, a.side)) - Poly::var(t.k_name(c.g, a.side)),
                         NumRel::Ge));
          int yi = a.side == 0 ? 1 : t.r();
          add(t_polyatom(yv(a.f, yi) - yv(c.g, yi), NumRel::Gt));
          changed = true;
        }
    }
    // (iii) gamma bounds transported along the k order.
    for (const auto& ko : b.k_orders) {
      for (const auto& gf : b.gamma_bounds) {
        if (gf.f != ko.f || gf.side != ko.side) continue;
        for (const auto& gg : b.gamma_bounds) {
          if (gg.f != ko.g || gg.side != ko.side) continue;
          if (ko.side == 0) {
            bool up = gf.rel == NumRel::Ge || gf.rel == NumRel::Gt || gf.rel == NumRel::Eq;
            bool dn = gg.rel == NumRel::Le || gg.rel == NumRel::Lt || gg.rel == NumRel::Eq;
            if (up && dn)
              add(t_polyatom(poly_of_arg(gf.bound) - poly_of_arg(gg.bound), NumRel::Le));
          } else {
            bool dn = gf.rel == NumRel::Le || gf.rel == NumRel::Lt || gf.rel == NumRel::Eq;
            bool up = gg.rel == NumRel::Ge || gg.rel == NumRel::Gt || gg.rel == NumRel::Eq;
            if (dn && up)
              add(t_polyatom(poly_of_arg(gf.bound) - poly_of_arg(gg.bound), NumRel::Ge));
          }
        }
      }
    }
    b.tag("4h", std::to_string(b.k_orders.size()) + " k-order pair(s)");
  }
};

}  // namespace

TPtr step4_eliminate(Branch& branch) {
  std::vector<TPtr> numeric;
  Step4 s{branch, branch.table, {}};

  for (const FlatLiteral& l : branch.literals) {
    if (l.neg) throw std::logic_error("step4: negated literal survived step 2: " + l.str());
    switch (l.kind) {
      case FlatLiteral::Kind::AddDef:
        numeric.push_back(t_polyatom(poly_of_arg(l.z) - poly_of_arg(l.x) - poly_of_arg(l.y),
                                     NumRel::Eq));
        break;
      case FlatLiteral::Kind::MulDef:
        numeric.push_back(t_polyatom(poly_of_arg(l.z) - poly_of_arg(l.x) * poly_of_arg(l.y),
                                     NumRel::Eq));
        break;
      case FlatLiteral::Kind::Cmp:
        numeric.push_back(t_polyatom(poly_of_arg(l.x) - poly_of_arg(l.y), l.rel));
        break;
      case FlatLiteral::Kind::AppDef:
      case FlatLiteral::Kind::DAppDef:
        break;  // dropped (step 3 recorded the links)
      case FlatLiteral::Kind::FunEq: s.fun_eq(l); break;
      case FlatLiteral::Kind::FunGt: s.fun_gt(l); break;
      case FlatLiteral::Kind::DerivCmp: s.deriv_cmp(l); break;
      case FlatLiteral::Kind::StrictUp:
      case FlatLiteral::Kind::StrictDown: s.strict_mono(l); break;
      case FlatLiteral::Kind::Convex:
      case FlatLiteral::Kind::StrictConvex:
      case FlatLiteral::Kind::Concave:
      case FlatLiteral::Kind::StrictConcave: s.convexity(l); break;
    }
  }
  s.k_rules();
  branch.arith = s.added;

  std::vector<TPtr> all = numeric;
  all.insert(all.end(), s.added.begin(), s.added.end());
  // Dedupe identical conjuncts, keeping order.
  std::vector<TPtr> uniq;
  std::set<std::string> seen;
  for (auto& n : all)
    if (seen.insert(tarski_str(n)).second) uniq.push_back(std::move(n));
  return t_and_n(std::move(uniq));
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

std::vector<PipelineResult> pipeline(const FormulaPtr& formula, PipelineMode mode,
                                     const PipelineOptions& opts, PipelineStages* stages) {
  FormulaPtr phi = mode == PipelineMode::Validity ? f_not(formula) : formula;
  phi = expand_derived(phi);
  auto dnf = to_dnf(phi);
  if (stages) stages->dnf = dnf;

  std::vector<PipelineResult> results;
  FreshNames fresh;
  for (const auto& disjunct : dnf) {
    auto flat = flatten(disjunct, fresh);
    auto ordered = enumerate_orderings(flat, opts.branch_cap);
    for (const auto& oc : ordered) {
      size_t oc_index = stages ? stages->ordered.size() : 0;
      if (stages) stages->ordered.push_back(oc);
      Branch b = branch_of(oc, fresh);
      // The index function needs r >= 1 whenever function literals exist.
      bool has_fun = false;
      for (const auto& l : b.literals) has_fun |= l.is_fun_literal();
      if (has_fun && b.table.chain.empty())
        b.table.chain.push_back(b.fresh.make("v"));

      for (Branch& b1 : step1_endpoints(b)) {
        if (stages) stages->after_step1.push_back({oc_index, b1});
        for (Branch& b2 : step2_negatives(b1)) {
          Branch b3 = step3_evaluate(b2);
          TPtr phi4 = step4_eliminate(b3);
          results.push_back({std::move(phi4), std::move(b3)});
        }
      }
    }
  }
  return results;
}

}  // namespace rdf
