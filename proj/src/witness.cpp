#include "rdf/witness.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

namespace rdf {

// ---------------------------------------------------------------------------
// select_interval_points
// ---------------------------------------------------------------------------

namespace {

bool pair_compatible(const IntervalQ& lo, const IntervalQ& hi) {
  // exists x in lo, y in hi with x <= y
  if (lo.lo < hi.hi) return true;
  return lo.lo == hi.hi && lo.lo_closed && hi.hi_closed;
}

}  // namespace

std::map<int, Rat> select_interval_points(const std::map<int, IntervalQ>& intervals,
                                          const std::vector<std::pair<int, int>>& leq) {
  std::vector<int> ids;
  for (const auto& [k, iv] : intervals) {
    if (iv.empty()) throw IncompatibleOrder("interval " + std::to_string(k) + " is empty");
    ids.push_back(k);
  }
  std::map<int, int> pos;
  for (size_t i = 0; i < ids.size(); ++i) pos[ids[i]] = static_cast<int>(i);
  const size_t n = ids.size();

  // Reflexive-transitive closure.
  std::vector<std::vector<bool>> le(n, std::vector<bool>(n, false));
  for (size_t i = 0; i < n; ++i) le[i][i] = true;
  for (const auto& [j, i] : leq) {
    if (!pos.count(j) || !pos.count(i))
      throw IncompatibleOrder("order references unknown interval index");
    le[pos.at(j)][pos.at(i)] = true;
  }
  for (size_t k = 0; k < n; ++k)
    for (size_t a = 0; a < n; ++a)
      if (le[a][k])
        for (size_t b = 0; b < n; ++b)
          if (le[k][b]) le[a][b] = true;

  // Mutually ordered indices must share one point: intersect their intervals.
  // With `le` transitively closed, mutual reachability is an equivalence.
  std::vector<int> comp(n);
  for (size_t i = 0; i < n; ++i) {
    size_t rep = i;
    for (size_t j = 0; j < i; ++j)
      if (le[i][j] && le[j][i]) { rep = j; break; }
    comp[i] = static_cast<int>(rep);
  }

  struct Node {
    IntervalQ iv;
    std::vector<size_t> members;
  };
  std::map<int, Node> nodes;
  for (size_t i = 0; i < n; ++i) {
    auto it = nodes.find(comp[i]);
    if (it == nodes.end()) {
      nodes[comp[i]] = {intervals.at(ids[i]), {i}};
    } else {
      IntervalQ& a = it->second.iv;
      const IntervalQ& b = intervals.at(ids[i]);
      if (b.lo > a.lo || (b.lo == a.lo && !b.lo_closed)) { a.lo = b.lo; a.lo_closed = b.lo_closed; }
      if (b.hi < a.hi || (b.hi == a.hi && !b.hi_closed)) { a.hi = b.hi; a.hi_closed = b.hi_closed; }
      it->second.members.push_back(i);
    }
  }
  for (auto& [rep, node] : nodes)
    if (node.iv.empty())
      throw IncompatibleOrder("mutually ordered intervals have empty intersection");

  // Check the compatibility precondition on the closure.
  for (size_t a = 0; a < n; ++a)
    for (size_t b = 0; b < n; ++b)
      if (le[a][b] && !pair_compatible(nodes.at(comp[a]).iv, nodes.at(comp[b]).iv))
        throw IncompatibleOrder("no x <= y between related intervals " + std::to_string(ids[a]) +
                                " <= " + std::to_string(ids[b]));

  // Topological order of the condensation, then the inductive formula.
  std::vector<int> reps;
  for (const auto& [rep, node] : nodes) reps.push_back(rep);
  auto strictly_below = [&](int x, int y) {  // node x < node y
    return le[x][y] && !le[y][x];
  };
  {
    std::vector<int> order;
    std::set<int> placed;
    while (order.size() < reps.size()) {
      bool progress = false;
      for (int r : reps) {
        if (placed.count(r)) continue;
        bool ready = true;
        for (int q : reps)
          if (q != r && !placed.count(q) && strictly_below(q, r)) { ready = false; break; }
        if (ready) {
          order.push_back(r);
          placed.insert(r);
          progress = true;
        }
      }
      if (!progress) throw IncompatibleOrder("cyclic interval order");
    }
    reps = order;
  }

  std::map<int, Rat> phi_of_rep;
  for (int rep : reps) {
    const IntervalQ& iv = nodes.at(rep).iv;
    // beta_bar: least sup among strictly greater nodes; phi_bar: greatest phi
    // among strictly smaller ones.
    bool has_bb = false, has_pb = false;
    Rat beta_bar, phi_bar;
    for (int other : reps) {
      if (other == rep) continue;
      if (strictly_below(rep, other)) {
        const Rat& b = nodes.at(other).iv.hi;
        if (!has_bb || b < beta_bar) { beta_bar = b; has_bb = true; }
      }
      if (strictly_below(other, rep) && phi_of_rep.count(other)) {
        const Rat& p = phi_of_rep.at(other);
        if (!has_pb || p > phi_bar) { phi_bar = p; has_pb = true; }
      }
    }
    Rat lo = iv.lo;
    if (has_pb && phi_bar > lo) lo = phi_bar;
    Rat hi = iv.hi;
    if (has_bb && beta_bar < hi) hi = beta_bar;
    Rat phi = (lo + hi) / 2;
    if (!iv.contains(phi))
      throw IncompatibleOrder("selection formula left its interval (precondition violated)");
    phi_of_rep[rep] = phi;
  }
  // Monotonicity sanity on the closure.
  for (size_t a = 0; a < n; ++a)
    for (size_t b = 0; b < n; ++b)
      if (le[a][b] && phi_of_rep.at(comp[a]) > phi_of_rep.at(comp[b]))
        throw IncompatibleOrder("selection not monotone (precondition violated)");

  std::map<int, Rat> out;
  for (size_t i = 0; i < n; ++i) out[ids[i]] = phi_of_rep.at(comp[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Witness plan: breakpoint tables extended with refined tails
// ---------------------------------------------------------------------------

namespace {

Rat model_value(const NumericModel& m, const std::string& name) {
  auto it = m.values.find(name);
  return it == m.values.end() ? Rat(0) : it->second;  // unconstrained stubs default to 0
}
Rat arg_value(const NumericModel& m, const FlatArg& a) {
  switch (a.k) {
    case FlatArg::K::Var: return model_value(m, a.name);
    case FlatArg::K::Zero: return 0;
    case FlatArg::K::One: return 1;
  }
  return 0;
}

struct FnData {
  std::vector<Rat> eta, val, slo;  // extended breakpoint data
  Rat gl, gr;                      // tail slopes actually used
  bool lref = false, rref = false;
  int off = 0;  // chain index j (1-based) -> array index j-1+off

  int idx(int j) const { return j - 1 + off; }
};

// Open/closed rational bound set, used while choosing the synthetic tail
// targets.
struct RatRange {
  bool has_lo = false, has_hi = false;
  Rat lo, hi;
  bool lo_strict = false, hi_strict = false;

  void bound_lo(const Rat& v, bool strict) {
    if (!has_lo || v > lo || (v == lo && strict)) { lo = v; lo_strict = strict; has_lo = true; }
  }
  void bound_hi(const Rat& v, bool strict) {
    if (!has_hi || v < hi || (v == hi && strict)) { hi = v; hi_strict = strict; has_hi = true; }
  }
  bool admits(const Rat& v) const {
    if (has_lo && (v < lo || (v == lo && lo_strict))) return false;
    if (has_hi && (v > hi || (v == hi && hi_strict))) return false;
    return true;
  }
  // default if admissible, else the midpoint; throws when empty
  Rat pick(const Rat& preferred, const std::string& what) const {
    if (admits(preferred)) return preferred;
    if (!has_lo || !has_hi) {
      if (has_lo) return lo_strict ? Rat(lo + 1) : lo;
      if (has_hi) return hi_strict ? Rat(hi - 1) : hi;
      return preferred;
    }
    if (lo > hi || (lo == hi && (lo_strict || hi_strict)))
      throw ExistenceViolation("no admissible value for " + what);
    return (lo + hi) / 2;
  }
};

struct Plan {
  std::map<std::string, FnData> fn;
  int r = 0;
};

std::vector<std::string> plan_functions(const Branch& b) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& l : b.literals) {
    if (!l.f.empty() && seen.insert(l.f).second) out.push_back(l.f);
    if (!l.g.empty() && seen.insert(l.g).second) out.push_back(l.g);
  }
  return out;
}

// The synthetic tail construction for one side. side 1 = right ([eta_r, oo)),
// side 0 = left ((-oo, eta_1]).
void refine_side(const Branch& b, const NumericModel& model, Plan& plan, int side) {
  // Functions with order-at-infinity tokens on this side.
  std::set<std::string> in_k;
  for (const auto& ko : b.k_orders)
    if (ko.side == side) {
      in_k.insert(ko.f);
      in_k.insert(ko.g);
    }
  if (in_k.empty()) return;

  // Tail groups: (f = g) on an interval unbounded on this side forces
  // identical tails.
  std::map<std::string, std::string> parent;
  std::function<std::string(const std::string&)> find = [&](const std::string& x) -> std::string {
    auto it = parent.find(x);
    if (it == parent.end() || it->second == x) return x;
    return it->second = find(it->second);
  };
  auto unite = [&](const std::string& a, const std::string& c) { parent[find(a)] = find(c); };
  for (const auto& l : b.literals) {
    if (l.kind != FlatLiteral::Kind::FunEq) continue;
    bool unb = side == 1 ? l.iv.hi.k == FlatEnd::K::PosInf : l.iv.lo.k == FlatEnd::K::NegInf;
    if (!unb) continue;
    if (in_k.count(l.f) || in_k.count(l.g)) {
      in_k.insert(l.f);
      in_k.insert(l.g);
      unite(l.f, l.g);
    }
  }
  auto group_of = [&](const std::string& f) { return find(f); };

  // Admissible slope interval per group, from the gamma bounds.
  std::vector<Rat> mu_values;
  std::map<std::string, IntervalQ> ivs;  // group -> interval
  std::map<std::string, int> group_id;
  std::vector<std::string> groups;
  for (const auto& f : in_k) {
    std::string g = group_of(f);
    if (!group_id.count(g)) {
      group_id[g] = static_cast<int>(groups.size());
      groups.push_back(g);
    }
  }
  for (const auto& gb : b.gamma_bounds)
    if (gb.side == side && in_k.count(gb.f)) mu_values.push_back(arg_value(model, gb.bound));
  Rat mlo = 0, mhi = 0;
  if (!mu_values.empty()) {
    mlo = *std::min_element(mu_values.begin(), mu_values.end());
    mhi = *std::max_element(mu_values.begin(), mu_values.end());
  }
  for (const auto& g : groups) ivs[g] = IntervalQ{Rat(mlo - 1), Rat(mhi + 1), true, true};
  for (const auto& gb : b.gamma_bounds) {
    if (gb.side != side || !in_k.count(gb.f)) continue;
    IntervalQ& iv = ivs[group_of(gb.f)];
    Rat v = arg_value(model, gb.bound);
    auto raise = [&](bool closed) {
      if (v > iv.lo || (v == iv.lo && iv.lo_closed && !closed)) { iv.lo = v; iv.lo_closed = closed; }
    };
    auto lower = [&](bool closed) {
      if (v < iv.hi || (v == iv.hi && iv.hi_closed && !closed)) { iv.hi = v; iv.hi_closed = closed; }
    };
    switch (gb.rel) {
      case NumRel::Ge: raise(true); break;
      case NumRel::Gt: raise(false); break;
      case NumRel::Le: lower(true); break;
      case NumRel::Lt: lower(false); break;
      case NumRel::Eq: raise(true); lower(true); break;
      default: break;
    }
  }

  // Monotone slope selection. On the right, k_f >= k_g makes f's slope the
  // larger one; on the left the smaller one.
  std::map<int, IntervalQ> sel_ivs;
  for (const auto& g : groups) sel_ivs[group_id[g]] = ivs[g];
  std::vector<std::pair<int, int>> leq;
  for (const auto& ko : b.k_orders) {
    if (ko.side != side) continue;
    int f = group_id[group_of(ko.f)], g = group_id[group_of(ko.g)];
    if (f == g) continue;
    if (side == 1)
      leq.push_back({g, f});  // slope(g) <= slope(f)
    else
      leq.push_back({f, g});
  }
  auto phis = select_interval_points(sel_ivs, leq);

  // Band neighbors along the k order (transitively closed in step 4h).
  // Anchor data is snapshotted before any tail is rebuilt.
  std::map<std::string, std::pair<Rat, Rat>> anchors;
  for (const auto& f : in_k) {
    const FnData& d = plan.fn.at(f);
    anchors[f] = side == 1 ? std::make_pair(d.val.back(), d.slo.back())
                           : std::make_pair(d.val.front(), d.slo.front());
  }
  auto anchor_val = [&](const std::string& f) { return anchors.at(f).first; };
  auto anchor_slo = [&](const std::string& f) { return anchors.at(f).second; };

  for (const auto& f : in_k) {
    FnData& d = plan.fn.at(f);
    Rat phi = phis.at(group_id[group_of(f)]);
    Rat ytil = anchor_val(f), ttil = anchor_slo(f);

    if (phi == ttil) {
      // Straight tail: slope phi through the anchor; synthetic breakpoint on
      // the center line keeps the group geometry uniform.
      Rat yhat = ytil + (side == 1 ? phi : -phi);
      Rat that = phi;
      if (side == 1) {
        d.eta.push_back(d.eta.back() + 1);
        d.val.push_back(yhat);
        d.slo.push_back(that);
        d.gr = phi;
        d.rref = true;
      } else {
        d.eta.insert(d.eta.begin(), d.eta.front() - 1);
        d.val.insert(d.val.begin(), yhat);
        d.slo.insert(d.slo.begin(), that);
        d.gl = phi;
        d.lref = true;
        d.off = 1;
      }
      continue;
    }

    // Band: halfway to the nearest neighbor above/below in the k order.
    Rat y_sup = ytil + 1, y_inf = ytil - 1;
    bool has_above = false, has_below = false;
    for (const auto& ko : b.k_orders) {
      if (ko.side != side) continue;
      if (ko.f == f && group_of(ko.g) != group_of(f)) {
        Rat v = anchor_val(ko.g);
        if (!has_below || v > y_inf) y_inf = v;
        has_below = true;
      }
      if (ko.g == f && group_of(ko.f) != group_of(f)) {
        Rat v = anchor_val(ko.f);
        if (!has_above || v < y_sup) y_sup = v;
        has_above = true;
      }
    }
    Rat gup = (y_sup - ytil) / 2;  // band half-widths
    Rat gdn = (ytil - y_inf) / 2;
    if (gup <= 0 || gdn <= 0)
      throw ExistenceViolation("tail band collapsed for " + f + " (side " +
                               std::to_string(side) + ")");

    // chord: slope of the synthetic segment taken rightward; on the left the
    // anchor sits at its right end.
    RatRange chord_range, that_range;
    // Band containment for the breakpoint value.
    if (side == 1) {
      chord_range.bound_lo(phi - gdn, true);
      chord_range.bound_hi(phi + gup, true);
    } else {
      chord_range.bound_lo(phi - gup, true);
      chord_range.bound_hi(phi + gdn, true);
    }

    // Constraints induced by the other literals unbounded on this side.
    bool want_convex = false, want_concave = false;
    for (const auto& l : b.literals) {
      if (l.f != f && l.g != f) continue;
      if (!l.has_interval()) continue;
      bool unb = side == 1 ? l.iv.hi.k == FlatEnd::K::PosInf : l.iv.lo.k == FlatEnd::K::NegInf;
      if (!unb) continue;
      switch (l.kind) {
        case FlatLiteral::Kind::DerivCmp: {
          Rat bnd = arg_value(model, l.z);
          switch (l.rel) {
            case NumRel::Ge:
            case NumRel::Gt:
              chord_range.bound_lo(bnd, true);
              that_range.bound_lo(bnd, l.rel == NumRel::Gt);
              break;
            case NumRel::Le:
            case NumRel::Lt:
              chord_range.bound_hi(bnd, true);
              that_range.bound_hi(bnd, l.rel == NumRel::Lt);
              break;
            case NumRel::Eq:
              throw ExistenceViolation("derivative pinned on an unbounded interval should "
                                       "have produced a straight tail");
            default: break;
          }
          break;
        }
        case FlatLiteral::Kind::StrictUp:
          chord_range.bound_lo(0, true);
          that_range.bound_lo(0, false);
          break;
        case FlatLiteral::Kind::StrictDown:
          chord_range.bound_hi(0, true);
          that_range.bound_hi(0, false);
          break;
        case FlatLiteral::Kind::Convex:
        case FlatLiteral::Kind::StrictConvex:
          want_convex = true;
          if (side == 1) chord_range.bound_lo(ttil, true);
          else chord_range.bound_hi(ttil, true);
          break;
        case FlatLiteral::Kind::Concave:
        case FlatLiteral::Kind::StrictConcave:
          want_concave = true;
          if (side == 1) chord_range.bound_hi(ttil, true);
          else chord_range.bound_lo(ttil, true);
          break;
        default:
          break;
      }
    }
    // Reserve room so the t-hat interval below stays nonempty.
    if (want_convex) {
      if (side == 1) chord_range.bound_hi(phi + gup / 2, false);
      else chord_range.bound_lo(phi - gup / 2, false);
    }
    if (want_concave) {
      if (side == 1) chord_range.bound_lo(phi - gdn / 2, false);
      else chord_range.bound_hi(phi + gdn / 2, false);
    }

    // Midpoint targets as the preferred values.
    Rat chord_pref = phi < ttil ? Rat(phi + gup / 2) : Rat(phi - gdn / 2);
    if (side == 0) chord_pref = phi < ttil ? Rat(phi - gup / 2) : Rat(phi + gdn / 2);
    Rat chord = chord_range.pick(chord_pref, "tail chord of " + f);

    Rat yhat = side == 1 ? Rat(ytil + chord) : Rat(ytil - chord);
    // Band containment for the tail slope target (tail stays strictly
    // between the neighbor lines).
    Rat up_room = side == 1 ? Rat(phi + gup - chord) : Rat(chord - (phi - gup));
    Rat dn_room = side == 1 ? Rat(chord - (phi - gdn)) : Rat((phi + gdn) - chord);
    that_range.bound_lo(phi - (side == 1 ? dn_room : up_room), true);
    that_range.bound_hi(phi + (side == 1 ? up_room : dn_room), true);
    if (want_convex) {
      if (side == 1) that_range.bound_lo(chord, true);
      else that_range.bound_hi(chord, true);
    }
    if (want_concave) {
      if (side == 1) that_range.bound_hi(chord, true);
      else that_range.bound_lo(chord, true);
    }
    Rat room_hi = side == 1 ? up_room : dn_room;  // head room above phi
    Rat room_lo = side == 1 ? dn_room : up_room;  // head room below phi
    Rat that_pref = (phi < ttil) == (side == 1) ? Rat(phi + room_hi / 2) : Rat(phi - room_lo / 2);
    Rat that = that_range.pick(that_pref, "tail slope of " + f);

    if (side == 1) {
      d.eta.push_back(d.eta.back() + 1);
      d.val.push_back(yhat);
      d.slo.push_back(that);
      d.gr = phi;
      d.rref = true;
    } else {
      d.eta.insert(d.eta.begin(), d.eta.front() - 1);
      d.val.insert(d.val.begin(), yhat);
      d.slo.insert(d.slo.begin(), that);
      d.gl = phi;
      d.lref = true;
      d.off = 1;
    }
  }
}

Plan make_plan(const Branch& b, const NumericModel& model) {
  Plan plan;
  plan.r = b.table.r();
  if (plan.r == 0) return plan;

  std::vector<Rat> etas;
  for (const auto& v : b.table.chain) etas.push_back(model_value(model, v));
  for (size_t i = 0; i + 1 < etas.size(); ++i)
    if (!(etas[i] < etas[i + 1]))
      throw ExistenceViolation("model does not respect the chain order");

  for (const auto& f : plan_functions(b)) {
    FnData d;
    d.eta = etas;
    for (int j = 1; j <= plan.r; ++j) {
      const std::string* y = b.table.find_y(f, j);
      const std::string* t = b.table.find_t(f, j);
      d.val.push_back(y ? model_value(model, *y) : Rat(0));
      d.slo.push_back(t ? model_value(model, *t) : Rat(0));
    }
    const std::string* g0 = b.table.find_gamma(f, 0);
    const std::string* gr = b.table.find_gamma(f, 1);
    d.gl = g0 ? model_value(model, *g0) : d.slo.front();
    d.gr = gr ? model_value(model, *gr) : d.slo.back();
    plan.fn.emplace(f, std::move(d));
  }
  refine_side(b, model, plan, 1);
  refine_side(b, model, plan, 0);
  return plan;
}

Rat theta_of(const FnData& d, size_t i, const Rat& u) {
  return (d.eta[i + 1] - d.eta[i]) * u - (d.val[i + 1] - d.val[i]);
}

}  // namespace

// ---------------------------------------------------------------------------
// alpha_bound
// ---------------------------------------------------------------------------

AlphaBound alpha_bound(const Branch& phi3, const NumericModel& model) {
  Plan plan = make_plan(phi3, model);
  std::set<Rat> mags;
  auto put = [&](const Rat& x) {
    if (x != 0) mags.insert(rat_abs(x));
  };

  // A1: slope defects of every interpolation interval.
  for (const auto& [f, d] : plan.fn)
    for (size_t i = 0; i + 1 < d.eta.size(); ++i) {
      put(theta_of(d, i, d.slo[i]));
      put(theta_of(d, i, d.slo[i + 1]));
    }

  const VarTable& t = phi3.table;
  for (const auto& l : phi3.literals) {
    if (!l.has_interval()) continue;
    switch (l.kind) {
      case FlatLiteral::Kind::FunGt: {
        // A2: half the separation at every covered breakpoint.
        const FnData& df = plan.fn.at(l.f);
        const FnData& dg = plan.fn.at(l.g);
        auto [lo, hi] = literal_index_range(t, l.iv);
        for (int j = lo; j <= hi; ++j)
          put((df.val[df.idx(j)] - dg.val[dg.idx(j)]) / 2);
        if (l.iv.hi.k == FlatEnd::K::PosInf && df.rref && dg.rref)
          put((df.val.back() - dg.val.back()) / 2);
        if (l.iv.lo.k == FlatEnd::K::NegInf && df.lref && dg.lref)
          put((df.val.front() - dg.val.front()) / 2);
        break;
      }
      case FlatLiteral::Kind::DerivCmp:
      case FlatLiteral::Kind::StrictUp:
      case FlatLiteral::Kind::StrictDown: {
        // A3 / A4: slope defect of the bound (0 for monotonicity) on every
        // covered interpolation interval.
        const FnData& d = plan.fn.at(l.f);
        Rat u = l.kind == FlatLiteral::Kind::DerivCmp ? arg_value(model, l.z) : Rat(0);
        int jlo = t.ind(l.iv.lo), jhi = t.ind(l.iv.hi) - 1;
        for (int j = jlo; j <= jhi; ++j) put(theta_of(d, d.idx(j), u));
        if (l.iv.hi.k == FlatEnd::K::PosInf && d.rref)
          put(theta_of(d, d.eta.size() - 2, u));
        if (l.iv.lo.k == FlatEnd::K::NegInf && d.lref) put(theta_of(d, 0, u));
        break;
      }
      default:
        break;
    }
  }

  AlphaBound out;
  out.magnitudes.assign(mags.begin(), mags.end());
  if (out.magnitudes.empty()) {
    out.m = 0;
    out.sup_interval = 0;
  } else {
    out.m = out.magnitudes.front() / 2;
    out.sup_interval = out.m / 8;
  }
  return out;
}

// ---------------------------------------------------------------------------
// build_witness
// ---------------------------------------------------------------------------

std::map<std::string, WitnessFunction> build_witness(const Branch& phi3,
                                                     const NumericModel& model,
                                                     const Rat& alpha) {
  Plan plan = make_plan(phi3, model);
  std::map<std::string, WitnessFunction> out;
  for (auto& [f, d] : plan.fn) {
    WitnessFunction w;
    w.fname = f;
    w.eta = d.eta;
    w.value = d.val;
    w.slope = d.slo;
    w.gamma_left = d.gl;
    w.gamma_right = d.gr;
    w.left_refined = d.lref;
    w.right_refined = d.rref;
    for (size_t i = 0; i + 1 < d.eta.size(); ++i) {
      Rat th1 = theta_of(d, i, d.slo[i]);
      Rat th2 = theta_of(d, i, d.slo[i + 1]);
      if (th1 == 0 && th2 == 0) {
        w.piece.push_back(ElasticSpec{});  // null
        continue;
      }
      // alpha carries the magnitude; the sign follows the slope defects.
      int s = th1 != 0 ? sign(th1) : sign(th1 + th2);
      Rat a = rat_abs(alpha) * s;
      try {
        w.piece.push_back(make_defined(a, th1, th2));
      } catch (const NoExistence& e) {
        throw ExistenceViolation("piece " + std::to_string(i) + " of " + f + ": " + e.what());
      }
    }
    out.emplace(f, std::move(w));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

double eval_witness(const WitnessFunction& w, double x) {
  const size_t n = w.eta.size();
  const double e0 = to_double(w.eta.front()), er = to_double(w.eta.back());
  if (x < e0) {
    double y1 = to_double(w.value.front()), t1 = to_double(w.slope.front());
    double gl = to_double(w.gamma_left);
    return y1 + gl * (x - e0) + (t1 - gl) * (std::exp(x - e0) - 1);
  }
  if (x >= er) {
    double yr = to_double(w.value.back()), tr = to_double(w.slope.back());
    double gr = to_double(w.gamma_right);
    return yr + (tr - gr) * (1 - std::exp(er - x)) + gr * (x - er);
  }
  size_t i = 0;
  while (i + 2 < n && x >= to_double(w.eta[i + 1])) ++i;
  double a = to_double(w.eta[i]), b = to_double(w.eta[i + 1]);
  double p = (x - a) / (b - a);
  double ya = to_double(w.value[i]), yb = to_double(w.value[i + 1]);
  return ya + (yb - ya) * p + eval_elastic(w.piece[i], p);
}

double eval_witness_deriv(const WitnessFunction& w, double x) {
  const size_t n = w.eta.size();
  const double e0 = to_double(w.eta.front()), er = to_double(w.eta.back());
  if (x < e0) {
    double t1 = to_double(w.slope.front()), gl = to_double(w.gamma_left);
    return gl + (t1 - gl) * std::exp(x - e0);
  }
  if (x >= er) {
    double tr = to_double(w.slope.back()), gr = to_double(w.gamma_right);
    return gr + (tr - gr) * std::exp(er - x);
  }
  size_t i = 0;
  while (i + 2 < n && x >= to_double(w.eta[i + 1])) ++i;
  double a = to_double(w.eta[i]), b = to_double(w.eta[i + 1]);
  double p = (x - a) / (b - a);
  double ya = to_double(w.value[i]), yb = to_double(w.value[i + 1]);
  return ((yb - ya) + eval_elastic_deriv(w.piece[i], p)) / (b - a);
}

double c1_residual(const WitnessFunction& w) {
  double worst = 0;
  auto bump = [&](double a, double b) { worst = std::max(worst, std::fabs(a - b)); };
  const size_t n = w.eta.size();
  for (size_t i = 0; i < n; ++i) {
    const double yi = to_double(w.value[i]), ti = to_double(w.slope[i]);
    // limit from the left
    if (i == 0) {
      double gl = to_double(w.gamma_left);
      bump(yi + gl * 0 + (ti - gl) * (std::exp(0.0) - 1), yi);  // tail anchored exactly
      bump(gl + (ti - gl) * std::exp(0.0), ti);
    } else {
      double a = to_double(w.eta[i - 1]), b = to_double(w.eta[i]);
      double ya = to_double(w.value[i - 1]);
      bump(ya + (yi - ya) * 1.0 + eval_elastic(w.piece[i - 1], 1.0), yi);
      bump(((yi - ya) + eval_elastic_deriv(w.piece[i - 1], 1.0)) / (b - a), ti);
    }
    // limit from the right
    if (i + 1 == n) {
      double gr = to_double(w.gamma_right);
      bump(yi + (ti - gr) * (1 - std::exp(0.0)) + gr * 0, yi);
      bump(gr + (ti - gr) * std::exp(0.0), ti);
    } else {
      double a = to_double(w.eta[i]), b = to_double(w.eta[i + 1]);
      double yb = to_double(w.value[i + 1]);
      bump(yi + (yb - yi) * 0.0 + eval_elastic(w.piece[i], 0.0), yi);
      bump(((yb - yi) + eval_elastic_deriv(w.piece[i], 0.0)) / (b - a), ti);
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

namespace {

constexpr double kTol = 1e-9;

struct Checker {
  const Branch& b;
  const std::map<std::string, WitnessFunction>& ws;
  const NumericModel& model;
  int grid_n;
  Report report;

  const WitnessFunction& wit(const std::string& f) { return ws.at(f); }

  // On a rationalized model the exact-arithmetic guarantees degrade to
  // tolerance checks.
  bool near(const Rat& a, const Rat& b) const {
    if (model.exact) return a == b;
    return std::fabs(to_double(a - b)) <= kTol;
  }
  bool leq(const Rat& a, const Rat& b) const {
    if (model.exact) return a <= b;
    return to_double(a - b) <= kTol;
  }
  bool less(const Rat& a, const Rat& b) const {
    if (model.exact) return a < b;
    return to_double(a - b) < kTol;
  }

  // Concrete endpoint of an interval end; nullopt for infinities.
  std::optional<double> end_value(const FlatEnd& e) {
    if (e.is_var()) return to_double(model_value(model, e.name));
    return std::nullopt;
  }

  // Sample points of the interpreted interval. Bounded open ends are nudged
  // inward; infinite ends extend to the involved witnesses' breakpoint hull
  // plus tail probes at +-1, 10, 40.
  std::vector<double> samples(const FlatIv& iv, std::initializer_list<const WitnessFunction*> fs,
                              bool closure = false) {
    auto lo = end_value(iv.lo), hi = end_value(iv.hi);
    double a, bnd;
    std::vector<double> extra;
    if (lo) {
      a = *lo;
    } else {
      double hull = 1e300;
      for (const auto* w : fs) hull = std::min(hull, to_double(w->eta.front()));
      if (hi) hull = std::min(hull, *hi);
      a = hull;
      extra.insert(extra.end(), {a - 1, a - 10, a - 40});
    }
    if (hi) {
      bnd = *hi;
    } else {
      double hull = -1e300;
      for (const auto* w : fs) hull = std::max(hull, to_double(w->eta.back()));
      if (lo) hull = std::max(hull, *lo);
      bnd = hull;
      extra.insert(extra.end(), {bnd + 1, bnd + 10, bnd + 40});
    }
    std::vector<double> pts;
    if (a > bnd) return pts;
    bool lo_in = closure || !iv.lo.is_var() || iv.lo_closed;
    bool hi_in = closure || !iv.hi.is_var() || iv.hi_closed;
    if (a == bnd) {
      if (lo_in && hi_in) pts.push_back(a);
    } else {
      int n = std::max(grid_n, 2);
      double step = (bnd - a) / (n - 1);
      for (int k = 0; k < n; ++k) {
        double x = a + step * k;
        if (k == 0 && !lo_in) x = a + step / 16;
        if (k == n - 1 && !hi_in) x = bnd - step / 16;
        pts.push_back(x);
      }
    }
    pts.insert(pts.end(), extra.begin(), extra.end());
    std::sort(pts.begin(), pts.end());
    return pts;
  }

  bool interval_vacuous(const FlatIv& iv) {
    auto lo = end_value(iv.lo), hi = end_value(iv.hi);
    if (!lo || !hi) return false;
    if (*lo > *hi) return true;
    return *lo == *hi && !(iv.lo_closed && iv.hi_closed);
  }

  void push(LiteralCheck c) {
    if (!c.pass) report.all_pass = false;
    report.checks.push_back(std::move(c));
  }

  // Chain breakpoint indices covered by the interval, in a witness's
  // extended table.
  std::vector<int> covered_indices(const WitnessFunction& w, const FlatIv& iv) {
    auto [lo, hi] = literal_index_range(b.table, iv);
    std::vector<int> out;
    int off = w.left_refined ? 1 : 0;
    for (int j = lo; j <= hi; ++j) out.push_back(j - 1 + off);
    return out;
  }

  void check_numeric(const FlatLiteral& l) {
    LiteralCheck c;
    c.literal = l.str();
    bool ok = true;
    Rat lhs, rhs;
    switch (l.kind) {
      case FlatLiteral::Kind::AddDef:
        ok = near(arg_value(model, l.z), arg_value(model, l.x) + arg_value(model, l.y));
        break;
      case FlatLiteral::Kind::MulDef:
        ok = near(arg_value(model, l.z), arg_value(model, l.x) * arg_value(model, l.y));
        break;
      case FlatLiteral::Kind::Cmp: {
        Rat a = arg_value(model, l.x), bb = arg_value(model, l.y);
        switch (l.rel) {
          case NumRel::Eq: ok = near(a, bb); break;
          case NumRel::Ne: ok = !near(a, bb); break;
          case NumRel::Lt: ok = less(a, bb); break;
          case NumRel::Le: ok = leq(a, bb); break;
          case NumRel::Gt: ok = less(bb, a); break;
          case NumRel::Ge: ok = leq(bb, a); break;
        }
        break;
      }
      default:
        break;
    }
    c.pass = ok;
    if (!ok) c.detail = "exact arithmetic check failed";
    push(std::move(c));
  }

  void check_app(const FlatLiteral& l) {
    LiteralCheck c;
    c.literal = l.str();
    const WitnessFunction& w = wit(l.f);
    int j = b.table.position(l.x.name);
    if (j == 0) {
      c.pass = false;
      c.detail = "application argument is not a chain variable";
      push(std::move(c));
      return;
    }
    int idx = j - 1 + (w.left_refined ? 1 : 0);
    const Rat want = arg_value(model, l.z);
    const Rat have = l.kind == FlatLiteral::Kind::AppDef ? w.value[idx] : w.slope[idx];
    c.pass = near(want, have);
    if (!c.pass) c.detail = "breakpoint datum mismatch";
    push(std::move(c));
  }

  void check_fun_eq(const FlatLiteral& l) {
    LiteralCheck c;
    c.literal = l.str();
    if (interval_vacuous(l.iv)) {
      c.vacuous = true;
      push(std::move(c));
      return;
    }
    const WitnessFunction &wf = wit(l.f), &wg = wit(l.g);
    for (int idx : covered_indices(wf, l.iv)) {
      int gdx = idx - (wf.left_refined ? 1 : 0) + (wg.left_refined ? 1 : 0);
      if (!near(wf.value[idx], wg.value[gdx]) || !near(wf.slope[idx], wg.slope[gdx])) {
        c.pass = false;
        c.detail = "breakpoint data differ";
      }
    }
    double worst = 0;
    for (double x : samples(l.iv, {&wf, &wg}))
      worst = std::max(worst, std::fabs(eval_witness(wf, x) - eval_witness(wg, x)));
    c.worst_margin = kTol - worst;
    if (worst > kTol) {
      c.pass = false;
      c.detail = "pointwise difference " + std::to_string(worst);
    }
    push(std::move(c));
  }

  void check_fun_gt(const FlatLiteral& l) {
    LiteralCheck c;
    c.literal = l.str();
    if (interval_vacuous(l.iv)) {
      c.vacuous = true;
      push(std::move(c));
      return;
    }
    const WitnessFunction &wf = wit(l.f), &wg = wit(l.g);
    double worst = 1e300;
    for (double x : samples(l.iv, {&wf, &wg}))
      worst = std::min(worst, eval_witness(wf, x) - eval_witness(wg, x));
    c.worst_margin = worst;
    if (!(worst > 0)) {
      c.pass = false;
      c.detail = "pointwise comparison failed, margin " + std::to_string(worst);
    }
    push(std::move(c));
  }

  void check_deriv(const FlatLiteral& l) {
    LiteralCheck c;
    c.literal = l.str();
    if (interval_vacuous(l.iv)) {
      c.vacuous = true;
      push(std::move(c));
      return;
    }
    const WitnessFunction& w = wit(l.f);
    double bnd = to_double(arg_value(model, l.z));
    double worst = 1e300;
    bool ok = true;
    for (double x : samples(l.iv, {&w})) {
      double d = eval_witness_deriv(w, x);
      double margin = 0;
      switch (l.rel) {
        case NumRel::Eq: margin = kTol - std::fabs(d - bnd); ok &= margin >= 0; break;
        case NumRel::Ge: margin = d - bnd + kTol; ok &= margin >= 0; break;
        case NumRel::Le: margin = bnd - d + kTol; ok &= margin >= 0; break;
        case NumRel::Gt: margin = d - bnd; ok &= margin > 0; break;
        case NumRel::Lt: margin = bnd - d; ok &= margin > 0; break;
        default: break;
      }
      worst = std::min(worst, margin);
    }
    c.worst_margin = worst;
    c.pass = ok;
    if (!ok) c.detail = "derivative bound violated, margin " + std::to_string(worst);
    push(std::move(c));
  }

  void check_mono(const FlatLiteral& l) {
    LiteralCheck c;
    c.literal = l.str();
    if (interval_vacuous(l.iv)) {
      c.vacuous = true;
      push(std::move(c));
      return;
    }
    const bool up = l.kind == FlatLiteral::Kind::StrictUp;
    const WitnessFunction& w = wit(l.f);
    bool ok = true;
    // Exact: strict growth of the covered breakpoint values, slope signs.
    auto idxs = covered_indices(w, l.iv);
    for (size_t k = 0; k + 1 < idxs.size(); ++k) {
      if (up ? !less(w.value[idxs[k]], w.value[idxs[k + 1]])
             : !less(w.value[idxs[k + 1]], w.value[idxs[k]]))
        ok = false;
    }
    for (int idx : idxs)
      if (up ? !leq(Rat(0), w.slope[idx]) : !leq(w.slope[idx], Rat(0))) ok = false;
    if (!ok) c.detail = "breakpoint data not strictly monotone";
    // Grid: derivative sign within tolerance, strict growth of samples.
    double worst = 1e300;
    auto pts = samples(l.iv, {&w});
    double prev_val = 0;
    bool first = true;
    for (double x : pts) {
      double d = eval_witness_deriv(w, x);
      worst = std::min(worst, up ? d + kTol : -d + kTol);
      double v = eval_witness(w, x);
      if (!first) {
        if (up ? !(v > prev_val) : !(v < prev_val)) {
          ok = false;
          c.detail = "sampled values not strictly monotone";
        }
      }
      prev_val = v;
      first = false;
    }
    if (worst < 0) {
      ok = false;
      c.detail = "derivative sign violated";
    }
    c.worst_margin = worst;
    c.pass = ok;
    push(std::move(c));
  }

  void check_convexity(const FlatLiteral& l) {
    LiteralCheck c;
    c.literal = l.str();
    if (interval_vacuous(l.iv)) {
      c.vacuous = true;
      push(std::move(c));
      return;
    }
    const bool convex = l.kind == FlatLiteral::Kind::Convex ||
                        l.kind == FlatLiteral::Kind::StrictConvex;
    const bool strict = l.kind == FlatLiteral::Kind::StrictConvex ||
                        l.kind == FlatLiteral::Kind::StrictConcave;
    const WitnessFunction& w = wit(l.f);
    bool ok = true;

    // Exact: chord slopes between covered breakpoints sit between the end
    // slopes (strictly, for the strict predicates).
    auto idxs = covered_indices(w, l.iv);
    if (l.iv.lo.k == FlatEnd::K::NegInf && w.left_refined) idxs.insert(idxs.begin(), 0);
    if (l.iv.hi.k == FlatEnd::K::PosInf && w.right_refined)
      idxs.push_back(static_cast<int>(w.eta.size()) - 1);
    for (size_t k = 0; k + 1 < idxs.size(); ++k) {
      int i = idxs[k], j = idxs[k + 1];
      if (j != i + 1) continue;
      Rat sec = (w.value[j] - w.value[i]) / (w.eta[j] - w.eta[i]);
      bool lo_ok = convex ? (strict ? less(w.slope[i], sec) : leq(w.slope[i], sec))
                          : (strict ? less(sec, w.slope[i]) : leq(sec, w.slope[i]));
      bool hi_ok = convex ? (strict ? less(sec, w.slope[j]) : leq(sec, w.slope[j]))
                          : (strict ? less(w.slope[j], sec) : leq(w.slope[j], sec));
      if (!lo_ok || !hi_ok) {
        ok = false;
        c.detail = "chord/slope ordering failed at breakpoint " + std::to_string(i);
      }
    }
    // Exact tail conditions.
    if (l.iv.lo.k == FlatEnd::K::NegInf) {
      bool t_ok = convex
                      ? (strict ? less(w.gamma_left, w.slope.front())
                                : leq(w.gamma_left, w.slope.front()))
                      : (strict ? less(w.slope.front(), w.gamma_left)
                                : leq(w.slope.front(), w.gamma_left));
      if (!t_ok) { ok = false; c.detail = "left tail slope ordering failed"; }
    }
    if (l.iv.hi.k == FlatEnd::K::PosInf) {
      bool t_ok = convex
                      ? (strict ? less(w.slope.back(), w.gamma_right)
                                : leq(w.slope.back(), w.gamma_right))
                      : (strict ? less(w.gamma_right, w.slope.back())
                                : leq(w.gamma_right, w.slope.back()));
      if (!t_ok) { ok = false; c.detail = "right tail slope ordering failed"; }
    }

    // Grid: midpoint convexity and slope monotonicity, with tolerance, on
    // the closed hull.
    auto pts = samples(l.iv, {&w}, /*closure=*/true);
    double worst = 1e300;
    for (size_t k = 0; k + 2 < pts.size(); ++k) {
      double a = pts[k], bmid = pts[k + 1], cc = pts[k + 2];
      if (std::fabs((bmid - a) - (cc - bmid)) > 1e-12 * std::max(1.0, std::fabs(cc - a)))
        continue;  // probes break uniform spacing; midpoint test needs it
      double lhs = (eval_witness(w, a) + eval_witness(w, cc)) / 2 - eval_witness(w, bmid);
      double margin = (convex ? lhs : -lhs) + kTol;
      worst = std::min(worst, margin);
    }
    for (size_t k = 0; k + 1 < pts.size(); ++k) {
      double step = eval_witness_deriv(w, pts[k + 1]) - eval_witness_deriv(w, pts[k]);
      double margin = (convex ? step : -step) + kTol;
      worst = std::min(worst, margin);
    }
    if (worst < 0) {
      ok = false;
      c.detail = "grid convexity check failed";
    }
    c.worst_margin = worst;
    c.pass = ok;
    push(std::move(c));
  }
};

}  // namespace

Report verify_witness(const Branch& phi3, const std::map<std::string, WitnessFunction>& witnesses,
                      const NumericModel& model, int grid_n) {
  Checker ck{phi3, witnesses, model, std::max(grid_n, 8), {}};
  ck.report.approximate_model = !model.exact;
  for (const auto& l : phi3.literals) {
    switch (l.kind) {
      case FlatLiteral::Kind::AddDef:
      case FlatLiteral::Kind::MulDef:
      case FlatLiteral::Kind::Cmp:
        ck.check_numeric(l);
        break;
      case FlatLiteral::Kind::AppDef:
      case FlatLiteral::Kind::DAppDef:
        ck.check_app(l);
        break;
      case FlatLiteral::Kind::FunEq:
        ck.check_fun_eq(l);
        break;
      case FlatLiteral::Kind::FunGt:
        ck.check_fun_gt(l);
        break;
      case FlatLiteral::Kind::DerivCmp:
        ck.check_deriv(l);
        break;
      case FlatLiteral::Kind::StrictUp:
      case FlatLiteral::Kind::StrictDown:
        ck.check_mono(l);
        break;
      case FlatLiteral::Kind::Convex:
      case FlatLiteral::Kind::StrictConvex:
      case FlatLiteral::Kind::Concave:
      case FlatLiteral::Kind::StrictConcave:
        ck.check_convexity(l);
        break;
    }
  }
  return ck.report;
}

AlphaSearchResult search_alpha(const Branch& phi3, const NumericModel& model, int grid_n) {
  AlphaBound bound = alpha_bound(phi3, model);
  Rat alpha = bound.trivial() ? Rat(0) : Rat(bound.sup_interval / 2);
  Report last;
  for (int iter = 0; iter < 40; ++iter) {
    auto ws = build_witness(phi3, model, alpha);
    last = verify_witness(phi3, ws, model, grid_n);
    if (last.all_pass) return {alpha, std::move(ws), std::move(last)};
    if (alpha == 0) break;  // nothing left to shrink
    alpha /= 2;
  }
  throw AlphaSearchExhausted("witness verification kept failing as alpha shrank", last);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

nlohmann::json piece_json(const ElasticSpec& p) {
  nlohmann::json j;
  switch (p.kind) {
    case ElasticSpec::Kind::Null: j["kind"] = "null"; break;
    case ElasticSpec::Kind::Single: j["kind"] = "single"; break;
    case ElasticSpec::Kind::Double: j["kind"] = "double"; break;
    case ElasticSpec::Kind::Special: j["kind"] = "special"; break;
  }
  j["alpha"] = rat_str(p.alpha);
  j["theta1"] = rat_str(p.theta1);
  j["theta2"] = rat_str(p.theta2);
  if (p.kind == ElasticSpec::Kind::Single) {
    j["d1"] = rat_str(p.single.d1);
    j["d2"] = rat_str(p.single.d2);
  }
  return j;
}

}  // namespace

std::string witness_json(const std::map<std::string, WitnessFunction>& witnesses,
                         const Report& report, const Rat& alpha) {
  nlohmann::json j;
  j["alpha"] = rat_str(alpha);
  j["approximate_model"] = report.approximate_model;
  j["all_pass"] = report.all_pass;
  auto& fns = j["functions"] = nlohmann::json::array();
  for (const auto& [name, w] : witnesses) {
    nlohmann::json f;
    f["name"] = name;
    for (size_t i = 0; i < w.eta.size(); ++i) {
      f["breakpoints"].push_back(rat_str(w.eta[i]));
      f["values"].push_back(rat_str(w.value[i]));
      f["slopes"].push_back(rat_str(w.slope[i]));
    }
    f["gamma_left"] = rat_str(w.gamma_left);
    f["gamma_right"] = rat_str(w.gamma_right);
    f["left_refined"] = w.left_refined;
    f["right_refined"] = w.right_refined;
    for (const auto& p : w.piece) f["pieces"].push_back(piece_json(p));
    if (w.piece.empty()) f["pieces"] = nlohmann::json::array();
    fns.push_back(std::move(f));
  }
  auto& checks = j["report"] = nlohmann::json::array();
  for (const auto& c : report.checks) {
    nlohmann::json e;
    e["literal"] = c.literal;
    e["pass"] = c.pass;
    e["vacuous"] = c.vacuous;
    e["worst_margin"] = c.worst_margin;
    if (!c.detail.empty()) e["detail"] = c.detail;
    checks.push_back(std::move(e));
  }
  return j.dump(2);
}

std::string sample_witness_csv(const WitnessFunction& w, double lo, double hi, int n) {
  std::ostringstream os;
  os << "eta,value,derivative\n";
  os.precision(17);
  for (int k = 0; k < n; ++k) {
    double x = lo + (hi - lo) * (n == 1 ? 0.0 : static_cast<double>(k) / (n - 1));
    os << x << "," << eval_witness(w, x) << "," << eval_witness_deriv(w, x) << "\n";
  }
  return os.str();
}

}  // namespace rdf
