#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <set>

#include "rdf/eliminate.hpp"
#include "rdf/parser.hpp"
#include "testutil.hpp"

using namespace rdf;

namespace {

FlatLiteral fl_cmp(NumRel rel, const std::string& x, const std::string& y) {
  FlatLiteral l;
  l.kind = FlatLiteral::Kind::Cmp;
  l.rel = rel;
  l.x = FlatArg::var(x);
  l.y = FlatArg::var(y);
  return l;
}
FlatLiteral fl_pred(FlatLiteral::Kind k, const std::string& f, FlatIv iv, bool neg = false) {
  FlatLiteral l;
  l.kind = k;
  l.f = f;
  l.iv = std::move(iv);
  l.neg = neg;
  return l;
}
FlatLiteral fl_funcmp(FlatLiteral::Kind k, const std::string& f, const std::string& g, FlatIv iv,
                      bool neg = false) {
  FlatLiteral l = fl_pred(k, f, iv, neg);
  l.g = g;
  return l;
}
FlatLiteral fl_deriv(NumRel rel, const std::string& f, FlatArg bound, FlatIv iv,
                     bool neg = false) {
  FlatLiteral l = fl_pred(FlatLiteral::Kind::DerivCmp, f, iv, neg);
  l.rel = rel;
  l.z = std::move(bound);
  return l;
}
FlatIv iv_vars(const std::string& lo, const std::string& hi, bool lc = true, bool hc = true) {
  return FlatIv{FlatEnd::var(lo), FlatEnd::var(hi), lc, hc};
}

Branch make_branch(std::vector<FlatLiteral> lits, std::vector<std::string> chain) {
  for (size_t i = 0; i + 1 < chain.size(); ++i)
    lits.push_back(fl_cmp(NumRel::Lt, chain[i], chain[i + 1]));
  auto oc = OrderedConjunction::checked(std::move(lits), std::move(chain), {});
  return branch_of(oc, FreshNames{});
}

int count_atoms_matching(const TPtr& phi, const std::function<bool(const TNode&)>& pred) {
  int n = 0;
  for (const auto& c : conjuncts(phi))
    if (pred(*c)) ++n;
  return n;
}

}  // namespace

// ---------------------------------------------------------------------------
// The golden walkthrough
// ---------------------------------------------------------------------------

TEST_CASE("walkthrough: step 1 yields exactly the four endpoint disjuncts") {
  auto f = parse_formula("(D[f] > 0) on (a,b) -> StrictUp(f) on [a,b]");
  PipelineOptions opts;
  PipelineStages stages;
  auto results = pipeline(f, PipelineMode::Validity, opts, &stages);

  REQUIRE(stages.ordered.size() == 3);  // a<b, merged, b<a
  size_t strict_idx = stages.ordered.size();
  for (size_t i = 0; i < stages.ordered.size(); ++i)
    if (stages.ordered[i].chain == std::vector<std::string>{"a", "b"}) strict_idx = i;
  REQUIRE(strict_idx < stages.ordered.size());

  std::vector<const Branch*> disjuncts;
  for (const auto& [idx, br] : stages.after_step1)
    if (idx == strict_idx) disjuncts.push_back(&br);
  REQUIRE(disjuncts.size() == 4);

  auto chain_ab = fl_cmp(NumRel::Lt, "a", "b");
  auto neg_su = fl_pred(FlatLiteral::Kind::StrictUp, "f", iv_vars("a", "b"), true);
  auto dgt = [&](bool lc, bool hc) {
    return fl_deriv(NumRel::Gt, "f", FlatArg::zero(), iv_vars("a", "b", lc, hc));
  };
  auto touch = [&](const std::string& at, const std::string& u) {
    FlatLiteral d;
    d.kind = FlatLiteral::Kind::DAppDef;
    d.z = FlatArg::var(u);
    d.f = "f";
    d.x = FlatArg::var(at);
    return d;
  };
  auto eq0 = [&](const std::string& u) {
    FlatLiteral c;
    c.kind = FlatLiteral::Kind::Cmp;
    c.rel = NumRel::Eq;
    c.x = FlatArg::var(u);
    c.y = FlatArg::zero();
    return c;
  };
  std::vector<std::string> fresh = {"U1", "U2", "W", "Z"};
  for (int i = 0; i < 20; ++i) {
    fresh.push_back("_u" + std::to_string(i));
    fresh.push_back("_w" + std::to_string(i));
    fresh.push_back("_z" + std::to_string(i));
  }

  // (i) closed
  std::vector<FlatLiteral> d1 = {dgt(true, true), neg_su, chain_ab};
  // (ii) right touch
  std::vector<FlatLiteral> d2 = {dgt(true, false), touch("b", "U1"), eq0("U1"), neg_su, chain_ab};
  // (iii) left touch
  std::vector<FlatLiteral> d3 = {dgt(false, true), touch("a", "U1"), eq0("U1"), neg_su, chain_ab};
  // (iv) both touches plus the midpoint domain variable
  std::vector<FlatLiteral> d4 = {dgt(false, false), touch("a", "U1"), eq0("U1"),
                                 touch("b", "U2"),  eq0("U2"),       neg_su,
                                 chain_ab,          fl_cmp(NumRel::Lt, "a", "W"),
                                 fl_cmp(NumRel::Lt, "W", "b")};
  {
    FlatLiteral app;
    app.kind = FlatLiteral::Kind::AppDef;
    app.z = FlatArg::var("Z");
    app.f = "f";
    app.x = FlatArg::var("W");
    d4.push_back(app);
  }

  int found1 = 0, found2 = 0, found3 = 0, found4 = 0;
  for (const Branch* br : disjuncts) {
    if (rdftest::match_up_to_renaming(br->literals, d1, fresh)) ++found1;
    if (rdftest::match_up_to_renaming(br->literals, d2, fresh)) ++found2;
    if (rdftest::match_up_to_renaming(br->literals, d3, fresh)) ++found3;
    if (rdftest::match_up_to_renaming(br->literals, d4, fresh)) ++found4;
  }
  CHECK(found1 == 1);
  CHECK(found2 == 1);
  CHECK(found3 == 1);
  CHECK(found4 == 1);

  CHECK(results.size() >= 4);
}

TEST_CASE("walkthrough: the strict-distinct branch of the first disjunct") {
  auto f = parse_formula("(D[f] > 0) on (a,b) -> StrictUp(f) on [a,b]");
  auto results = pipeline(f, PipelineMode::Validity);

  // Look for the branch with a 4-variable chain whose phi4 carries the
  // walkthrough literals: four positive stub slopes, three positive secants,
  // two evaluation links, one non-increase literal.
  int found = 0;
  for (const auto& r : results) {
    if (r.phi3.table.r() != 4) continue;
    const auto& c = r.phi3.table.chain;
    if (c.front() != "a" || c.back() != "b") continue;
    int slopes = count_atoms_matching(r.phi4, [](const TNode& n) {
      return n.kind == TNode::Kind::Atom && n.atom.rel == NumRel::Gt &&
             n.atom.lhs.coef.size() == 1 && n.atom.lhs.str().find("*_s") != std::string::npos;
    });
    int secants = count_atoms_matching(r.phi4, [](const TNode& n) {
      return n.kind == TNode::Kind::Div && n.div.rel == NumRel::Gt;
    });
    int links = count_atoms_matching(r.phi4, [](const TNode& n) {
      return n.kind == TNode::Kind::Atom && n.atom.rel == NumRel::Eq &&
             n.atom.lhs.str().find("*_y") != std::string::npos;
    });
    int nonincrease = count_atoms_matching(r.phi4, [](const TNode& n) {
      return n.kind == TNode::Kind::Atom &&
             (n.atom.rel == NumRel::Ge || n.atom.rel == NumRel::Le) &&
             n.atom.lhs.degree() == 1;
    });
    if (slopes == 4 && secants == 3 && links == 2 && nonincrease >= 1) ++found;
  }
  CHECK(found >= 1);
}

// ---------------------------------------------------------------------------
// Step 1
// ---------------------------------------------------------------------------

TEST_CASE("step 1 drops vacuous literals and kills impossible negations") {
  {
    auto b = make_branch({fl_funcmp(FlatLiteral::Kind::FunGt, "f", "g", iv_vars("w", "v"))},
                         {"v", "w"});  // interval [w, v] with w after v: empty
    auto out = step1_endpoints(b);
    REQUIRE(out.size() == 1);
    for (const auto& l : out[0].literals) CHECK(l.kind != FlatLiteral::Kind::FunGt);
  }
  {
    auto b = make_branch({fl_funcmp(FlatLiteral::Kind::FunEq, "f", "g", iv_vars("w", "v"), true)},
                         {"v", "w"});
    CHECK(step1_endpoints(b).empty());  // not(vacuously true)
  }
}

TEST_CASE("step 1 closes intervals of closure-safe literals") {
  auto b = make_branch({fl_pred(FlatLiteral::Kind::Convex, "f", iv_vars("v", "w", false, false)),
                        fl_deriv(NumRel::Ge, "f", FlatArg::zero(), iv_vars("v", "w", false, true))},
                       {"v", "w"});
  auto out = step1_endpoints(b);
  REQUIRE(out.size() == 1);
  for (const auto& l : out[0].literals)
    if (l.has_interval()) {
      CHECK(l.iv.lo_closed);
      CHECK(l.iv.hi_closed);
    }
}

TEST_CASE("step 1a cuts an unbounded open comparison at a fresh neighbor") {
  auto b = make_branch({fl_funcmp(FlatLiteral::Kind::FunGt, "f", "g",
                                  FlatIv{FlatEnd::neg_inf(), FlatEnd::var("w"), false, false})},
                       {"w"});
  auto out = step1_endpoints(b);
  REQUIRE(out.size() == 2);  // [w1,w[ case-splits into two alternatives
  for (const auto& br : out) {
    REQUIRE(br.table.chain.size() == 2);
    CHECK(br.table.chain[1] == "w");
    bool has_left = false;
    for (const auto& l : br.literals)
      if (l.kind == FlatLiteral::Kind::FunGt && l.iv.lo.k == FlatEnd::K::NegInf) {
        has_left = true;
        CHECK(l.iv.hi.is_var());
        CHECK(l.iv.hi_closed);
      }
    CHECK(has_left);
  }
}

TEST_CASE("step 1c reuses an existing neighbor") {
  auto b = make_branch({fl_deriv(NumRel::Lt, "f", FlatArg::var("t"),
                                 FlatIv{FlatEnd::var("u"), FlatEnd::pos_inf(), false, false}),
                        fl_pred(FlatLiteral::Kind::Convex, "f", iv_vars("u", "w"))},
                       {"u", "w"});
  auto out = step1_endpoints(b);
  for (const auto& br : out) CHECK(br.table.chain == std::vector<std::string>{"u", "w"});
  REQUIRE(out.size() == 2);
}

// ---------------------------------------------------------------------------
// Step 2
// ---------------------------------------------------------------------------

TEST_CASE("step 2 replaces a negated strict monotonicity with ordered witnesses") {
  auto b = make_branch({fl_pred(FlatLiteral::Kind::StrictUp, "f", iv_vars("v", "w"), true)},
                       {"v", "w"});
  auto out = step2_negatives(b);
  CHECK(out.size() > 1);  // chain insertions fan out
  for (const auto& br : out) {
    for (const auto& l : br.literals) CHECK_FALSE(l.neg);
    int apps = 0, ge = 0;
    for (const auto& l : br.literals) {
      if (l.kind == FlatLiteral::Kind::AppDef) ++apps;
      if (l.kind == FlatLiteral::Kind::Cmp && l.rel == NumRel::Ge) ++ge;
    }
    CHECK(apps == 2);
    CHECK(ge >= 1);
  }
}

TEST_CASE("step 2 on a negated convexity introduces the secant product witness") {
  auto b = make_branch({fl_pred(FlatLiteral::Kind::Convex, "f", iv_vars("v", "w"), true)},
                       {"v", "w"});
  auto out = step2_negatives(b);
  REQUIRE(!out.empty());
  for (const auto& br : out) {
    int muls = 0, gts = 0;
    for (const auto& l : br.literals) {
      if (l.kind == FlatLiteral::Kind::MulDef) ++muls;
      if (l.kind == FlatLiteral::Kind::Cmp && l.rel == NumRel::Gt && l.x.is_var() &&
          l.x.name[0] == '_')
        ++gts;
    }
    CHECK(muls == 2);
    CHECK(gts >= 1);
  }
}

TEST_CASE("step 2 negated pointwise equality fans out over the disequality") {
  auto b = make_branch({fl_funcmp(FlatLiteral::Kind::FunEq, "f", "g", iv_vars("v", "w"), true)},
                       {"v", "w"});
  auto out = step2_negatives(b);
  // 3 placements of the witness point (merge v, interior, merge w) x 2 signs
  CHECK(out.size() == 6);
}

TEST_CASE("step 2 self-prunes a negated monotonicity on a singleton") {
  FlatIv iv{FlatEnd::var("v"), FlatEnd::var("v"), true, true};
  auto b = make_branch({fl_pred(FlatLiteral::Kind::StrictUp, "f", iv, true)}, {"v"});
  CHECK(step2_negatives(b).empty());  // vacuously true, so its negation kills the branch
}

TEST_CASE("a branch without negative literals passes through step 2") {
  auto b = make_branch({fl_pred(FlatLiteral::Kind::Convex, "f", iv_vars("v", "w"))}, {"v", "w"});
  auto out = step2_negatives(b);
  REQUIRE(out.size() == 1);
  CHECK(out[0].literals.size() == b.literals.size());
}

// ---------------------------------------------------------------------------
// Step 3
// ---------------------------------------------------------------------------

TEST_CASE("step 3 example: two functions over a 2-chain add eight stub literals") {
  auto b = make_branch({fl_funcmp(FlatLiteral::Kind::FunEq, "f", "g", iv_vars("v", "w"))},
                       {"v", "w"});
  size_t before = b.literals.size();
  auto out = step3_evaluate(b);
  CHECK(out.literals.size() == before + 8);  // 2 functions x 2 points x (y and t)
  for (int j = 1; j <= 2; ++j) {
    CHECK(out.table.find_y("f", j) != nullptr);
    CHECK(out.table.find_t("g", j) != nullptr);
  }
}

TEST_CASE("step 3 links pre-existing applications to the stubs") {
  FlatLiteral app;
  app.kind = FlatLiteral::Kind::AppDef;
  app.z = FlatArg::var("p");
  app.f = "f";
  app.x = FlatArg::var("v");
  auto b = make_branch({app}, {"v"});
  auto out = step3_evaluate(b);
  bool linked = false;
  for (const auto& l : out.literals)
    if (l.kind == FlatLiteral::Kind::Cmp && l.rel == NumRel::Eq && l.x.is_var() &&
        l.x.name == "p" && l.y.is_var() && l.y.name.rfind("_y1", 0) == 0)
      linked = true;
  CHECK(linked);
}

// ---------------------------------------------------------------------------
// Step 4
// ---------------------------------------------------------------------------

TEST_CASE("step 4 example: monotonicity on a singleton leaves one slope sign") {
  FlatIv iv{FlatEnd::var("v"), FlatEnd::var("v"), true, true};
  auto b = make_branch({fl_pred(FlatLiteral::Kind::StrictUp, "f", iv)}, {"v"});
  Branch b3 = step3_evaluate(b);
  step4_eliminate(b3);
  REQUIRE(b3.arith.size() == 1);
  REQUIRE(b3.arith[0]->kind == TNode::Kind::Atom);
  CHECK(b3.arith[0]->atom.rel == NumRel::Ge);
  CHECK(b3.arith[0]->atom.lhs.str() == "1*_s1_f");
}

TEST_CASE("step 4 example: equality over a left-unbounded interval ties the gammas") {
  FlatIv iv{FlatEnd::neg_inf(), FlatEnd::var("v"), false, true};
  auto b = make_branch({fl_funcmp(FlatLiteral::Kind::FunEq, "f", "g", iv)}, {"v"});
  Branch b3 = step3_evaluate(b);
  step4_eliminate(b3);
  bool gamma_eq = false;
  int eqs = 0;
  for (const auto& n : b3.arith) {
    if (n->kind != TNode::Kind::Atom || n->atom.rel != NumRel::Eq) continue;
    ++eqs;
    if (n->atom.lhs.str().find("_g0_") != std::string::npos) gamma_eq = true;
  }
  CHECK(eqs == 3);  // y, t, gamma equalities at index 1
  CHECK(gamma_eq);
  CHECK(b3.gamma_bounds.size() == 2);
}

TEST_CASE("step 4 counts follow the index ranges") {
  auto iv = iv_vars("v2", "v4");
  auto b = make_branch({fl_deriv(NumRel::Ge, "f", FlatArg::var("c"), iv)},
                       {"v1", "v2", "v3", "v4"});
  Branch b3 = step3_evaluate(b);
  step4_eliminate(b3);
  int t_atoms = 0, secants = 0, guards = 0;
  for (const auto& n : b3.arith) {
    if (n->kind == TNode::Kind::Atom && n->atom.rel == NumRel::Ge) ++t_atoms;
    if (n->kind == TNode::Kind::Div) ++secants;
    if (n->kind == TNode::Kind::Imp) ++guards;
  }
  CHECK(t_atoms == 3);  // i in 2..4
  CHECK(secants == 2);  // j in 2..3
  CHECK(guards == 2);   // non-strict bound: one guard per j
}

TEST_CASE("step 4 comparison over a doubly unbounded interval uses both k tokens") {
  FlatIv iv{FlatEnd::neg_inf(), FlatEnd::pos_inf(), false, false};
  auto b = make_branch({fl_funcmp(FlatLiteral::Kind::FunGt, "f", "g", iv)}, {"v"});
  Branch b3 = step3_evaluate(b);
  step4_eliminate(b3);
  REQUIRE(b3.k_orders.size() == 2);
  CHECK(b3.k_orders[0].side != b3.k_orders[1].side);
  int boxes = 0;
  for (const auto& n : b3.arith)
    if (n->kind == TNode::Kind::Atom && n->atom.lhs.str().find("*_k") != std::string::npos &&
        (n->atom.rel == NumRel::Ge || n->atom.rel == NumRel::Le))
      ++boxes;
  CHECK(boxes >= 8);  // -1 <= k <= 1 per token plus the two order literals
}

TEST_CASE("step 4 emission counts match the index arithmetic") {
  std::mt19937 rng(4242);
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  for (int iter = 0; iter < 400; ++iter) {
    int r = 1 + pick(5);
    std::vector<std::string> chain;
    for (int i = 1; i <= r; ++i) chain.push_back("v" + std::to_string(i));
    int lo_idx = pick(r), hi_idx = lo_idx + pick(r - lo_idx);  // 0-based, lo <= hi
    FlatIv iv = iv_vars(chain[lo_idx], chain[hi_idx]);

    int kind = pick(3);
    FlatLiteral lit;
    NumRel drel = NumRel::Eq;
    if (kind == 0) {
      drel = static_cast<NumRel>(1 + pick(5));
      if (drel == NumRel::Ne) drel = NumRel::Eq;
      lit = fl_deriv(drel, "f", FlatArg::zero(), iv);
    } else if (kind == 1) {
      lit = fl_pred(pick(2) ? FlatLiteral::Kind::StrictUp : FlatLiteral::Kind::StrictDown, "f", iv);
    } else {
      iv.lo_closed = pick(2) == 0;
      iv.hi_closed = pick(2) == 0;
      if (lo_idx == hi_idx) iv.lo_closed = iv.hi_closed = true;  // keep it nonempty
      lit = fl_funcmp(FlatLiteral::Kind::FunGt, "f", "g", iv);
      lit.split_done = true;
    }
    Branch b3 = step3_evaluate(make_branch({lit}, chain));
    step4_eliminate(b3);

    auto single_stub = [](const TNode& n, const char* prefix, NumRel rel) {
      if (n.kind != TNode::Kind::Atom || n.atom.rel != rel) return false;
      auto vars = n.atom.lhs.free_vars();
      int stubs = 0;
      for (const auto& v : vars) stubs += v.rfind(prefix, 0) == 0 ? 1 : 0;
      return stubs >= 1;
    };
    int divs = 0, imps = 0;
    for (const auto& n : b3.arith) {
      divs += n->kind == TNode::Kind::Div ? 1 : 0;
      imps += n->kind == TNode::Kind::Imp ? 1 : 0;
    }
    const int span = hi_idx - lo_idx;  // = ind(hi) - ind(lo)
    CAPTURE(iter);
    CAPTURE(lit.str());
    if (kind == 0) {
      int t_atoms = 0;
      for (const auto& n : b3.arith) t_atoms += single_stub(*n, "_s", drel) ? 1 : 0;
      CHECK(t_atoms == span + 1);
      CHECK(divs == span);
      CHECK(imps == ((drel == NumRel::Le || drel == NumRel::Ge) ? span : 0));
    } else if (kind == 1) {
      bool up = lit.kind == FlatLiteral::Kind::StrictUp;
      int t_atoms = 0, y_atoms = 0;
      for (const auto& n : b3.arith) {
        t_atoms += single_stub(*n, "_s", up ? NumRel::Ge : NumRel::Le) ? 1 : 0;
        y_atoms += single_stub(*n, "_y", up ? NumRel::Gt : NumRel::Lt) ? 1 : 0;
      }
      CHECK(t_atoms == span + 1);
      CHECK(y_atoms == span);
    } else {
      int y_range = span + 1 - (lit.iv.lo_closed ? 0 : 1) - (lit.iv.hi_closed ? 0 : 1);
      int y_atoms = 0, t_cmps = 0;
      for (const auto& n : b3.arith) {
        y_atoms += single_stub(*n, "_y", NumRel::Gt) ? 1 : 0;
        t_cmps += (single_stub(*n, "_s", NumRel::Ge) || single_stub(*n, "_s", NumRel::Le)) ? 1 : 0;
      }
      CHECK(y_atoms == std::max(0, y_range));
      int expected_t = 0;
      if (lo_idx < hi_idx) {
        if (!lit.iv.lo_closed) ++expected_t;
        if (!lit.iv.hi_closed) ++expected_t;
      }
      CHECK(t_cmps == expected_t);
    }
  }
}

TEST_CASE("step 4h closes the k order transitively with end-value literals") {
  FlatIv iv{FlatEnd::var("v"), FlatEnd::pos_inf(), true, false};
  auto b = make_branch({fl_funcmp(FlatLiteral::Kind::FunGt, "f", "g", iv),
                        fl_funcmp(FlatLiteral::Kind::FunGt, "g", "h", iv)},
                       {"v"});
  Branch b3 = step3_evaluate(b);
  step4_eliminate(b3);
  bool closed = false;
  for (const auto& ko : b3.k_orders)
    if (ko.f == "f" && ko.g == "h") closed = true;
  CHECK(closed);
  bool y_fh = false;
  for (const auto& n : b3.arith)
    if (n->kind == TNode::Kind::Atom && n->atom.rel == NumRel::Gt &&
        n->atom.lhs.str().find("_y1_f") != std::string::npos &&
        n->atom.lhs.str().find("_y1_h") != std::string::npos)
      y_fh = true;
  CHECK(y_fh);
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

TEST_CASE("pure arithmetic degenerates to a single folded branch") {
  auto results = pipeline(parse_formula("x > x"), PipelineMode::Satisfiability);
  REQUIRE(results.size() == 1);
  CHECK(results[0].phi4->kind == TNode::Kind::False);
}

TEST_CASE("function literal without domain variables gets a fresh chain point") {
  auto results = pipeline(parse_formula("StrictUp(f) on (-inf, +inf)"),
                          PipelineMode::Satisfiability);
  REQUIRE(results.size() == 1);
  CHECK(results[0].phi3.table.r() == 1);
}

TEST_CASE("SAT probe structure admits the obvious model") {
  auto results = pipeline(parse_formula("StrictUp(f) on [a,b] & f(a) = 0 & f(b) = 1 & a < b"),
                          PipelineMode::Satisfiability);
  REQUIRE(!results.empty());
  bool some = false;
  for (const auto& r : results) {
    if (r.phi3.table.chain != std::vector<std::string>{"a", "b"}) continue;
    NumericModel m;
    m.values["a"] = Rat(0);
    m.values["b"] = Rat(1);
    for (const auto& v : tarski_free_vars(r.phi4)) {
      if (v == "a" || v == "b") continue;
      if (v.rfind("_y2", 0) == 0) m.values[v] = Rat(1);
      else if (v.rfind("_y", 0) == 0) m.values[v] = Rat(0);
      else m.values[v] = Rat(1);
    }
    TPtr cleared = clear_divisions(r.phi4, chain_positive_diffs(r.phi3.table));
    try {
      if (eval_tarski(cleared, m)) some = true;
    } catch (const MissingVariable&) {
    }
  }
  CHECK(some);
}

TEST_CASE("invariants: no negated literal after step 2, unique stubs after step 3") {
  auto f = parse_formula(
      "!(Eq(f,g) on [a,b]) & Convex(f) on [a,b] & !(D[g] <= 0) on [a,b] & f(a) = 1");
  auto results = pipeline(f, PipelineMode::Satisfiability);
  REQUIRE(!results.empty());
  for (const auto& r : results) {
    std::set<std::string> funs;
    for (const auto& l : r.phi3.literals) {
      CHECK_FALSE(l.neg);
      if (!l.f.empty()) funs.insert(l.f);
      if (!l.g.empty()) funs.insert(l.g);
    }
    // exactly one defining literal per stub of the table
    for (const auto& f : funs)
      for (int j = 1; j <= r.phi3.table.r(); ++j) {
        const std::string* y = r.phi3.table.find_y(f, j);
        const std::string* t = r.phi3.table.find_t(f, j);
        REQUIRE(y != nullptr);
        REQUIRE(t != nullptr);
        int ydefs = 0, tdefs = 0;
        for (const auto& l : r.phi3.literals) {
          if (l.kind == FlatLiteral::Kind::AppDef && l.z.is_var() && l.z.name == *y) ++ydefs;
          if (l.kind == FlatLiteral::Kind::DAppDef && l.z.is_var() && l.z.name == *t) ++tdefs;
        }
        CHECK(ydefs == 1);
        CHECK(tdefs == 1);
      }
  }
}

TEST_CASE("branch cap propagates") {
  std::string big = "z1 = f(a1)";
  for (int i = 2; i <= 9; ++i)
    big += " & z" + std::to_string(i) + " = f(a" + std::to_string(i) + ")";
  CHECK_THROWS_AS(pipeline(parse_formula(big), PipelineMode::Satisfiability), BranchExplosion);
}
