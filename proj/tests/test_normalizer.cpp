#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "rdf/flat.hpp"
#include "rdf/parser.hpp"
#include "testutil.hpp"

using namespace rdf;
using rdftest::Quad;
using rdftest::QuadModel;

namespace {

FormulaPtr conj_of(const std::vector<SignedAtom>& lits) {
  std::vector<FormulaPtr> parts;
  for (const auto& l : lits) {
    auto a = f_atom(l.atom);
    parts.push_back(l.neg ? f_not(a) : a);
  }
  return f_and_all(parts);
}

QuadModel random_model(std::mt19937& rng) {
  QuadModel m;
  std::uniform_int_distribution<int> num(-5, 5);
  std::uniform_int_distribution<int> den(1, 2);
  auto r = [&]() { return rat(num(rng), den(rng)); };
  for (const char* v : {"a", "b", "c", "x", "y"}) m.nums[v] = r();
  m.funs["f"] = Quad{r(), r(), r()};
  m.funs["g"] = Quad{r(), r(), r()};
  return m;
}

Atom su(const char* f) {
  return a_funpred(Atom::Kind::StrictUp, f,
                   IntervalSpec(ExtEnd::of(t_var("a")), ExtEnd::of(t_var("b")), true, true));
}

}  // namespace

TEST_CASE("distribution restores disjunctive normal form") {
  auto A = f_atom(su("f")), B = f_atom(su("g")),
       C = f_atom(a_numcmp(NumRel::Gt, t_var("x"), t_var("y")));
  auto dnf = to_dnf(f_and(f_or(A, B), C));
  REQUIRE(dnf.size() == 2);
  CHECK(dnf[0].size() == 2);
  CHECK(dnf[1].size() == 2);
}

TEST_CASE("single literal and De Morgan") {
  auto A = f_atom(su("f")), B = f_atom(su("g"));
  CHECK(to_dnf(A).size() == 1);
  auto dnf = to_dnf(f_not(f_and(A, B)));
  REQUIRE(dnf.size() == 2);
  CHECK(dnf[0][0].neg);
  CHECK(dnf[1][0].neg);
}

TEST_CASE("negated numeric atoms become positive primitives") {
  auto dnf = to_dnf(f_not(f_atom(a_numcmp(NumRel::Gt, t_var("x"), t_var("y")))));
  REQUIRE(dnf.size() == 2);  // x < y or x = y
  for (const auto& d : dnf) {
    REQUIRE(d.size() == 1);
    CHECK_FALSE(d[0].neg);
  }
}

TEST_CASE("contradictory conjunctions are pruned") {
  auto A = f_atom(su("f"));
  auto dnf = to_dnf(f_and(A, f_not(A)));
  CHECK(dnf.empty());
}

TEST_CASE("flatten: compound application argument") {
  FreshNames fresh;
  auto f = parse_formula("f(x+y) > 0");
  auto dnf = to_dnf(expand_derived(f));
  REQUIRE(dnf.size() == 1);
  auto flat = flatten(dnf[0], fresh);

  std::vector<FlatLiteral> want;
  FlatLiteral add;
  add.kind = FlatLiteral::Kind::AddDef;
  add.z = FlatArg::var("W");
  add.x = FlatArg::var("x");
  add.y = FlatArg::var("y");
  FlatLiteral app;
  app.kind = FlatLiteral::Kind::AppDef;
  app.z = FlatArg::var("U");
  app.f = "f";
  app.x = FlatArg::var("W");
  FlatLiteral cmp;
  cmp.kind = FlatLiteral::Kind::Cmp;
  cmp.rel = NumRel::Gt;
  cmp.x = FlatArg::var("U");
  cmp.y = FlatArg::zero();
  want = {add, app, cmp};
  CHECK(rdftest::match_up_to_renaming(flat, want, {"W", "U", "_t0", "_t1"}));
}

TEST_CASE("flatten: derivative against application") {
  FreshNames fresh;
  auto dnf = to_dnf(expand_derived(parse_formula("D[f](a) = f(b)")));
  auto flat = flatten(dnf[0], fresh);
  std::vector<FlatLiteral> want;
  FlatLiteral p;
  p.kind = FlatLiteral::Kind::DAppDef;
  p.z = FlatArg::var("P");
  p.f = "f";
  p.x = FlatArg::var("a");
  FlatLiteral q;
  q.kind = FlatLiteral::Kind::AppDef;
  q.z = FlatArg::var("Q");
  q.f = "f";
  q.x = FlatArg::var("b");
  FlatLiteral c;
  c.kind = FlatLiteral::Kind::Cmp;
  c.rel = NumRel::Eq;
  c.x = FlatArg::var("P");
  c.y = FlatArg::var("Q");
  want = {p, q, c};
  CHECK(rdftest::match_up_to_renaming(flat, want, {"P", "Q", "_t0", "_t1"}));
}

TEST_CASE("flatten is a fixpoint on flat input") {
  FreshNames fresh;
  auto dnf = to_dnf(expand_derived(parse_formula("x > y & z = f(x)")));
  auto once = flatten(dnf[0], fresh);
  size_t n = once.size();
  CHECK(n == 2);
}

TEST_CASE("repeated subterms share a single fresh definition") {
  FreshNames fresh;
  auto dnf = to_dnf(expand_derived(parse_formula("f(x + y) * (x + y) > f(x + y)")));
  REQUIRE(dnf.size() == 1);
  auto flat = flatten(dnf[0], fresh);
  // x+y and f(x+y) each get exactly one definition, the product one more,
  // plus the final comparison.
  REQUIRE(flat.size() == 4);
  std::map<std::string, int> defs;
  for (const auto& l : flat)
    if (l.kind == FlatLiteral::Kind::AddDef || l.kind == FlatLiteral::Kind::MulDef ||
        l.kind == FlatLiteral::Kind::AppDef)
      defs[l.z.name]++;
  REQUIRE(defs.size() == 3);
  for (const auto& [name, n] : defs) {
    CHECK(name.rfind("_t", 0) == 0);
    CHECK(n == 1);
  }
}

TEST_CASE("flatten preserves truth under the quadratic oracle") {
  std::mt19937 rng(17);
  int done = 0;
  for (int i = 0; i < 150 && done < 100; ++i) {
    auto f = expand_derived(rdftest::random_formula(rng, 2));
    auto dnf = to_dnf(f);
    if (dnf.empty()) continue;
    FreshNames fresh;
    auto flat = flatten(dnf[0], fresh);
    for (int k = 0; k < 5; ++k) {
      auto m = random_model(rng);
      auto got = rdftest::quad_eval_flat(flat, m);
      if (!got) continue;
      bool want = rdftest::quad_eval(conj_of(dnf[0]), m);
      CAPTURE(render_formula(conj_of(dnf[0])));
      CHECK(*got == want);
      ++done;
    }
  }
  CHECK(done >= 100);
}

TEST_CASE("ordering branch counts follow the ordered Bell numbers") {
  FreshNames fresh;
  auto mk = [&](const std::string& text) {
    auto dnf = to_dnf(expand_derived(parse_formula(text)));
    return flatten(dnf[0], fresh);
  };
  CHECK(enumerate_orderings(mk("z = f(a) & w = f(b)")).size() == 3);
  CHECK(enumerate_orderings(mk("z = f(a)")).size() == 1);
  CHECK(enumerate_orderings(mk("z = f(a) & w = f(b) & u = f(c)")).size() == 13);
}

TEST_CASE("branch cap raises BranchExplosion") {
  FreshNames fresh;
  auto make = [&](int nvars) {
    std::vector<SignedAtom> lits;
    for (int i = 0; i < nvars; ++i) {
      Atom a = a_numcmp(NumRel::Eq, t_var("z" + std::to_string(i)),
                        t_apply("f", t_var(std::string(1, static_cast<char>('a' + i)))));
      lits.push_back({a, false});
    }
    return flatten(lits, fresh);
  };
  CHECK_THROWS_AS(enumerate_orderings(make(9), 8), BranchExplosion);
  CHECK_THROWS_AS(enumerate_orderings(make(4), 3), BranchExplosion);
  CHECK(enumerate_orderings(make(4), 8).size() == 75);  // ordered Bell B(4)
}

TEST_CASE("inconsistent orderings are pruned syntactically") {
  FreshNames fresh;
  auto dnf = to_dnf(expand_derived(parse_formula("z = f(a) & w = f(b) & a < b")));
  auto flat = flatten(dnf[0], fresh);
  auto br = enumerate_orderings(flat);
  REQUIRE(br.size() == 1);
  CHECK(br[0].chain == std::vector<std::string>{"a", "b"});
}

TEST_CASE("ordered form constructor validates its invariants") {
  FlatLiteral app;
  app.kind = FlatLiteral::Kind::AppDef;
  app.z = FlatArg::var("z");
  app.f = "f";
  app.x = FlatArg::var("a");
  CHECK_THROWS_AS(OrderedConjunction::checked({app}, {}, {}), std::invalid_argument);
  // missing chain literal between two chain variables
  FlatLiteral app2 = app;
  app2.x = FlatArg::var("b");
  CHECK_THROWS_AS(OrderedConjunction::checked({app, app2}, {"a", "b"}, {}),
                  std::invalid_argument);
}

TEST_CASE("disjunction of ordering branches is equivalent to the input") {
  std::mt19937 rng(29);
  FreshNames fresh;
  auto dnf = to_dnf(expand_derived(
      parse_formula("z = f(a) & w = f(b) & StrictUp(f) on [a, b] & z <= w")));
  auto flat = flatten(dnf[0], fresh);
  auto branches = enumerate_orderings(flat);
  REQUIRE(branches.size() == 3);
  int informative = 0;
  for (int k = 0; k < 300; ++k) {
    auto m = random_model(rng);
    auto want = rdftest::quad_eval_flat(flat, m);
    if (!want) continue;
    bool any = false;
    for (const auto& br : branches) {
      auto lits = br.literals;
      for (const auto& [from, to] : br.merged) {
        FlatLiteral eq;
        eq.kind = FlatLiteral::Kind::Cmp;
        eq.rel = NumRel::Eq;
        eq.x = FlatArg::var(from);
        eq.y = FlatArg::var(to);
        lits.push_back(eq);  // un-merge
      }
      auto got = rdftest::quad_eval_flat(lits, m);
      if (got && *got) any = true;
    }
    CHECK(any == *want);
    ++informative;
  }
  CHECK(informative > 100);
}

TEST_CASE("chain extensions respect constraints") {
  auto exts = enumerate_chain_extensions({"a", "b"}, {"x"},
                                         {{"a", "x", NumRel::Le}, {"x", "b", NumRel::Le}});
  // x in [a,b]: merge a, between, merge b
  CHECK(exts.size() == 3);
  auto strict = enumerate_chain_extensions({"a", "b"}, {"x"},
                                           {{"a", "x", NumRel::Lt}, {"x", "b", NumRel::Lt}});
  REQUIRE(strict.size() == 1);
  CHECK(strict[0].chain == std::vector<std::string>{"a", "x", "b"});
}
