#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "rdf/smtlib.hpp"
#include "rdf/tarski.hpp"

using namespace rdf;

namespace {

Poly V(const char* n) { return Poly::var(n); }
Poly C(long n) { return Poly::constant(Rat(n)); }

NumericModel model_of(std::initializer_list<std::pair<const char*, Rat>> vals) {
  NumericModel m;
  for (const auto& [k, v] : vals) m.values[k] = v;
  return m;
}

}  // namespace

TEST_CASE("polynomial arithmetic and canonical integer atoms") {
  Poly p = V("x") * V("y") + C(2) * V("x") - V("y") * V("x");
  CHECK(p.str() == "2*x");
  TPtr a = t_polyatom(Poly::constant(Rat(1, 2)) * V("x") + Poly::constant(Rat(1, 3)) * V("y"),
                      NumRel::Eq);
  REQUIRE(a->kind == TNode::Kind::Atom);
  CHECK(a->atom.lhs.str() == "3*x + 2*y");
}

TEST_CASE("constant atoms fold to truth values") {
  CHECK(t_polyatom(C(0), NumRel::Eq)->kind == TNode::Kind::True);
  CHECK(t_polyatom(C(3), NumRel::Lt)->kind == TNode::Kind::False);
  CHECK(t_and_n({t_true(), t_false()})->kind == TNode::Kind::False);
  CHECK(t_or_n({t_false(), t_true()})->kind == TNode::Kind::True);
}

TEST_CASE("clear_divisions with a known positive denominator multiplies through") {
  // (y2 - y1)/(v2 - v1) > c  with v2 - v1 > 0
  TPtr d = t_divatom(V("y2") - V("y1"), V("v2") - V("v1"), NumRel::Gt, V("c"));
  TPtr cleared = clear_divisions(d, {V("v2") - V("v1")});
  REQUIRE(cleared->kind == TNode::Kind::Atom);
  // y2 - y1 - c v2 + c v1 > 0
  auto m = model_of({{"y1", Rat(0)}, {"y2", Rat(3)}, {"v1", Rat(0)}, {"v2", Rat(2)}, {"c", Rat(1)}});
  CHECK(eval_tarski(cleared, m));
  m.values["c"] = Rat(2);
  CHECK_FALSE(eval_tarski(cleared, m));
}

TEST_CASE("unknown-sign denominators fall back to the product encoding") {
  TPtr d = t_divatom(V("p"), V("q"), NumRel::Eq, V("s"));
  TPtr cleared = clear_divisions(d, {});
  CHECK(cleared->kind == TNode::Kind::And);
  CHECK_THROWS_AS(clear_divisions(d, {}, /*product_encoding=*/false), UnknownSignDenominator);
  TPtr plain = t_polyatom(V("x") - C(1), NumRel::Gt);
  CHECK(clear_divisions(plain, {}) == plain);
}

TEST_CASE("clear_divisions preserves truth on random rational points") {
  std::mt19937 rng(41);
  std::uniform_int_distribution<int> num(-8, 8);
  std::uniform_int_distribution<int> den(1, 4);
  auto r = [&]() { return rat(num(rng), den(rng)); };
  int informative = 0;
  for (int rel_i = 0; rel_i < 6; ++rel_i) {
    NumRel rel = static_cast<NumRel>(rel_i);
    TPtr d = t_divatom(V("y2") - V("y1"), V("v2") - V("v1"), rel, V("c"));
    TPtr known = clear_divisions(d, {V("v2") - V("v1")});
    TPtr product = clear_divisions(d, {});
    for (int i = 0; i < 2000; ++i) {
      NumericModel m;
      m.values["y1"] = r();
      m.values["y2"] = r();
      m.values["c"] = r();
      Rat v1 = r();
      m.values["v1"] = v1;
      m.values["v2"] = v1 + rat_abs(r()) + 1;  // respect the chain order
      bool want = eval_tarski(d, m);
      CHECK(eval_tarski(known, m) == want);
      CHECK(eval_tarski(product, m) == want);
      ++informative;
    }
  }
  CHECK(informative == 12000);
}

TEST_CASE("eval_tarski basics and MissingVariable") {
  TPtr f = t_polyatom(V("x"), NumRel::Gt);
  CHECK(eval_tarski(f, model_of({{"x", Rat(1)}})));
  CHECK_FALSE(eval_tarski(f, model_of({{"x", Rat(-1)}})));
  CHECK_THROWS_AS(eval_tarski(f, model_of({{"y", Rat(1)}})), MissingVariable);
  TPtr imp = t_imp_n(t_polyatom(V("x") - C(1), NumRel::Eq), t_polyatom(V("x"), NumRel::Gt));
  CHECK(eval_tarski(imp, model_of({{"x", Rat(0)}})));
  CHECK(eval_tarski(imp, model_of({{"x", Rat(1)}})));
}

TEST_CASE("walkthrough-style contradiction evaluates false") {
  // v2 < v3, y2 = y2f, y3 = y3f, y3 <= y2, (y3f - y2f)/(v3 - v2) > 0
  std::vector<TPtr> conj = {
      t_polyatom(V("v2") - V("v3"), NumRel::Lt),
      t_polyatom(V("y2") - V("y2f"), NumRel::Eq),
      t_polyatom(V("y3") - V("y3f"), NumRel::Eq),
      t_polyatom(V("y3") - V("y2"), NumRel::Le),
      t_divatom(V("y3f") - V("y2f"), V("v3") - V("v2"), NumRel::Gt, C(0)),
  };
  TPtr f = t_and_n(conj);
  auto m = model_of({{"v2", Rat(0)}, {"v3", Rat(1)}, {"y2", Rat(2)}, {"y3", Rat(2)},
                     {"y2f", Rat(2)}, {"y3f", Rat(2)}});
  CHECK_FALSE(eval_tarski(f, m));
}

TEST_CASE("emit_smtlib produces balanced declarations and asserts") {
  TPtr f = t_and_n({t_polyatom(V("x"), NumRel::Gt),
                    t_imp_n(t_polyatom(V("x") - V("y"), NumRel::Eq),
                            t_polyatom(V("y") * V("y") - C(2), NumRel::Ge))});
  std::string script = emit_smtlib(f);
  CHECK(script.find("(set-logic QF_NRA)") != std::string::npos);
  CHECK(script.find("(declare-const x Real)") != std::string::npos);
  CHECK(script.find("(declare-const y Real)") != std::string::npos);
  CHECK(script.find("(assert (> x 0))") != std::string::npos);
  CHECK(script.find("(check-sat)") != std::string::npos);
  int depth = 0;
  for (char c : script) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    CHECK(depth >= 0);
  }
  CHECK(depth == 0);
  // one declaration per free variable
  size_t decls = 0, pos = 0;
  while ((pos = script.find("declare-const", pos)) != std::string::npos) {
    ++decls;
    ++pos;
  }
  CHECK(decls == tarski_free_vars(f).size());
  CHECK_THROWS_AS(emit_smtlib(t_divatom(V("x"), V("y"), NumRel::Eq, C(1))), std::logic_error);
}
