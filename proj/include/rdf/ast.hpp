#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rdf {

// ---------------------------------------------------------------------------
// Numerical terms
// ---------------------------------------------------------------------------
//
// The term language is deliberately minimal: variables, the constants 0 and
// 1, the three ring operations, and the two application forms f(t), D[f](t).
// Integer literals are desugared by the parser into sums of 1.

struct NumTerm;
using TermPtr = std::shared_ptr<const NumTerm>;

struct NumTerm {
  enum class Kind { Var, Zero, One, Add, Sub, Mul, Apply, DApply };

  Kind kind;
  std::string name;  // Var: variable name; Apply/DApply: function variable
  TermPtr lhs, rhs;  // Add/Sub/Mul: operands; Apply/DApply: lhs = argument
};

TermPtr t_var(std::string name);
TermPtr t_zero();
TermPtr t_one();
TermPtr t_add(TermPtr a, TermPtr b);
TermPtr t_sub(TermPtr a, TermPtr b);
TermPtr t_mul(TermPtr a, TermPtr b);
TermPtr t_apply(std::string f, TermPtr arg);
TermPtr t_dapply(std::string f, TermPtr arg);
TermPtr t_int(long n);  // n >= 0, desugared to 0, 1, 1+1, ...

bool term_equal(const TermPtr& a, const TermPtr& b);

// ---------------------------------------------------------------------------
// Interval specs
// ---------------------------------------------------------------------------

struct ExtEnd {
  enum class Kind { NegInf, Term, PosInf };
  Kind kind = Kind::Term;
  TermPtr term;  // only for Kind::Term

  static ExtEnd neg_inf() { return {Kind::NegInf, nullptr}; }
  static ExtEnd pos_inf() { return {Kind::PosInf, nullptr}; }
  static ExtEnd of(TermPtr t) { return {Kind::Term, std::move(t)}; }
  bool infinite() const { return kind != Kind::Term; }
};

struct IntervalSpec {
  ExtEnd lo, hi;
  bool lo_closed = true, hi_closed = true;

  // An infinite end is never closed.
  IntervalSpec(ExtEnd l, ExtEnd h, bool lc, bool hc)
      : lo(std::move(l)), hi(std::move(h)), lo_closed(lc), hi_closed(hc) {
    if (lo.infinite()) lo_closed = false;
    if (hi.infinite()) hi_closed = false;
    if (lo.kind == ExtEnd::Kind::PosInf || hi.kind == ExtEnd::Kind::NegInf)
      throw std::invalid_argument("interval: +inf only legal on the right, -inf on the left");
  }
};

// ---------------------------------------------------------------------------
// Atoms and formulas
// ---------------------------------------------------------------------------

enum class NumRel { Eq, Ne, Lt, Le, Gt, Ge };

NumRel flip(NumRel r);     // swap sides:  a r b  <=>  b flip(r) a
NumRel negate(NumRel r);   // complement:  not (a r b)  <=>  a negate(r) b
const char* rel_text(NumRel r);

struct Atom {
  enum class Kind {
    // primitive
    NumCmp,        // s rel t          (primitive only with rel Eq/Gt)
    FunEq,         // (f = g)_A
    FunGt,         // (f > g)_A
    StrictUp, StrictDown, Convex, StrictConvex, Concave, StrictConcave,
    DerivCmp,      // (D[f] rel t)_A   (primitive with rel in {Eq,Lt,Gt,Le,Ge})
    // derived relators, removed by expand_derived
    Up, Down,      // (monotone non-strict)
    DivCmp,        // s rel t1/t2
    Constant, Linear, Affine,
    PointUp, PointDown,  // Up(f,s)_A / Down(f,s)_A
  };

  Kind kind;
  NumRel rel = NumRel::Eq;            // NumCmp, DerivCmp, DivCmp
  TermPtr s, t, t2;                   // NumCmp: s,t; DivCmp: s, t, t2; DerivCmp: t (bound); PointUp/Down: s (point)
  std::string f, g;                   // function variables
  std::optional<IntervalSpec> iv;     // interval-tagged atoms
};

bool atom_is_primitive(const Atom& a);
bool atom_has_interval(Atom::Kind k);

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  enum class Kind { Atom, Not, And, Or, Imp, Iff };
  Kind kind;
  std::optional<Atom> atom;  // Kind::Atom
  FormulaPtr a, b;           // Not: a; binary: a,b
};

FormulaPtr f_atom(Atom a);
FormulaPtr f_not(FormulaPtr a);
FormulaPtr f_and(FormulaPtr a, FormulaPtr b);
FormulaPtr f_or(FormulaPtr a, FormulaPtr b);
FormulaPtr f_imp(FormulaPtr a, FormulaPtr b);
FormulaPtr f_iff(FormulaPtr a, FormulaPtr b);
FormulaPtr f_and_all(const std::vector<FormulaPtr>& parts);  // empty => 0=0
FormulaPtr f_or_all(const std::vector<FormulaPtr>& parts);   // empty => 0>0

bool formula_equal(const FormulaPtr& a, const FormulaPtr& b);

// Convenience atom builders.
Atom a_numcmp(NumRel r, TermPtr s, TermPtr t);
Atom a_funpred(Atom::Kind k, std::string f, IntervalSpec iv);
Atom a_funcmp(Atom::Kind k, std::string f, std::string g, IntervalSpec iv);
Atom a_derivcmp(NumRel r, std::string f, TermPtr bound, IntervalSpec iv);

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Rewrites every derived relator into primitive atoms: !=, <, <=, >= on
// terms, division comparisons, (D[f]!=t)_A, Up/Down (interval and pointwise),
// Constant/Linear/Affine. Total and idempotent; the result contains only
// NumCmp{Eq,Gt}, FunEq, FunGt, the six monotonicity/convexity predicates and
// DerivCmp{Eq,Lt,Gt,Le,Ge}.
FormulaPtr expand_derived(const FormulaPtr& formula);

// Numerical variables occurring as the argument of f(x)/D[f](x) or as an
// interval end, in first-occurrence order.
std::vector<std::string> collect_domain_vars(const FormulaPtr& formula);

// Renames every occurrence of a numerical variable.
FormulaPtr substitute_var(const FormulaPtr& formula, const std::string& old_name,
                          const std::string& new_name);

// All numerical / function variables, first-occurrence order.
std::vector<std::string> collect_num_vars(const FormulaPtr& formula);
std::vector<std::string> collect_fun_vars(const FormulaPtr& formula);

}  // namespace rdf
