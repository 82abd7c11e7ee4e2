#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdf/ast.hpp"

namespace rdf {

// ---------------------------------------------------------------------------
// Flat literals: every term position is a plain variable or 0/1, every
// interval end a variable or an infinity.
// ---------------------------------------------------------------------------

struct FlatArg {
  enum class K { Var, Zero, One };
  K k = K::Zero;
  std::string name;

  static FlatArg var(std::string n) { return {K::Var, std::move(n)}; }
  static FlatArg zero() { return {K::Zero, {}}; }
  static FlatArg one() { return {K::One, {}}; }
  bool is_var() const { return k == K::Var; }
  bool operator==(const FlatArg& o) const { return k == o.k && name == o.name; }
  std::string str() const { return k == K::Var ? name : (k == K::Zero ? "0" : "1"); }
};

struct FlatEnd {
  enum class K { NegInf, Var, PosInf };
  K k = K::Var;
  std::string name;

  static FlatEnd neg_inf() { return {K::NegInf, {}}; }
  static FlatEnd pos_inf() { return {K::PosInf, {}}; }
  static FlatEnd var(std::string n) { return {K::Var, std::move(n)}; }
  bool is_var() const { return k == K::Var; }
  bool infinite() const { return k != K::Var; }
  bool operator==(const FlatEnd& o) const { return k == o.k && name == o.name; }
  std::string str() const {
    return k == K::Var ? name : (k == K::NegInf ? "-inf" : "+inf");
  }
};

struct FlatIv {
  FlatEnd lo, hi;
  bool lo_closed = true, hi_closed = true;
  std::string str() const {
    return std::string(lo_closed ? "[" : "(") + lo.str() + ", " + hi.str() +
           (hi_closed ? "]" : ")");
  }
};

struct FlatLiteral {
  enum class Kind {
    AddDef,   // z = x + y
    MulDef,   // z = x * y
    Cmp,      // x rel y
    AppDef,   // z = f(x)
    DAppDef,  // z = D[f](x)
    FunEq, FunGt,
    StrictUp, StrictDown, Convex, StrictConvex, Concave, StrictConcave,
    DerivCmp,  // (D[f] rel z)_iv
  };

  Kind kind;
  bool neg = false;  // only interval predicates may be negated
  NumRel rel = NumRel::Eq;
  FlatArg z, x, y;  // AddDef/MulDef: z = x (+|*) y; Cmp: x rel y; AppDef: z = f(x); DerivCmp: bound z
  std::string f, g;
  FlatIv iv;
  bool split_done = false;  // endpoint case split already applied (step 1 internal)

  bool has_interval() const {
    switch (kind) {
      case Kind::AddDef: case Kind::MulDef: case Kind::Cmp:
      case Kind::AppDef: case Kind::DAppDef:
        return false;
      default:
        return true;
    }
  }
  bool is_fun_literal() const { return has_interval() || kind == Kind::AppDef || kind == Kind::DAppDef; }
  std::string str() const;
};

// Fresh-variable supply. User names may not begin with '_', so every
// generated name is collision free.
struct FreshNames {
  long next = 0;
  std::string make(const std::string& stem) { return "_" + stem + std::to_string(next++); }
};

// Signed atom as produced by DNF.
struct SignedAtom {
  Atom atom;
  bool neg = false;
};

class BranchExplosion : public std::runtime_error {
 public:
  explicit BranchExplosion(const std::string& m) : std::runtime_error(m) {}
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Negation normal form over primitive atoms: negations of numeric atoms are
// rewritten into positive primitives (not(x>y) ~> x<y or x=y), negations of
// interval predicates stay as negated leaves.
FormulaPtr push_negations(const FormulaPtr& formula);

// Disjunctive normal form. Conjunctions containing a literal and its
// negation are dropped; duplicate literals are merged.
std::vector<std::vector<SignedAtom>> to_dnf(const FormulaPtr& formula);

// Rewrites a conjunction of (possibly negated) primitive atoms into flat
// literals, naming every compound subterm with a fresh variable.
std::vector<FlatLiteral> flatten(const std::vector<SignedAtom>& conjunction, FreshNames& fresh);

// Domain variables of a flat conjunction, first-occurrence order.
std::vector<std::string> flat_domain_vars(const std::vector<FlatLiteral>& literals);

std::vector<FlatLiteral> substitute_flat(const std::vector<FlatLiteral>& literals,
                                         const std::map<std::string, std::string>& renaming);

struct OrderedConjunction {
  std::vector<FlatLiteral> literals;          // includes the chain literals
  std::vector<std::string> chain;             // v1 < ... < vr, distinct
  std::map<std::string, std::string> merged;  // eliminated name -> representative

  // Validates: chain covers exactly the domain variables of `literals`, and
  // each consecutive pair has its strict chain literal.
  static OrderedConjunction checked(std::vector<FlatLiteral> literals,
                                    std::vector<std::string> chain,
                                    std::map<std::string, std::string> merged);
};

// One branch per weak order (ordered partition) of the domain variables.
// Branches whose chain contradicts a numeric literal between two chain
// variables are pruned.
std::vector<OrderedConjunction> enumerate_orderings(const std::vector<FlatLiteral>& literals,
                                                    int branch_cap = 8);

// Order constraint between two variables, used when extending a chain.
struct OrderConstraint {
  std::string a, b;
  NumRel rel;  // a rel b, rel in {Lt, Le, Eq}
};

struct ChainExtension {
  std::vector<std::string> chain;
  std::map<std::string, std::string> merged;  // new-var -> representative (possibly another new var)
};

// All weak-order insertions of `new_vars` into `chain` (old blocks stay
// distinct and ordered) consistent with the constraints.
std::vector<ChainExtension> enumerate_chain_extensions(
    const std::vector<std::string>& chain, const std::vector<std::string>& new_vars,
    const std::vector<OrderConstraint>& constraints);

}  // namespace rdf
