#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdf/ast.hpp"  // NumRel
#include "rdf/rational.hpp"

namespace rdf {

// ---------------------------------------------------------------------------
// Polynomials over named real variables, exact rational coefficients.
// ---------------------------------------------------------------------------

// A monomial is the sorted multiset of its variables.
using Monomial = std::vector<std::string>;

struct Poly {
  std::map<Monomial, Rat> coef;  // no zero entries

  static Poly constant(const Rat& c);
  static Poly var(const std::string& name);

  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(const Poly& o) const;
  Poly operator-() const;
  bool operator==(const Poly& o) const { return coef == o.coef; }

  bool is_zero() const { return coef.empty(); }
  bool is_constant() const;
  Rat constant_value() const;  // valid when is_constant()
  int degree() const;
  std::vector<std::string> free_vars() const;
  Rat eval(const std::map<std::string, Rat>& model) const;  // throws on missing var
  std::string str() const;
};

// lhs rel 0, canonical: integer coefficients with content 1.
struct PolyAtom {
  Poly lhs;
  NumRel rel = NumRel::Eq;
};

// num/den rel rhs, kept symbolic until clear_divisions.
struct DivCmpAtom {
  Poly num, den, rhs;
  NumRel rel = NumRel::Eq;
};

struct TNode;
using TPtr = std::shared_ptr<const TNode>;

struct TNode {
  enum class Kind { True, False, Atom, Div, Not, And, Or, Imp };
  Kind kind;
  PolyAtom atom;          // Kind::Atom
  DivCmpAtom div;         // Kind::Div
  std::vector<TPtr> kids; // Not: 1; And/Or: n; Imp: 2
};

using TarskiFormula = TPtr;

TPtr t_true();
TPtr t_false();
TPtr t_polyatom(Poly lhs, NumRel rel);  // lhs rel 0; constant lhs folds to True/False
TPtr t_divatom(Poly num, Poly den, NumRel rel, Poly rhs);
TPtr t_not_n(TPtr a);
TPtr t_and_n(std::vector<TPtr> kids);
TPtr t_or_n(std::vector<TPtr> kids);
TPtr t_imp_n(TPtr a, TPtr b);

// Top-level conjuncts (flattens nested And).
std::vector<TPtr> conjuncts(const TPtr& f);
std::vector<std::string> tarski_free_vars(const TPtr& f);
std::string tarski_str(const TPtr& f);

struct NumericModel {
  std::map<std::string, Rat> values;
  bool exact = true;
};

class MissingVariable : public std::runtime_error {
 public:
  explicit MissingVariable(const std::string& v) : std::runtime_error("no value for " + v) {}
};

class UnknownSignDenominator : public std::runtime_error {
 public:
  explicit UnknownSignDenominator(const std::string& m) : std::runtime_error(m) {}
};

// Eliminates Div atoms. A division whose denominator is syntactically in
// known_positive is multiplied through directly; otherwise the sign-split
// product encoding is used (or UnknownSignDenominator is thrown when
// product_encoding is false).
TPtr clear_divisions(const TPtr& formula, const std::vector<Poly>& known_positive,
                     bool product_encoding = true);

// Exact evaluation. Div atoms evaluate under the product-encoding semantics
// (false when the denominator is zero).
bool eval_tarski(const TPtr& formula, const NumericModel& model);

bool eval_polyatom(const PolyAtom& a, const NumericModel& model);

}  // namespace rdf
