#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdf/ast.hpp"

namespace rdf {

struct SourceSpan {
  size_t start = 0, end = 0;  // byte offsets, start <= end
};

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(std::string msg, SourceSpan span, std::vector<std::string> expected)
      : std::runtime_error(std::move(msg)), span(span), expected(std::move(expected)) {}
  SourceSpan span;
  std::vector<std::string> expected;
};

class ArityError : public SyntaxError {
 public:
  using SyntaxError::SyntaxError;
};

// Parses the concrete syntax:
//   connectives  !  &  |  ->  <->        (precedence high to low, -> right-assoc)
//   atoms        term cmp term [/ term]
//                Pred(f[, arg]) on interval
//                (D[f] cmp term) on interval
//   intervals    [a,b] [a,b) (a,b] (a,b) with -inf/+inf; ]a,b] spelling accepted
//   terms        + - * over var | 0 | 1 | integer | f(t) | D[f](t) | (t) | -t
FormulaPtr parse_formula(const std::string& text);

// Canonical fully parenthesized rendering; parse(render(f)) == f structurally.
std::string render_formula(const FormulaPtr& formula);

std::string render_term(const TermPtr& term);
std::string render_atom(const Atom& atom);
std::string render_interval(const IntervalSpec& iv);

}  // namespace rdf
