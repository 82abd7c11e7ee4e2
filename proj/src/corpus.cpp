#include "rdf/corpus.hpp"

namespace rdf {

const std::vector<CorpusEntry>& corpus() {
  static const std::vector<CorpusEntry> entries = {
      {"convex_meets_concave",
       "(StrictConvex(f) on [a, b] & Concave(g) on [a, b]"
       " & f(x1) = g(x1) & f(x2) = g(x2) & f(x3) = g(x3)"
       " & a <= x1 & x1 <= b & a <= x2 & x2 <= b & a <= x3 & x3 <= b)"
       " -> (x1 = x2 | x1 = x3 | x2 = x3)"},
      {"chord_above_strictly_convex",
       "(StrictConvex(f) on [a, b] & Linear(g) on [a, b] & f(a) = g(a) & f(b) = g(b))"
       " -> Gt(g, f) on (a, b)"},
      {"positive_derivative_increasing",
       "(D[f] > 0) on (a, b) -> StrictUp(f) on [a, b]"},
      {"constant_derivative_linear",
       "(D[f] = t) on [a, b] -> Linear(f) on [a, b]"},
      {"rolle_weak",
       "(a < b & f(a) = f(b)) -> !(D[f] != 0) on (a, b)"},
      {"lagrange_weak",
       "(a < b & t = (f(b) - f(a)) / (b - a)) -> !(D[f] != t) on (a, b)"},
      {"opposite_slopes_order",
       "((D[f] > 0) on (a, b) & (D[g] < 0) on (a, b) & f(a) = g(a)) -> Gt(f, g) on (a, b]"},
      {"tangent_convex_concave",
       "(f(a) = g(a) & D[f](a) = D[g](a) & StrictConvex(f) on [a, b] & Concave(g) on [a, b])"
       " -> Gt(f, g) on (a, b]"},
      {"linear_agree_twice",
       "(Linear(f) on (-inf, +inf) & Linear(g) on (-inf, +inf)"
       " & f(a) = g(a) & f(b) = g(b) & a != b) -> Eq(f, g) on (-inf, +inf)"},
      {"crossing_unique",
       "(StrictUp(f) on (-inf, +inf) & StrictDown(g) on (-inf, +inf)"
       " & f(x) = g(x) & f(y) = g(y)) -> x = y"},
      {"interior_max",
       "(a < c & c < b & (D[f] >= 0) on [a, c] & (D[f] <= 0) on [c, b]"
       " & a <= x & x <= b) -> f(c) >= f(x)"},
      {"convex_min",
       "(a <= c & c <= b & D[f](c) = 0 & Convex(f) on [a, b] & a <= x & x <= b)"
       " -> f(c) <= f(x)"},
  };
  return entries;
}

}  // namespace rdf
