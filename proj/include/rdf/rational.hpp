#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace rdf {

// Exact rational scalar used throughout the pipeline. Doubles appear only
// where exponentials force them (elastic evaluation, grid verification).
using Rat = mpq_class;

inline Rat rat(long num, long den = 1) {
  Rat q(num, den);
  q.canonicalize();
  return q;
}

inline int sign(const Rat& q) { return sgn(q); }

inline Rat rat_abs(const Rat& q) { return q < 0 ? Rat(-q) : q; }

inline double to_double(const Rat& q) { return q.get_d(); }

inline std::string rat_str(const Rat& q) { return q.get_str(); }

// Parses "p", "p/q", or a decimal string like "-2.5" exactly.
Rat rat_parse(const std::string& text);

}  // namespace rdf
