#include "rdf/rational.hpp"

#include <stdexcept>

namespace rdf {

Rat rat_parse(const std::string& text) {
  std::string s = text;
  bool neg = false;
  size_t i = 0;
  if (i < s.size() && (s[i] == '-' || s[i] == '+')) {
    neg = s[i] == '-';
    ++i;
  }
  std::string digits, frac;
  while (i < s.size() && isdigit(static_cast<unsigned char>(s[i]))) digits += s[i++];
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && isdigit(static_cast<unsigned char>(s[i]))) frac += s[i++];
  } else if (i < s.size() && s[i] == '/') {
    std::string den = s.substr(i + 1);
    if (digits.empty() || den.empty()) throw std::invalid_argument("bad rational: " + text);
    Rat q{mpz_class(digits), mpz_class(den)};
    q.canonicalize();
    return neg ? Rat(-q) : q;
  }
  if (i != s.size() || digits.empty())
    throw std::invalid_argument("bad rational: " + text);
  mpz_class num(digits + frac);
  mpz_class den = 1;
  for (size_t k = 0; k < frac.size(); ++k) den *= 10;
  Rat q(num, den);
  q.canonicalize();
  return neg ? Rat(-q) : q;
}

}  // namespace rdf
