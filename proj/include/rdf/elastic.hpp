#pragma once

#include <stdexcept>
#include <string>

#include "rdf/rational.hpp"

namespace rdf {

class NoExistence : public std::runtime_error {
 public:
  explicit NoExistence(const std::string& m) : std::runtime_error(m) {}
};
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& m) : std::runtime_error(m) {}
};

// One exponential-parabola bump on [0,1]: C(x) = 4a u(1-u) with
// u = Alter_[d](x); vanishes at both ends, C'(0)/C'(1) prescribed.
struct SingleParams {
  bool null = true;
  Rat alpha, d1, d2;  // meaningful when !null
};

// An [alpha, theta1, theta2]-defined function. The kind follows the sign
// pattern of theta1*theta2; a double glues two half-scale singles with middle
// slope -4*alpha, a special glues a half single, the inner span of a double,
// and another half single with a +/- alpha/4 offset.
struct ElasticSpec {
  enum class Kind { Null, Single, Double, Special };
  Kind kind = Kind::Null;
  Rat alpha, theta1, theta2;

  SingleParams single;          // Single
  SingleParams dbl1, dbl2;      // Double: components on [0,1/2], ]1/2,1]
  // Special: half single on [0,1/4], double inner span on ]1/4,3/4] (+offset),
  // half single on ]3/4,1].
  SingleParams sp_head, sp_mid1, sp_mid2, sp_tail;
  Rat sp_offset;

  Rat middle_slope() const;  // C'(1/2)
};

// d parameters of the single-defined function, with the existence conditions
// enforced: returns (d1, d2) with 2a(d1+2)=theta1, -2a(d2+2)=theta2; throws
// NoExistence naming the violated condition.
std::pair<Rat, Rat> single_params(const Rat& alpha, const Rat& theta1, const Rat& theta2);

// Builds the [alpha,theta1,theta2]-defined function; kind selected by the
// sign pattern, existence conditions enforced.
ElasticSpec make_defined(const Rat& alpha, const Rat& theta1, const Rat& theta2);

// C(x) and C'(x) on [0,1]; DomainError outside.
double eval_elastic(const ElasticSpec& spec, double x);
double eval_elastic_deriv(const ElasticSpec& spec, double x);

}  // namespace rdf
