#include "rdf/elastic.hpp"

#include <cmath>

namespace rdf {

namespace {

std::pair<Rat, Rat> check_single(const Rat& a, const Rat& t1, const Rat& t2) {
  if (t1 * t2 >= 0) throw NoExistence("single: theta1*theta2 < 0 fails");
  Rat mag = std::min(rat_abs(t1), rat_abs(t2));
  if (rat_abs(4 * a) == 0) throw NoExistence("single: 0 < |4*alpha| fails");
  if (rat_abs(4 * a) > mag) throw NoExistence("single: |4*alpha| <= min(|theta1|,|theta2|) fails");
  if (sign(a) != sign(t1)) throw NoExistence("single: sgn(alpha) = sgn(theta1) fails");
  return {t1 / (2 * a) - 2, -t2 / (2 * a) - 2};
}

SingleParams build_single(const Rat& a, const Rat& t1, const Rat& t2) {
  if (t1 == 0 && t2 == 0) return SingleParams{};  // null component
  auto [d1, d2] = check_single(a, t1, t2);
  SingleParams s;
  s.null = false;
  s.alpha = a;
  s.d1 = d1;
  s.d2 = d2;
  return s;
}

double single_eval(const SingleParams& s, double u) {
  if (s.null) return 0.0;
  double a = to_double(s.alpha);
  double m = 2 * u - 1;
  if (u <= 0.5) return a * (1 - m * m * std::exp(-2 * to_double(s.d1) * u));
  return a * (1 - m * m * std::exp(-2 * to_double(s.d2) * (1 - u)));
}

double single_deriv(const SingleParams& s, double u) {
  if (s.null) return 0.0;
  double a = to_double(s.alpha);
  double m = 2 * u - 1;
  if (u <= 0.5) {
    double d1 = to_double(s.d1);
    return 2 * a * m * (d1 * m - 2) * std::exp(-2 * d1 * u);
  }
  double d2 = to_double(s.d2);
  return -2 * a * m * (d2 * m + 2) * std::exp(-2 * d2 * (1 - u));
}

// The defining formulas extend smoothly a hair beyond [0,1]; allow that much
// so central differences at the endpoints stay well posed.
double clamp_unit(double x) {
  if (x < -2e-5 || x > 1 + 2e-5)
    throw DomainError("elastic evaluation outside [0,1]: x=" + std::to_string(x));
  return x;
}

}  // namespace

std::pair<Rat, Rat> single_params(const Rat& alpha, const Rat& theta1, const Rat& theta2) {
  if (alpha == 0 && theta1 == 0 && theta2 == 0) return {Rat(0), Rat(0)};  // null function
  return check_single(alpha, theta1, theta2);
}

Rat ElasticSpec::middle_slope() const {
  switch (kind) {
    case Kind::Null:
    case Kind::Single:
      return 0;
    case Kind::Double:
      return -4 * alpha;
    case Kind::Special:
      return -2 * alpha;
  }
  return 0;
}

ElasticSpec make_defined(const Rat& alpha, const Rat& theta1, const Rat& theta2) {
  ElasticSpec spec;
  spec.alpha = alpha;
  spec.theta1 = theta1;
  spec.theta2 = theta2;

  if (theta1 == 0 && theta2 == 0) {
    if (alpha != 0) throw NoExistence("null: alpha = 0 fails when theta1 = theta2 = 0");
    spec.kind = ElasticSpec::Kind::Null;
    return spec;
  }
  Rat prod = theta1 * theta2;
  if (prod < 0) {
    spec.kind = ElasticSpec::Kind::Single;
    spec.single = build_single(alpha, theta1, theta2);
    return spec;
  }
  if (prod > 0) {
    spec.kind = ElasticSpec::Kind::Double;
    Rat mag = std::min(rat_abs(theta1), rat_abs(theta2));
    if (rat_abs(4 * alpha) == 0) throw NoExistence("double: 0 < |4*alpha| fails");
    if (rat_abs(4 * alpha) > mag)
      throw NoExistence("double: |4*alpha| <= min(|theta1|,|theta2|) fails");
    if (sign(alpha) != sign(theta1)) throw NoExistence("double: sgn(alpha) = sgn(theta1) fails");
    Rat mid = -4 * alpha;
    spec.dbl1 = build_single(alpha / 2, theta1 / 2, mid / 2);
    spec.dbl2 = build_single(-alpha / 2, mid / 2, theta2 / 2);
    return spec;
  }
  // Exactly one of the thetas vanishes.
  spec.kind = ElasticSpec::Kind::Special;
  Rat sum = theta1 + theta2;
  if (rat_abs(4 * alpha) == 0) throw NoExistence("special: 0 < |4*alpha| fails");
  if (rat_abs(4 * alpha) > rat_abs(sum))
    throw NoExistence("special: |4*alpha| <= |theta1+theta2| fails");
  if (sign(alpha) != sign(sum))
    throw NoExistence("special: sgn(alpha) = sgn(theta1+theta2) fails");
  Rat mid = -2 * alpha;  // middle slope of the inner double-[alpha/2, sum, sum]
  spec.sp_head = build_single(alpha / 2, theta1 / 2, -theta1 / 2);
  spec.sp_mid1 = build_single(alpha / 4, sum / 2, mid / 2);
  spec.sp_mid2 = build_single(-alpha / 4, mid / 2, sum / 2);
  spec.sp_tail = build_single(-alpha / 2, -theta2 / 2, theta2 / 2);
  spec.sp_offset = theta1 != 0 ? Rat(alpha / 4) : Rat(-alpha / 4);
  return spec;
}

double eval_elastic(const ElasticSpec& spec, double x) {
  x = clamp_unit(x);
  switch (spec.kind) {
    case ElasticSpec::Kind::Null:
      return 0.0;
    case ElasticSpec::Kind::Single:
      return single_eval(spec.single, x);
    case ElasticSpec::Kind::Double:
      return x <= 0.5 ? single_eval(spec.dbl1, 2 * x) : single_eval(spec.dbl2, 2 * x - 1);
    case ElasticSpec::Kind::Special: {
      double off = to_double(spec.sp_offset);
      if (x <= 0.25) return single_eval(spec.sp_head, 2 * x);
      if (x <= 0.5) return single_eval(spec.sp_mid1, 2 * x) + off;
      if (x <= 0.75) return single_eval(spec.sp_mid2, 2 * x - 1) + off;
      return single_eval(spec.sp_tail, 2 * x - 1);
    }
  }
  return 0.0;
}

double eval_elastic_deriv(const ElasticSpec& spec, double x) {
  x = clamp_unit(x);
  switch (spec.kind) {
    case ElasticSpec::Kind::Null:
      return 0.0;
    case ElasticSpec::Kind::Single:
      return single_deriv(spec.single, x);
    case ElasticSpec::Kind::Double:
      return x <= 0.5 ? 2 * single_deriv(spec.dbl1, 2 * x) : 2 * single_deriv(spec.dbl2, 2 * x - 1);
    case ElasticSpec::Kind::Special: {
      if (x <= 0.25) return 2 * single_deriv(spec.sp_head, 2 * x);
      if (x <= 0.5) return 2 * single_deriv(spec.sp_mid1, 2 * x);
      if (x <= 0.75) return 2 * single_deriv(spec.sp_mid2, 2 * x - 1);
      return 2 * single_deriv(spec.sp_tail, 2 * x - 1);
    }
  }
  return 0.0;
}

}  // namespace rdf
