#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdf/elastic.hpp"
#include "rdf/eliminate.hpp"

namespace rdf {

class IncompatibleOrder : public std::runtime_error {
 public:
  explicit IncompatibleOrder(const std::string& m) : std::runtime_error(m) {}
};
class ExistenceViolation : public std::runtime_error {
 public:
  explicit ExistenceViolation(const std::string& m) : std::runtime_error(m) {}
};

// ---------------------------------------------------------------------------
// Monotone point selection in an ordered interval system
// ---------------------------------------------------------------------------

struct IntervalQ {
  Rat lo, hi;
  bool lo_closed = true, hi_closed = true;

  bool contains(const Rat& x) const {
    if (x < lo || x > hi) return false;
    if (x == lo && !lo_closed) return false;
    if (x == hi && !hi_closed) return false;
    return true;
  }
  bool empty() const { return lo > hi || (lo == hi && !(lo_closed && hi_closed)); }
};

// Picks phi_k in I_k with I_j <= I_i implying phi_j <= phi_i. `leq` lists
// pairs (j, i) meaning I_j <= I_i; the relation is closed reflexively and
// transitively. Throws IncompatibleOrder when the compatibility condition
// (some x in I_j, y in I_i with x <= y for every related pair) fails.
std::map<int, Rat> select_interval_points(const std::map<int, IntervalQ>& intervals,
                                          const std::vector<std::pair<int, int>>& leq);

// ---------------------------------------------------------------------------
// Witness functions
// ---------------------------------------------------------------------------

// Piecewise C1 interpretation of one function variable: linear-plus-elastic
// pieces between breakpoints, exponential tails approaching the asymptotic
// slopes gamma_left/gamma_right.
struct WitnessFunction {
  std::string fname;
  std::vector<Rat> eta;    // breakpoints, strictly increasing, size >= 1
  std::vector<Rat> value;  // f(eta_i)
  std::vector<Rat> slope;  // f'(eta_i)
  Rat gamma_left, gamma_right;
  std::vector<ElasticSpec> piece;  // size eta.size() - 1
  bool left_refined = false, right_refined = false;  // synthetic tail breakpoints
};

double eval_witness(const WitnessFunction& w, double x);
double eval_witness_deriv(const WitnessFunction& w, double x);

// Largest mismatch between the stored breakpoint data and the one-sided
// closed-form limits of the adjacent pieces (value and slope).
double c1_residual(const WitnessFunction& w);

// ---------------------------------------------------------------------------
// alpha selection
// ---------------------------------------------------------------------------

struct AlphaBound {
  std::vector<Rat> magnitudes;  // the set A (deduplicated, ascending)
  Rat m;                        // 0 when A is empty, else min(A)/2
  Rat sup_interval;             // m/8; the admissible alphas are ]0, sup[ (or {0})

  bool trivial() const { return magnitudes.empty(); }
};

AlphaBound alpha_bound(const Branch& phi3, const NumericModel& model);

std::map<std::string, WitnessFunction> build_witness(const Branch& phi3,
                                                     const NumericModel& model,
                                                     const Rat& alpha);

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

struct LiteralCheck {
  std::string literal;
  bool pass = true;
  bool vacuous = false;
  double worst_margin = 0;  // most adverse signed margin observed
  std::string detail;
};

struct Report {
  bool all_pass = true;
  bool approximate_model = false;
  std::vector<LiteralCheck> checks;
};

Report verify_witness(const Branch& phi3, const std::map<std::string, WitnessFunction>& witnesses,
                      const NumericModel& model, int grid_n);

class AlphaSearchExhausted : public std::runtime_error {
 public:
  AlphaSearchExhausted(const std::string& m, Report last)
      : std::runtime_error(m), last_report(std::move(last)) {}
  Report last_report;
};

struct AlphaSearchResult {
  Rat alpha;
  std::map<std::string, WitnessFunction> witnesses;
  Report report;
};

// Starts at sup/2 and halves until verify_witness passes (at most 40 tries).
AlphaSearchResult search_alpha(const Branch& phi3, const NumericModel& model, int grid_n = 256);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string witness_json(const std::map<std::string, WitnessFunction>& witnesses,
                         const Report& report, const Rat& alpha);
// CSV with header eta,value,derivative.
std::string sample_witness_csv(const WitnessFunction& w, double lo, double hi, int n);

}  // namespace rdf
