#pragma once

#include <stdexcept>
#include <string>

#include "rdf/tarski.hpp"

namespace rdf {

class SolverNotFound : public std::runtime_error {
 public:
  explicit SolverNotFound(const std::string& m) : std::runtime_error(m) {}
};
class SolverTimeout : public std::runtime_error {
 public:
  explicit SolverTimeout(const std::string& m) : std::runtime_error(m) {}
};
class SolverProtocolError : public std::runtime_error {
 public:
  explicit SolverProtocolError(const std::string& m) : std::runtime_error(m) {}
};
class ModelParseError : public std::runtime_error {
 public:
  explicit ModelParseError(const std::string& m) : std::runtime_error(m) {}
};

// QF_NRA script: set-logic, declare-const per free variable, one assert per
// top-level conjunct, check-sat, get-model, exit. The formula must be
// division free.
std::string emit_smtlib(const TPtr& formula);

struct SolverConfig {
  std::string command;          // whitespace-separated argv
  double timeout_seconds = 30;  // per query
};

// RDF_SOLVER_CMD env override, else "z3 -in".
SolverConfig default_solver();

struct SolveResult {
  enum class Verdict { Sat, Unsat, Unknown };
  Verdict verdict = Verdict::Unknown;
  NumericModel model;  // for Sat
  std::string reason;  // for Unknown
};

// Runs one solver subprocess over stdin/stdout on the given script.
SolveResult solve_external(const std::string& script, const SolverConfig& config = default_solver());

// Parses a get-model block: exact rationals from numeric literals, root
// objects isolated and rationalized to within 1e-12 (exact flag cleared).
NumericModel parse_model(const std::string& solver_output);

}  // namespace rdf
