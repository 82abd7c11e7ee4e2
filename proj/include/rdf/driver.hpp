#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rdf/eliminate.hpp"
#include "rdf/smtlib.hpp"
#include "rdf/witness.hpp"

namespace rdf {

struct RunConfig {
  enum class Mode { CheckValid, CheckSat, EmitSmt, Witness, Corpus, Sample };
  Mode mode = Mode::CheckSat;
  std::string input;       // path or inline formula text
  std::string solver_cmd;  // empty: RDF_SOLVER_CMD / "z3 -in"
  double timeout_seconds = 30;
  int grid_n = 256;
  int jobs = 1;
  int branch_cap = 8;
  bool json_output = false;
  std::string out_dir = ".";  // emit-smt
  // sample mode
  Rat alpha = Rat(1), theta1 = Rat(6), theta2 = Rat(-12);
  int sample_n = 512;
};

// Exit codes: 0 success, 1 verdict/property failure, 2 parse error, 3 solver
// failure.
constexpr int kExitOk = 0;
constexpr int kExitVerdict = 1;
constexpr int kExitParse = 2;
constexpr int kExitSolver = 3;

struct BranchOutcome {
  size_t index = 0;
  SolveResult result;
};

struct CheckRun {
  std::vector<PipelineResult> branches;
  std::vector<BranchOutcome> outcomes;  // ordered by branch index
  std::optional<size_t> sat_branch;     // first Sat branch
  bool any_unknown = false;
};

// Reduces, clears divisions, solves every branch (in parallel up to
// cfg.jobs, identical scripts deduplicated).
CheckRun run_branches(const FormulaPtr& formula, PipelineMode mode, const RunConfig& cfg);

FormulaPtr load_input(const std::string& input);  // path or inline text

int cmd_check(const RunConfig& cfg, std::ostream& out);
int cmd_witness(const RunConfig& cfg, std::ostream& out);
int cmd_corpus(const RunConfig& cfg, std::ostream& out);
int cmd_sample(const RunConfig& cfg, std::ostream& out);
int cmd_emit_smt(const RunConfig& cfg, std::ostream& out);

int run_mode(const RunConfig& cfg, std::ostream& out);

}  // namespace rdf
