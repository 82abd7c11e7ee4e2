// Command-line front end for the quantifier-free reals-with-C1-functions
// decision procedure.

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "rdf/driver.hpp"
#include "rdf/elastic.hpp"
#include "rdf/parser.hpp"

int main(int argc, char** argv) {
  CLI::App app{"decision procedure for reals with C1 function variables"};

  rdf::RunConfig cfg;
  std::string mode = "check-sat";
  std::string alpha = "1", theta1 = "6", theta2 = "-12";

  app.add_option("--mode", mode, "check-valid|check-sat|emit-smt|witness|corpus|sample")
      ->default_val("check-sat");
  app.add_option("input", cfg.input, "formula file or inline formula");
  app.add_option("--solver", cfg.solver_cmd, "solver command (default: $RDF_SOLVER_CMD or 'z3 -in')");
  app.add_option("--timeout", cfg.timeout_seconds, "per-branch solver timeout, seconds")
      ->check(CLI::PositiveNumber);
  app.add_option("--grid", cfg.grid_n, "verification grid points per interval");
  app.add_option("--jobs", cfg.jobs, "parallel solver processes");
  app.add_option("--branch-cap", cfg.branch_cap, "max domain variables per conjunction");
  std::string format = "text";
  app.add_option("--format", format, "text|json");
  app.add_option("--out", cfg.out_dir, "output directory for emit-smt");
  app.add_option("--alpha", alpha, "sample mode: alpha (rational)");
  app.add_option("--theta1", theta1, "sample mode: theta1 (rational)");
  app.add_option("--theta2", theta2, "sample mode: theta2 (rational)");
  app.add_option("--n", cfg.sample_n, "sample mode: number of rows");

  CLI11_PARSE(app, argc, argv);

  const std::map<std::string, rdf::RunConfig::Mode> modes = {
      {"check-valid", rdf::RunConfig::Mode::CheckValid},
      {"check-sat", rdf::RunConfig::Mode::CheckSat},
      {"emit-smt", rdf::RunConfig::Mode::EmitSmt},
      {"witness", rdf::RunConfig::Mode::Witness},
      {"corpus", rdf::RunConfig::Mode::Corpus},
      {"sample", rdf::RunConfig::Mode::Sample},
  };
  auto it = modes.find(mode);
  if (it == modes.end()) {
    std::cerr << "unknown mode: " << mode << "\n";
    return rdf::kExitParse;
  }
  cfg.mode = it->second;
  cfg.json_output = format == "json";
  if (cfg.input.empty() && cfg.mode != rdf::RunConfig::Mode::Corpus &&
      cfg.mode != rdf::RunConfig::Mode::Sample) {
    std::cerr << "missing input formula\n";
    return rdf::kExitParse;
  }

  try {
    cfg.alpha = rdf::rat_parse(alpha);
    cfg.theta1 = rdf::rat_parse(theta1);
    cfg.theta2 = rdf::rat_parse(theta2);
  } catch (const std::exception& e) {
    std::cerr << "bad rational: " << e.what() << "\n";
    return rdf::kExitParse;
  }

  try {
    return rdf::run_mode(cfg, std::cout);
  } catch (const rdf::SyntaxError& e) {
    std::cerr << "parse error at [" << e.span.start << "," << e.span.end << "): " << e.what()
              << "\n";
    return rdf::kExitParse;
  } catch (const rdf::BranchExplosion& e) {
    std::cerr << "error: " << e.what() << " (raise --branch-cap)\n";
    return rdf::kExitParse;
  } catch (const rdf::SolverNotFound& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return rdf::kExitSolver;
  } catch (const rdf::SolverTimeout& e) {
    std::cerr << "solver timeout: " << e.what() << "\n";
    return rdf::kExitSolver;
  } catch (const rdf::SolverProtocolError& e) {
    std::cerr << "solver protocol error: " << e.what() << "\n";
    return rdf::kExitSolver;
  } catch (const rdf::NoExistence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rdf::kExitVerdict;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rdf::kExitVerdict;
  }
}
