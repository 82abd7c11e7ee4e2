#include "rdf/driver.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "rdf/corpus.hpp"
#include "rdf/elastic.hpp"
#include "rdf/parser.hpp"

namespace rdf {

FormulaPtr load_input(const std::string& input) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(input, ec)) {
    std::ifstream in(input);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_formula(ss.str());
  }
  return parse_formula(input);
}

CheckRun run_branches(const FormulaPtr& formula, PipelineMode mode, const RunConfig& cfg) {
  CheckRun run;
  PipelineOptions opts;
  opts.branch_cap = cfg.branch_cap;
  run.branches = pipeline(formula, mode, opts);

  SolverConfig scfg = cfg.solver_cmd.empty() ? default_solver()
                                             : SolverConfig{cfg.solver_cmd, cfg.timeout_seconds};
  scfg.timeout_seconds = cfg.timeout_seconds;

  // Prepare scripts; identical branch scripts share one query.
  std::vector<std::string> scripts(run.branches.size());
  for (size_t i = 0; i < run.branches.size(); ++i) {
    const auto& br = run.branches[i];
    TPtr cleared = clear_divisions(br.phi4, chain_positive_diffs(br.phi3.table));
    scripts[i] = emit_smtlib(cleared);
  }
  std::map<std::string, std::vector<size_t>> groups;
  for (size_t i = 0; i < scripts.size(); ++i) groups[scripts[i]].push_back(i);
  std::vector<const std::string*> unique;
  for (const auto& [text, idxs] : groups) unique.push_back(&text);

  std::vector<SolveResult> unique_results(unique.size());
  std::vector<std::string> errors(unique.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      size_t k = next.fetch_add(1);
      if (k >= unique.size()) return;
      try {
        unique_results[k] = solve_external(*unique[k], scfg);
      } catch (const SolverTimeout& e) {
        unique_results[k].verdict = SolveResult::Verdict::Unknown;
        unique_results[k].reason = e.what();
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  int jobs = std::max(1, cfg.jobs);
  if (jobs == 1 || unique.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < std::min<size_t>(jobs, unique.size()); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (size_t k = 0; k < unique.size(); ++k)
    if (!errors[k].empty()) throw SolverNotFound(errors[k]);

  run.outcomes.resize(run.branches.size());
  for (size_t k = 0; k < unique.size(); ++k)
    for (size_t idx : groups.at(*unique[k])) run.outcomes[idx] = {idx, unique_results[k]};

  for (const auto& o : run.outcomes) {
    if (o.result.verdict == SolveResult::Verdict::Sat && !run.sat_branch) run.sat_branch = o.index;
    if (o.result.verdict == SolveResult::Verdict::Unknown) run.any_unknown = true;
  }
  return run;
}

namespace {

std::string provenance_text(const Branch& b) {
  std::string out;
  for (const auto& tag : b.provenance) out += "; " + tag.rule + ": " + tag.literal + "\n";
  return out;
}

nlohmann::json provenance_json(const Branch& b) {
  auto arr = nlohmann::json::array();
  for (const auto& tag : b.provenance) arr.push_back({{"rule", tag.rule}, {"literal", tag.literal}});
  return arr;
}

nlohmann::json model_json(const NumericModel& m) {
  nlohmann::json j;
  j["exact"] = m.exact;
  for (const auto& [k, v] : m.values) j["values"][k] = rat_str(v);
  return j;
}

// Acceptability of a rationalized model: non-strict atoms must hold exactly,
// strict ones with polynomial margin at least 1e-9.
bool recheck_model(const TPtr& phi4, const NumericModel& model) {
  const Rat margin(1, 1000000000L);
  std::function<bool(const TPtr&)> go = [&](const TPtr& f) -> bool {
    switch (f->kind) {
      case TNode::Kind::Atom: {
        if (!eval_polyatom(f->atom, model)) return false;
        if (f->atom.rel == NumRel::Lt || f->atom.rel == NumRel::Gt || f->atom.rel == NumRel::Ne)
          return rat_abs(f->atom.lhs.eval(model.values)) >= margin;
        return true;
      }
      case TNode::Kind::Not:
        return !eval_tarski(f->kids[0], model);
      case TNode::Kind::And: {
        for (const auto& k : f->kids)
          if (!go(k)) return false;
        return true;
      }
      default:
        return eval_tarski(f, model);
    }
  };
  return go(phi4);
}

}  // namespace

int cmd_check(const RunConfig& cfg, std::ostream& out) {
  const bool valid_mode = cfg.mode == RunConfig::Mode::CheckValid;
  FormulaPtr f = load_input(cfg.input);
  CheckRun run = run_branches(f, valid_mode ? PipelineMode::Validity : PipelineMode::Satisfiability,
                              cfg);

  std::string verdict;
  int exit_code = kExitOk;
  if (valid_mode) {
    if (run.sat_branch) {
      verdict = "INVALID";
      exit_code = kExitVerdict;
    } else if (run.any_unknown) {
      verdict = "UNKNOWN";
      exit_code = kExitSolver;
    } else {
      verdict = "VALID";
    }
  } else {
    if (run.sat_branch) {
      verdict = "SAT";
    } else if (run.any_unknown) {
      verdict = "UNKNOWN";
      exit_code = kExitSolver;
    } else {
      verdict = "UNSAT";
      exit_code = kExitVerdict;
    }
  }

  if (cfg.json_output) {
    nlohmann::json j;
    j["verdict"] = verdict;
    j["branches"] = run.branches.size();
    if (run.sat_branch) {
      j["branch"] = *run.sat_branch;
      j["model"] = model_json(run.outcomes[*run.sat_branch].result.model);
      j["trace"] = provenance_json(run.branches[*run.sat_branch].phi3);
    }
    out << j.dump(2) << "\n";
  } else {
    out << verdict << " (" << run.branches.size() << " branch"
        << (run.branches.size() == 1 ? "" : "es") << ")\n";
    if (run.sat_branch) {
      const auto& model = run.outcomes[*run.sat_branch].result.model;
      out << "branch " << *run.sat_branch << " model:\n";
      for (const auto& [k, v] : model.values) out << "  " << k << " = " << rat_str(v) << "\n";
    }
  }
  return exit_code;
}

int cmd_witness(const RunConfig& cfg, std::ostream& out) {
  FormulaPtr f = load_input(cfg.input);
  CheckRun run = run_branches(f, PipelineMode::Satisfiability, cfg);
  if (!run.sat_branch) {
    out << (run.any_unknown ? "error: no model (some branches unknown)\n" : "error: no model\n");
    return run.any_unknown ? kExitSolver : kExitVerdict;
  }
  const size_t idx = *run.sat_branch;
  const Branch& phi3 = run.branches[idx].phi3;
  const NumericModel& model = run.outcomes[idx].result.model;

  std::string recheck = "exact";
  if (!model.exact)
    recheck = recheck_model(run.branches[idx].phi4, model) ? "accepted" : "rejected";

  try {
    AlphaSearchResult res = search_alpha(phi3, model, cfg.grid_n);
    nlohmann::json j = nlohmann::json::parse(witness_json(res.witnesses, res.report, res.alpha));
    j["branch"] = idx;
    j["model_recheck"] = recheck;
    out << j.dump(2) << "\n";
    return res.report.all_pass ? kExitOk : kExitVerdict;
  } catch (const AlphaSearchExhausted& e) {
    nlohmann::json j;
    j["error"] = "AlphaSearchExhausted";
    j["detail"] = e.what();
    j["model_recheck"] = recheck;
    auto checks = nlohmann::json::array();
    for (const auto& c : e.last_report.checks)
      if (!c.pass) checks.push_back({{"literal", c.literal}, {"detail", c.detail}});
    j["failing"] = checks;
    out << j.dump(2) << "\n";
    return kExitVerdict;
  }
}

int cmd_corpus(const RunConfig& cfg, std::ostream& out) {
  bool all_ok = true;
  for (const auto& entry : corpus()) {
    RunConfig sub = cfg;
    sub.input = entry.text;
    FormulaPtr f = parse_formula(entry.text);
    CheckRun run = run_branches(f, PipelineMode::Validity, sub);
    std::string verdict = run.sat_branch ? "INVALID" : (run.any_unknown ? "UNKNOWN" : "VALID");
    if (verdict != "VALID") all_ok = false;
    out << std::left << std::setw(34) << entry.name << verdict << "  (" << run.branches.size()
        << " branches)\n";
  }
  return all_ok ? kExitOk : kExitVerdict;
}

int cmd_sample(const RunConfig& cfg, std::ostream& out) {
  ElasticSpec spec = make_defined(cfg.alpha, cfg.theta1, cfg.theta2);  // NoExistence surfaces
  out << "x,value,derivative\n";
  out.precision(17);
  int n = std::max(2, cfg.sample_n);
  for (int k = 0; k < n; ++k) {
    double x = static_cast<double>(k) / (n - 1);
    out << x << "," << eval_elastic(spec, x) << "," << eval_elastic_deriv(spec, x) << "\n";
  }
  return kExitOk;
}

int cmd_emit_smt(const RunConfig& cfg, std::ostream& out) {
  FormulaPtr f = load_input(cfg.input);
  PipelineOptions opts;
  opts.branch_cap = cfg.branch_cap;
  auto branches = pipeline(f, PipelineMode::Satisfiability, opts);
  std::filesystem::create_directories(cfg.out_dir);
  for (size_t i = 0; i < branches.size(); ++i) {
    TPtr cleared = clear_divisions(branches[i].phi4, chain_positive_diffs(branches[i].phi3.table));
    std::string path = cfg.out_dir + "/branch_" + std::to_string(i) + ".smt2";
    std::ofstream fo(path);
    fo << "; branch " << i << "\n" << provenance_text(branches[i].phi3) << emit_smtlib(cleared);
    out << path << "\n";
  }
  return kExitOk;
}

int run_mode(const RunConfig& cfg, std::ostream& out) {
  switch (cfg.mode) {
    case RunConfig::Mode::CheckValid:
    case RunConfig::Mode::CheckSat:
      return cmd_check(cfg, out);
    case RunConfig::Mode::Witness:
      return cmd_witness(cfg, out);
    case RunConfig::Mode::Corpus:
      return cmd_corpus(cfg, out);
    case RunConfig::Mode::Sample:
      return cmd_sample(cfg, out);
    case RunConfig::Mode::EmitSmt:
      return cmd_emit_smt(cfg, out);
  }
  return kExitVerdict;
}

}  // namespace rdf
