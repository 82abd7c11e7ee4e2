#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rdf/flat.hpp"
#include "rdf/tarski.hpp"

namespace rdf {

// ---------------------------------------------------------------------------
// Per-branch bookkeeping for the elimination pipeline.
// ---------------------------------------------------------------------------

struct VarTable {
  std::vector<std::string> chain;  // v1 < ... < vr

  // Names of the stub variables, lazily created but deterministic.
  std::map<std::pair<std::string, int>, std::string> y_names, t_names;  // (f, 1-based index)
  std::map<std::string, std::string> gamma0_names, gammar_names, k0_names, kr_names;

  int r() const { return static_cast<int>(chain.size()); }
  int position(const std::string& v) const;  // 1-based; 0 when absent

  // ind(-inf)=1, ind(v_l)=l, ind(+inf)=r
  int ind(const FlatEnd& e) const;

  std::string y_name(const std::string& f, int j);
  std::string t_name(const std::string& f, int j);
  std::string gamma_name(const std::string& f, int side);  // side 0 or 1 (r)
  std::string k_name(const std::string& f, int side);

  const std::string* find_y(const std::string& f, int j) const;
  const std::string* find_t(const std::string& f, int j) const;
  const std::string* find_gamma(const std::string& f, int side) const;
  const std::string* find_k(const std::string& f, int side) const;
};

struct RuleTag {
  std::string rule;     // "1b1", "2d", ...
  std::string literal;  // rendered text
};

// gamma_{side}(f) rel bound, as introduced by step 4.
struct GammaBound {
  std::string f;
  int side;  // 0 = left tail, 1 = right tail
  NumRel rel;
  FlatArg bound;
};

// k_{side}(f) >= k_{side}(g)
struct KOrder {
  int side;
  std::string f, g;
};

struct Branch {
  std::vector<FlatLiteral> literals;
  VarTable table;
  std::map<std::string, std::string> merged;
  std::vector<RuleTag> provenance;
  FreshNames fresh;

  // Filled by step 4.
  std::vector<TPtr> arith;
  std::vector<GammaBound> gamma_bounds;
  std::vector<KOrder> k_orders;

  // Step-1 internal: open (f>g)/(D[f]><t) spans whose both-touch disjunct
  // may need a midpoint domain variable.
  struct MidpointTodo {
    bool deriv;  // false: (f>g), true: derivative comparison
    std::string f;
    std::string w1, w2;
  };
  std::vector<MidpointTodo> midpoint_todo;

  void tag(const std::string& rule, const std::string& literal) {
    provenance.push_back({rule, literal});
  }
};

Branch branch_of(const OrderedConjunction& oc, const FreshNames& fresh);

// ---------------------------------------------------------------------------
// Pipeline steps
// ---------------------------------------------------------------------------

// Step 1: endpoint behavior. Unbounded-open (f>g)/(D[f]><t) intervals are cut
// at a neighboring domain variable, bounded non-closed ones are case split
// into touching alternatives (with midpoint variables for the doubly open
// case), and every other literal's interval is closed. Returns the disjunct
// branches; an empty result means the branch is infeasible.
std::vector<Branch> step1_endpoints(const Branch& branch);

// Step 2: negative-clause removal. Every negated function-predicate literal
// is replaced by fresh witness points; the new domain variables fan the
// branch out over the chain extensions consistent with their bounds.
std::vector<Branch> step2_negatives(const Branch& branch);

// Step 3: explicit evaluation: y^f_j = f(v_j), t^f_j = D[f](v_j) for every
// function and chain index, plus links for pre-existing applications.
Branch step3_evaluate(const Branch& branch);

// Step 4: replaces every function-bearing literal by arithmetic constraints
// over the stub variables (filled into branch.arith with provenance), then
// drops them. Returns the function-free formula; secants stay as division
// atoms (cleared later against the chain).
TPtr step4_eliminate(Branch& branch);

// ---------------------------------------------------------------------------
// Whole pipeline
// ---------------------------------------------------------------------------

enum class PipelineMode { Satisfiability, Validity };

struct PipelineOptions {
  int branch_cap = 8;
};

struct PipelineResult {
  TPtr phi4;
  Branch phi3;  // post-step-3 literals plus step-4 records (gamma/k, table)
};

struct PipelineStages {
  std::vector<std::vector<SignedAtom>> dnf;
  std::vector<OrderedConjunction> ordered;
  // (index into `ordered`, branch after step 1)
  std::vector<std::pair<size_t, Branch>> after_step1;
};

std::vector<PipelineResult> pipeline(const FormulaPtr& formula, PipelineMode mode,
                                     const PipelineOptions& opts = {},
                                     PipelineStages* stages = nullptr);

// Chain differences v_{j+1} - v_j, the denominators known positive.
std::vector<Poly> chain_positive_diffs(const VarTable& table);

// Index range [lo, hi] (1-based, possibly empty when lo > hi) of the chain
// positions covered by a literal's interval, shrunk at open variable ends.
std::pair<int, int> literal_index_range(const VarTable& table, const FlatIv& iv);

Poly poly_of_arg(const FlatArg& a);

}  // namespace rdf
