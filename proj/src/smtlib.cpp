#include "rdf/smtlib.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <functional>
#include <sstream>

namespace rdf {

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

namespace {

std::string rat_sexpr(const Rat& q) {
  mpz_class num = q.get_num(), den = q.get_den();
  mpz_class mag = abs(num);
  if (num >= 0 && den == 1) return num.get_str();
  if (den == 1) return "(- " + mag.get_str() + ")";
  std::string core = "(/ " + mag.get_str() + " " + den.get_str() + ")";
  return num < 0 ? "(- " + core + ")" : core;
}

std::string poly_sexpr(const Poly& p) {
  if (p.coef.empty()) return "0";
  std::vector<std::string> terms;
  for (const auto& [m, c] : p.coef) {
    std::vector<std::string> factors;
    if (c != 1 || m.empty()) factors.push_back(rat_sexpr(c));
    for (const auto& v : m) factors.push_back(v);
    if (factors.size() == 1) {
      terms.push_back(factors[0]);
    } else {
      std::string t = "(*";
      for (const auto& f : factors) t += " " + f;
      terms.push_back(t + ")");
    }
  }
  if (terms.size() == 1) return terms[0];
  std::string out = "(+";
  for (const auto& t : terms) out += " " + t;
  return out + ")";
}

std::string node_sexpr(const TPtr& f) {
  switch (f->kind) {
    case TNode::Kind::True: return "true";
    case TNode::Kind::False: return "false";
    case TNode::Kind::Atom: {
      const char* op = nullptr;
      switch (f->atom.rel) {
        case NumRel::Eq: op = "="; break;
        case NumRel::Lt: op = "<"; break;
        case NumRel::Le: op = "<="; break;
        case NumRel::Gt: op = ">"; break;
        case NumRel::Ge: op = ">="; break;
        case NumRel::Ne:
          return "(not (= " + poly_sexpr(f->atom.lhs) + " 0))";
      }
      return std::string("(") + op + " " + poly_sexpr(f->atom.lhs) + " 0)";
    }
    case TNode::Kind::Div:
      throw std::logic_error("emit_smtlib: division atom not cleared");
    case TNode::Kind::Not:
      return "(not " + node_sexpr(f->kids[0]) + ")";
    case TNode::Kind::And:
    case TNode::Kind::Or: {
      std::string out = f->kind == TNode::Kind::And ? "(and" : "(or";
      for (const auto& k : f->kids) out += " " + node_sexpr(k);
      return out + ")";
    }
    case TNode::Kind::Imp:
      return "(=> " + node_sexpr(f->kids[0]) + " " + node_sexpr(f->kids[1]) + ")";
  }
  return "true";
}

}  // namespace

std::string emit_smtlib(const TPtr& formula) {
  std::ostringstream os;
  os << "(set-logic QF_NRA)\n";
  for (const auto& v : tarski_free_vars(formula)) os << "(declare-const " << v << " Real)\n";
  for (const auto& c : conjuncts(formula)) os << "(assert " << node_sexpr(c) << ")\n";
  os << "(check-sat)\n(get-model)\n(exit)\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Subprocess driver
// ---------------------------------------------------------------------------

SolverConfig default_solver() {
  SolverConfig cfg;
  const char* env = std::getenv("RDF_SOLVER_CMD");
  cfg.command = env && *env ? env : "z3 -in";
  return cfg;
}

namespace {

std::vector<std::string> split_command(const std::string& cmd) {
  std::vector<std::string> out;
  std::istringstream is(cmd);
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

struct Pipe {
  int fd[2] = {-1, -1};
  Pipe() {
    if (pipe(fd) != 0) throw std::runtime_error("pipe() failed");
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  void close_read() {
    if (fd[0] >= 0) { close(fd[0]); fd[0] = -1; }
  }
  void close_write() {
    if (fd[1] >= 0) { close(fd[1]); fd[1] = -1; }
  }
};

}  // namespace

SolveResult solve_external(const std::string& script, const SolverConfig& config) {
  auto argv_strs = split_command(config.command);
  if (argv_strs.empty()) throw SolverNotFound("empty solver command");
  std::vector<char*> argv;
  for (auto& s : argv_strs) argv.push_back(s.data());
  argv.push_back(nullptr);

  Pipe to_child, from_child, exec_err;
  fcntl(exec_err.fd[1], F_SETFD, FD_CLOEXEC);

  pid_t pid = fork();
  if (pid < 0) throw std::runtime_error("fork() failed");
  if (pid == 0) {
    dup2(to_child.fd[0], STDIN_FILENO);
    dup2(from_child.fd[1], STDOUT_FILENO);
    close(to_child.fd[0]); close(to_child.fd[1]);
    close(from_child.fd[0]); close(from_child.fd[1]);
    close(exec_err.fd[0]);
    execvp(argv[0], argv.data());
    int err = errno;
    ssize_t ignored = write(exec_err.fd[1], &err, sizeof(err));
    (void)ignored;
    _exit(127);
  }

  to_child.close_read();
  from_child.close_write();
  exec_err.close_write();

  // Feed the script; the child may exit early, so tolerate EPIPE.
  signal(SIGPIPE, SIG_IGN);
  size_t off = 0;
  while (off < script.size()) {
    ssize_t n = write(to_child.fd[1], script.data() + off, script.size() - off);
    if (n <= 0) break;
    off += static_cast<size_t>(n);
  }
  to_child.close_write();

  // Read everything with a deadline.
  std::string output;
  bool timed_out = false;
  const long budget_ms = static_cast<long>(config.timeout_seconds * 1000.0);
  long waited_ms = 0;
  char buf[4096];
  for (;;) {
    struct pollfd pfd{from_child.fd[0], POLLIN, 0};
    int step = 100;
    int rc = poll(&pfd, 1, step);
    if (rc > 0) {
      ssize_t n = read(from_child.fd[0], buf, sizeof(buf));
      if (n <= 0) break;
      output.append(buf, static_cast<size_t>(n));
      continue;
    }
    waited_ms += step;
    if (budget_ms > 0 && waited_ms >= budget_ms) {
      timed_out = true;
      kill(pid, SIGKILL);
      break;
    }
  }

  int status = 0;
  waitpid(pid, &status, 0);

  int exec_errno = 0;
  if (read(exec_err.fd[0], &exec_errno, sizeof(exec_errno)) == sizeof(exec_errno))
    throw SolverNotFound("cannot run '" + config.command + "': " + std::strerror(exec_errno));
  if (timed_out)
    throw SolverTimeout("solver exceeded " + std::to_string(config.timeout_seconds) + "s");

  // First word decides the verdict.
  std::istringstream is(output);
  std::string verdict;
  is >> verdict;
  SolveResult result;
  if (verdict == "unsat") {
    result.verdict = SolveResult::Verdict::Unsat;
  } else if (verdict == "sat") {
    result.verdict = SolveResult::Verdict::Sat;
    result.model = parse_model(output.substr(output.find("sat") + 3));
  } else if (verdict == "unknown") {
    result.verdict = SolveResult::Verdict::Unknown;
    std::getline(is, result.reason);
    if (result.reason.empty()) result.reason = "solver returned unknown";
  } else {
    throw SolverProtocolError("unexpected solver output: " +
                              output.substr(0, std::min<size_t>(output.size(), 400)));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Model parsing
// ---------------------------------------------------------------------------

namespace {

struct Sexpr {
  std::string atom;            // nonempty for leaves
  std::vector<Sexpr> kids;
  bool is_atom() const { return !atom.empty(); }
};

struct SexprParser {
  const std::string& s;
  size_t i = 0;

  void skip() {
    while (i < s.size()) {
      if (isspace(static_cast<unsigned char>(s[i]))) { ++i; continue; }
      if (s[i] == ';') {
        while (i < s.size() && s[i] != '\n') ++i;
        continue;
      }
      break;
    }
  }
  bool done() {
    skip();
    return i >= s.size();
  }
  Sexpr next() {
    skip();
    if (i >= s.size()) throw ModelParseError("unexpected end of model");
    if (s[i] == '(') {
      ++i;
      Sexpr e;
      for (;;) {
        skip();
        if (i >= s.size()) throw ModelParseError("unbalanced parenthesis in model");
        if (s[i] == ')') { ++i; break; }
        e.kids.push_back(next());
      }
      return e;
    }
    if (s[i] == ')') throw ModelParseError("unexpected ')'");
    if (s[i] == '"') {  // string literal, kept verbatim
      size_t j = s.find('"', i + 1);
      if (j == std::string::npos) throw ModelParseError("unterminated string");
      Sexpr e;
      e.atom = s.substr(i, j - i + 1);
      i = j + 1;
      return e;
    }
    size_t j = i;
    while (j < s.size() && !isspace(static_cast<unsigned char>(s[j])) && s[j] != '(' && s[j] != ')')
      ++j;
    Sexpr e;
    e.atom = s.substr(i, j - i);
    i = j;
    return e;
  }
};

bool is_number_atom(const std::string& a) {
  if (a.empty()) return false;
  size_t k = 0;
  if (a[0] == '-' || a[0] == '+') k = 1;
  if (k >= a.size()) return false;
  for (; k < a.size(); ++k)
    if (!isdigit(static_cast<unsigned char>(a[k])) && a[k] != '.' && a[k] != '/') return false;
  return true;
}

// --- univariate polynomials over Rat, for root objects --------------------

using UPoly = std::vector<Rat>;  // coefficient of x^i at index i

void utrim(UPoly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}
UPoly uadd(const UPoly& a, const UPoly& b) {
  UPoly r(std::max(a.size(), b.size()), Rat(0));
  for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (size_t i = 0; i < b.size(); ++i) r[i] += b[i];
  utrim(r);
  return r;
}
UPoly uneg(const UPoly& a) {
  UPoly r = a;
  for (auto& c : r) c = -c;
  return r;
}
UPoly umul(const UPoly& a, const UPoly& b) {
  if (a.empty() || b.empty()) return {};
  UPoly r(a.size() + b.size() - 1, Rat(0));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  utrim(r);
  return r;
}
UPoly uderiv(const UPoly& a) {
  UPoly r;
  for (size_t i = 1; i < a.size(); ++i) r.push_back(a[i] * Rat(static_cast<long>(i)));
  return r;
}
Rat ueval(const UPoly& a, const Rat& x) {
  Rat v = 0;
  for (size_t i = a.size(); i-- > 0;) v = v * x + a[i];
  return v;
}
// Remainder of a / b.
UPoly urem(UPoly a, const UPoly& b) {
  while (a.size() >= b.size() && !a.empty()) {
    Rat q = a.back() / b.back();
    size_t shift = a.size() - b.size();
    for (size_t i = 0; i < b.size(); ++i) a[i + shift] -= q * b[i];
    utrim(a);
  }
  return a;
}

std::vector<UPoly> sturm_chain(const UPoly& p) {
  std::vector<UPoly> chain{p, uderiv(p)};
  while (!chain.back().empty() && chain.back().size() > 1) {
    UPoly r = uneg(urem(chain[chain.size() - 2], chain.back()));
    if (r.empty()) break;
    chain.push_back(std::move(r));
  }
  return chain;
}

int sign_changes(const std::vector<UPoly>& chain, const Rat& x) {
  int changes = 0, prev = 0;
  for (const auto& p : chain) {
    if (p.empty()) continue;
    int s = sign(ueval(p, x));
    if (s == 0) continue;
    if (prev != 0 && s != prev) ++changes;
    prev = s;
  }
  return changes;
}

// Roots in (a, b].
int roots_in(const std::vector<UPoly>& chain, const Rat& a, const Rat& b) {
  return sign_changes(chain, a) - sign_changes(chain, b);
}

// k-th (1-based) real root, ascending, rationalized to within 1e-12.
Rat isolate_root(const UPoly& p, int k) {
  if (p.size() < 2) throw ModelParseError("root-obj of a constant polynomial");
  auto chain = sturm_chain(p);
  // Cauchy bound.
  Rat bound = 0;
  for (size_t i = 0; i + 1 < p.size(); ++i) bound = std::max(bound, rat_abs(p[i] / p.back()));
  bound += 1;
  int total = roots_in(chain, -bound, bound);
  if (k < 1 || k > total) throw ModelParseError("root index out of range");

  // Invariant: the k-th root lies in (lo, hi]; `before` roots are <= lo.
  Rat lo = -bound, hi = bound;
  int before = 0;
  const Rat target(1, 10000000000000L);  // 1e-13, well inside the 1e-12 budget
  while (hi - lo > target || roots_in(chain, lo, hi) != 1) {
    Rat mid = (lo + hi) / 2;
    if (ueval(p, mid) == 0 && before + roots_in(chain, lo, mid) == k) return mid;
    int left = roots_in(chain, lo, mid);
    if (before + left >= k) {
      hi = mid;
    } else {
      before += left;
      lo = mid;
    }
  }
  return (lo + hi) / 2;
}

Rat eval_value(const Sexpr& e, bool& exact);

Rat eval_root_obj(const Sexpr& e, bool& exact) {
  // (root-obj <poly in one symbol> <k>)
  if (e.kids.size() != 3) throw ModelParseError("malformed root-obj");
  std::function<UPoly(const Sexpr&)> conv = [&](const Sexpr& s) -> UPoly {
    if (s.is_atom()) {
      if (is_number_atom(s.atom)) return UPoly{rat_parse(s.atom)};
      return UPoly{Rat(0), Rat(1)};  // the indeterminate
    }
    if (s.kids.empty()) throw ModelParseError("malformed root-obj polynomial");
    const std::string& op = s.kids[0].atom;
    if (op == "+") {
      UPoly r;
      for (size_t i = 1; i < s.kids.size(); ++i) r = uadd(r, conv(s.kids[i]));
      return r;
    }
    if (op == "-") {
      if (s.kids.size() == 2) return uneg(conv(s.kids[1]));
      UPoly r = conv(s.kids[1]);
      for (size_t i = 2; i < s.kids.size(); ++i) r = uadd(r, uneg(conv(s.kids[i])));
      return r;
    }
    if (op == "*") {
      UPoly r{Rat(1)};
      for (size_t i = 1; i < s.kids.size(); ++i) r = umul(r, conv(s.kids[i]));
      return r;
    }
    if (op == "^") {
      UPoly base = conv(s.kids[1]);
      long n = std::stol(s.kids[2].atom);
      UPoly r{Rat(1)};
      for (long i = 0; i < n; ++i) r = umul(r, base);
      return r;
    }
    if (op == "/") {
      bool sub = true;
      Rat a = eval_value(s.kids[1], sub), b = eval_value(s.kids[2], sub);
      return UPoly{a / b};
    }
    throw ModelParseError("unsupported operator in root-obj: " + op);
  };
  UPoly p = conv(e.kids[1]);
  int k = static_cast<int>(std::stol(e.kids[2].atom));
  exact = false;
  return isolate_root(p, k);
}

Rat eval_value(const Sexpr& e, bool& exact) {
  if (e.is_atom()) {
    if (is_number_atom(e.atom)) return rat_parse(e.atom);
    throw ModelParseError("cannot evaluate model value: " + e.atom);
  }
  if (e.kids.empty()) throw ModelParseError("empty model value");
  const std::string& op = e.kids[0].atom;
  if (op == "-") {
    if (e.kids.size() == 2) return -eval_value(e.kids[1], exact);
    Rat v = eval_value(e.kids[1], exact);
    for (size_t i = 2; i < e.kids.size(); ++i) v -= eval_value(e.kids[i], exact);
    return v;
  }
  if (op == "+") {
    Rat v = 0;
    for (size_t i = 1; i < e.kids.size(); ++i) v += eval_value(e.kids[i], exact);
    return v;
  }
  if (op == "*") {
    Rat v = 1;
    for (size_t i = 1; i < e.kids.size(); ++i) v *= eval_value(e.kids[i], exact);
    return v;
  }
  if (op == "/") {
    Rat a = eval_value(e.kids[1], exact), b = eval_value(e.kids[2], exact);
    if (b == 0) throw ModelParseError("division by zero in model");
    return a / b;
  }
  if (op == "root-obj") return eval_root_obj(e, exact);
  throw ModelParseError("unsupported model value operator: " + op);
}

}  // namespace

NumericModel parse_model(const std::string& solver_output) {
  NumericModel model;
  SexprParser sp{solver_output, 0};
  std::vector<Sexpr> top;
  while (!sp.done()) {
    // Ignore stray tokens such as the "sat" echo or error s-exprs.
    Sexpr e = sp.next();
    top.push_back(std::move(e));
  }
  for (const auto& e : top) {
    if (e.is_atom()) continue;
    // Either (model (define-fun ...) ...) or a bare list of define-funs.
    std::vector<const Sexpr*> defs;
    if (!e.kids.empty() && e.kids[0].is_atom() && e.kids[0].atom == "define-fun") {
      defs.push_back(&e);
    } else {
      for (const auto& k : e.kids)
        if (!k.is_atom() && !k.kids.empty() && k.kids[0].is_atom() && k.kids[0].atom == "define-fun")
          defs.push_back(&k);
    }
    for (const Sexpr* d : defs) {
      if (d->kids.size() != 5) continue;  // name, args, sort, body
      const std::string& name = d->kids[1].atom;
      bool exact = true;
      Rat v = eval_value(d->kids[4], exact);
      model.values[name] = v;
      if (!exact) model.exact = false;
    }
  }
  return model;
}

}  // namespace rdf
