#include "rdf/parser.hpp"

#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace rdf {

namespace {

enum class Tok {
  End, Ident, Int,
  LParen, RParen, LBrack, RBrack, Comma,
  Bang, Amp, Pipe, Arrow, DArrow,
  Eq, Ne, Lt, Le, Gt, Ge,
  Plus, Minus, Star, Slash,
};

struct Token {
  Tok kind;
  std::string text;
  size_t start, end;
};

struct Lexer {
  const std::string& src;
  size_t pos = 0;
  std::vector<Token> tokens;

  explicit Lexer(const std::string& s) : src(s) { run(); }

  [[noreturn]] void fail(const std::string& msg, size_t at) {
    throw SyntaxError(msg, SourceSpan{at, std::min(at + 1, src.size())}, {});
  }

  void run() {
    while (pos < src.size()) {
      char c = src[pos];
      if (std::isspace(static_cast<unsigned char>(c))) { ++pos; continue; }
      if (c == '#') {  // line comment
        while (pos < src.size() && src[pos] != '\n') ++pos;
        continue;
      }
      size_t s = pos;
      auto push = [&](Tok k, size_t n) {
        tokens.push_back({k, src.substr(s, n), s, s + n});
        pos = s + n;
      };
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t e = pos;
        while (e < src.size() && (std::isalnum(static_cast<unsigned char>(src[e])) || src[e] == '_')) ++e;
        push(Tok::Ident, e - s);
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        size_t e = pos;
        while (e < src.size() && std::isdigit(static_cast<unsigned char>(src[e]))) ++e;
        push(Tok::Int, e - s);
        continue;
      }
      switch (c) {
        case '(': push(Tok::LParen, 1); break;
        case ')': push(Tok::RParen, 1); break;
        case '[': push(Tok::LBrack, 1); break;
        case ']': push(Tok::RBrack, 1); break;
        case ',': push(Tok::Comma, 1); break;
        case '!': if (pos + 1 < src.size() && src[pos + 1] == '=') push(Tok::Ne, 2); else push(Tok::Bang, 1); break;
        case '&': push(Tok::Amp, 1); break;
        case '|': push(Tok::Pipe, 1); break;
        case '=': push(Tok::Eq, 1); break;
        case '<':
          if (pos + 2 < src.size() && src[pos + 1] == '-' && src[pos + 2] == '>') push(Tok::DArrow, 3);
          else if (pos + 1 < src.size() && src[pos + 1] == '=') push(Tok::Le, 2);
          else push(Tok::Lt, 1);
          break;
        case '>': if (pos + 1 < src.size() && src[pos + 1] == '=') push(Tok::Ge, 2); else push(Tok::Gt, 1); break;
        case '+': push(Tok::Plus, 1); break;
        case '-': if (pos + 1 < src.size() && src[pos + 1] == '>') push(Tok::Arrow, 2); else push(Tok::Minus, 1); break;
        case '*': push(Tok::Star, 1); break;
        case '/': push(Tok::Slash, 1); break;
        default: fail(std::string("unexpected character '") + c + "'", pos);
      }
    }
    tokens.push_back({Tok::End, "", src.size(), src.size()});
  }
};

const std::map<std::string, Atom::Kind> kPredNames = {
    {"Up", Atom::Kind::Up},
    {"Down", Atom::Kind::Down},
    {"StrictUp", Atom::Kind::StrictUp},
    {"Strict_Up", Atom::Kind::StrictUp},
    {"StrictDown", Atom::Kind::StrictDown},
    {"Strict_Down", Atom::Kind::StrictDown},
    {"Convex", Atom::Kind::Convex},
    {"StrictConvex", Atom::Kind::StrictConvex},
    {"Strict_Convex", Atom::Kind::StrictConvex},
    {"Concave", Atom::Kind::Concave},
    {"StrictConcave", Atom::Kind::StrictConcave},
    {"Strict_Concave", Atom::Kind::StrictConcave},
    {"Eq", Atom::Kind::FunEq},
    {"Gt", Atom::Kind::FunGt},
    {"Constant", Atom::Kind::Constant},
    {"Linear", Atom::Kind::Linear},
    {"Affine", Atom::Kind::Affine},
};

constexpr long kMaxIntLiteral = 10000;

struct Parser {
  std::vector<Token> toks;
  size_t i = 0;
  std::set<std::string> num_names, fun_names;

  const Token& cur() const { return toks[i]; }
  const Token& peek(size_t n = 1) const { return toks[std::min(i + n, toks.size() - 1)]; }
  bool at(Tok k) const { return cur().kind == k; }
  bool at_ident(const char* s) const { return at(Tok::Ident) && cur().text == s; }

  Token take() { return toks[i++]; }

  [[noreturn]] void fail(const std::string& msg, std::vector<std::string> expected = {}) {
    throw SyntaxError(msg, SourceSpan{cur().start, cur().end}, std::move(expected));
  }

  Token expect(Tok k, const char* what) {
    if (!at(k)) fail(std::string("expected ") + what, {what});
    return take();
  }

  std::string ident(const char* what) {
    if (!at(Tok::Ident)) fail(std::string("expected ") + what, {what});
    std::string n = cur().text;
    if (n[0] == '_') fail("names starting with '_' are reserved");
    if (n == "on" || n == "inf" || n == "D" || kPredNames.count(n))
      fail("'" + n + "' is a reserved word");
    take();
    return n;
  }

  void mark_num(const std::string& n) { num_names.insert(n); }
  void mark_fun(const std::string& n) { fun_names.insert(n); }

  // --- terms ---------------------------------------------------------------

  TermPtr primary() {
    if (at(Tok::Int)) {
      Token t = take();
      long v = 0;
      for (char c : t.text) {
        v = v * 10 + (c - '0');
        if (v > kMaxIntLiteral)
          throw SyntaxError("integer literal too large", SourceSpan{t.start, t.end}, {});
      }
      return t_int(v);
    }
    if (at(Tok::Minus)) {
      take();
      return t_sub(t_zero(), primary());
    }
    if (at(Tok::LParen)) {
      take();
      TermPtr t = term();
      expect(Tok::RParen, ")");
      return t;
    }
    if (at_ident("D")) {
      Token d = take();
      expect(Tok::LBrack, "[");
      std::string f = ident("function name");
      mark_fun(f);
      expect(Tok::RBrack, "]");
      if (!at(Tok::LParen))
        throw ArityError("D[" + f + "] must be applied to an argument",
                         SourceSpan{d.start, cur().end}, {"("});
      take();
      TermPtr arg = term();
      expect(Tok::RParen, ")");
      return t_dapply(f, arg);
    }
    if (at(Tok::Ident)) {
      std::string n = ident("name");
      if (at(Tok::LParen)) {
        take();
        TermPtr arg = term();
        expect(Tok::RParen, ")");
        mark_fun(n);
        return t_apply(n, arg);
      }
      mark_num(n);
      return t_var(n);
    }
    fail("expected a term", {"term"});
  }

  TermPtr mul() {
    TermPtr t = primary();
    while (at(Tok::Star)) {
      take();
      t = t_mul(t, primary());
    }
    return t;
  }

  TermPtr term() {
    TermPtr t = mul();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      bool plus = take().kind == Tok::Plus;
      TermPtr r = mul();
      t = plus ? t_add(t, r) : t_sub(t, r);
    }
    return t;
  }

  // --- intervals -------------------------------------------------------------

  bool at_interval_open() const { return at(Tok::LBrack) || at(Tok::LParen) || at(Tok::RBrack); }

  ExtEnd interval_end(bool left) {
    if (at(Tok::Minus) && peek().kind == Tok::Ident && peek().text == "inf") {
      if (!left) fail("-inf is only legal as a left end");
      take(); take();
      return ExtEnd::neg_inf();
    }
    if (at(Tok::Plus) && peek().kind == Tok::Ident && peek().text == "inf") {
      if (left) fail("+inf is only legal as a right end");
      take(); take();
      return ExtEnd::pos_inf();
    }
    return ExtEnd::of(term());
  }

  IntervalSpec interval() {
    bool lo_closed;
    if (at(Tok::LBrack)) { lo_closed = true; take(); }
    else if (at(Tok::LParen) || at(Tok::RBrack)) { lo_closed = false; take(); }
    else fail("expected an interval", {"[", "(", "]"});
    ExtEnd lo = interval_end(true);
    expect(Tok::Comma, ",");
    ExtEnd hi = interval_end(false);
    bool hi_closed;
    if (at(Tok::RBrack)) { hi_closed = true; take(); }
    else if (at(Tok::RParen) || at(Tok::LBrack)) { hi_closed = false; take(); }
    else fail("expected interval close", {"]", ")", "["});
    return IntervalSpec(lo, hi, lo_closed, hi_closed);
  }

  IntervalSpec on_interval() {
    if (!at_ident("on")) fail("expected 'on'", {"on"});
    take();
    return interval();
  }

  // --- atoms -----------------------------------------------------------------

  static NumRel rel_of(Tok k) {
    switch (k) {
      case Tok::Eq: return NumRel::Eq;
      case Tok::Ne: return NumRel::Ne;
      case Tok::Lt: return NumRel::Lt;
      case Tok::Le: return NumRel::Le;
      case Tok::Gt: return NumRel::Gt;
      case Tok::Ge: return NumRel::Ge;
      default: return NumRel::Eq;
    }
  }

  bool at_cmp() const {
    switch (cur().kind) {
      case Tok::Eq: case Tok::Ne: case Tok::Lt: case Tok::Le: case Tok::Gt: case Tok::Ge:
        return true;
      default:
        return false;
    }
  }

  FormulaPtr deriv_atom() {
    // '(' already consumed by the caller.
    expect(Tok::Ident, "D");  // caller checked text == "D"
    expect(Tok::LBrack, "[");
    std::string f = ident("function name");
    mark_fun(f);
    expect(Tok::RBrack, "]");
    if (!at_cmp()) fail("expected a comparison after D[f]", {"=", "!=", "<", "<=", ">", ">="});
    NumRel r = rel_of(take().kind);
    TermPtr bound = term();
    expect(Tok::RParen, ")");
    IntervalSpec iv = on_interval();
    return f_atom(a_derivcmp(r, f, bound, iv));
  }

  FormulaPtr pred_atom() {
    Atom::Kind kind = kPredNames.at(cur().text);
    take();
    expect(Tok::LParen, "(");
    std::string f = ident("function name");
    mark_fun(f);
    Atom a;
    a.kind = kind;
    a.f = f;
    if (at(Tok::Comma)) {
      take();
      if (kind == Atom::Kind::FunEq || kind == Atom::Kind::FunGt) {
        a.g = ident("function name");
        mark_fun(a.g);
      } else if (kind == Atom::Kind::Up || kind == Atom::Kind::Down) {
        a.kind = kind == Atom::Kind::Up ? Atom::Kind::PointUp : Atom::Kind::PointDown;
        a.s = term();
      } else {
        fail("this predicate takes a single function argument");
      }
    } else if (kind == Atom::Kind::FunEq || kind == Atom::Kind::FunGt) {
      fail("Eq/Gt compare two functions", {","});
    }
    expect(Tok::RParen, ")");
    a.iv = on_interval();
    return f_atom(std::move(a));
  }

  FormulaPtr numcmp_atom() {
    TermPtr s = term();
    if (!at_cmp()) fail("expected a comparison", {"=", "!=", "<", "<=", ">", ">="});
    NumRel r = rel_of(take().kind);
    TermPtr t = term();
    if (at(Tok::Slash)) {
      take();
      TermPtr t2 = term();
      Atom a;
      a.kind = Atom::Kind::DivCmp;
      a.rel = r;
      a.s = s;
      a.t = t;
      a.t2 = t2;
      return f_atom(std::move(a));
    }
    return f_atom(a_numcmp(r, s, t));
  }

  FormulaPtr atom() {
    if (at(Tok::Ident) && kPredNames.count(cur().text) && peek().kind == Tok::LParen)
      return pred_atom();
    if (at(Tok::LParen) && peek().kind == Tok::Ident && peek().text == "D" &&
        peek(2).kind == Tok::LBrack) {
      // Could be the (D[f] cmp t) on A form, or a numeric comparison whose
      // left term starts with D[f](...). Try the atom form first.
      size_t save = i;
      auto nums = num_names;
      auto funs = fun_names;
      take();
      try {
        return deriv_atom();
      } catch (const SyntaxError&) {
        i = save;
        num_names = std::move(nums);
        fun_names = std::move(funs);
      }
    }
    return numcmp_atom();
  }

  // --- formulas ---------------------------------------------------------------

  FormulaPtr unary() {
    if (at(Tok::Bang)) {
      take();
      return f_not(unary());
    }
    if (at(Tok::LParen)) {
      // Try a parenthesized formula; fall back to an atom (the left term of a
      // comparison may itself be parenthesized).
      size_t save = i;
      auto nums = num_names;
      auto funs = fun_names;
      take();
      try {
        FormulaPtr f = formula();
        expect(Tok::RParen, ")");
        if (at_ident("on")) fail("unexpected 'on'");
        return f;
      } catch (const SyntaxError&) {
        i = save;
        num_names = std::move(nums);
        fun_names = std::move(funs);
      }
    }
    return atom();
  }

  FormulaPtr conj() {
    FormulaPtr f = unary();
    while (at(Tok::Amp)) {
      take();
      f = f_and(f, unary());
    }
    return f;
  }

  FormulaPtr disj() {
    FormulaPtr f = conj();
    while (at(Tok::Pipe)) {
      take();
      f = f_or(f, conj());
    }
    return f;
  }

  FormulaPtr impl() {
    FormulaPtr f = disj();
    if (at(Tok::Arrow)) {
      take();
      return f_imp(f, impl());
    }
    return f;
  }

  FormulaPtr formula() {
    FormulaPtr f = impl();
    while (at(Tok::DArrow)) {
      take();
      f = f_iff(f, impl());
    }
    return f;
  }

  FormulaPtr run() {
    FormulaPtr f = formula();
    if (!at(Tok::End)) fail("trailing input after formula");
    for (const auto& n : num_names)
      if (fun_names.count(n))
        throw SyntaxError("'" + n + "' used both as a number and as a function",
                          SourceSpan{0, 0}, {});
    return f;
  }
};

}  // namespace

FormulaPtr parse_formula(const std::string& text) {
  Lexer lex(text);
  Parser p;
  p.toks = std::move(lex.tokens);
  return p.run();
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace {

// Recognize the 1+1+...+1 left fold produced by integer literals.
bool int_chain(const TermPtr& t, long& n) {
  if (t->kind == NumTerm::Kind::Zero) { n = 0; return true; }
  if (t->kind == NumTerm::Kind::One) { n = 1; return true; }
  if (t->kind == NumTerm::Kind::Add && t->rhs->kind == NumTerm::Kind::One) {
    long m;
    if (int_chain(t->lhs, m) && m >= 1) { n = m + 1; return true; }
  }
  return false;
}

void render_term_to(const TermPtr& t, std::string& out, bool parens) {
  long n;
  if (int_chain(t, n)) {
    out += std::to_string(n);
    return;
  }
  switch (t->kind) {
    case NumTerm::Kind::Var: out += t->name; return;
    case NumTerm::Kind::Zero: out += "0"; return;
    case NumTerm::Kind::One: out += "1"; return;
    case NumTerm::Kind::Apply:
    case NumTerm::Kind::DApply:
      if (t->kind == NumTerm::Kind::DApply) out += "D[" + t->name + "](";
      else out += t->name + "(";
      render_term_to(t->lhs, out, false);
      out += ")";
      return;
    case NumTerm::Kind::Add:
    case NumTerm::Kind::Sub:
    case NumTerm::Kind::Mul: {
      const char* op = t->kind == NumTerm::Kind::Add ? " + "
                       : t->kind == NumTerm::Kind::Sub ? " - " : " * ";
      if (parens) out += "(";
      render_term_to(t->lhs, out, true);
      out += op;
      render_term_to(t->rhs, out, true);
      if (parens) out += ")";
      return;
    }
  }
}

std::string end_text(const ExtEnd& e) {
  switch (e.kind) {
    case ExtEnd::Kind::NegInf: return "-inf";
    case ExtEnd::Kind::PosInf: return "+inf";
    case ExtEnd::Kind::Term: return render_term(e.term);
  }
  return "";
}

const char* pred_name(Atom::Kind k) {
  switch (k) {
    case Atom::Kind::Up: case Atom::Kind::PointUp: return "Up";
    case Atom::Kind::Down: case Atom::Kind::PointDown: return "Down";
    case Atom::Kind::StrictUp: return "StrictUp";
    case Atom::Kind::StrictDown: return "StrictDown";
    case Atom::Kind::Convex: return "Convex";
    case Atom::Kind::StrictConvex: return "StrictConvex";
    case Atom::Kind::Concave: return "Concave";
    case Atom::Kind::StrictConcave: return "StrictConcave";
    case Atom::Kind::FunEq: return "Eq";
    case Atom::Kind::FunGt: return "Gt";
    case Atom::Kind::Constant: return "Constant";
    case Atom::Kind::Linear: return "Linear";
    case Atom::Kind::Affine: return "Affine";
    default: return "?";
  }
}

}  // namespace

std::string render_term(const TermPtr& term) {
  std::string out;
  render_term_to(term, out, true);
  return out;
}

std::string render_interval(const IntervalSpec& iv) {
  std::string out = iv.lo_closed ? "[" : "(";
  out += end_text(iv.lo) + ", " + end_text(iv.hi);
  out += iv.hi_closed ? "]" : ")";
  return out;
}

std::string render_atom(const Atom& a) {
  std::string out;
  switch (a.kind) {
    case Atom::Kind::NumCmp: {
      out = "(";
      render_term_to(a.s, out, false);
      out += std::string(" ") + rel_text(a.rel) + " ";
      render_term_to(a.t, out, false);
      out += ")";
      return out;
    }
    case Atom::Kind::DivCmp: {
      out = "(";
      render_term_to(a.s, out, false);
      out += std::string(" ") + rel_text(a.rel) + " ";
      render_term_to(a.t, out, true);
      out += " / ";
      render_term_to(a.t2, out, true);
      out += ")";
      return out;
    }
    case Atom::Kind::DerivCmp:
      return "(D[" + a.f + "] " + rel_text(a.rel) + " " + render_term(a.t) + ") on " +
             render_interval(*a.iv);
    case Atom::Kind::FunEq:
    case Atom::Kind::FunGt:
      return std::string(pred_name(a.kind)) + "(" + a.f + ", " + a.g + ") on " +
             render_interval(*a.iv);
    case Atom::Kind::PointUp:
    case Atom::Kind::PointDown:
      return std::string(pred_name(a.kind)) + "(" + a.f + ", " + render_term(a.s) + ") on " +
             render_interval(*a.iv);
    default:
      return std::string(pred_name(a.kind)) + "(" + a.f + ") on " + render_interval(*a.iv);
  }
}

std::string render_formula(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::Atom:
      return render_atom(*f->atom);
    case Formula::Kind::Not: {
      std::string inner = render_formula(f->a);
      if (f->a->kind == Formula::Kind::Atom || f->a->kind == Formula::Kind::Not)
        return "!" + inner;
      return "!(" + inner + ")";
    }
    case Formula::Kind::And:
      return "(" + render_formula(f->a) + " & " + render_formula(f->b) + ")";
    case Formula::Kind::Or:
      return "(" + render_formula(f->a) + " | " + render_formula(f->b) + ")";
    case Formula::Kind::Imp:
      return "(" + render_formula(f->a) + " -> " + render_formula(f->b) + ")";
    case Formula::Kind::Iff:
      return "(" + render_formula(f->a) + " <-> " + render_formula(f->b) + ")";
  }
  return "";
}

}  // namespace rdf
