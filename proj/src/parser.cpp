#include <sstream>

#include "stepwise/surface.hpp"

namespace stepwise {

namespace {

bool is_relop(const std::string& s) {
  return s == "=" || s == "#" || s == "\\in" || s == "\\notin" || s == "\\subseteq";
}

ExprKind relop_kind(const std::string& s) {
  if (s == "=") return ExprKind::Eq;
  if (s == "#") return ExprKind::Neq;
  if (s == "\\in") return ExprKind::In;
  if (s == "\\notin") return ExprKind::NotIn;
  return ExprKind::Subseteq;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Theorem theorem() {
    Theorem thm;
    thm.pos = peek().pos;
    expect_keyword("THEOREM");
    if (peek().kind == TokenKind::Ident && peek(1).kind == TokenKind::Symbol &&
        peek(1).text == "==") {
      thm.name = next().text;
      next();
    }
    thm.goal = goal_form();
    thm.proof = proof(0);
    if (peek().kind != TokenKind::End)
      fail(peek(), peek().kind == TokenKind::Step ? "unexpected step after the theorem's proof"
                                                  : "unexpected token after the theorem",
           {"<end of input>"}, peek().kind == TokenKind::Step);
    return thm;
  }

  ExprPtr whole_expression() {
    ExprPtr e = expr();
    if (peek().kind != TokenKind::End) fail(peek(), "unexpected token", {"<end of input>"});
    return e;
  }

 private:
  // -- token helpers --------------------------------------------------------

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool at_symbol(const char* s) const {
    return peek().kind == TokenKind::Symbol && peek().text == s;
  }
  bool at_keyword(const char* s) const {
    return peek().kind == TokenKind::Keyword && peek().text == s;
  }
  bool accept_symbol(const char* s) {
    if (!at_symbol(s)) return false;
    next();
    return true;
  }
  bool accept_keyword(const char* s) {
    if (!at_keyword(s)) return false;
    next();
    return true;
  }
  void expect_symbol(const char* s) {
    if (!accept_symbol(s)) fail(peek(), "unexpected " + spell(peek()), {std::string("'") + s + "'"});
  }
  void expect_keyword(const char* s) {
    if (!accept_keyword(s)) fail(peek(), "unexpected " + spell(peek()), {s});
  }
  std::string expect_ident() {
    if (peek().kind != TokenKind::Ident) fail(peek(), "unexpected " + spell(peek()), {"identifier"});
    return next().text;
  }

  static std::string spell(const Token& t) {
    if (t.kind == TokenKind::End) return t.text;
    if (t.kind == TokenKind::Step) return "step token " + t.text + (t.dotted ? "." : "");
    return "'" + t.text + "'";
  }

  [[noreturn]] void fail(const Token& at, const std::string& msg, std::set<std::string> expected = {},
                         bool level = false) const {
    if (level) throw LevelError(at.pos, msg, std::move(expected));
    throw ParseError(at.pos, msg, std::move(expected));
  }

  bool starts_expression() const {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::Ident:
        return true;
      case TokenKind::Step:
        return !t.dotted;
      case TokenKind::Keyword:
        return t.text == "SUBSET" || t.text == "TRUE" || t.text == "FALSE";
      case TokenKind::Symbol:
        return t.text == "(" || t.text == "~" || t.text == "{" || t.text == "[" ||
               t.text == "\\A" || t.text == "\\E";
      default:
        return false;
    }
  }

  static const std::set<std::string>& expression_starts() {
    static const std::set<std::string> s = {"identifier", "'('", "'~'", "'{'", "'['", "'\\A'",
                                            "'\\E'", "SUBSET", "TRUE", "FALSE"};
    return s;
  }

  // -- proofs ---------------------------------------------------------------

  ProofPtr proof(int parent_level) {
    auto p = std::make_shared<Proof>();
    p->pos = peek().pos;
    bool explicit_keyword = accept_keyword("PROOF");
    if (accept_keyword("OBVIOUS")) {
      p->kind = Proof::Kind::Obvious;
    } else if (accept_keyword("OMITTED")) {
      p->kind = Proof::Kind::Omitted;
    } else if (accept_keyword("BY")) {
      p->kind = Proof::Kind::By;
      p->by = fact_list();
    } else if (peek().kind == TokenKind::Step && peek().dotted && peek().level > parent_level) {
      p->kind = Proof::Kind::Steps;
      steps(*p, parent_level);
    } else if (explicit_keyword) {
      bool level_problem = peek().kind == TokenKind::Step && peek().dotted;
      fail(peek(),
           level_problem ? "subproof level must be greater than " + std::to_string(parent_level)
                         : "expected a proof after PROOF",
           {"OBVIOUS", "OMITTED", "BY", "step token"}, level_problem);
    } else {
      p->kind = Proof::Kind::Omitted;
      p->implicit = true;
    }
    return p;
  }

  void steps(Proof& p, int parent_level) {
    const int level = peek().level;
    for (;;) {
      const Token& t = peek();
      if (t.kind != TokenKind::Step || !t.dotted) {
        fail(t, "proof at level " + std::to_string(level) + " ends without a QED step",
             {"<" + std::to_string(level) + "> step"}, true);
      }
      if (t.level != level) {
        std::string msg =
            t.level > level
                ? "step " + t.text + " is deeper than its level-" + std::to_string(level) +
                      " siblings but the previous step cannot take it as a subproof"
                : "proof at level " + std::to_string(level) + " ends without a QED step";
        fail(t, msg, {"<" + std::to_string(level) + "> step"}, true);
      }
      StepToken tok{t.level, t.label, t.pos};
      next();
      ProofStep step = proof_step(level);
      bool qed = step.kind == ProofStep::Kind::Qed;
      p.steps.emplace_back(std::move(tok), std::move(step));
      if (qed) break;
    }
    if (peek().kind == TokenKind::Step && peek().dotted && peek().level == level)
      fail(peek(), "step after QED at level " + std::to_string(level), {}, true);
    (void)parent_level;
  }

  ProofStep proof_step(int level) {
    ProofStep s;
    s.pos = peek().pos;
    if (accept_keyword("USE")) {
      s.kind = ProofStep::Kind::Use;
      s.facts = fact_list();
    } else if (accept_keyword("HIDE")) {
      s.kind = ProofStep::Kind::Hide;
      s.facts = fact_list();
    } else if (accept_keyword("DEFINE")) {
      s.kind = ProofStep::Kind::Define;
      s.def_name = expect_ident();
      if (accept_symbol("(")) {
        do {
          s.def_params.push_back(expect_ident());
        } while (accept_symbol(","));
        expect_symbol(")");
      }
      expect_symbol("==");
      s.expr = expr();
    } else if (accept_keyword("HAVE")) {
      s.kind = ProofStep::Kind::Have;
      s.expr = expr();
    } else if (accept_keyword("TAKE")) {
      s.kind = ProofStep::Kind::Take;
      s.binders = binder_list();
    } else if (accept_keyword("WITNESS")) {
      s.kind = ProofStep::Kind::Witness;
      do {
        ExprPtr w = expr();
        if (w->kind == ExprKind::In)
          s.witnesses.push_back({w->arg(0), w->arg(1)});
        else
          s.witnesses.push_back({w, nullptr});
      } while (accept_symbol(","));
    } else if (accept_keyword("SUFFICES")) {
      s.kind = ProofStep::Kind::Suffices;
      s.goal = goal_form();
    } else if (accept_keyword("PICK")) {
      s.kind = ProofStep::Kind::Pick;
      s.binders = binder_list();
      expect_symbol(":");
      s.expr = expr();
    } else if (accept_keyword("CASE")) {
      s.kind = ProofStep::Kind::Case;
      s.expr = expr();
    } else if (accept_keyword("QED")) {
      s.kind = ProofStep::Kind::Qed;
    } else if (at_keyword("ASSUME") || starts_expression()) {
      s.kind = ProofStep::Kind::Assert;
      s.goal = goal_form();
    } else {
      auto exp = expression_starts();
      for (const char* k : {"USE", "HIDE", "DEFINE", "HAVE", "TAKE", "WITNESS", "SUFFICES",
                            "PICK", "CASE", "QED", "ASSUME"})
        exp.insert(k);
      fail(peek(), "unexpected " + spell(peek()) + " at the start of a proof step", exp);
    }

    if (s.takes_proof()) {
      s.proof = proof(level);
    } else if (at_keyword("PROOF") || at_keyword("OBVIOUS") || at_keyword("BY") ||
               at_keyword("OMITTED")) {
      fail(peek(), "this kind of step does not take a proof");
    } else if (peek().kind == TokenKind::Step && peek().dotted && peek().level > level) {
      fail(peek(), "step " + peek().text + " cannot be a subproof of a step without a proof", {},
           true);
    }
    return s;
  }

  FactList fact_list() {
    FactList fl;
    if (starts_expression()) {
      do {
        fl.facts.push_back(expr());
      } while (accept_symbol(","));
    }
    if (accept_keyword("DEF")) {
      do {
        fl.defs.push_back(expect_ident());
      } while (accept_symbol(","));
    }
    return fl;
  }

  GoalForm goal_form() {
    GoalForm g;
    if (accept_keyword("ASSUME")) {
      g.has_assume = true;
      do {
        AssumeItem item;
        if (accept_keyword("NEW")) {
          item.is_new = true;
          item.binder.name = expect_ident();
          if (accept_symbol("\\in")) item.binder.domain = set_expr();
        } else {
          item.fact = expr();
        }
        g.assume.push_back(std::move(item));
      } while (accept_symbol(","));
      expect_keyword("PROVE");
    }
    g.goal = expr();
    return g;
  }

  std::vector<Binder> binder_list() {
    std::vector<Binder> bs;
    do {
      Binder b;
      b.name = expect_ident();
      if (accept_symbol("\\in")) b.domain = set_expr();
      bs.push_back(std::move(b));
    } while (accept_symbol(","));
    return bs;
  }

  // -- expressions ----------------------------------------------------------

  ExprPtr expr() {
    SourcePos pos = peek().pos;
    ExprPtr lhs = implies();
    while (at_symbol("<=>")) {
      next();
      lhs = build::binary(ExprKind::Equiv, lhs, implies(), pos);
    }
    return lhs;
  }

  ExprPtr implies() {
    SourcePos pos = peek().pos;
    ExprPtr lhs = disj();
    if (accept_symbol("=>")) return build::binary(ExprKind::Implies, lhs, implies(), pos);
    return lhs;
  }

  ExprPtr disj() {
    SourcePos pos = peek().pos;
    ExprPtr lhs = conj();
    while (accept_symbol("\\/")) lhs = build::binary(ExprKind::Or, lhs, conj(), pos);
    return lhs;
  }

  ExprPtr conj() {
    SourcePos pos = peek().pos;
    ExprPtr lhs = unary();
    while (accept_symbol("/\\")) lhs = build::binary(ExprKind::And, lhs, unary(), pos);
    return lhs;
  }

  ExprPtr unary() {
    SourcePos pos = peek().pos;
    if (accept_symbol("~")) return build::negate(unary(), pos);
    if (at_symbol("\\A") || at_symbol("\\E")) return quantified();
    return relation();
  }

  ExprPtr quantified() {
    SourcePos pos = peek().pos;
    ExprKind kind = next().text == "\\A" ? ExprKind::Forall : ExprKind::Exists;
    std::vector<Binder> bs = binder_list();
    expect_symbol(":");
    return build::quantifier(kind, std::move(bs), expr(), pos);
  }

  ExprPtr relation() {
    SourcePos pos = peek().pos;
    ExprPtr lhs = set_expr();
    if (peek().kind == TokenKind::Symbol && is_relop(peek().text)) {
      ExprKind k = relop_kind(next().text);
      lhs = build::binary(k, lhs, set_expr(), pos);
      if (peek().kind == TokenKind::Symbol && is_relop(peek().text))
        fail(peek(), "relational operators do not chain; add parentheses");
    }
    return lhs;
  }

  ExprPtr set_expr() {
    SourcePos pos = peek().pos;
    if (accept_keyword("SUBSET")) return build::powerset(set_expr(), pos);
    return postfix();
  }

  ExprPtr postfix() {
    SourcePos pos = peek().pos;
    ExprPtr e = primary();
    while (accept_symbol("[")) {
      ExprPtr arg = expr();
      expect_symbol("]");
      e = build::fcn_apply(e, arg, pos);
    }
    return e;
  }

  ExprPtr primary() {
    const Token& t = peek();
    SourcePos pos = t.pos;
    if (t.kind == TokenKind::Ident) {
      std::string name = next().text;
      if (accept_symbol("(")) {
        std::vector<ExprPtr> args;
        do {
          args.push_back(expr());
        } while (accept_symbol(","));
        expect_symbol(")");
        return build::apply(name, std::move(args), pos);
      }
      return build::ident(name, pos);
    }
    if (t.kind == TokenKind::Step && !t.dotted) {
      return build::ident(next().text, pos);
    }
    if (accept_keyword("TRUE")) return build::boolean(true, pos);
    if (accept_keyword("FALSE")) return build::boolean(false, pos);
    if (accept_symbol("(")) {
      ExprPtr e = expr();
      expect_symbol(")");
      return e;
    }
    if (at_symbol("{")) return braces();
    if (accept_symbol("[")) {
      ExprPtr dom = expr();
      expect_symbol("->");
      ExprPtr cod = expr();
      expect_symbol("]");
      return build::fcn_space(dom, cod, pos);
    }
    fail(t, "unexpected " + spell(t), expression_starts());
  }

  // True when tokens [from, to) are exactly one parenthesized group.
  bool wrapped_in_parens(std::size_t from, std::size_t to) const {
    if (to <= from + 1) return false;
    if (toks_[from].kind != TokenKind::Symbol || toks_[from].text != "(") return false;
    int depth = 0;
    for (std::size_t i = from; i < to; ++i) {
      const Token& k = toks_[i];
      if (k.kind != TokenKind::Symbol) continue;
      if (k.text == "(") ++depth;
      if (k.text == ")" && --depth == 0) return i + 1 == to;
    }
    return false;
  }

  ExprPtr braces() {
    SourcePos pos = peek().pos;
    expect_symbol("{");
    if (accept_symbol("}")) return build::set_enum({}, pos);
    std::size_t start = pos_;
    ExprPtr first = expr();
    bool parenthesized = wrapped_in_parens(start, pos_);
    if (accept_symbol(":")) {
      if (!parenthesized && first->kind == ExprKind::In &&
          first->arg(0)->kind == ExprKind::Ident) {
        Binder b{first->arg(0)->name, first->arg(1)};
        ExprPtr pred = expr();
        expect_symbol("}");
        return build::set_filter(std::move(b), pred, pos);
      }
      std::vector<Binder> bs = binder_list();
      expect_symbol("}");
      return build::set_map(first, std::move(bs), pos);
    }
    std::vector<ExprPtr> elems{first};
    while (accept_symbol(",")) elems.push_back(expr());
    expect_symbol("}");
    return build::set_enum(std::move(elems), pos);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

bool ProofStep::takes_proof() const {
  switch (kind) {
    case Kind::Assert:
    case Kind::Suffices:
    case Kind::Pick:
    case Kind::Case:
    case Kind::Qed:
      return true;
    default:
      return false;
  }
}

Theorem parse_theorem(std::string_view source) {
  Parser p(lex(source));
  return p.theorem();
}

ExprPtr parse_expression(std::string_view source) {
  Parser p(lex(source));
  return p.whole_expression();
}

void validate_levels(const Proof& proof, int enclosing_level) {
  if (proof.kind != Proof::Kind::Steps) return;
  if (proof.steps.empty()) throw LevelError(proof.pos, "non-leaf proof without steps");
  const int level = proof.steps.front().first.level;
  if (level <= enclosing_level)
    throw LevelError(proof.steps.front().first.pos,
                     "subproof level " + std::to_string(level) + " must exceed " +
                         std::to_string(enclosing_level));
  for (std::size_t i = 0; i < proof.steps.size(); ++i) {
    const auto& [tok, step] = proof.steps[i];
    if (tok.level != level)
      throw LevelError(tok.pos, "step " + tok.text() + " in a level-" + std::to_string(level) +
                                    " proof");
    bool last = i + 1 == proof.steps.size();
    if ((step.kind == ProofStep::Kind::Qed) != last)
      throw LevelError(tok.pos, last ? "non-leaf proof must end with QED"
                                     : "QED must be the last step of its proof");
    if (step.proof) validate_levels(*step.proof, level);
  }
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string fact_list_text(const FactList& fl) {
  std::ostringstream out;
  for (std::size_t i = 0; i < fl.facts.size(); ++i) {
    if (i) out << ", ";
    out << to_string(fl.facts[i]);
  }
  if (!fl.defs.empty()) {
    if (!fl.facts.empty()) out << ' ';
    out << "DEF ";
    for (std::size_t i = 0; i < fl.defs.size(); ++i) {
      if (i) out << ", ";
      out << fl.defs[i];
    }
  }
  return out.str();
}

std::string binders_text(const std::vector<Binder>& bs) {
  std::ostringstream out;
  for (std::size_t i = 0; i < bs.size(); ++i) {
    if (i) out << ", ";
    out << bs[i].name;
    if (bs[i].domain) out << " \\in " << to_string(bs[i].domain);
  }
  return out.str();
}

}  // namespace

std::string to_string(const GoalForm& g) {
  if (!g.has_assume) return to_string(g.goal);
  std::ostringstream out;
  out << "ASSUME ";
  for (std::size_t i = 0; i < g.assume.size(); ++i) {
    if (i) out << ", ";
    const auto& a = g.assume[i];
    if (a.is_new) {
      out << "NEW " << a.binder.name;
      if (a.binder.domain) out << " \\in " << to_string(a.binder.domain);
    } else {
      out << to_string(a.fact);
    }
  }
  out << " PROVE " << to_string(g.goal);
  return out.str();
}

std::string to_string(const Proof& p, int indent) {
  std::string pad(static_cast<std::size_t>(indent), ' ');
  switch (p.kind) {
    case Proof::Kind::Obvious:
      return "OBVIOUS";
    case Proof::Kind::Omitted:
      return p.implicit ? "" : "OMITTED";
    case Proof::Kind::By: {
      std::string facts = fact_list_text(p.by);
      return facts.empty() ? "BY" : "BY " + facts;
    }
    case Proof::Kind::Steps:
      break;
  }
  std::ostringstream out;
  for (const auto& [tok, s] : p.steps) {
    out << '\n' << pad << tok.text() << ". ";
    switch (s.kind) {
      case ProofStep::Kind::Use:
        out << "USE " << fact_list_text(s.facts);
        break;
      case ProofStep::Kind::Hide:
        out << "HIDE " << fact_list_text(s.facts);
        break;
      case ProofStep::Kind::Define: {
        out << "DEFINE " << s.def_name;
        if (!s.def_params.empty()) {
          out << '(';
          for (std::size_t i = 0; i < s.def_params.size(); ++i)
            out << (i ? ", " : "") << s.def_params[i];
          out << ')';
        }
        out << " == " << to_string(s.expr);
        break;
      }
      case ProofStep::Kind::Have:
        out << "HAVE " << to_string(s.expr);
        break;
      case ProofStep::Kind::Take:
        out << "TAKE " << binders_text(s.binders);
        break;
      case ProofStep::Kind::Witness:
        out << "WITNESS ";
        for (std::size_t i = 0; i < s.witnesses.size(); ++i) {
          if (i) out << ", ";
          out << to_string(s.witnesses[i].term);
          if (s.witnesses[i].domain) out << " \\in " << to_string(s.witnesses[i].domain);
        }
        break;
      case ProofStep::Kind::Assert:
        out << to_string(s.goal);
        break;
      case ProofStep::Kind::Suffices:
        out << "SUFFICES " << to_string(s.goal);
        break;
      case ProofStep::Kind::Pick:
        out << "PICK " << binders_text(s.binders) << " : " << to_string(s.expr);
        break;
      case ProofStep::Kind::Case:
        out << "CASE " << to_string(s.expr);
        break;
      case ProofStep::Kind::Qed:
        out << "QED";
        break;
    }
    if (s.proof) {
      std::string sub = to_string(*s.proof, indent + 2);
      if (!sub.empty()) {
        if (s.proof->kind == Proof::Kind::Steps)
          out << sub;
        else
          out << ' ' << sub;
      }
    }
  }
  return out.str();
}

std::string to_string(const Theorem& t) {
  std::ostringstream out;
  out << "THEOREM ";
  if (!t.name.empty()) out << t.name << " == ";
  out << to_string(t.goal);
  if (t.proof) {
    std::string p = to_string(*t.proof, 2);
    if (!p.empty()) out << (t.proof->kind == Proof::Kind::Steps ? "" : " ") << p;
  }
  out << '\n';
  return out.str();
}

}  // namespace stepwise
