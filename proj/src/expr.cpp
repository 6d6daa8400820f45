#include "stepwise/expr.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace stepwise {

namespace build {

namespace {
ExprPtr make(ExprKind kind, std::string name, std::vector<Binder> binders,
             std::vector<ExprPtr> args, SourcePos pos) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->name = std::move(name);
  e->binders = std::move(binders);
  e->args = std::move(args);
  e->pos = pos;
  return e;
}
}  // namespace

ExprPtr ident(std::string name, SourcePos pos) {
  return make(ExprKind::Ident, std::move(name), {}, {}, pos);
}
ExprPtr apply(std::string op, std::vector<ExprPtr> args, SourcePos pos) {
  return make(ExprKind::Apply, std::move(op), {}, std::move(args), pos);
}
ExprPtr boolean(bool v, SourcePos pos) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Bool;
  e->value = v;
  e->pos = pos;
  return e;
}
ExprPtr quantifier(ExprKind kind, std::vector<Binder> binders, ExprPtr body, SourcePos pos) {
  if (binders.empty()) throw std::invalid_argument("quantifier needs at least one binder");
  return make(kind, "", std::move(binders), {std::move(body)}, pos);
}
ExprPtr forall(std::vector<Binder> binders, ExprPtr body, SourcePos pos) {
  return quantifier(ExprKind::Forall, std::move(binders), std::move(body), pos);
}
ExprPtr exists(std::vector<Binder> binders, ExprPtr body, SourcePos pos) {
  return quantifier(ExprKind::Exists, std::move(binders), std::move(body), pos);
}
ExprPtr negate(ExprPtr e, SourcePos pos) { return make(ExprKind::Not, "", {}, {std::move(e)}, pos); }
ExprPtr binary(ExprKind kind, ExprPtr a, ExprPtr b, SourcePos pos) {
  return make(kind, "", {}, {std::move(a), std::move(b)}, pos);
}
ExprPtr conj(ExprPtr a, ExprPtr b) { return binary(ExprKind::And, std::move(a), std::move(b)); }
ExprPtr disj(ExprPtr a, ExprPtr b) { return binary(ExprKind::Or, std::move(a), std::move(b)); }
ExprPtr implies(ExprPtr a, ExprPtr b) { return binary(ExprKind::Implies, std::move(a), std::move(b)); }
ExprPtr equiv(ExprPtr a, ExprPtr b) { return binary(ExprKind::Equiv, std::move(a), std::move(b)); }
ExprPtr eq(ExprPtr a, ExprPtr b) { return binary(ExprKind::Eq, std::move(a), std::move(b)); }
ExprPtr in(ExprPtr a, ExprPtr b) { return binary(ExprKind::In, std::move(a), std::move(b)); }
ExprPtr subseteq(ExprPtr a, ExprPtr b) { return binary(ExprKind::Subseteq, std::move(a), std::move(b)); }
ExprPtr powerset(ExprPtr s, SourcePos pos) { return make(ExprKind::Powerset, "", {}, {std::move(s)}, pos); }
ExprPtr set_filter(Binder binder, ExprPtr pred, SourcePos pos) {
  return make(ExprKind::SetFilter, "", {std::move(binder)}, {std::move(pred)}, pos);
}
ExprPtr set_map(ExprPtr image, std::vector<Binder> binders, SourcePos pos) {
  if (binders.empty()) throw std::invalid_argument("set map needs at least one binder");
  return make(ExprKind::SetMap, "", std::move(binders), {std::move(image)}, pos);
}
ExprPtr set_enum(std::vector<ExprPtr> elems, SourcePos pos) {
  return make(ExprKind::SetEnum, "", {}, std::move(elems), pos);
}
ExprPtr fcn_apply(ExprPtr f, ExprPtr x, SourcePos pos) {
  return make(ExprKind::FcnApply, "", {}, {std::move(f), std::move(x)}, pos);
}
ExprPtr fcn_space(ExprPtr dom, ExprPtr cod, SourcePos pos) {
  return make(ExprKind::FcnSpace, "", {}, {std::move(dom), std::move(cod)}, pos);
}
ExprPtr with_parts(const Expr& e, std::vector<Binder> binders, std::vector<ExprPtr> args) {
  auto out = std::make_shared<Expr>(e);
  out->binders = std::move(binders);
  out->args = std::move(args);
  return out;
}

}  // namespace build

bool is_binding_form(ExprKind k) {
  return k == ExprKind::Forall || k == ExprKind::Exists || k == ExprKind::SetFilter ||
         k == ExprKind::SetMap;
}

bool is_set_constructor(const Expr& e) {
  switch (e.kind) {
    case ExprKind::SetFilter:
    case ExprKind::SetMap:
    case ExprKind::SetEnum:
    case ExprKind::Powerset:
    case ExprKind::FcnSpace:
      return true;
    default:
      return false;
  }
}

// ---------------------------------------------------------------------------
// Printing

namespace {

int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Forall:
    case ExprKind::Exists:
      return 0;
    case ExprKind::Equiv:
      return 1;
    case ExprKind::Implies:
      return 2;
    case ExprKind::Or:
      return 3;
    case ExprKind::And:
      return 4;
    case ExprKind::Not:
      return 5;
    case ExprKind::Eq:
    case ExprKind::Neq:
    case ExprKind::In:
    case ExprKind::NotIn:
    case ExprKind::Subseteq:
      return 6;
    case ExprKind::Powerset:
      return 7;
    case ExprKind::FcnApply:
      return 8;
    default:
      return 9;
  }
}

const char* infix_token(ExprKind k) {
  switch (k) {
    case ExprKind::Equiv: return " <=> ";
    case ExprKind::Implies: return " => ";
    case ExprKind::Or: return " \\/ ";
    case ExprKind::And: return " /\\ ";
    case ExprKind::Eq: return " = ";
    case ExprKind::Neq: return " # ";
    case ExprKind::In: return " \\in ";
    case ExprKind::NotIn: return " \\notin ";
    case ExprKind::Subseteq: return " \\subseteq ";
    default: return " ? ";
  }
}

class Printer {
 public:
  std::string str() const { return out_.str(); }

  void print(const ExprPtr& e, int ctx) {
    bool parens = precedence(*e) < ctx;
    if (parens) out_ << '(';
    emit(*e);
    if (parens) out_ << ')';
  }

 private:
  void binders(const std::vector<Binder>& bs) {
    for (std::size_t i = 0; i < bs.size(); ++i) {
      if (i) out_ << ", ";
      out_ << bs[i].name;
      if (bs[i].domain) {
        out_ << " \\in ";
        print(bs[i].domain, 7);
      }
    }
  }

  void emit(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Ident:
        out_ << e.name;
        break;
      case ExprKind::Bool:
        out_ << (e.value ? "TRUE" : "FALSE");
        break;
      case ExprKind::Apply:
        out_ << e.name << '(';
        for (std::size_t i = 0; i < e.args.size(); ++i) {
          if (i) out_ << ", ";
          print(e.args[i], 0);
        }
        out_ << ')';
        break;
      case ExprKind::Forall:
      case ExprKind::Exists:
        out_ << (e.kind == ExprKind::Forall ? "\\A " : "\\E ");
        binders(e.binders);
        out_ << " : ";
        print(e.body(), 0);
        break;
      case ExprKind::Not:
        out_ << '~';
        print(e.arg(0), 5);
        break;
      case ExprKind::Equiv:
        print(e.arg(0), 1);
        out_ << infix_token(e.kind);
        print(e.arg(1), 2);
        break;
      case ExprKind::Implies:
        print(e.arg(0), 3);
        out_ << infix_token(e.kind);
        print(e.arg(1), 2);
        break;
      case ExprKind::Or:
        print(e.arg(0), 3);
        out_ << infix_token(e.kind);
        print(e.arg(1), 4);
        break;
      case ExprKind::And:
        print(e.arg(0), 4);
        out_ << infix_token(e.kind);
        print(e.arg(1), 5);
        break;
      case ExprKind::Eq:
      case ExprKind::Neq:
      case ExprKind::In:
      case ExprKind::NotIn:
      case ExprKind::Subseteq:
        print(e.arg(0), 7);
        out_ << infix_token(e.kind);
        print(e.arg(1), 7);
        break;
      case ExprKind::Powerset:
        out_ << "SUBSET ";
        print(e.arg(0), 7);
        break;
      case ExprKind::FcnApply:
        print(e.arg(0), 8);
        out_ << '[';
        print(e.arg(1), 0);
        out_ << ']';
        break;
      case ExprKind::FcnSpace:
        out_ << '[';
        print(e.arg(0), 0);
        out_ << " -> ";
        print(e.arg(1), 0);
        out_ << ']';
        break;
      case ExprKind::SetFilter:
        out_ << '{';
        binders(e.binders);
        out_ << " : ";
        print(e.body(), 0);
        out_ << '}';
        break;
      case ExprKind::SetMap: {
        out_ << '{';
        const Expr& img = *e.body();
        // An image of the form `x \in S` would read back as a filter.
        bool guard = img.kind == ExprKind::In && img.arg(0)->kind == ExprKind::Ident;
        if (guard) out_ << '(';
        print(e.body(), guard ? 0 : 1);
        if (guard) out_ << ')';
        out_ << " : ";
        binders(e.binders);
        out_ << '}';
        break;
      }
      case ExprKind::SetEnum:
        out_ << '{';
        for (std::size_t i = 0; i < e.args.size(); ++i) {
          if (i) out_ << ", ";
          print(e.args[i], 1);
        }
        out_ << '}';
        break;
    }
  }

  std::ostringstream out_;
};

}  // namespace

std::string to_string(const ExprPtr& e) {
  if (!e) return "<null>";
  Printer p;
  p.print(e, 0);
  return p.str();
}

// ---------------------------------------------------------------------------
// Canonical form, alpha-equivalence, identifiers

namespace {

class KeyWriter {
 public:
  std::string str() const { return out_.str(); }

  void write(const ExprPtr& e) {
    const Expr& x = *e;
    out_ << static_cast<int>(x.kind);
    switch (x.kind) {
      case ExprKind::Ident:
        name(x.name);
        return;
      case ExprKind::Bool:
        out_ << (x.value ? 'T' : 'F');
        return;
      case ExprKind::Apply:
        name(x.name);
        break;
      default:
        break;
    }
    if (is_binding_form(x.kind)) {
      out_ << '<';
      for (const auto& b : x.binders) {
        if (b.domain) {
          write(b.domain);
        } else {
          out_ << '_';
        }
        out_ << ';';
      }
      out_ << '>';
      for (const auto& b : x.binders) scope_.push_back(b.name);
      out_ << '(';
      write(x.body());
      out_ << ')';
      scope_.resize(scope_.size() - x.binders.size());
      return;
    }
    out_ << '(';
    for (const auto& a : x.args) {
      write(a);
      out_ << ',';
    }
    out_ << ')';
  }

 private:
  void name(const std::string& n) {
    for (std::size_t i = scope_.size(); i-- > 0;) {
      if (scope_[i] == n) {
        out_ << '#' << i;
        return;
      }
    }
    out_ << '"' << n << '"';
  }

  std::vector<std::string> scope_;
  std::ostringstream out_;
};

void free_ids(const ExprPtr& e, std::multiset<std::string>& bound, std::set<std::string>& out) {
  const Expr& x = *e;
  if (x.kind == ExprKind::Ident || x.kind == ExprKind::Apply) {
    if (!bound.count(x.name)) out.insert(x.name);
  }
  if (is_binding_form(x.kind)) {
    for (const auto& b : x.binders)
      if (b.domain) free_ids(b.domain, bound, out);
    for (const auto& b : x.binders) bound.insert(b.name);
    free_ids(x.body(), bound, out);
    for (const auto& b : x.binders) bound.erase(bound.find(b.name));
    return;
  }
  for (const auto& a : x.args) free_ids(a, bound, out);
}

}  // namespace

std::string canonical_key(const ExprPtr& e) {
  KeyWriter w;
  w.write(e);
  return w.str();
}

bool alpha_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return canonical_key(a) == canonical_key(b);
}

std::set<std::string> free_identifiers(const ExprPtr& e) {
  std::set<std::string> out;
  std::multiset<std::string> bound;
  free_ids(e, bound, out);
  return out;
}

void collect_identifiers(const ExprPtr& e, std::set<std::string>& out) {
  if (e->kind == ExprKind::Ident || e->kind == ExprKind::Apply) out.insert(e->name);
  for (const auto& b : e->binders) {
    out.insert(b.name);
    if (b.domain) collect_identifiers(b.domain, out);
  }
  for (const auto& a : e->args) collect_identifiers(a, out);
}

std::string fresh_name(const std::string& base, const std::set<std::string>& avoid,
                       bool allow_self) {
  if (allow_self && !avoid.count(base)) return base;
  std::string stem = base;
  while (stem.size() > 1 && std::isdigit(static_cast<unsigned char>(stem.back()))) stem.pop_back();
  for (int n = 1;; ++n) {
    std::string candidate = stem + std::to_string(n);
    if (!avoid.count(candidate) && candidate != base) return candidate;
  }
}

// ---------------------------------------------------------------------------
// Substitution

ExprPtr substitute(const ExprPtr& e, const std::map<std::string, ExprPtr>& sub) {
  if (sub.empty()) return e;
  const Expr& x = *e;
  switch (x.kind) {
    case ExprKind::Ident: {
      auto it = sub.find(x.name);
      return it == sub.end() ? e : it->second;
    }
    case ExprKind::Bool:
      return e;
    case ExprKind::Apply: {
      std::vector<ExprPtr> args;
      args.reserve(x.args.size());
      bool changed = false;
      for (const auto& a : x.args) {
        args.push_back(substitute(a, sub));
        changed = changed || args.back() != a;
      }
      auto it = sub.find(x.name);
      if (it != sub.end()) {
        if (it->second->kind != ExprKind::Ident)
          throw std::invalid_argument("cannot substitute a non-identifier for operator " + x.name);
        auto out = build::apply(it->second->name, std::move(args), x.pos);
        return out;
      }
      return changed ? build::with_parts(x, x.binders, std::move(args)) : e;
    }
    default:
      break;
  }

  if (is_binding_form(x.kind)) {
    std::vector<Binder> binders = x.binders;
    for (auto& b : binders)
      if (b.domain) b.domain = substitute(b.domain, sub);

    const std::set<std::string> body_free = free_identifiers(x.body());
    std::map<std::string, ExprPtr> inner;
    for (const auto& [k, v] : sub) {
      bool shadowed = std::any_of(binders.begin(), binders.end(),
                                  [&](const Binder& b) { return b.name == k; });
      if (!shadowed && body_free.count(k)) inner.emplace(k, v);
    }
    std::set<std::string> value_free;
    for (const auto& [k, v] : inner) {
      auto fv = free_identifiers(v);
      value_free.insert(fv.begin(), fv.end());
    }
    if (!inner.empty()) {
      std::set<std::string> avoid = value_free;
      avoid.insert(body_free.begin(), body_free.end());
      for (const auto& b : binders) avoid.insert(b.name);
      for (const auto& [k, v] : inner) avoid.insert(k);
      for (auto& b : binders) {
        if (value_free.count(b.name)) {
          std::string renamed = fresh_name(b.name, avoid);
          avoid.insert(renamed);
          inner[b.name] = build::ident(renamed);
          b.name = renamed;
        }
      }
    }
    ExprPtr body = inner.empty() ? x.body() : substitute(x.body(), inner);
    return build::with_parts(x, std::move(binders), {body});
  }

  std::vector<ExprPtr> args;
  args.reserve(x.args.size());
  bool changed = false;
  for (const auto& a : x.args) {
    args.push_back(substitute(a, sub));
    changed = changed || args.back() != a;
  }
  return changed ? build::with_parts(x, x.binders, std::move(args)) : e;
}

ExprPtr substitute(const ExprPtr& e, const std::string& x, const ExprPtr& u) {
  return substitute(e, std::map<std::string, ExprPtr>{{x, u}});
}

namespace {

struct OperatorExpansion {
  const std::string& op;
  const std::vector<std::string>& params;
  const ExprPtr& body;
  std::set<std::string> body_free;  // free identifiers of the body, minus params

  ExprPtr run(const ExprPtr& e) {
    const Expr& x = *e;
    if (x.kind == ExprKind::Ident) {
      if (x.name != op) return e;
      if (!params.empty())
        throw ArityMismatch("operator " + op + " expects " + std::to_string(params.size()) +
                            " argument(s) but is used without arguments");
      return body;
    }
    if (x.kind == ExprKind::Bool) return e;
    if (x.kind == ExprKind::Apply) {
      std::vector<ExprPtr> args;
      for (const auto& a : x.args) args.push_back(run(a));
      if (x.name != op) return build::with_parts(x, x.binders, std::move(args));
      if (args.size() != params.size())
        throw ArityMismatch("operator " + op + " expects " + std::to_string(params.size()) +
                            " argument(s) but is applied to " + std::to_string(args.size()));
      std::map<std::string, ExprPtr> sub;
      for (std::size_t i = 0; i < params.size(); ++i) sub[params[i]] = args[i];
      return substitute(body, sub);
    }
    if (is_binding_form(x.kind)) {
      std::vector<Binder> binders = x.binders;
      for (auto& b : binders)
        if (b.domain) b.domain = run(b.domain);
      bool shadowed = std::any_of(binders.begin(), binders.end(),
                                  [&](const Binder& b) { return b.name == op; });
      ExprPtr inner = x.body();
      if (!shadowed && free_identifiers(inner).count(op)) {
        std::set<std::string> avoid = body_free;
        auto fv = free_identifiers(inner);
        avoid.insert(fv.begin(), fv.end());
        for (const auto& b : binders) avoid.insert(b.name);
        avoid.insert(op);
        std::map<std::string, ExprPtr> renames;
        for (auto& b : binders) {
          if (body_free.count(b.name)) {
            std::string renamed = fresh_name(b.name, avoid);
            avoid.insert(renamed);
            renames[b.name] = build::ident(renamed);
            b.name = renamed;
          }
        }
        if (!renames.empty()) inner = substitute(inner, renames);
        inner = run(inner);
      }
      return build::with_parts(x, std::move(binders), {inner});
    }
    std::vector<ExprPtr> args;
    for (const auto& a : x.args) args.push_back(run(a));
    return build::with_parts(x, x.binders, std::move(args));
  }
};

}  // namespace

ExprPtr expand_operator(const ExprPtr& e, const std::string& op,
                        const std::vector<std::string>& params, const ExprPtr& body) {
  if (!free_identifiers(e).count(op)) return e;
  OperatorExpansion exp{op, params, body, free_identifiers(body)};
  for (const auto& p : params) exp.body_free.erase(p);
  return exp.run(e);
}

ExprPtr replace_constant(const ExprPtr& e, const std::string& name, const ExprPtr& replacement) {
  static const std::vector<std::string> no_params;
  return expand_operator(e, name, no_params, replacement);
}

std::pair<Binder, ExprPtr> peel_binder(const ExprPtr& quantified) {
  const Expr& q = *quantified;
  if (!is_binding_form(q.kind) || q.binders.empty())
    throw std::invalid_argument("peel_binder on a non-quantified expression");
  Binder first = q.binders.front();
  if (q.binders.size() == 1) return {first, q.body()};
  std::vector<Binder> rest(q.binders.begin() + 1, q.binders.end());
  ExprPtr body = q.body();
  // Later domains are scoped outside the whole list, so they must not see the
  // peeled binder; rename it when one of them mentions the same name.
  bool clash = std::any_of(rest.begin(), rest.end(), [&](const Binder& b) {
    return b.domain && free_identifiers(b.domain).count(first.name);
  });
  if (clash) {
    std::set<std::string> avoid;
    collect_identifiers(quantified, avoid);
    std::string renamed = fresh_name(first.name, avoid);
    bool shadowed = std::any_of(rest.begin(), rest.end(),
                                [&](const Binder& b) { return b.name == first.name; });
    if (!shadowed) body = substitute(body, first.name, build::ident(renamed));
    first.name = renamed;
  }
  return {first, build::quantifier(q.kind, std::move(rest), body, q.pos)};
}

}  // namespace stepwise
