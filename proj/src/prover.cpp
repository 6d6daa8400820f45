#include <algorithm>
#include <chrono>
#include <functional>
#include <sstream>

#include "stepwise/prover.hpp"

namespace stepwise {

// ---------------------------------------------------------------------------
// Normal form

ExprPtr normalize(const ExprPtr& e) {
  const Expr& x = *e;
  switch (x.kind) {
    case ExprKind::Ident:
    case ExprKind::Bool:
      return e;
    case ExprKind::Not: {
      ExprPtr inner = normalize(x.arg(0));
      if (inner->kind == ExprKind::Not) return inner->arg(0);
      return build::negate(inner, x.pos);
    }
    case ExprKind::NotIn:
      return build::negate(build::in(normalize(x.arg(0)), normalize(x.arg(1))), x.pos);
    case ExprKind::Neq:
      return build::negate(build::eq(normalize(x.arg(0)), normalize(x.arg(1))), x.pos);
    case ExprKind::Forall:
    case ExprKind::Exists: {
      if (x.binders.size() > 1) {
        auto [b, rest] = peel_binder(e);
        return normalize(build::quantifier(x.kind, {b}, rest, x.pos));
      }
      Binder b = x.binders.front();
      ExprPtr body = x.body();
      if (!b.domain) return build::quantifier(x.kind, {b}, normalize(body), x.pos);
      if (free_identifiers(b.domain).count(b.name)) {
        std::set<std::string> avoid;
        collect_identifiers(e, avoid);
        std::string fresh = fresh_name(b.name, avoid);
        body = substitute(body, b.name, build::ident(fresh));
        b.name = fresh;
      }
      ExprPtr guard = build::in(build::ident(b.name), b.domain);
      ExprPtr guarded =
          x.kind == ExprKind::Forall ? build::implies(guard, body) : build::conj(guard, body);
      return build::quantifier(x.kind, {Binder{b.name, nullptr}}, normalize(guarded), x.pos);
    }
    default:
      break;
  }
  std::vector<Binder> binders = x.binders;
  for (auto& b : binders)
    if (b.domain) b.domain = normalize(b.domain);
  std::vector<ExprPtr> args;
  args.reserve(x.args.size());
  for (const auto& a : x.args) args.push_back(normalize(a));
  return build::with_parts(x, std::move(binders), std::move(args));
}

// ---------------------------------------------------------------------------
// Sequents

namespace {

void check_operator_heads(const ExprPtr& e, std::multiset<std::string>& bound) {
  if (e->kind == ExprKind::Apply && bound.count(e->name))
    throw MalformedSequent("bound variable " + e->name + " used as an operator in " + to_string(e));
  if (is_binding_form(e->kind)) {
    for (const auto& b : e->binders)
      if (b.domain) check_operator_heads(b.domain, bound);
    for (const auto& b : e->binders) bound.insert(b.name);
    check_operator_heads(e->body(), bound);
    for (const auto& b : e->binders) bound.erase(bound.find(b.name));
    return;
  }
  for (const auto& a : e->args) check_operator_heads(a, bound);
}

void check_scoped(const Sequent& s) {
  std::set<std::string> sig(s.signature.begin(), s.signature.end());
  std::vector<ExprPtr> all = s.hypotheses;
  all.push_back(s.goal);
  for (const auto& f : all) {
    if (!f) throw MalformedSequent("missing formula");
    for (const auto& id : free_identifiers(f)) {
      if (!id.empty() && id[0] == '<')
        throw MalformedSequent("step label " + id + " left unexpanded");
      if (!sig.count(id)) throw MalformedSequent("identifier " + id + " is not declared");
    }
    std::multiset<std::string> bound;
    check_operator_heads(f, bound);
  }
}

}  // namespace

Sequent make_sequent(const Obligation& o) {
  Obligation flat;
  try {
    flat = expand_all_definitions(filter(o));
    check_well_formed(flat);
  } catch (const std::exception& e) {
    throw MalformedSequent(e.what());
  }
  Sequent s;
  for (const auto& h : flat.context) {
    if (h.kind == Assumption::Kind::New)
      s.signature.push_back(h.name);
    else if (h.kind == Assumption::Kind::Fact)
      s.hypotheses.push_back(obligation_formula(*h.fact));
  }
  s.goal = flat.goal;
  check_scoped(s);
  return s;
}

std::string to_string(const Sequent& s) {
  std::string out;
  for (std::size_t i = 0; i < s.signature.size(); ++i)
    out += (i ? ", " : "") + std::string("NEW ") + s.signature[i];
  for (const auto& h : s.hypotheses) out += (out.empty() ? "" : ", ") + to_string(h);
  return out + " |- " + to_string(s.goal);
}

std::string to_string(ProverOutcome::Status s) {
  switch (s) {
    case ProverOutcome::Status::Proved:
      return "proved";
    case ProverOutcome::Status::Unknown:
      return "unknown";
    case ProverOutcome::Status::Malformed:
      return "malformed";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Search

namespace {

struct Timeout {};

bool is_var(const ExprPtr& e) { return e->kind == ExprKind::Ident && !e->name.empty() && e->name[0] == '?'; }

bool mentions_var(const ExprPtr& e) {
  if (is_var(e)) return true;
  for (const auto& b : e->binders)
    if (b.domain && mentions_var(b.domain)) return true;
  for (const auto& a : e->args)
    if (mentions_var(a)) return true;
  return false;
}

void collect_vars(const ExprPtr& e, std::vector<std::string>& out) {
  if (is_var(e)) {
    if (std::find(out.begin(), out.end(), e->name) == out.end()) out.push_back(e->name);
    return;
  }
  for (const auto& b : e->binders)
    if (b.domain) collect_vars(b.domain, out);
  for (const auto& a : e->args) collect_vars(a, out);
}

bool is_atom(const Expr& e) {
  switch (e.kind) {
    case ExprKind::In:
    case ExprKind::Subseteq:
    case ExprKind::Apply:
    case ExprKind::Ident:
    case ExprKind::FcnApply:
    case ExprKind::Eq:
      return true;
    default:
      return false;
  }
}

// Union-find over terms keyed by their canonical text, with congruence for
// operator and function applications.
class Congruence {
 public:
  int add(const ExprPtr& t) {
    std::string key = canonical_key(t);
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    Node n;
    bool structural = t->kind == ExprKind::Apply || t->kind == ExprKind::FcnApply ||
                      t->kind == ExprKind::Powerset || t->kind == ExprKind::FcnSpace ||
                      t->kind == ExprKind::SetEnum;
    if (structural) {
      n.head = std::to_string(static_cast<int>(t->kind)) + ":" + t->name;
      for (const auto& a : t->args) n.args.push_back(add(a));
    }
    int id = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(n));
    parent_.push_back(id);
    index_.emplace(std::move(key), id);
    return id;
  }

  void merge(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[static_cast<std::size_t>(a)] = b;
  }

  void close() {
    bool changed = true;
    while (changed) {
      changed = false;
      std::map<std::string, int> sig;
      for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        if (n.head.empty()) continue;
        std::string s = n.head;
        for (int a : n.args) s += "," + std::to_string(find(a));
        auto [it, fresh] = sig.emplace(s, static_cast<int>(i));
        if (!fresh && find(it->second) != find(static_cast<int>(i))) {
          merge(it->second, static_cast<int>(i));
          changed = true;
        }
      }
    }
  }

  bool same(const ExprPtr& a, const ExprPtr& b) {
    auto ia = index_.find(canonical_key(a));
    auto ib = index_.find(canonical_key(b));
    if (ia == index_.end() || ib == index_.end()) return canonical_key(a) == canonical_key(b);
    return find(ia->second) == find(ib->second);
  }

 private:
  struct Node {
    std::string head;
    std::vector<int> args;
  };

  int find(int x) {
    while (parent_[static_cast<std::size_t>(x)] != x) {
      parent_[static_cast<std::size_t>(x)] = parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(x)])];
      x = parent_[static_cast<std::size_t>(x)];
    }
    return x;
  }

  std::vector<Node> nodes_;
  std::vector<int> parent_;
  std::map<std::string, int> index_;
};

// Same predicate symbol and arity.
bool same_shape(const Expr& a, const Expr& b) {
  return a.kind == b.kind && a.name == b.name && a.args.size() == b.args.size() &&
         a.binders.empty() && b.binders.empty();
}

struct Entry {
  int id;
  ExprPtr f;
};

struct Branch {
  int id = 0;
  std::vector<Entry> fs;
  std::set<std::string> keys;
  std::set<int> expanded;
  std::set<std::string> rewrites;
  std::map<int, int> gamma_uses;
  int used = 0;
  int eager_added = 0;
};

struct Counters {
  int next_formula = 0;
  int next_branch = 1;
  int next_var = 1;
  int next_skolem = 1;
};

constexpr int kEagerCap = 400;
constexpr std::size_t kPoolCap = 16;

enum class Shape { None, Alpha, Beta, Delta, Gamma };

struct Expansion {
  std::string rule;
  Shape shape = Shape::None;
  std::vector<ExprPtr> out;    // Alpha, or left side of Beta
  std::vector<ExprPtr> right;  // Beta
};

ExprPtr fresh_bound(const std::string& base, std::initializer_list<ExprPtr> near,
                    std::string& name) {
  std::set<std::string> avoid;
  for (const auto& e : near) collect_identifiers(e, avoid);
  name = fresh_name(base, avoid, true);
  return build::ident(name);
}

ExprPtr membership_universal(const ExprPtr& a, const ExprPtr& b) {
  std::string x;
  ExprPtr v = fresh_bound("x", {a, b}, x);
  return build::forall({Binder{x, nullptr}}, build::implies(build::in(v, a), build::in(v, b)));
}

// Rules that fire on the shape of a (resolved) formula. Gamma and delta only
// report their shape; the caller supplies the instance.
Expansion classify(const ExprPtr& f) {
  Expansion x;
  const Expr& e = *f;
  auto alpha = [&](std::string rule, std::vector<ExprPtr> out) {
    x.rule = std::move(rule);
    x.shape = Shape::Alpha;
    for (auto& o : out) x.out.push_back(normalize(o));
  };
  auto beta = [&](std::string rule, std::vector<ExprPtr> l, std::vector<ExprPtr> r) {
    x.rule = std::move(rule);
    x.shape = Shape::Beta;
    for (auto& o : l) x.out.push_back(normalize(o));
    for (auto& o : r) x.right.push_back(normalize(o));
  };
  using build::negate;
  switch (e.kind) {
    case ExprKind::And:
      alpha("and", {e.arg(0), e.arg(1)});
      return x;
    case ExprKind::Or:
      beta("or", {e.arg(0)}, {e.arg(1)});
      return x;
    case ExprKind::Implies:
      beta("implies", {negate(e.arg(0))}, {e.arg(1)});
      return x;
    case ExprKind::Equiv:
      beta("equiv", {e.arg(0), e.arg(1)}, {negate(e.arg(0)), negate(e.arg(1))});
      return x;
    case ExprKind::Exists:
      x.rule = "delta";
      x.shape = Shape::Delta;
      return x;
    case ExprKind::Forall:
      x.rule = "gamma";
      x.shape = Shape::Gamma;
      return x;
    case ExprKind::In: {
      const ExprPtr& t = e.arg(0);
      const ExprPtr& s = e.arg(1);
      switch (s->kind) {
        case ExprKind::SetFilter:
          alpha("subset-of",
                {build::in(t, s->binders[0].domain), substitute(s->body(), s->binders[0].name, t)});
          return x;
        case ExprKind::SetMap:
          alpha("set-of-all", {[&] {
                  std::set<std::string> avoid = free_identifiers(t);
                  std::set<std::string> all = avoid;
                  collect_identifiers(s, all);
                  std::vector<Binder> bs = s->binders;
                  std::map<std::string, ExprPtr> renames;
                  for (auto& b : bs) {
                    if (avoid.count(b.name)) {
                      std::string fresh = fresh_name(b.name, all);
                      all.insert(fresh);
                      renames[b.name] = build::ident(fresh);
                      b.name = fresh;
                    }
                  }
                  return build::exists(bs, build::eq(t, substitute(s->body(), renames)));
                }()});
          return x;
        case ExprKind::Powerset:
          alpha("powerset", {build::subseteq(t, s->arg(0))});
          return x;
        case ExprKind::FcnSpace: {
          std::string v;
          ExprPtr xv = fresh_bound("x", {t, s}, v);
          alpha("fun-space", {build::forall({Binder{v, nullptr}},
                                            build::implies(build::in(xv, s->arg(0)),
                                                           build::in(build::fcn_apply(t, xv), s->arg(1))))});
          return x;
        }
        case ExprKind::SetEnum: {
          if (s->args.empty()) {
            alpha("set-enum", {build::boolean(false)});
            return x;
          }
          ExprPtr acc = build::eq(t, s->args.back());
          for (std::size_t i = s->args.size() - 1; i-- > 0;) acc = build::disj(build::eq(t, s->args[i]), acc);
          alpha("set-enum", {acc});
          return x;
        }
        default:
          return x;
      }
    }
    case ExprKind::Subseteq:
      alpha("subseteq", {membership_universal(e.arg(0), e.arg(1))});
      return x;
    case ExprKind::Eq:
      if (is_set_constructor(*e.arg(0)) && is_set_constructor(*e.arg(1))) {
        std::string v;
        ExprPtr xv = fresh_bound("x", {e.arg(0), e.arg(1)}, v);
        alpha("ext", {build::forall({Binder{v, nullptr}},
                                    build::equiv(build::in(xv, e.arg(0)), build::in(xv, e.arg(1))))});
      }
      return x;
    case ExprKind::Not:
      break;
    default:
      return x;
  }

  const ExprPtr& g = e.arg(0);
  switch (g->kind) {
    case ExprKind::Or:
      alpha("not-or", {negate(g->arg(0)), negate(g->arg(1))});
      return x;
    case ExprKind::Implies:
      alpha("not-implies", {g->arg(0), negate(g->arg(1))});
      return x;
    case ExprKind::And:
      beta("not-and", {negate(g->arg(0))}, {negate(g->arg(1))});
      return x;
    case ExprKind::Equiv:
      beta("not-equiv", {g->arg(0), negate(g->arg(1))}, {negate(g->arg(0)), g->arg(1)});
      return x;
    case ExprKind::Forall:
      x.rule = "delta";
      x.shape = Shape::Delta;
      return x;
    case ExprKind::Exists:
      x.rule = "gamma";
      x.shape = Shape::Gamma;
      return x;
    case ExprKind::In: {
      const ExprPtr& t = g->arg(0);
      const ExprPtr& s = g->arg(1);
      switch (s->kind) {
        case ExprKind::SetFilter:
          beta("not-subset-of", {negate(build::in(t, s->binders[0].domain))},
               {negate(substitute(s->body(), s->binders[0].name, t))});
          return x;
        case ExprKind::SetMap: {
          Expansion pos = classify(build::in(t, s));
          alpha("not-set-of-all", {negate(pos.out.front())});
          return x;
        }
        case ExprKind::Powerset:
          alpha("not-powerset", {negate(build::subseteq(t, s->arg(0)))});
          return x;
        case ExprKind::SetEnum: {
          std::vector<ExprPtr> out;
          for (const auto& a : s->args) out.push_back(negate(build::eq(t, a)));
          if (!out.empty()) alpha("not-set-enum", out);
          return x;
        }
        default:
          return x;
      }
    }
    case ExprKind::Subseteq:
      alpha("not-subseteq", {negate(membership_universal(g->arg(0), g->arg(1)))});
      return x;
    case ExprKind::Eq:
      if (is_set_constructor(*g->arg(0)) && is_set_constructor(*g->arg(1))) {
        std::string v;
        ExprPtr xv = fresh_bound("x", {g->arg(0), g->arg(1)}, v);
        alpha("not-ext", {negate(build::forall(
                             {Binder{v, nullptr}},
                             build::equiv(build::in(xv, g->arg(0)), build::in(xv, g->arg(1)))))});
      }
      return x;
    default:
      return x;
  }
}

// Instance of a gamma or delta formula: Q x : P  or  ~(Q x : P).
ExprPtr instantiate(const ExprPtr& f, const ExprPtr& term) {
  if (f->kind == ExprKind::Not) {
    const ExprPtr& q = f->arg(0);
    return normalize(build::negate(substitute(q->body(), q->binders[0].name, term)));
  }
  return normalize(substitute(f->body(), f->binders[0].name, term));
}

class Search {
 public:
  Search(const Budget& b, std::set<std::string> names,
         std::chrono::steady_clock::time_point deadline)
      : budget_(b), names_(std::move(names)), deadline_(deadline) {}

  long nodes = 0;
  bool budget_hit = false;
  std::vector<TraceLine> trace;

  bool run(const std::vector<ExprPtr>& initial, int level) {
    level_ = level;
    budget_hit = false;
    trace.clear();
    counters_ = Counters{};
    bindings_.clear();
    trail_.clear();
    resolved_.clear();
    Branch root;
    for (const auto& f : initial) {
      Entry en{counters_.next_formula++, f};
      TraceLine line;
      line.kind = TraceLine::Kind::Init;
      line.out.push_back({en.id, f});
      trace.push_back(std::move(line));
      root.keys.insert(canonical_key(f));
      root.fs.push_back(std::move(en));
    }
    return solve(root, [] { return true; });
  }

  // Applies the final substitution and names leftover variables.
  void ground_trace() {
    std::set<std::string> avoid = names_;
    std::map<std::string, ExprPtr> constants;
    auto ground = [&](ExprPtr& e) {
      if (!e) return;
      e = resolve(e);
      std::vector<std::string> vars;
      collect_vars(e, vars);
      for (const auto& v : vars) {
        if (!constants.count(v)) {
          for (const auto& line : trace)
            for (const auto& [id, f] : line.out) collect_identifiers(f, avoid);
          std::string c = fresh_name("c", avoid);
          avoid.insert(c);
          constants[v] = build::ident(c);
        }
      }
      if (!vars.empty()) e = substitute(e, constants);
    };
    for (auto& line : trace) {
      ground(line.term);
      for (auto& [id, f] : line.out) ground(f);
      for (auto& [id, f] : line.right_out) ground(f);
    }
  }

 private:
  // -- substitution -------------------------------------------------------

  const std::map<std::string, ExprPtr>& full_map() {
    if (resolved_valid_) return resolved_;
    resolved_.clear();
    std::function<ExprPtr(const std::string&)> value = [&](const std::string& v) -> ExprPtr {
      auto done = resolved_.find(v);
      if (done != resolved_.end()) return done->second;
      ExprPtr t = bindings_.at(v);
      std::vector<std::string> vars;
      collect_vars(t, vars);
      std::map<std::string, ExprPtr> sub;
      for (const auto& w : vars)
        if (bindings_.count(w)) sub[w] = value(w);
      if (!sub.empty()) t = substitute(t, sub);
      resolved_[v] = t;
      return t;
    };
    for (const auto& [v, t] : bindings_) value(v);
    resolved_valid_ = true;
    return resolved_;
  }

  ExprPtr resolve(const ExprPtr& e) {
    if (bindings_.empty() || !mentions_var(e)) return e;
    return substitute(e, full_map());
  }

  void bind(const std::string& v, const ExprPtr& t) {
    bindings_[v] = t;
    trail_.push_back(v);
    resolved_valid_ = false;
  }

  void undo(std::size_t mark) {
    while (trail_.size() > mark) {
      bindings_.erase(trail_.back());
      trail_.pop_back();
    }
    resolved_valid_ = false;
  }

  ExprPtr walk(ExprPtr e) {
    while (is_var(e)) {
      auto it = bindings_.find(e->name);
      if (it == bindings_.end()) break;
      e = it->second;
    }
    return e;
  }

  bool occurs(const std::string& v, const ExprPtr& t) {
    ExprPtr r = resolve(t);
    std::vector<std::string> vars;
    collect_vars(r, vars);
    return std::find(vars.begin(), vars.end(), v) != vars.end();
  }

  bool mentions_any(const ExprPtr& t, const std::set<std::string>& names) {
    if (names.empty()) return false;
    for (const auto& id : free_identifiers(resolve(t)))
      if (names.count(id)) return true;
    return false;
  }

  // Syntactic unification up to renaming of bound names. Bound names of each
  // side are tracked so that variables never capture them.
  bool unify(ExprPtr a, ExprPtr b, std::vector<std::pair<std::string, std::string>>& scope) {
    a = walk(a);
    b = walk(b);
    std::set<std::string> left_bound, right_bound;
    for (const auto& [l, r] : scope) {
      left_bound.insert(l);
      right_bound.insert(r);
    }
    if (is_var(a) && is_var(b) && a->name == b->name) return true;
    if (is_var(a)) {
      if (occurs(a->name, b) || mentions_any(b, right_bound)) return false;
      bind(a->name, b);
      return true;
    }
    if (is_var(b)) {
      if (occurs(b->name, a) || mentions_any(a, left_bound)) return false;
      bind(b->name, a);
      return true;
    }
    if (a->kind != b->kind || a->value != b->value || a->args.size() != b->args.size() ||
        a->binders.size() != b->binders.size())
      return false;
    if (a->kind == ExprKind::Ident) {
      for (auto it = scope.rbegin(); it != scope.rend(); ++it) {
        bool la = it->first == a->name, rb = it->second == b->name;
        if (la || rb) return la && rb;
      }
      return a->name == b->name;
    }
    if (a->kind == ExprKind::Apply && a->name != b->name) return false;
    if (is_binding_form(a->kind)) {
      for (std::size_t i = 0; i < a->binders.size(); ++i) {
        const auto& da = a->binders[i].domain;
        const auto& db = b->binders[i].domain;
        if (!da != !db) return false;
        if (da && !unify(da, db, scope)) return false;
      }
      std::size_t depth = scope.size();
      for (std::size_t i = 0; i < a->binders.size(); ++i)
        scope.emplace_back(a->binders[i].name, b->binders[i].name);
      bool ok = unify(a->body(), b->body(), scope);
      scope.resize(depth);
      return ok;
    }
    for (std::size_t i = 0; i < a->args.size(); ++i)
      if (!unify(a->args[i], b->args[i], scope)) return false;
    return true;
  }

  bool unify(const ExprPtr& a, const ExprPtr& b) {
    std::vector<std::pair<std::string, std::string>> scope;
    return unify(a, b, scope);
  }

  // -- branch helpers -----------------------------------------------------

  void tick() {
    ++nodes;
    if ((nodes & 127) == 0 && std::chrono::steady_clock::now() > deadline_) throw Timeout{};
  }

  std::vector<std::pair<int, ExprPtr>> add(Branch& br, const std::vector<ExprPtr>& fs) {
    std::vector<std::pair<int, ExprPtr>> out;
    for (const auto& f : fs) {
      std::string key = canonical_key(resolve(f));
      if (!br.keys.insert(key).second) continue;
      Entry en{counters_.next_formula++, f};
      out.emplace_back(en.id, f);
      br.fs.push_back(std::move(en));
    }
    return out;
  }

  std::string skolem_name() {
    for (;;) {
      std::string n = "sk" + std::to_string(counters_.next_skolem++);
      if (!names_.count(n)) return n;
    }
  }

  std::string var_name() { return "?" + std::to_string(counters_.next_var++); }

  void saturate(Branch& br) {
    bool changed = true;
    while (changed && br.eager_added < kEagerCap) {
      changed = false;
      for (std::size_t i = 0; i < br.fs.size() && br.eager_added < kEagerCap; ++i) {
        if (br.expanded.count(br.fs[i].id)) continue;
        ExprPtr r = resolve(br.fs[i].f);
        Expansion x = classify(r);
        std::vector<ExprPtr> produced;
        ExprPtr term;
        if (x.shape == Shape::Alpha) {
          produced = x.out;
        } else if (x.shape == Shape::Delta) {
          std::vector<std::string> vars;
          collect_vars(r, vars);
          std::vector<ExprPtr> args;
          for (const auto& v : vars) args.push_back(build::ident(v));
          std::string sk = skolem_name();
          term = args.empty() ? build::ident(sk) : build::apply(sk, args);
          produced.push_back(instantiate(r, term));
        } else {
          continue;
        }
        br.expanded.insert(br.fs[i].id);
        TraceLine line;
        line.kind = TraceLine::Kind::Expand;
        line.rule = x.rule;
        line.branch = br.id;
        line.principal = br.fs[i].id;
        line.term = term;
        line.out = add(br, produced);
        br.eager_added += static_cast<int>(line.out.size());
        trace.push_back(std::move(line));
        changed = true;
      }
      if (!changed) changed = rewrite(br);
    }
  }

  // Bounded rewriting: an argument of a ground literal that is known to equal
  // a set constructor is replaced by it, once per equation, literal and slot.
  bool rewrite(Branch& br) {
    bool changed = false;
    for (std::size_t e = 0; e < br.fs.size(); ++e) {
      ExprPtr eq = resolve(br.fs[e].f);
      if (eq->kind != ExprKind::Eq || mentions_var(eq)) continue;
      for (int side = 0; side < 2; ++side) {
        const ExprPtr& from = eq->arg(static_cast<std::size_t>(side));
        const ExprPtr& to = eq->arg(static_cast<std::size_t>(1 - side));
        if (is_set_constructor(*from) || !is_set_constructor(*to)) continue;
        for (std::size_t i = 0; i < br.fs.size() && br.eager_added < kEagerCap; ++i) {
          if (i == e) continue;
          ExprPtr lit = resolve(br.fs[i].f);
          bool negated = lit->kind == ExprKind::Not;
          const ExprPtr& atom = negated ? lit->arg(0) : lit;
          if (!is_atom(*atom) || mentions_var(atom)) continue;
          for (std::size_t k = 0; k < atom->args.size(); ++k) {
            if (!alpha_equal(atom->args[k], from)) continue;
            std::string key = std::to_string(br.fs[e].id) + ":" + std::to_string(br.fs[i].id) + ":" +
                              std::to_string(k);
            if (!br.rewrites.insert(key).second) continue;
            std::vector<ExprPtr> args = atom->args;
            args[k] = to;
            ExprPtr out = build::with_parts(*atom, atom->binders, std::move(args));
            if (negated) out = build::negate(out);
            TraceLine line;
            line.kind = TraceLine::Kind::Expand;
            line.rule = "rewrite";
            line.branch = br.id;
            line.principal = br.fs[i].id;
            line.term = eq;
            line.out = add(br, {out});
            br.eager_added += static_cast<int>(line.out.size());
            trace.push_back(std::move(line));
            changed = true;
          }
        }
      }
    }
    return changed;
  }

  std::optional<TraceLine> ground_close(const Branch& br) {
    std::vector<std::pair<int, ExprPtr>> lits;
    lits.reserve(br.fs.size());
    for (const auto& en : br.fs) lits.emplace_back(en.id, resolve(en.f));

    auto close = [&](std::string rule, std::vector<int> ids, std::vector<int> eqs) {
      TraceLine line;
      line.kind = TraceLine::Kind::Close;
      line.rule = std::move(rule);
      line.branch = br.id;
      line.ids = std::move(ids);
      line.eqs = std::move(eqs);
      return line;
    };

    std::map<std::string, int> positive;
    for (const auto& [id, f] : lits) {
      if (f->kind == ExprKind::Bool && !f->value) return close("false", {id}, {});
      if (f->kind == ExprKind::Not && f->arg(0)->kind == ExprKind::Bool && f->arg(0)->value)
        return close("false", {id}, {});
      if (f->kind != ExprKind::Not) positive.emplace(canonical_key(f), id);
    }
    for (const auto& [id, f] : lits) {
      if (f->kind != ExprKind::Not) continue;
      auto it = positive.find(canonical_key(f->arg(0)));
      if (it != positive.end()) return close("complement", {it->second, id}, {});
      if (f->arg(0)->kind == ExprKind::Eq && alpha_equal(f->arg(0)->arg(0), f->arg(0)->arg(1)))
        return close("neq", {id}, {});
    }

    std::vector<int> eq_ids;
    Congruence cc;
    for (const auto& [id, f] : lits) {
      if (f->kind == ExprKind::Eq) {
        eq_ids.push_back(id);
        cc.merge(cc.add(f->arg(0)), cc.add(f->arg(1)));
      }
      const Expr& atom = f->kind == ExprKind::Not ? *f->arg(0) : *f;
      if (is_atom(atom))
        for (const auto& a : atom.args) cc.add(a);
    }
    if (eq_ids.empty()) return std::nullopt;
    cc.close();
    for (const auto& [id, f] : lits) {
      if (f->kind == ExprKind::Not && f->arg(0)->kind == ExprKind::Eq &&
          cc.same(f->arg(0)->arg(0), f->arg(0)->arg(1)))
        return close("neq", {id}, eq_ids);
    }
    for (const auto& [nid, nf] : lits) {
      if (nf->kind != ExprKind::Not || !is_atom(*nf->arg(0))) continue;
      const Expr& neg = *nf->arg(0);
      for (const auto& [pid, pf] : lits) {
        if (pf->kind == ExprKind::Not || !same_shape(*pf, neg)) continue;
        bool congruent = true;
        for (std::size_t i = 0; i < neg.args.size() && congruent; ++i)
          congruent = cc.same(pf->args[i], neg.args[i]);
        if (congruent) return close("complement", {pid, nid}, eq_ids);
      }
    }
    return std::nullopt;
  }

  // Closures that need new bindings: each is a choice point.
  template <class K>
  bool try_unifying_closures(const Branch& br, const K& k) {
    std::vector<std::pair<int, ExprPtr>> lits;
    for (const auto& en : br.fs) lits.emplace_back(en.id, resolve(en.f));
    bool any_var = false;
    for (const auto& [id, f] : lits) any_var = any_var || mentions_var(f);
    if (!any_var) return false;

    auto attempt = [&](std::vector<int> ids, const std::string& rule, const ExprPtr& a,
                       const ExprPtr& b) {
      std::size_t tmark = trace.size();
      std::size_t bmark = trail_.size();
      if (unify(a, b) && trail_.size() > bmark) {
        for (std::size_t i = bmark; i < trail_.size(); ++i) {
          TraceLine bl;
          bl.kind = TraceLine::Kind::Bind;
          bl.branch = br.id;
          bl.var = trail_[i];
          bl.term = bindings_.at(trail_[i]);
          trace.push_back(std::move(bl));
        }
        TraceLine line;
        line.kind = TraceLine::Kind::Close;
        line.rule = rule;
        line.branch = br.id;
        line.ids = std::move(ids);
        trace.push_back(std::move(line));
        if (k()) return true;
      }
      trace.resize(tmark);
      undo(bmark);
      return false;
    };

    for (const auto& [nid, nf] : lits) {
      if (nf->kind != ExprKind::Not) continue;
      const ExprPtr& neg = nf->arg(0);
      if (neg->kind == ExprKind::Eq && mentions_var(neg) &&
          attempt({nid}, "neq", neg->arg(0), neg->arg(1)))
        return true;
      for (const auto& [pid, pf] : lits) {
        if (pf->kind == ExprKind::Not || pf->kind != neg->kind) continue;
        if (!mentions_var(pf) && !mentions_var(neg)) continue;
        if (attempt({pid, nid}, "complement", pf, neg)) return true;
      }
    }
    return false;
  }

  // Unbound variables standing where a set rule would fire once bound.
  std::vector<std::string> stuck_vars(const Branch& br) {
    std::vector<std::string> out;
    auto note = [&](const ExprPtr& t) {
      ExprPtr w = walk(t);
      if (is_var(w) && std::find(out.begin(), out.end(), w->name) == out.end())
        out.push_back(w->name);
    };
    for (const auto& en : br.fs) {
      ExprPtr f = resolve(en.f);
      const ExprPtr& a = f->kind == ExprKind::Not ? f->arg(0) : f;
      if (a->kind == ExprKind::In) note(a->arg(1));
      if (a->kind == ExprKind::Subseteq) {
        note(a->arg(0));
        note(a->arg(1));
      }
    }
    return out;
  }

  std::vector<ExprPtr> pool(const Branch& br) {
    std::vector<ExprPtr> out;
    std::set<std::string> seen;
    std::function<void(const ExprPtr&, bool)> visit = [&](const ExprPtr& e, bool term_position) {
      if (out.size() >= kPoolCap) return;
      if (term_position && !mentions_var(e) && is_set_constructor(*e) &&
          free_identifiers(e).size() > 0 && seen.insert(canonical_key(e)).second)
        out.push_back(e);
      if (is_binding_form(e->kind)) {
        for (const auto& b : e->binders)
          if (b.domain) visit(b.domain, true);
        return;
      }
      bool args_are_terms = e->kind == ExprKind::In || e->kind == ExprKind::Eq ||
                            e->kind == ExprKind::Subseteq || e->kind == ExprKind::Apply ||
                            e->kind == ExprKind::FcnApply || term_position;
      for (const auto& a : e->args) visit(a, args_are_terms);
    };
    for (const auto& en : br.fs) visit(resolve(en.f), false);
    for (const auto& en : br.fs) {
      ExprPtr f = resolve(en.f);
      const ExprPtr& a = f->kind == ExprKind::Not ? f->arg(0) : f;
      if (a->kind == ExprKind::In && a->arg(1)->kind == ExprKind::Ident && !is_var(a->arg(1)) &&
          seen.insert(canonical_key(a->arg(1))).second && out.size() < kPoolCap)
        out.push_back(a->arg(1));
    }
    return out;
  }

  // -- the search ---------------------------------------------------------

  bool solve(Branch br, const std::function<bool()>& k) {
    tick();
    const std::size_t tmark = trace.size();
    const std::size_t bmark = trail_.size();
    const Counters saved = counters_;
    auto fail = [&] {
      trace.resize(tmark);
      undo(bmark);
      counters_ = saved;
      return false;
    };

    saturate(br);

    if (auto c = ground_close(br)) {
      trace.push_back(std::move(*c));
      if (k()) return true;
      return fail();
    }
    if (try_unifying_closures(br, k)) return true;

    for (const auto& en : br.fs) {
      if (br.expanded.count(en.id)) continue;
      Expansion x = classify(resolve(en.f));
      if (x.shape != Shape::Beta) continue;
      br.expanded.insert(en.id);
      Branch left = br;
      Branch right = br;
      left.id = counters_.next_branch++;
      right.id = counters_.next_branch++;
      TraceLine line;
      line.kind = TraceLine::Kind::Split;
      line.rule = x.rule;
      line.branch = br.id;
      line.principal = en.id;
      line.left = left.id;
      line.right = right.id;
      line.out = add(left, x.out);
      line.right_out = add(right, x.right);
      trace.push_back(std::move(line));
      if (solve(std::move(left), [&] { return solve(right, k); })) return true;
      return fail();
    }

    if (br.used >= level_) {
      budget_hit = true;
      return fail();
    }

    // Gamma on the least-used universal still under the reuse cap.
    const Entry* pick = nullptr;
    int least = budget_.gamma_reuse;
    for (const auto& en : br.fs) {
      ExprPtr r = resolve(en.f);
      if (classify(r).shape != Shape::Gamma) continue;
      int uses = br.gamma_uses.count(en.id) ? br.gamma_uses.at(en.id) : 0;
      if (uses < least) {
        least = uses;
        pick = &en;
      }
    }
    if (pick) {
      const std::size_t gmark = trace.size();
      Branch g = br;
      g.used++;
      g.gamma_uses[pick->id]++;
      ExprPtr var = build::ident(var_name());
      TraceLine line;
      line.kind = TraceLine::Kind::Expand;
      line.rule = "gamma";
      line.branch = br.id;
      line.principal = pick->id;
      line.term = var;
      line.out = add(g, {instantiate(resolve(pick->f), var)});
      trace.push_back(std::move(line));
      if (solve(std::move(g), k)) return true;
      trace.resize(gmark);
    } else {
      bool capped = false;
      for (const auto& en : br.fs)
        capped = capped || classify(resolve(en.f)).shape == Shape::Gamma;
      if (capped) budget_hit = true;
    }

    // Fallback: guess a value for a variable that blocks a set rule.
    std::vector<std::string> vars = stuck_vars(br);
    if (!vars.empty()) {
      std::vector<ExprPtr> terms = pool(br);
      for (const auto& v : vars) {
        for (const auto& t : terms) {
          if (occurs(v, t)) continue;
          const std::size_t fmark = trace.size();
          const std::size_t fb = trail_.size();
          bind(v, t);
          TraceLine bl;
          bl.kind = TraceLine::Kind::Bind;
          bl.branch = br.id;
          bl.var = v;
          bl.term = t;
          trace.push_back(std::move(bl));
          Branch g = br;
          g.used++;
          if (solve(std::move(g), k)) return true;
          trace.resize(fmark);
          undo(fb);
        }
      }
    }
    return fail();
  }

  Budget budget_;
  std::set<std::string> names_;
  std::chrono::steady_clock::time_point deadline_;
  int level_ = 0;
  Counters counters_;
  std::map<std::string, ExprPtr> bindings_;
  std::vector<std::string> trail_;
  std::map<std::string, ExprPtr> resolved_;
  bool resolved_valid_ = false;
};

int proof_depth(const Trace& t) {
  std::map<int, int> parent{{0, -1}};
  std::map<int, int> steps;
  for (const auto& line : t.lines) {
    if (line.kind == TraceLine::Kind::Expand || line.kind == TraceLine::Kind::Split)
      steps[line.branch]++;
    if (line.kind == TraceLine::Kind::Split) {
      parent[line.left] = line.branch;
      parent[line.right] = line.branch;
    }
  }
  int best = 0;
  for (const auto& [b, p] : parent) {
    int total = 0;
    for (int cur = b; cur != -1; cur = parent.count(cur) ? parent.at(cur) : -1) total += steps[cur];
    best = std::max(best, total);
  }
  return best + 1;
}

}  // namespace

std::vector<ExprPtr> initial_formulas(const Sequent& s) {
  std::vector<ExprPtr> out;
  for (const auto& h : s.hypotheses) out.push_back(normalize(h));
  out.push_back(normalize(build::negate(s.goal)));
  return out;
}

ProverOutcome prove(const Sequent& s, const Budget& b) {
  ProverOutcome out;
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return static_cast<long>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - start)
                                 .count());
  };
  try {
    check_scoped(s);
  } catch (const MalformedSequent& e) {
    out.status = ProverOutcome::Status::Malformed;
    out.reason = e.what();
    return out;
  }
  if (b.max_depth < 0 || b.timeout_ms <= 0 || b.gamma_reuse <= 0) {
    out.status = ProverOutcome::Status::Malformed;
    out.reason = "budget values must be positive";
    return out;
  }

  std::set<std::string> names(s.signature.begin(), s.signature.end());
  for (const auto& h : s.hypotheses) collect_identifiers(h, names);
  collect_identifiers(s.goal, names);

  std::vector<ExprPtr> initial = initial_formulas(s);
  Search search(b, names, start + std::chrono::milliseconds(b.timeout_ms));
  out.reason = "search space exhausted";
  try {
    for (int level = 0; level <= b.max_depth; ++level) {
      out.stats.levels_tried = level + 1;
      if (search.run(initial, level)) {
        search.ground_trace();
        out.status = ProverOutcome::Status::Proved;
        out.trace.lines = search.trace;
        out.depth = proof_depth(out.trace);
        out.reason.clear();
        break;
      }
      if (!search.budget_hit) break;
      out.reason = "depth budget exhausted";
    }
  } catch (const Timeout&) {
    out.reason = "timeout after " + std::to_string(b.timeout_ms) + " ms";
  }
  out.stats.nodes = search.nodes;
  out.stats.millis = elapsed();
  return out;
}

ProverOutcome prove(const Obligation& o, const Budget& b) {
  try {
    return prove(make_sequent(o), b);
  } catch (const MalformedSequent& e) {
    ProverOutcome out;
    out.status = ProverOutcome::Status::Malformed;
    out.reason = e.what();
    return out;
  }
}

}  // namespace stepwise
