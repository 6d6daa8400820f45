#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "stepwise/prover.hpp"
#include "stepwise/surface.hpp"

namespace stepwise {

// ---------------------------------------------------------------------------
// Text form

namespace {

std::string join_ids(const std::vector<int>& ids) {
  if (ids.empty()) return "-";
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) out += (i ? "," : "") + std::to_string(ids[i]);
  return out;
}

void put_formulas(std::ostringstream& os, const std::vector<std::pair<int, ExprPtr>>& fs) {
  for (const auto& [id, f] : fs) os << '\t' << id << '=' << to_string(f);
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, '\t')) out.push_back(field);
  if (!line.empty() && line.back() == '\t') out.emplace_back();
  return out;
}

int to_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad " + what + ": '" + s + "'");
  }
}

std::vector<int> to_ids(const std::string& s) {
  std::vector<int> out;
  if (s == "-") return out;
  std::istringstream is(s);
  std::string part;
  while (std::getline(is, part, ',')) out.push_back(to_int(part, "formula id"));
  return out;
}

ExprPtr to_formula(const std::string& s) {
  try {
    return parse_expression(s);
  } catch (const std::exception& e) {
    throw std::invalid_argument("bad formula '" + s + "': " + e.what());
  }
}

std::pair<int, ExprPtr> to_numbered(const std::string& field) {
  auto eq = field.find('=');
  if (eq == std::string::npos) throw std::invalid_argument("expected id=formula, got '" + field + "'");
  return {to_int(field.substr(0, eq), "formula id"), to_formula(field.substr(eq + 1))};
}

}  // namespace

std::string Trace::to_text() const {
  std::ostringstream os;
  for (const auto& l : lines) {
    switch (l.kind) {
      case TraceLine::Kind::Init:
        os << "init\t" << l.out.at(0).first << '\t' << to_string(l.out.at(0).second);
        break;
      case TraceLine::Kind::Expand:
        os << "expand\t" << l.rule << '\t' << l.branch << '\t' << l.principal << '\t'
           << (l.term ? to_string(l.term) : "-");
        put_formulas(os, l.out);
        break;
      case TraceLine::Kind::Split:
        os << "split\t" << l.rule << '\t' << l.branch << '\t' << l.principal << "\tL" << l.left;
        put_formulas(os, l.out);
        os << "\tR" << l.right;
        put_formulas(os, l.right_out);
        break;
      case TraceLine::Kind::Close:
        os << "close\t" << l.rule << '\t' << l.branch << '\t' << join_ids(l.ids) << '\t'
           << join_ids(l.eqs);
        break;
      case TraceLine::Kind::Bind:
        os << "bind\t" << l.branch << '\t' << l.var << '\t' << to_string(l.term);
        break;
    }
    os << '\n';
  }
  return os.str();
}

Trace Trace::parse(const std::string& text) {
  Trace t;
  std::istringstream is(text);
  std::string raw;
  int number = 0;
  while (std::getline(is, raw)) {
    ++number;
    if (raw.empty()) continue;
    auto f = split_tabs(raw);
    auto need = [&](std::size_t n) {
      if (f.size() < n)
        throw std::invalid_argument("line " + std::to_string(number) + ": too few fields");
    };
    TraceLine l;
    try {
      const std::string& tag = f.at(0);
      if (tag == "init") {
        need(3);
        l.kind = TraceLine::Kind::Init;
        l.out.emplace_back(to_int(f[1], "formula id"), to_formula(f[2]));
      } else if (tag == "expand") {
        need(5);
        l.kind = TraceLine::Kind::Expand;
        l.rule = f[1];
        l.branch = to_int(f[2], "branch");
        l.principal = to_int(f[3], "principal");
        if (f[4] != "-") l.term = to_formula(f[4]);
        for (std::size_t i = 5; i < f.size(); ++i) l.out.push_back(to_numbered(f[i]));
      } else if (tag == "split") {
        need(6);
        l.kind = TraceLine::Kind::Split;
        l.rule = f[1];
        l.branch = to_int(f[2], "branch");
        l.principal = to_int(f[3], "principal");
        if (f[4].empty() || f[4][0] != 'L') throw std::invalid_argument("expected L<branch>");
        l.left = to_int(f[4].substr(1), "branch");
        std::size_t i = 5;
        for (; i < f.size() && !(f[i].size() > 1 && f[i][0] == 'R'); ++i) l.out.push_back(to_numbered(f[i]));
        if (i == f.size()) throw std::invalid_argument("expected R<branch>");
        l.right = to_int(f[i].substr(1), "branch");
        for (++i; i < f.size(); ++i) l.right_out.push_back(to_numbered(f[i]));
      } else if (tag == "close") {
        need(5);
        l.kind = TraceLine::Kind::Close;
        l.rule = f[1];
        l.branch = to_int(f[2], "branch");
        l.ids = to_ids(f[3]);
        l.eqs = to_ids(f[4]);
      } else if (tag == "bind") {
        need(4);
        l.kind = TraceLine::Kind::Bind;
        l.branch = to_int(f[1], "branch");
        l.var = f[2];
        l.term = to_formula(f[3]);
      } else {
        throw std::invalid_argument("unknown line kind '" + tag + "'");
      }
    } catch (const std::invalid_argument& e) {
      std::string msg = e.what();
      if (msg.rfind("line ", 0) == 0) throw;
      throw std::invalid_argument("line " + std::to_string(number) + ": " + msg);
    }
    t.lines.push_back(std::move(l));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Replay

namespace {

struct Reject {
  std::string why;
};

[[noreturn]] void reject(std::string why) { throw Reject{std::move(why)}; }

using E = ExprPtr;
using K = ExprKind;

E neg(const E& e) { return build::negate(e); }

bool is(const E& e, K k) { return e && e->kind == k; }
bool is_not(const E& e, K k) { return is(e, K::Not) && is(e->arg(0), k); }

// A conclusion of a one-premise rule, before normalization.
struct Conclusions {
  std::vector<E> left;
  std::vector<E> right;  // only for branching rules
};

E bound_var_for(const std::vector<E>& near) {
  std::set<std::string> used;
  for (const auto& e : near) collect_identifiers(e, used);
  return build::ident(fresh_name("y", used, true));
}

E every_member(const E& a, const E& b, bool two_way) {
  E y = bound_var_for({a, b});
  E l = build::in(y, a), r = build::in(y, b);
  return build::forall({Binder{y->name, nullptr}}, two_way ? build::equiv(l, r) : build::implies(l, r));
}

E image_membership(const E& t, const E& set) {
  // t \in {d : x1 \in S1, ...}  iff  \E x1 \in S1, ... : t = d, binders kept clear of t.
  std::set<std::string> clash = free_identifiers(t);
  std::set<std::string> used = clash;
  collect_identifiers(set, used);
  std::vector<Binder> bs;
  std::map<std::string, E> ren;
  for (auto b : set->binders) {
    if (clash.count(b.name)) {
      std::string n = fresh_name(b.name, used);
      used.insert(n);
      ren[b.name] = build::ident(n);
      b.name = n;
    }
    bs.push_back(b);
  }
  return build::exists(bs, build::eq(t, ren.empty() ? set->body() : substitute(set->body(), ren)));
}

E enum_membership(const E& t, const E& set) {
  if (set->args.empty()) return build::boolean(false);
  E out;
  for (auto it = set->args.rbegin(); it != set->args.rend(); ++it)
    out = out ? build::disj(build::eq(t, *it), out) : build::eq(t, *it);
  return out;
}

Conclusions conclude(const std::string& rule, const E& p, const E& term) {
  auto bad = [&] { reject("rule " + rule + " does not apply to " + to_string(p)); };
  Conclusions c;
  const E inner = is(p, K::Not) ? p->arg(0) : nullptr;

  if (rule == "and") {
    if (!is(p, K::And)) bad();
    c.left = {p->arg(0), p->arg(1)};
  } else if (rule == "not-or") {
    if (!is_not(p, K::Or)) bad();
    c.left = {neg(inner->arg(0)), neg(inner->arg(1))};
  } else if (rule == "not-implies") {
    if (!is_not(p, K::Implies)) bad();
    c.left = {inner->arg(0), neg(inner->arg(1))};
  } else if (rule == "or") {
    if (!is(p, K::Or)) bad();
    c.left = {p->arg(0)};
    c.right = {p->arg(1)};
  } else if (rule == "not-and") {
    if (!is_not(p, K::And)) bad();
    c.left = {neg(inner->arg(0))};
    c.right = {neg(inner->arg(1))};
  } else if (rule == "implies") {
    if (!is(p, K::Implies)) bad();
    c.left = {neg(p->arg(0))};
    c.right = {p->arg(1)};
  } else if (rule == "equiv") {
    if (!is(p, K::Equiv)) bad();
    c.left = {p->arg(0), p->arg(1)};
    c.right = {neg(p->arg(0)), neg(p->arg(1))};
  } else if (rule == "not-equiv") {
    if (!is_not(p, K::Equiv)) bad();
    c.left = {inner->arg(0), neg(inner->arg(1))};
    c.right = {neg(inner->arg(0)), inner->arg(1)};
  } else if (rule == "gamma" || rule == "delta") {
    bool universal = rule == "gamma";
    E q;
    bool negated = false;
    if (is(p, universal ? K::Forall : K::Exists)) {
      q = p;
    } else if (is_not(p, universal ? K::Exists : K::Forall)) {
      q = inner;
      negated = true;
    } else {
      bad();
    }
    if (!term) reject(rule + " needs a term");
    if (q->binders.size() != 1 || q->binders[0].domain) reject("quantifier not in normal form");
    E body = substitute(q->body(), q->binders[0].name, term);
    c.left = {negated ? neg(body) : body};
  } else if (rule == "subset-of" || rule == "not-subset-of") {
    bool positive = rule == "subset-of";
    E m = positive ? p : inner;
    if (!is(m, K::In) || (!positive && !is(p, K::Not)) || !is(m->arg(1), K::SetFilter)) bad();
    const E& s = m->arg(1);
    E in_dom = build::in(m->arg(0), s->binders[0].domain);
    E holds = substitute(s->body(), s->binders[0].name, m->arg(0));
    if (positive) {
      c.left = {in_dom, holds};
    } else {
      c.left = {neg(in_dom)};
      c.right = {neg(holds)};
    }
  } else if (rule == "set-of-all" || rule == "not-set-of-all") {
    bool positive = rule == "set-of-all";
    E m = positive ? p : inner;
    if (!is(m, K::In) || (!positive && !is(p, K::Not)) || !is(m->arg(1), K::SetMap)) bad();
    E ex = image_membership(m->arg(0), m->arg(1));
    c.left = {positive ? ex : neg(ex)};
  } else if (rule == "powerset" || rule == "not-powerset") {
    bool positive = rule == "powerset";
    E m = positive ? p : inner;
    if (!is(m, K::In) || (!positive && !is(p, K::Not)) || !is(m->arg(1), K::Powerset)) bad();
    E sub = build::subseteq(m->arg(0), m->arg(1)->arg(0));
    c.left = {positive ? sub : neg(sub)};
  } else if (rule == "subseteq" || rule == "not-subseteq") {
    bool positive = rule == "subseteq";
    E m = positive ? p : inner;
    if (!is(m, K::Subseteq) || (!positive && !is(p, K::Not))) bad();
    E all = every_member(m->arg(0), m->arg(1), false);
    c.left = {positive ? all : neg(all)};
  } else if (rule == "fun-space") {
    if (!is(p, K::In) || !is(p->arg(1), K::FcnSpace)) bad();
    const E& f = p->arg(0);
    const E& space = p->arg(1);
    E y = bound_var_for({f, space});
    c.left = {build::forall({Binder{y->name, nullptr}},
                            build::implies(build::in(y, space->arg(0)),
                                           build::in(build::fcn_apply(f, y), space->arg(1))))};
  } else if (rule == "set-enum") {
    if (!is(p, K::In) || !is(p->arg(1), K::SetEnum)) bad();
    c.left = {enum_membership(p->arg(0), p->arg(1))};
  } else if (rule == "not-set-enum") {
    if (!is_not(p, K::In) || !is(inner->arg(1), K::SetEnum)) bad();
    for (const auto& a : inner->arg(1)->args) c.left.push_back(neg(build::eq(inner->arg(0), a)));
  } else if (rule == "ext" || rule == "not-ext") {
    bool positive = rule == "ext";
    E m = positive ? p : inner;
    if (!is(m, K::Eq) || (!positive && !is(p, K::Not)) || !is_set_constructor(*m->arg(0)) ||
        !is_set_constructor(*m->arg(1)))
      bad();
    E all = every_member(m->arg(0), m->arg(1), true);
    c.left = {positive ? all : neg(all)};
  } else {
    reject("unknown rule '" + rule + "'");
  }
  for (auto& e : c.left) e = normalize(e);
  for (auto& e : c.right) e = normalize(e);
  return c;
}

void require_subset(const std::vector<std::pair<int, E>>& produced, const std::vector<E>& allowed,
                    const std::string& rule) {
  for (const auto& [id, f] : produced) {
    bool found = std::any_of(allowed.begin(), allowed.end(), [&](const E& a) { return alpha_equal(a, f); });
    if (!found) reject("formula " + std::to_string(id) + " (" + to_string(f) + ") is not a conclusion of " + rule);
  }
}

// Equality reasoning used to validate closures: a term graph where each
// class points to a representative, merged to a fixpoint under congruence.
class EqualityOracle {
 public:
  explicit EqualityOracle(const std::vector<E>& equations) {
    for (const auto& e : equations) {
      intern(e->arg(0));
      intern(e->arg(1));
    }
    for (const auto& e : equations) unite(key(e->arg(0)), key(e->arg(1)));
    propagate();
  }

  bool equal(const E& a, const E& b) {
    if (canonical_key(a) == canonical_key(b)) return true;
    intern(a);
    intern(b);
    propagate();
    return rep(key(a)) == rep(key(b));
  }

 private:
  static std::string key(const E& e) { return canonical_key(e); }

  static bool congruence_node(const E& e) {
    return is(e, K::Apply) || is(e, K::FcnApply) || is(e, K::Powerset) || is(e, K::FcnSpace) ||
           is(e, K::SetEnum);
  }

  void intern(const E& e) {
    std::string k = key(e);
    if (terms_.count(k)) return;
    terms_[k] = e;
    link_[k] = k;
    if (congruence_node(e))
      for (const auto& a : e->args) intern(a);
  }

  std::string rep(std::string k) {
    while (link_.at(k) != k) k = link_.at(k);
    return k;
  }

  void unite(const std::string& a, const std::string& b) {
    std::string ra = rep(a), rb = rep(b);
    if (ra != rb) link_[std::max(ra, rb)] = std::min(ra, rb);
  }

  std::string signature(const E& e) {
    std::string s = std::to_string(static_cast<int>(e->kind)) + "/" + e->name + "(";
    for (const auto& a : e->args) s += rep(key(a)) + ";";
    return s + ")";
  }

  void propagate() {
    for (;;) {
      std::map<std::string, std::string> seen;
      bool merged = false;
      for (const auto& [k, e] : terms_) {
        if (!congruence_node(e)) continue;
        auto [it, fresh] = seen.emplace(signature(e), k);
        if (!fresh && rep(it->second) != rep(k)) {
          unite(it->second, k);
          merged = true;
        }
      }
      if (!merged) return;
    }
  }

  std::map<std::string, E> terms_;
  std::map<std::string, std::string> link_;
};

bool predicate(const E& e) {
  return is(e, K::In) || is(e, K::Subseteq) || is(e, K::Apply) || is(e, K::Ident) ||
         is(e, K::FcnApply) || is(e, K::Eq);
}

void collect_heads(const E& e, std::set<std::string>& out) {
  if (is(e, K::Apply)) out.insert(e->name);
  if (is(e, K::Ident)) out.insert(e->name);
  for (const auto& b : e->binders)
    if (b.domain) collect_heads(b.domain, out);
  for (const auto& a : e->args) collect_heads(a, out);
}

class Replayer {
 public:
  explicit Replayer(const Sequent& s) {
    for (const auto& id : s.signature) root_symbols_.insert(id);
    for (const auto& h : s.hypotheses) collect_identifiers(h, root_symbols_);
    collect_identifiers(s.goal, root_symbols_);
    initial_ = initial_formulas(s);
    parent_[0] = -1;
  }

  void run(const Trace& t) {
    std::size_t i = 0;
    for (; i < t.lines.size() && t.lines[i].kind == TraceLine::Kind::Init; ++i) {
      const auto& [id, f] = t.lines[i].out.at(0);
      if (i >= initial_.size()) reject("more initial formulas than the sequent provides");
      if (id != static_cast<int>(i)) reject("initial formula ids must count up from 0");
      if (!alpha_equal(f, initial_[i])) reject("initial formula " + std::to_string(id) + " does not match the sequent");
      introduce(id, f, 0);
    }
    if (i != initial_.size()) reject("initial formulas missing");
    for (; i < t.lines.size(); ++i) {
      const auto& line = t.lines[i];
      switch (line.kind) {
        case TraceLine::Kind::Init:
          reject("initial formula after the first step");
        case TraceLine::Kind::Expand:
          expand(line);
          break;
        case TraceLine::Kind::Split:
          split(line);
          break;
        case TraceLine::Kind::Close:
          close(line);
          break;
        case TraceLine::Kind::Bind:
          open_branch(line.branch);
          break;
      }
    }
    for (const auto& [b, p] : parent_)
      if (!split_.count(b) && !closed_.count(b)) reject("branch " + std::to_string(b) + " is left open");
    check_witness_order();
  }

 private:
  void open_branch(int b) {
    if (!parent_.count(b)) reject("unknown branch " + std::to_string(b));
    if (split_.count(b)) reject("branch " + std::to_string(b) + " was already split");
    if (closed_.count(b)) reject("branch " + std::to_string(b) + " is already closed");
  }

  void introduce(int id, const E& f, int branch) {
    if (formulas_.count(id)) reject("formula id " + std::to_string(id) + " used twice");
    formulas_[id] = {f, branch};
  }

  const E& visible(int id, int branch) {
    auto it = formulas_.find(id);
    if (it == formulas_.end()) reject("unknown formula " + std::to_string(id));
    for (int b = branch; b != -1; b = parent_.at(b))
      if (b == it->second.second) return it->second.first;
    reject("formula " + std::to_string(id) + " is not on branch " + std::to_string(branch));
  }

  void expand(const TraceLine& l) {
    open_branch(l.branch);
    const E& p = visible(l.principal, l.branch);
    if (l.rule == "rewrite") {
      check_rewrite(l, p);
      for (const auto& [id, f] : l.out) introduce(id, f, l.branch);
      return;
    }
    if (l.rule == "delta") check_witness(p, l.term);
    Conclusions c = conclude(l.rule, p, l.term);
    if (!c.right.empty()) reject("rule " + l.rule + " branches; it cannot be used in an expand step");
    require_subset(l.out, c.left, l.rule);
    for (const auto& [id, f] : l.out) introduce(id, f, l.branch);
  }

  // Each produced literal must be the principal with some arguments swapped
  // for the other side of an equation that holds on the branch.
  void check_rewrite(const TraceLine& l, const E& p) {
    if (!is(l.term, K::Eq)) reject("rewrite needs an equation");
    bool on_branch = false;
    for (const auto& [id, entry] : formulas_) {
      if (!alpha_equal(entry.first, l.term)) continue;
      for (int b = l.branch; b != -1 && !on_branch; b = parent_.at(b)) on_branch = b == entry.second;
      if (on_branch) break;
    }
    if (!on_branch) reject("equation " + to_string(l.term) + " is not on branch " + std::to_string(l.branch));
    const E& lhs = l.term->arg(0);
    const E& rhs = l.term->arg(1);
    auto swapped = [&](const E& a, const E& b) {
      return (alpha_equal(a, lhs) && alpha_equal(b, rhs)) || (alpha_equal(a, rhs) && alpha_equal(b, lhs));
    };
    for (const auto& [id, f] : l.out) {
      bool negated = is(p, K::Not);
      const E& before = negated ? p->arg(0) : p;
      if (negated != is(f, K::Not)) reject("rewrite changed polarity");
      const E& after = negated ? f->arg(0) : f;
      bool ok = predicate(before) && before->kind == after->kind && before->name == after->name &&
                before->args.size() == after->args.size() && after->binders.empty();
      for (std::size_t i = 0; ok && i < before->args.size(); ++i)
        ok = alpha_equal(before->args[i], after->args[i]) || swapped(before->args[i], after->args[i]);
      if (!ok) reject("formula " + std::to_string(id) + " is not a rewrite of the principal");
    }
  }

  void split(const TraceLine& l) {
    open_branch(l.branch);
    const E& p = visible(l.principal, l.branch);
    Conclusions c = conclude(l.rule, p, nullptr);
    if (c.right.empty()) reject("rule " + l.rule + " does not branch");
    if (parent_.count(l.left) || parent_.count(l.right) || l.left == l.right)
      reject("split must open two new branches");
    require_subset(l.out, c.left, l.rule);
    require_subset(l.right_out, c.right, l.rule);
    parent_[l.left] = l.branch;
    parent_[l.right] = l.branch;
    split_.insert(l.branch);
    for (const auto& [id, f] : l.out) introduce(id, f, l.left);
    for (const auto& [id, f] : l.right_out) introduce(id, f, l.right);
  }

  void close(const TraceLine& l) {
    open_branch(l.branch);
    std::vector<E> eqs;
    for (int id : l.eqs) {
      const E& e = visible(id, l.branch);
      if (!is(e, K::Eq)) reject("formula " + std::to_string(id) + " is not an equation");
      eqs.push_back(e);
    }
    std::vector<E> fs;
    for (int id : l.ids) fs.push_back(visible(id, l.branch));
    if (l.rule == "false") {
      if (fs.size() != 1) reject("false closure takes one formula");
      const E& f = fs[0];
      bool ok = (is(f, K::Bool) && !f->value) || (is_not(f, K::Bool) && f->arg(0)->value);
      if (!ok) reject(to_string(f) + " is not false");
    } else if (l.rule == "neq") {
      if (fs.size() != 1 || !is_not(fs[0], K::Eq)) reject("neq closure needs one negated equation");
      EqualityOracle eq(eqs);
      if (!eq.equal(fs[0]->arg(0)->arg(0), fs[0]->arg(0)->arg(1)))
        reject("sides of " + to_string(fs[0]) + " are not provably equal");
    } else if (l.rule == "complement") {
      if (fs.size() != 2 || !is(fs[1], K::Not)) reject("complement closure needs a formula and a negation");
      const E& a = fs[0];
      const E& b = fs[1]->arg(0);
      if (!alpha_equal(a, b)) {
        bool ok = predicate(a) && a->kind == b->kind && a->name == b->name &&
                  a->args.size() == b->args.size() && a->binders.empty() && b->binders.empty();
        if (ok) {
          EqualityOracle eq(eqs);
          for (std::size_t i = 0; i < a->args.size() && ok; ++i) ok = eq.equal(a->args[i], b->args[i]);
        }
        if (!ok) reject(to_string(a) + " and " + to_string(fs[1]) + " do not clash");
      }
    } else {
      reject("unknown closure '" + l.rule + "'");
    }
    closed_.insert(l.branch);
  }

  // A witness must be a new symbol applied to anything; it may not occur in
  // the root sequent, in the formula it witnesses, or earlier as a witness.
  void check_witness(const E& p, const E& term) {
    if (!term || !(is(term, K::Ident) || is(term, K::Apply))) reject("delta needs a witness symbol");
    const std::string& head = term->name;
    if (root_symbols_.count(head)) reject("witness " + head + " occurs in the sequent");
    if (witness_deps_.count(head)) reject("witness " + head + " introduced twice");
    std::set<std::string> in_p;
    collect_heads(p, in_p);
    if (in_p.count(head)) reject("witness " + head + " occurs in its own formula");
    std::set<std::string> in_args;
    for (const auto& a : term->args) collect_heads(a, in_args);
    if (in_args.count(head)) reject("witness " + head + " occurs in its own arguments");
    in_p.insert(in_args.begin(), in_args.end());
    witness_deps_[head] = in_p;
  }

  void check_witness_order() {
    // No witness may (transitively) depend on itself.
    std::map<std::string, int> state;
    std::function<void(const std::string&)> visit = [&](const std::string& w) {
      state[w] = 1;
      for (const auto& d : witness_deps_.at(w)) {
        if (!witness_deps_.count(d)) continue;
        if (state[d] == 1) reject("witness " + w + " depends on itself");
        if (state[d] == 0) visit(d);
      }
      state[w] = 2;
    };
    for (const auto& [w, deps] : witness_deps_)
      if (state[w] == 0) visit(w);
  }

  std::set<std::string> root_symbols_;
  std::vector<E> initial_;
  std::map<int, std::pair<E, int>> formulas_;
  std::map<int, int> parent_;
  std::set<int> split_;
  std::set<int> closed_;
  std::map<std::string, std::set<std::string>> witness_deps_;
};

}  // namespace

TraceVerdict replay_trace(const Sequent& s, const Trace& t) {
  TraceVerdict v;
  try {
    Replayer r(s);
    r.run(t);
    v.ok = true;
  } catch (const Reject& e) {
    v.diagnostic = e.why;
  } catch (const std::exception& e) {
    v.diagnostic = e.what();
  }
  return v;
}

bool check_trace(const Sequent& s, const Trace& t) { return replay_trace(s, t).ok; }

}  // namespace stepwise
