#include <algorithm>
#include <functional>
#include <sstream>

#include "stepwise/meta.hpp"

namespace stepwise {

Definable Definable::lambda(std::vector<std::string> params, ExprPtr body) {
  Definable d;
  d.params = std::move(params);
  d.body = std::move(body);
  return d;
}

Definable Definable::of(ObligationPtr o) {
  Definable d;
  d.obligation = std::move(o);
  return d;
}

Assumption Assumption::declare(std::string name) {
  Assumption a;
  a.kind = Kind::New;
  a.name = std::move(name);
  return a;
}

Assumption Assumption::define(std::string name, Definable d, bool hidden) {
  Assumption a;
  a.kind = Kind::Def;
  a.name = std::move(name);
  a.def = std::move(d);
  a.hidden = hidden;
  return a;
}

Assumption Assumption::assume(ObligationPtr o, bool hidden) {
  Assumption a;
  a.kind = Kind::Fact;
  a.fact = std::move(o);
  a.hidden = hidden;
  return a;
}

Assumption Assumption::assume(ExprPtr e, bool hidden) { return assume(plain(std::move(e)), hidden); }

ObligationPtr make_obligation(Context c, ExprPtr goal) {
  return std::make_shared<const Obligation>(Obligation{std::move(c), std::move(goal)});
}

ObligationPtr plain(ExprPtr e) { return make_obligation({}, std::move(e)); }

bool is_plain(const Obligation& o) { return o.context.empty(); }

// ---------------------------------------------------------------------------
// Visibility

Context unhide(const Context& c) {
  Context out = c;
  for (auto& h : out) h.hidden = false;
  return out;
}

namespace {

Context set_def_visibility(const Context& c, const std::set<std::string>& names, bool hidden) {
  Context out = c;
  for (auto& h : out)
    if (h.kind == Assumption::Kind::Def && names.count(h.name)) h.hidden = hidden;
  return out;
}

}  // namespace

Context using_defs(const Context& c, const std::set<std::string>& names) {
  return set_def_visibility(c, names, false);
}

Context hiding_defs(const Context& c, const std::set<std::string>& names) {
  return set_def_visibility(c, names, true);
}

Context reflect_binders(const std::vector<Binder>& bs) {
  Context out;
  std::set<std::string> seen;
  for (const auto& b : bs) {
    if (!seen.insert(b.name).second) throw DuplicateBinder("binder " + b.name + " appears twice");
    out.push_back(Assumption::declare(b.name));
    if (b.domain) out.push_back(Assumption::assume(build::in(build::ident(b.name), b.domain)));
  }
  return out;
}

std::set<std::string> bound_names(const Context& c) {
  std::set<std::string> out;
  for (const auto& h : c)
    if (h.binds()) out.insert(h.name);
  return out;
}

bool is_bound(const Context& c, const std::string& name) {
  return std::any_of(c.begin(), c.end(), [&](const Assumption& h) { return h.binds() && h.name == name; });
}

// ---------------------------------------------------------------------------
// Filtration

Obligation filter(const Obligation& o) {
  Obligation out;
  out.goal = o.goal;
  for (const auto& h : o.context) {
    switch (h.kind) {
      case Assumption::Kind::New:
        out.context.push_back(h);
        break;
      case Assumption::Kind::Def:
        if (h.hidden) {
          out.context.push_back(Assumption::declare(h.name));
        } else if (h.def.is_obligation()) {
          out.context.push_back(Assumption::define(
              h.name, Definable::of(std::make_shared<const Obligation>(filter(*h.def.obligation)))));
        } else {
          out.context.push_back(h);
        }
        break;
      case Assumption::Kind::Fact:
        if (!h.hidden)
          out.context.push_back(
              Assumption::assume(std::make_shared<const Obligation>(filter(*h.fact))));
        break;
    }
  }
  return out;
}

bool has_hidden(const Obligation& o) {
  for (const auto& h : o.context) {
    if (h.hidden) return true;
    if (h.kind == Assumption::Kind::Fact && has_hidden(*h.fact)) return true;
    if (h.kind == Assumption::Kind::Def && h.def.is_obligation() && has_hidden(*h.def.obligation))
      return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Identifiers and well-formedness

namespace {

void all_identifiers(const Obligation& o, std::set<std::string>& out) {
  for (const auto& h : o.context) {
    if (h.binds()) out.insert(h.name);
    if (h.kind == Assumption::Kind::Fact) all_identifiers(*h.fact, out);
    if (h.kind == Assumption::Kind::Def) {
      if (h.def.is_obligation()) {
        all_identifiers(*h.def.obligation, out);
      } else {
        out.insert(h.def.params.begin(), h.def.params.end());
        collect_identifiers(h.def.body, out);
      }
    }
  }
  collect_identifiers(o.goal, out);
}

void free_ids(const Obligation& o, std::set<std::string> bound, std::set<std::string>& out) {
  auto add = [&](const std::set<std::string>& ids, const std::set<std::string>& extra) {
    for (const auto& id : ids)
      if (!bound.count(id) && !extra.count(id)) out.insert(id);
  };
  for (const auto& h : o.context) {
    switch (h.kind) {
      case Assumption::Kind::New:
        break;
      case Assumption::Kind::Def:
        if (h.def.is_obligation())
          free_ids(*h.def.obligation, bound, out);
        else
          add(free_identifiers(h.def.body),
              std::set<std::string>(h.def.params.begin(), h.def.params.end()));
        break;
      case Assumption::Kind::Fact:
        free_ids(*h.fact, bound, out);
        break;
    }
    if (h.binds()) bound.insert(h.name);
  }
  add(free_identifiers(o.goal), {});
}

void require_closed(const ExprPtr& e, const std::set<std::string>& scope,
                    const std::set<std::string>& extra) {
  for (const auto& id : free_identifiers(e))
    if (!scope.count(id) && !extra.count(id))
      throw NotWellFormed("identifier " + id + " is not bound in " + to_string(e));
}

}  // namespace

std::set<std::string> free_identifiers(const Obligation& o) {
  std::set<std::string> out;
  free_ids(o, {}, out);
  return out;
}

void check_well_formed(const Obligation& o, const std::set<std::string>& outer) {
  std::set<std::string> scope = outer;
  std::set<std::string> local;
  for (const auto& h : o.context) {
    if (h.kind == Assumption::Kind::Fact) {
      check_well_formed(*h.fact, scope);
      continue;
    }
    if (h.kind == Assumption::Kind::Def) {
      if (h.def.is_obligation()) {
        check_well_formed(*h.def.obligation, scope);
      } else {
        std::set<std::string> params;
        for (const auto& p : h.def.params)
          if (!params.insert(p).second)
            throw NotWellFormed("parameter " + p + " of " + h.name + " appears twice");
        require_closed(h.def.body, scope, params);
      }
    }
    if (!local.insert(h.name).second)
      throw NotWellFormed("identifier " + h.name + " is bound twice in one context");
    scope.insert(h.name);
  }
  require_closed(o.goal, scope, {});
}

bool is_well_formed(const Obligation& o) {
  try {
    check_well_formed(o);
    return true;
  } catch (const NotWellFormed&) {
    return false;
  }
}

// ---------------------------------------------------------------------------
// Rewriting through nested contexts

namespace {

struct Rewriter {
  std::string target;
  std::set<std::string> introduced;  // free identifiers the replacement brings in
  std::function<ExprPtr(const ExprPtr&)> on_expr;
  ObligationPtr inline_fact;  // a fact that is exactly `target` becomes this
};

Obligation rewrite(const Obligation& o, const Rewriter& rw);

Obligation rename(const Obligation& o, const std::string& from, const std::string& to) {
  ExprPtr repl = build::ident(to);
  Rewriter rw{from, {to}, [&](const ExprPtr& e) { return substitute(e, from, repl); }, nullptr};
  return rewrite(o, rw);
}

Definable rewrite_definable(const Definable& d, const Rewriter& rw) {
  if (d.is_obligation())
    return Definable::of(std::make_shared<const Obligation>(rewrite(*d.obligation, rw)));
  if (std::find(d.params.begin(), d.params.end(), rw.target) != d.params.end()) return d;
  std::vector<std::string> params = d.params;
  ExprPtr body = d.body;
  std::set<std::string> avoid = rw.introduced;
  collect_identifiers(body, avoid);
  avoid.insert(params.begin(), params.end());
  avoid.insert(rw.target);
  std::map<std::string, ExprPtr> renames;
  for (auto& p : params) {
    if (rw.introduced.count(p)) {
      std::string fresh = fresh_name(p, avoid);
      avoid.insert(fresh);
      renames[p] = build::ident(fresh);
      p = fresh;
    }
  }
  if (!renames.empty()) body = substitute(body, renames);
  return Definable::lambda(std::move(params), rw.on_expr(body));
}

Obligation rewrite(const Obligation& o, const Rewriter& rw) {
  Obligation out;
  Context rest = o.context;
  ExprPtr goal = o.goal;
  for (std::size_t i = 0; i < rest.size(); ++i) {
    Assumption h = rest[i];
    if (h.binds() && h.name == rw.target) {
      if (h.kind == Assumption::Kind::Def) h.def = rewrite_definable(h.def, rw);
      out.context.push_back(std::move(h));
      out.context.insert(out.context.end(), rest.begin() + static_cast<long>(i) + 1, rest.end());
      out.goal = goal;
      return out;
    }
    if (h.binds() && rw.introduced.count(h.name)) {
      std::set<std::string> avoid = rw.introduced;
      all_identifiers(o, avoid);
      avoid.insert(rw.target);
      std::string fresh = fresh_name(h.name, avoid);
      Obligation remainder{Context(rest.begin() + static_cast<long>(i) + 1, rest.end()), goal};
      remainder = rename(remainder, h.name, fresh);
      rest.resize(i + 1);
      rest.insert(rest.end(), remainder.context.begin(), remainder.context.end());
      goal = remainder.goal;
      // The definable of a renamed definition is scoped before its own name.
      h.name = fresh;
    }
    switch (h.kind) {
      case Assumption::Kind::New:
        break;
      case Assumption::Kind::Def:
        h.def = rewrite_definable(h.def, rw);
        break;
      case Assumption::Kind::Fact:
        if (rw.inline_fact && is_plain(*h.fact) && h.fact->goal->kind == ExprKind::Ident &&
            h.fact->goal->name == rw.target)
          h.fact = rw.inline_fact;
        else
          h.fact = std::make_shared<const Obligation>(rewrite(*h.fact, rw));
        break;
    }
    out.context.push_back(std::move(h));
  }
  out.goal = rw.on_expr(goal);
  return out;
}

std::size_t find_definition(const Context& c, const std::string& name) {
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c[i].kind == Assumption::Kind::Def && c[i].name == name) return i;
  throw UnknownOperator("no definition of " + name + " in the context");
}

}  // namespace

Obligation expand_definition(const Obligation& o, const std::string& name) {
  const std::size_t at = find_definition(o.context, name);
  const Definable& d = o.context[at].def;

  Rewriter rw;
  rw.target = name;
  if (d.is_obligation()) {
    ExprPtr formula = obligation_formula(*d.obligation);
    rw.introduced = free_identifiers(*d.obligation);
    rw.inline_fact = d.obligation;
    rw.on_expr = [name, formula](const ExprPtr& e) { return replace_constant(e, name, formula); };
  } else {
    rw.introduced = free_identifiers(d.body);
    for (const auto& p : d.params) rw.introduced.erase(p);
    auto params = d.params;
    auto body = d.body;
    rw.on_expr = [name, params, body](const ExprPtr& e) {
      return expand_operator(e, name, params, body);
    };
  }

  Obligation remainder{Context(o.context.begin() + static_cast<long>(at) + 1, o.context.end()),
                       o.goal};
  remainder = rewrite(remainder, rw);
  Obligation out;
  out.context.assign(o.context.begin(), o.context.begin() + static_cast<long>(at) + 1);
  out.context.insert(out.context.end(), remainder.context.begin(), remainder.context.end());
  out.goal = remainder.goal;
  return out;
}

namespace {

Obligation expand_definitions_where(const Obligation& o, bool include_hidden) {
  Obligation cur = o;
  std::size_t i = 0;
  while (i < cur.context.size()) {
    const Assumption& h = cur.context[i];
    if (h.kind == Assumption::Kind::Def && (include_hidden || !h.hidden)) {
      cur = expand_definition(cur, h.name);
      cur.context.erase(cur.context.begin() + static_cast<long>(i));
    } else {
      ++i;
    }
  }
  return cur;
}

}  // namespace

Obligation expand_all_definitions(const Obligation& o) { return expand_definitions_where(o, true); }

Obligation expand_usable_definitions(const Obligation& o) {
  return expand_definitions_where(o, false);
}

ExprPtr obligation_formula(const Obligation& o) {
  if (is_plain(o)) return o.goal;
  Obligation flat = expand_all_definitions(o);
  ExprPtr acc = flat.goal;
  for (auto it = flat.context.rbegin(); it != flat.context.rend(); ++it) {
    if (it->kind == Assumption::Kind::New)
      acc = build::forall({Binder{it->name, nullptr}}, acc);
    else
      acc = build::implies(obligation_formula(*it->fact), acc);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Comparison

namespace {

bool alpha_equal_definable(const Definable& a, const Definable& b) {
  if (a.is_obligation() != b.is_obligation()) return false;
  if (a.is_obligation()) return alpha_equal(*a.obligation, *b.obligation);
  if (a.params.size() != b.params.size()) return false;
  if (a.params == b.params) return alpha_equal(a.body, b.body);
  std::set<std::string> avoid(a.params.begin(), a.params.end());
  avoid.insert(b.params.begin(), b.params.end());
  collect_identifiers(a.body, avoid);
  collect_identifiers(b.body, avoid);
  std::map<std::string, ExprPtr> ra, rb;
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    std::string common = fresh_name(a.params[i], avoid);
    avoid.insert(common);
    ra[a.params[i]] = build::ident(common);
    rb[b.params[i]] = build::ident(common);
  }
  return alpha_equal(substitute(a.body, ra), substitute(b.body, rb));
}

// Renames the binder at position i throughout its scope (the rest of the
// context and the goal).
void rename_from(Obligation& o, std::size_t i, const std::string& to) {
  Obligation tail{Context(o.context.begin() + static_cast<long>(i) + 1, o.context.end()), o.goal};
  tail = rename(tail, o.context[i].name, to);
  o.context[i].name = to;
  o.context.resize(i + 1);
  o.context.insert(o.context.end(), tail.context.begin(), tail.context.end());
  o.goal = tail.goal;
}

}  // namespace

bool alpha_equal(const Obligation& a0, const Obligation& b0) {
  if (a0.context.size() != b0.context.size()) return false;
  Obligation a = a0, b = b0;
  for (std::size_t i = 0; i < a.context.size(); ++i) {
    const Assumption& x = a.context[i];
    const Assumption& y = b.context[i];
    if (x.kind != y.kind || x.hidden != y.hidden) return false;
    if (x.kind == Assumption::Kind::Def && !alpha_equal_definable(x.def, y.def)) return false;
    if (x.kind == Assumption::Kind::Fact && !alpha_equal(*x.fact, *y.fact)) return false;
    if (x.binds() && x.name != y.name) {
      std::set<std::string> avoid;
      all_identifiers(a, avoid);
      all_identifiers(b, avoid);
      std::string common = fresh_name(x.name, avoid);
      rename_from(a, i, common);
      rename_from(b, i, common);
    }
  }
  return alpha_equal(a.goal, b.goal);
}

// ---------------------------------------------------------------------------
// Embedding and printing

namespace {

std::string embed_unchecked(const Obligation& o);

std::string embed_definable(const Definable& d) {
  if (d.is_obligation()) return embed_unchecked(*d.obligation);
  if (d.params.empty()) return to_string(d.body);
  std::string out = "\\lambda";
  for (const auto& p : d.params) out += " " + p;
  return out + ". " + to_string(d.body);
}

std::string embed_unchecked(const Obligation& o) {
  std::string out;
  for (const auto& h : unhide(o.context)) {
    switch (h.kind) {
      case Assumption::Kind::New:
        out += "!!" + h.name + ". ";
        break;
      case Assumption::Kind::Def:
        out += "!!" + h.name + ". (" + h.name + " == " + embed_definable(h.def) + ") ==> ";
        break;
      case Assumption::Kind::Fact:
        out += "(" + embed_unchecked(*h.fact) + ") ==> ";
        break;
    }
  }
  return out + to_string(o.goal);
}

std::string nested(const Obligation& o) {
  return is_plain(o) ? to_string(o.goal) : "(" + to_string(o) + ")";
}

}  // namespace

std::string embed(const Obligation& o) {
  check_well_formed(o);
  return embed_unchecked(o);
}

std::string embed(const Definable& d) { return embed_definable(d); }

std::string to_string(const Definable& d) {
  if (d.is_obligation()) return nested(*d.obligation);
  if (d.params.empty()) return to_string(d.body);
  std::string out = "LAMBDA ";
  for (std::size_t i = 0; i < d.params.size(); ++i) out += (i ? ", " : "") + d.params[i];
  return out + " : " + to_string(d.body);
}

std::string to_string(const Assumption& a) {
  std::string body;
  switch (a.kind) {
    case Assumption::Kind::New:
      return "NEW " + a.name;
    case Assumption::Kind::Def:
      if (!a.def.is_obligation() && !a.def.params.empty()) {
        body = a.name + "(";
        for (std::size_t i = 0; i < a.def.params.size(); ++i)
          body += (i ? ", " : "") + a.def.params[i];
        body += ") == " + to_string(a.def.body);
      } else {
        body = a.name + " == " + to_string(a.def);
      }
      break;
    case Assumption::Kind::Fact:
      body = nested(*a.fact);
      break;
  }
  return a.hidden ? "[" + body + "]" : body;
}

std::string to_string(const Obligation& o) {
  if (is_plain(o)) return to_string(o.goal);
  std::string out;
  for (std::size_t i = 0; i < o.context.size(); ++i)
    out += (i ? ", " : "") + to_string(o.context[i]);
  return out + " |- " + to_string(o.goal);
}

std::string to_pretty_string(const Obligation& o) {
  std::ostringstream out;
  for (const auto& h : o.context) out << "  " << to_string(h) << '\n';
  out << "|- " << to_string(o.goal);
  return out.str();
}

}  // namespace stepwise
