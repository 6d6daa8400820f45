#include <sstream>

#include "stepwise/engine.hpp"

namespace stepwise {

namespace {

const std::pair<LeafKind, const char*> kLeafKindNames[] = {
    {LeafKind::ObviousGoal, "obvious-goal"},
    {LeafKind::ByGoal, "by-goal"},
    {LeafKind::UseFactSide, "use-fact-side"},
    {LeafKind::TakeSubsetSide, "take-subset-side"},
    {LeafKind::WitnessSubsetSide, "witness-subset-side"},
    {LeafKind::WitnessMembershipSide, "witness-membership-side"},
    {LeafKind::HaveSide, "have-side"},
    {LeafKind::PickExistence, "pick-existence"},
};

std::string describe_error(const std::string& path, SourcePos pos, const std::string& message) {
  std::ostringstream out;
  out << pos.line << ':' << pos.column << ": ";
  if (!path.empty()) out << "step " << path << ": ";
  out << message;
  return out.str();
}

}  // namespace

std::string to_string(LeafKind k) {
  for (const auto& [kind, name] : kLeafKindNames)
    if (kind == k) return name;
  return "?";
}

std::optional<LeafKind> leaf_kind_from_string(const std::string& s) {
  for (const auto& [kind, name] : kLeafKindNames)
    if (s == name) return kind;
  return std::nullopt;
}

std::string Provenance::path_text() const {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) out += (i ? "." : "") + path[i];
  return out;
}

MeaninglessError::MeaninglessError(std::string path, SourcePos pos, std::string message)
    : std::runtime_error(describe_error(path, pos, message)),
      path_(std::move(path)),
      pos_(pos),
      detail_(std::move(message)) {}

// ---------------------------------------------------------------------------

namespace {

std::string path_element(const StepToken& tok, std::size_t index) {
  if (tok.labeled()) return tok.text();
  return "<" + std::to_string(tok.level) + ">(" + std::to_string(index) + ")";
}

Provenance child_of(const Provenance& parent, std::string element, SourcePos pos) {
  Provenance p = parent;
  p.path.push_back(std::move(element));
  p.pos = pos;
  return p;
}

Obligation with(const Obligation& o, std::initializer_list<Assumption> extra, ExprPtr goal) {
  Obligation out{o.context, std::move(goal)};
  out.context.insert(out.context.end(), extra.begin(), extra.end());
  return out;
}

Obligation extended(const Context& c, const Context& extra, ExprPtr goal) {
  Obligation out{c, std::move(goal)};
  out.context.insert(out.context.end(), extra.begin(), extra.end());
  return out;
}

Derivation leaf_node(Obligation o, const Provenance& origin, LeafKind kind, bool omitted = false) {
  Derivation d;
  d.rule = "leaf";
  d.input = o;
  d.origin = origin;
  d.leaf = LeafRecord{std::move(o), origin, kind, omitted};
  return d;
}

Derivation transformation(std::string rule, const Obligation& in, Obligation out,
                          const Provenance& origin, std::vector<Derivation> children = {}) {
  Derivation d;
  d.rule = std::move(rule);
  d.input = in;
  d.output = std::move(out);
  d.origin = origin;
  d.children = std::move(children);
  return d;
}

class Checker {
 public:
  Checker(const EngineOptions& opts, bool collect) : opts_(opts), collect_(collect) {}

  std::vector<Diagnostic> errors;
  std::vector<Diagnostic> warnings;

  Derivation check(const Proof& p, const Obligation& o, const Provenance& here,
                   std::optional<LeafKind> kind_override = std::nullopt) {
    Derivation d;
    d.input = o;
    d.origin = here;
    switch (p.kind) {
      case Proof::Kind::Obvious:
        d.rule = "OBVIOUS";
        d.children.push_back(leaf_node(o, here, kind_override.value_or(LeafKind::ObviousGoal)));
        break;
      case Proof::Kind::Omitted:
        d.rule = "OMITTED";
        if (p.implicit)
          warnings.push_back({here.path_text(), here.pos, "no proof given; treated as OMITTED"});
        d.children.push_back(
            leaf_node(o, here, kind_override.value_or(LeafKind::ObviousGoal), true));
        break;
      case Proof::Kind::By: {
        d.rule = "BY";
        Derivation use = guarded(here, o, [&] { return use_step(p.by, o, here); });
        Obligation after = *use.output;
        d.children.push_back(std::move(use));
        d.children.push_back(leaf_node(after, here, kind_override.value_or(LeafKind::ByGoal)));
        break;
      }
      case Proof::Kind::Steps:
        return check_steps(p, 0, o, here);
    }
    return d;
  }

  Derivation transform(const StepToken& tok, const ProofStep& step, const Obligation& o,
                       const Provenance& here) {
    try {
      return transform_unguarded(tok, step, o, here);
    } catch (const MeaninglessError&) {
      throw;
    } catch (const std::exception& e) {
      throw MeaninglessError(here.path_text(), here.pos, e.what());
    }
  }

 private:
  // Runs a rule; in collecting mode a failure is recorded and the obligation
  // passes through unchanged.
  template <class F>
  Derivation guarded(const Provenance& here, const Obligation& o, F&& f) {
    try {
      try {
        return f();
      } catch (const MeaninglessError&) {
        throw;
      } catch (const std::exception& e) {
        throw MeaninglessError(here.path_text(), here.pos, e.what());
      }
    } catch (const MeaninglessError& e) {
      if (!collect_) throw;
      errors.push_back({e.path(), e.pos(), e.detail()});
      return transformation("error", o, o, here);
    }
  }

  Derivation check_steps(const Proof& p, std::size_t i, const Obligation& o,
                         const Provenance& parent) {
    const auto& [tok, step] = p.steps[i];
    Provenance here = child_of(parent, path_element(tok, i + 1), tok.pos);
    Derivation d;
    d.input = o;
    d.origin = here;
    if (step.kind == ProofStep::Kind::Qed) {
      d.rule = "QED";
      d.children.push_back(check(*step.proof, o, here));
      return d;
    }
    d.rule = "non-QED";
    Derivation t = guarded(here, o, [&] { return transform(tok, step, o, here); });
    Obligation next = *t.output;
    d.children.push_back(std::move(t));
    if (i + 1 < p.steps.size()) d.children.push_back(check_steps(p, i + 1, next, parent));
    return d;
  }

  [[noreturn]] void meaningless(const Provenance& here, const std::string& msg) const {
    throw MeaninglessError(here.path_text(), here.pos, msg);
  }

  void require_closed(const ExprPtr& e, const Context& c, const Provenance& here,
                      const std::set<std::string>& extra = {}) const {
    std::set<std::string> bound = bound_names(c);
    for (const auto& id : free_identifiers(e))
      if (!bound.count(id) && !extra.count(id))
        meaningless(here, "unknown identifier " + id + " in " + to_string(e));
  }

  void require_fresh(const std::string& name, const Context& c, const Provenance& here) const {
    if (is_bound(c, name))
      throw DuplicateName(here.path_text(), here.pos, name + " is already bound in the context");
  }

  // ASSUME ... PROVE or a bare expression as a context fragment and goal.
  std::pair<Context, ExprPtr> goal_form(const GoalForm& g, const Context& c,
                                        const Provenance& here) const {
    Context delta;
    Context scope = c;
    for (const auto& item : g.assume) {
      if (item.is_new) {
        require_fresh(item.binder.name, scope, here);
        if (item.binder.domain) require_closed(item.binder.domain, scope, here);
        for (const auto& h : reflect_binders({item.binder})) {
          delta.push_back(h);
          scope.push_back(h);
        }
      } else {
        require_closed(item.fact, scope, here);
        delta.push_back(Assumption::assume(item.fact));
        scope.push_back(delta.back());
      }
    }
    require_closed(g.goal, scope, here);
    return {delta, g.goal};
  }

  Derivation use_step(const FactList& fl, const Obligation& o, const Provenance& here) {
    std::set<std::string> defs(fl.defs.begin(), fl.defs.end());
    for (const auto& name : fl.defs) {
      bool defined = false;
      for (const auto& h : o.context)
        defined = defined || (h.kind == Assumption::Kind::Def && h.name == name);
      if (!defined)
        warnings.push_back({here.path_text(), here.pos, "USE of undefined name " + name + " ignored"});
    }
    Obligation start{using_defs(o.context, defs), o.goal};
    Derivation inner = use_facts(fl.facts, fl.facts.size(), start, here);
    Obligation out = *inner.output;
    return transformation("USE DEFS", o, std::move(out), here, {std::move(inner)});
  }

  Derivation use_facts(const std::vector<ExprPtr>& facts, std::size_t k, const Obligation& o,
                       const Provenance& here) {
    if (k == 0) return transformation("USE0", o, o, here);
    Derivation sub = use_facts(facts, k - 1, o, here);
    const Obligation& delta = *sub.output;
    const ExprPtr& fact = facts[k - 1];
    require_closed(fact, delta.context, here);
    Derivation side = leaf_node(Obligation{unhide(delta.context), fact}, here, LeafKind::UseFactSide);
    Obligation out = with(delta, {Assumption::assume(fact)}, delta.goal);
    return transformation("USE1", o, std::move(out), here, {std::move(sub), std::move(side)});
  }

  Derivation hide_step(const FactList& fl, const Obligation& o, const Provenance& here) {
    Derivation inner = hide_facts(fl.facts, fl.facts.size(), o, here);
    std::set<std::string> defs(fl.defs.begin(), fl.defs.end());
    for (const auto& name : fl.defs)
      if (!is_bound(o.context, name))
        warnings.push_back({here.path_text(), here.pos, "HIDE of undefined name " + name + " ignored"});
    Obligation out{hiding_defs(inner.output->context, defs), inner.output->goal};
    return transformation("HIDE DEFS", o, std::move(out), here, {std::move(inner)});
  }

  Derivation hide_facts(const std::vector<ExprPtr>& facts, std::size_t k, const Obligation& o,
                        const Provenance& here) {
    if (k == 0) return transformation("HIDE0", o, o, here);
    const ExprPtr& fact = facts[k - 1];
    Obligation hidden = o;
    bool found = false;
    for (std::size_t i = hidden.context.size(); i-- > 0;) {
      Assumption& h = hidden.context[i];
      if (h.kind == Assumption::Kind::Fact && !h.hidden && is_plain(*h.fact) &&
          alpha_equal(h.fact->goal, fact)) {
        h.hidden = true;
        found = true;
        break;
      }
    }
    if (!found)
      throw UnknownFact(here.path_text(), here.pos,
                        "HIDE: no usable fact " + to_string(fact) + " in the context");
    Derivation sub = hide_facts(facts, k - 1, hidden, here);
    Obligation out = *sub.output;
    return transformation("HIDE1", o, std::move(out), here, {std::move(sub)});
  }

  Derivation define_step(const ProofStep& s, const Obligation& o, const Provenance& here) {
    require_fresh(s.def_name, o.context, here);
    std::set<std::string> params;
    for (const auto& p : s.def_params)
      if (!params.insert(p).second) meaningless(here, "parameter " + p + " appears twice");
    require_closed(s.expr, o.context, here, params);
    bool hidden = !opts_.local_defs_usable;
    Obligation out = with(
        o, {Assumption::define(s.def_name, Definable::lambda(s.def_params, s.expr), hidden)}, o.goal);
    return transformation("DEFINE", o, std::move(out), here);
  }

  Derivation take(const std::vector<Binder>& bs, std::size_t i, const Obligation& o,
                  const Provenance& here) {
    if (i == bs.size()) return transformation("TAKE0", o, o, here);
    const Binder& beta = bs[i];
    Obligation m = expand_for_matching(o);
    if (m.goal->kind != ExprKind::Forall)
      meaningless(here, "TAKE " + beta.name + " needs a universally quantified goal, but the goal is " +
                            to_string(m.goal));
    auto [x, rest] = peel_binder(m.goal);
    require_fresh(beta.name, o.context, here);
    ExprPtr u = build::ident(beta.name);
    if (!beta.domain) {
      if (x.domain)
        meaningless(here, "TAKE " + beta.name + " against bounded \\A " + x.name +
                              " \\in ...; write TAKE " + beta.name + " \\in <set>");
      Obligation next = with(o, {Assumption::declare(beta.name)}, substitute(rest, x.name, u));
      Derivation sub = take(bs, i + 1, next, here);
      Obligation out = *sub.output;
      return transformation("TAKE1", o, std::move(out), here, {std::move(sub)});
    }
    if (!x.domain)
      meaningless(here, "TAKE " + beta.name + " \\in ... against unbounded \\A " + x.name);
    require_closed(beta.domain, o.context, here);
    Derivation side = leaf_node(Obligation{o.context, build::subseteq(x.domain, beta.domain)}, here,
                                LeafKind::TakeSubsetSide);
    Obligation next = with(o,
                           {Assumption::declare(beta.name),
                            Assumption::assume(build::in(u, beta.domain))},
                           substitute(rest, x.name, u));
    Derivation sub = take(bs, i + 1, next, here);
    Obligation out = *sub.output;
    return transformation("TAKE2", o, std::move(out), here, {std::move(side), std::move(sub)});
  }

  Derivation witness(const std::vector<WitnessItem>& ws, std::size_t i, const Obligation& o,
                     const Provenance& here) {
    if (i == ws.size()) return transformation("WITNESS0", o, o, here);
    const WitnessItem& w = ws[i];
    Obligation m = expand_for_matching(o);
    if (m.goal->kind != ExprKind::Exists)
      meaningless(here, "WITNESS " + to_string(w.term) +
                            " needs an existentially quantified goal, but the goal is " +
                            to_string(m.goal));
    auto [x, rest] = peel_binder(m.goal);
    require_closed(w.term, o.context, here);
    if (!w.domain) {
      if (x.domain)
        meaningless(here, "WITNESS " + to_string(w.term) + " against bounded \\E " + x.name +
                              " \\in ...; write WITNESS " + to_string(w.term) + " \\in <set>");
      Obligation next{o.context, substitute(rest, x.name, w.term)};
      Derivation sub = witness(ws, i + 1, next, here);
      Obligation out = *sub.output;
      return transformation("WITNESS1", o, std::move(out), here, {std::move(sub)});
    }
    if (!x.domain)
      meaningless(here, "WITNESS ... \\in ... against unbounded \\E " + x.name);
    require_closed(w.domain, o.context, here);
    ExprPtr member = build::in(w.term, w.domain);
    Derivation subset = leaf_node(Obligation{o.context, build::subseteq(w.domain, x.domain)}, here,
                                  LeafKind::WitnessSubsetSide);
    Derivation membership =
        leaf_node(Obligation{o.context, member}, here, LeafKind::WitnessMembershipSide);
    Obligation next = with(o, {Assumption::assume(member)}, substitute(rest, x.name, w.term));
    Derivation sub = witness(ws, i + 1, next, here);
    Obligation out = *sub.output;
    return transformation("WITNESS2", o, std::move(out), here,
                          {std::move(subset), std::move(membership), std::move(sub)});
  }

  Derivation have(const ExprPtr& g, const Obligation& o, const Provenance& here) {
    Obligation m = expand_for_matching(o);
    if (m.goal->kind != ExprKind::Implies)
      meaningless(here, "HAVE needs an implication goal, but the goal is " + to_string(m.goal));
    require_closed(g, o.context, here);
    Derivation side = leaf_node(with(o, {Assumption::assume(m.goal->arg(0))}, g), here,
                                LeafKind::HaveSide);
    Obligation out = with(o, {Assumption::assume(g)}, m.goal->arg(1));
    return transformation("HAVE", o, std::move(out), here, {std::move(side)});
  }

  static ObligationPtr as_fact(const Context& delta, const ExprPtr& f) {
    return make_obligation(delta, f);
  }

  Derivation assertion(const StepToken& tok, const Context& delta, const ExprPtr& f,
                       const Proof& proof, const Obligation& o, const Provenance& here) {
    ExprPtr not_e = build::negate(o.goal);
    if (!tok.labeled()) {
      Obligation sub = extended(o.context, delta, f);
      sub.context.insert(sub.context.begin() + static_cast<long>(o.context.size()),
                         Assumption::assume(not_e, true));
      Derivation child = check(proof, sub, here);
      Obligation out = with(o, {Assumption::assume(as_fact(delta, f))}, o.goal);
      return transformation("ASSERT1", o, std::move(out), here, {std::move(child)});
    }
    const std::string label = tok.text();
    require_fresh(label, o.context, here);
    Assumption def = Assumption::define(label, Definable::of(as_fact(delta, f)));
    Obligation sub = with(o, {def, Assumption::assume(not_e, true)}, f);
    sub.context.insert(sub.context.end(), delta.begin(), delta.end());
    Derivation child = check(proof, sub, here);
    Obligation out = with(o, {def, Assumption::assume(build::ident(label), true)}, o.goal);
    return transformation("ASSERT2", o, std::move(out), here, {std::move(child)});
  }

  Derivation suffices(const StepToken& tok, const Context& delta, const ExprPtr& f,
                      const Proof& proof, const Obligation& o, const Provenance& here) {
    ExprPtr not_e = build::negate(o.goal);
    if (!tok.labeled()) {
      Obligation sub = with(o, {Assumption::assume(as_fact(delta, f))}, o.goal);
      Derivation child = check(proof, sub, here);
      Obligation out = with(o, {Assumption::assume(not_e, true)}, f);
      out.context.insert(out.context.end(), delta.begin(), delta.end());
      return transformation("SUFFICES1", o, std::move(out), here, {std::move(child)});
    }
    const std::string label = tok.text();
    require_fresh(label, o.context, here);
    Assumption def = Assumption::define(label, Definable::of(as_fact(delta, f)));
    Obligation sub = with(o, {def, Assumption::assume(build::ident(label), true)}, o.goal);
    Derivation child = check(proof, sub, here);
    Obligation out = with(o, {def, Assumption::assume(not_e, true)}, f);
    out.context.insert(out.context.end(), delta.begin(), delta.end());
    return transformation("SUFFICES2", o, std::move(out), here, {std::move(child)});
  }

  Derivation pick(const ProofStep& s, const Obligation& o, const Provenance& here) {
    std::set<std::string> names;
    for (const auto& b : s.binders) {
      require_fresh(b.name, o.context, here);
      if (b.domain) require_closed(b.domain, o.context, here);
      names.insert(b.name);
    }
    Context reflected;
    try {
      reflected = reflect_binders(s.binders);
    } catch (const DuplicateBinder& e) {
      meaningless(here, e.what());
    }
    require_closed(s.expr, o.context, here, names);
    Obligation sub{o.context, build::exists(s.binders, s.expr)};
    Derivation child = check(*s.proof, sub, here, LeafKind::PickExistence);
    Obligation out = extended(o.context, reflected, o.goal);
    out.context.push_back(Assumption::assume(s.expr));
    return transformation("PICK", o, std::move(out), here, {std::move(child)});
  }

  Derivation transform_unguarded(const StepToken& tok, const ProofStep& step, const Obligation& o,
                                 const Provenance& here) {
    switch (step.kind) {
      case ProofStep::Kind::Use:
        return use_step(step.facts, o, here);
      case ProofStep::Kind::Hide:
        return hide_step(step.facts, o, here);
      case ProofStep::Kind::Define:
        return define_step(step, o, here);
      case ProofStep::Kind::Have:
        return have(step.expr, o, here);
      case ProofStep::Kind::Take:
        return take(step.binders, 0, o, here);
      case ProofStep::Kind::Witness:
        return witness(step.witnesses, 0, o, here);
      case ProofStep::Kind::Assert: {
        auto [delta, f] = goal_form(step.goal, o.context, here);
        return assertion(tok, delta, f, *step.proof, o, here);
      }
      case ProofStep::Kind::Case: {
        require_closed(step.expr, o.context, here);
        Context delta{Assumption::assume(step.expr)};
        Derivation inner = assertion(tok, delta, o.goal, *step.proof, o, here);
        Obligation out = *inner.output;
        return transformation("CASE", o, std::move(out), here, {std::move(inner)});
      }
      case ProofStep::Kind::Suffices: {
        auto [delta, f] = goal_form(step.goal, o.context, here);
        return suffices(tok, delta, f, *step.proof, o, here);
      }
      case ProofStep::Kind::Pick:
        return pick(step, o, here);
      case ProofStep::Kind::Qed:
        break;
    }
    meaningless(here, "QED is not a transformation");
  }

  const EngineOptions& opts_;
  bool collect_;
};

void collect_leaves(const Derivation& d, std::vector<LeafRecord>& out) {
  if (d.leaf) out.push_back(*d.leaf);
  for (const auto& c : d.children) collect_leaves(c, out);
}

void dump(const Derivation& d, int depth, std::ostringstream& out) {
  std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  out << pad << d.rule;
  if (!d.origin.path.empty()) out << " @" << d.origin.path_text();
  if (d.leaf) {
    out << " [" << to_string(d.leaf->kind) << (d.leaf->omitted ? ", omitted" : "") << "] "
        << to_string(d.leaf->obligation) << '\n';
    return;
  }
  out << " : " << to_string(d.input);
  if (d.output) out << "  -->  " << to_string(*d.output);
  out << '\n';
  for (const auto& c : d.children) dump(c, depth + 1, out);
}

}  // namespace

Obligation root_obligation(const Theorem& t) {
  Context delta;
  for (const auto& item : t.goal.assume) {
    if (item.is_new) {
      for (const auto& h : reflect_binders({item.binder})) delta.push_back(h);
    } else {
      delta.push_back(Assumption::assume(item.fact));
    }
  }
  Obligation stated{delta, t.goal.goal};
  Obligation root;
  for (const auto& id : free_identifiers(stated)) root.context.push_back(Assumption::declare(id));
  root.context.insert(root.context.end(), delta.begin(), delta.end());
  root.goal = t.goal.goal;
  return root;
}

CheckResult check_claim_collect(const Proof& p, const Obligation& o, const EngineOptions& opts) {
  Checker c(opts, true);
  CheckResult r;
  r.root = o;
  r.derivation = c.check(p, o, Provenance{});
  r.errors = std::move(c.errors);
  r.warnings = std::move(c.warnings);
  return r;
}

CheckResult check_theorem(const Theorem& t, const EngineOptions& opts) {
  Obligation root = root_obligation(t);
  CheckResult r;
  try {
    check_well_formed(root);
  } catch (const NotWellFormed& e) {
    r.root = root;
    r.errors.push_back({"", t.pos, e.what()});
    return r;
  }
  Proof implicit;
  implicit.implicit = true;
  implicit.pos = t.pos;
  return check_claim_collect(t.proof ? *t.proof : implicit, root, opts);
}

Derivation check_claim(const Proof& p, const Obligation& o, const EngineOptions& opts) {
  Checker c(opts, false);
  return c.check(p, o, Provenance{});
}

StepResult transform_step(const StepToken& token, const ProofStep& step, const Obligation& o,
                          const EngineOptions& opts) {
  Checker c(opts, false);
  Provenance here;
  here.path.push_back(token.labeled() ? token.text() : "<" + std::to_string(token.level) + ">");
  here.pos = token.pos;
  StepResult r;
  r.derivation = c.transform(token, step, o, here);
  r.leaves = leaf_obligations(r.derivation);
  return r;
}

Obligation expand_for_matching(const Obligation& o) {
  Obligation out = o;
  for (int guard = 0; guard < 64; ++guard) {
    const ExprPtr& g = out.goal;
    if (g->kind != ExprKind::Ident && g->kind != ExprKind::Apply) return out;
    const Assumption* def = nullptr;
    for (const auto& h : out.context)
      if (h.kind == Assumption::Kind::Def && h.name == g->name) def = &h;
    if (!def || def->hidden || def->def.is_obligation()) return out;
    if (def->def.params.size() != g->args.size()) return out;
    std::map<std::string, ExprPtr> sub;
    for (std::size_t i = 0; i < g->args.size(); ++i) sub[def->def.params[i]] = g->args[i];
    out.goal = substitute(def->def.body, sub);
  }
  return out;
}

std::vector<LeafRecord> leaf_obligations(const Derivation& d) {
  std::vector<LeafRecord> out;
  collect_leaves(d, out);
  return out;
}

std::string to_string(const Derivation& d) {
  std::ostringstream out;
  dump(d, 0, out);
  return out.str();
}

}  // namespace stepwise
