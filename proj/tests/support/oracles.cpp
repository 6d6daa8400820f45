#include "oracles.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "stepwise/surface.hpp"

namespace oracle {

using namespace stepwise;

bool evaluate(const ExprPtr& e, const std::map<std::string, bool>& v) {
  switch (e->kind) {
    case ExprKind::Ident:
      return v.at(e->name);
    case ExprKind::Bool:
      return e->value;
    case ExprKind::Not:
      return !evaluate(e->arg(0), v);
    case ExprKind::And:
      return evaluate(e->arg(0), v) && evaluate(e->arg(1), v);
    case ExprKind::Or:
      return evaluate(e->arg(0), v) || evaluate(e->arg(1), v);
    case ExprKind::Implies:
      return !evaluate(e->arg(0), v) || evaluate(e->arg(1), v);
    case ExprKind::Equiv:
      return evaluate(e->arg(0), v) == evaluate(e->arg(1), v);
    default:
      throw std::invalid_argument("not propositional: " + to_string(e));
  }
}

bool valid(const std::vector<ExprPtr>& hypotheses, const ExprPtr& goal, const std::vector<std::string>& atoms) {
  const unsigned rows = 1u << atoms.size();
  for (unsigned bits = 0; bits < rows; ++bits) {
    std::map<std::string, bool> v;
    for (std::size_t i = 0; i < atoms.size(); ++i) v[atoms[i]] = (bits >> i) & 1u;
    bool premises = true;
    for (const auto& h : hypotheses) premises = premises && evaluate(h, v);
    if (premises && !evaluate(goal, v)) return false;
  }
  return true;
}

namespace {

ExprPtr ex(const char* text) { return parse_expression(text); }

Assumption fact(const char* text, bool hidden = false) { return Assumption::assume(ex(text), hidden); }

Assumption label(const std::string& name, Context ctx, const char* goal) {
  return Assumption::define(name, Definable::of(make_obligation(std::move(ctx), ex(goal))));
}

}  // namespace

Obligation cantor_case_leaf() {
  const char* theorem = "\\A S : \\A f \\in [S -> SUBSET S] : \\E A \\in SUBSET S : \\A x \\in S : f[x] # A";
  const char* step1 = "\\E A \\in SUBSET S : \\A x \\in S : f[x] # A";
  const char* step2 = "\\A x \\in S : f[x] # T";
  const char* goal = "f[x] # T";

  Obligation o;
  auto& c = o.context;
  c.push_back(label("<1>1",
                    {Assumption::declare("S"), Assumption::declare("f"), fact("f \\in [S -> SUBSET S]")},
                    step1));
  c.push_back(Assumption::assume(build::negate(ex(theorem)), true));
  c.push_back(Assumption::declare("S"));
  c.push_back(Assumption::declare("f"));
  c.push_back(fact("f \\in [S -> SUBSET S]"));
  c.push_back(Assumption::define("T", Definable::lambda({}, ex("{z \\in S : z \\notin f[z]}"))));
  c.push_back(label("<2>2", {}, step2));
  c.push_back(Assumption::assume(build::negate(ex(step1)), true));
  c.push_back(label("<3>1", {Assumption::declare("x"), fact("x \\in S")}, goal));
  c.push_back(Assumption::assume(build::negate(ex(step2)), true));
  c.push_back(Assumption::declare("x"));
  c.push_back(fact("x \\in S"));
  c.push_back(label("<4>1", {fact("x \\in T")}, goal));
  c.push_back(Assumption::assume(build::negate(ex(goal)), true));
  c.push_back(fact("x \\in T"));
  o.goal = ex(goal);
  return o;
}

Obligation cantor_case_leaf_filtered() {
  Obligation o;
  auto& c = o.context;
  c.push_back(Assumption::declare("S"));
  c.push_back(Assumption::declare("f"));
  c.push_back(fact("f \\in [S -> SUBSET S]"));
  c.push_back(Assumption::declare("x"));
  c.push_back(fact("x \\in S"));
  c.push_back(fact("x \\in {z \\in S : z \\notin f[z]}"));
  o.goal = ex("f[x] # {z \\in S : z \\notin f[z]}");
  return o;
}

bool contains_hidden(const Obligation& o) {
  for (const auto& a : o.context) {
    if (a.hidden) return true;
    if (a.kind == Assumption::Kind::Fact && contains_hidden(*a.fact)) return true;
    if (a.kind == Assumption::Kind::Def && a.def.is_obligation() && contains_hidden(*a.def.obligation))
      return true;
  }
  return false;
}

Obligation reference_filter(const Obligation& o) {
  Obligation out;
  out.goal = o.goal;
  for (const auto& a : o.context) {
    switch (a.kind) {
      case Assumption::Kind::New:
        out.context.push_back(a);
        break;
      case Assumption::Kind::Def:
        if (a.hidden) {
          out.context.push_back(Assumption::declare(a.name));
        } else if (a.def.is_obligation()) {
          out.context.push_back(Assumption::define(
              a.name, Definable::of(std::make_shared<const Obligation>(reference_filter(*a.def.obligation)))));
        } else {
          out.context.push_back(a);
        }
        break;
      case Assumption::Kind::Fact:
        if (!a.hidden)
          out.context.push_back(
              Assumption::assume(std::make_shared<const Obligation>(reference_filter(*a.fact))));
        break;
    }
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace oracle
