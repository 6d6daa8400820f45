#include <algorithm>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "stepwise/export.hpp"

namespace stepwise {

using nlohmann::ordered_json;

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Proved:
      return "PROVED";
    case RunStatus::Incomplete:
      return "INCOMPLETE";
    case RunStatus::Failed:
      return "FAILED";
    case RunStatus::Meaningless:
      return "MEANINGLESS";
  }
  return "?";
}

std::optional<RunStatus> run_status_from_string(const std::string& s) {
  for (auto st : {RunStatus::Proved, RunStatus::Incomplete, RunStatus::Failed, RunStatus::Meaningless})
    if (to_string(st) == s) return st;
  return std::nullopt;
}

RunStatus summarize(const std::vector<LeafReport>& leaves, const std::vector<ReportError>& errors) {
  if (!errors.empty()) return RunStatus::Meaningless;
  bool gaps = false;
  for (const auto& l : leaves) {
    const std::string& s = l.outcome.status;
    if (s == "unknown" || s == "malformed") return RunStatus::Failed;
    if (l.omitted || s != "proved") gaps = true;
  }
  return gaps ? RunStatus::Incomplete : RunStatus::Proved;
}

Obligation filtered_view(const Obligation& o, bool expand) {
  Obligation f = filter(o);
  return expand ? expand_usable_definitions(f) : f;
}

LeafReport describe_leaf(int id, const LeafRecord& leaf, const LeafViewOptions& opts) {
  LeafReport r;
  r.id = id;
  r.path = leaf.origin.path_text();
  r.kind = to_string(leaf.kind);
  r.omitted = leaf.omitted;
  r.obligation = to_pretty_string(leaf.obligation);
  Obligation view = filtered_view(leaf.obligation, opts.expand_filtered);
  r.filtered = to_pretty_string(view);
  try {
    r.embedding = embed(view);
  } catch (const std::exception& e) {
    r.embedding = std::string("<not embeddable: ") + e.what() + ">";
  }
  r.outcome.status = leaf.omitted ? "omitted" : "skipped";
  return r;
}

namespace {

ordered_json to_json(const ObligationReport& r) {
  ordered_json j;
  j["theorem"] = r.theorem;
  j["status"] = to_string(r.status);
  j["leaves"] = ordered_json::array();
  for (const auto& l : r.leaves) {
    ordered_json o;
    o["status"] = l.outcome.status;
    o["depth"] = l.outcome.depth;
    o["reason"] = l.outcome.reason;
    j["leaves"].push_back({{"id", l.id},
                           {"path", l.path},
                           {"kind", l.kind},
                           {"omitted", l.omitted},
                           {"obligation", l.obligation},
                           {"filtered", l.filtered},
                           {"embedding", l.embedding},
                           {"outcome", o},
                           {"millis", l.millis}});
  }
  j["errors"] = ordered_json::array();
  for (const auto& e : r.errors)
    j["errors"].push_back(
        {{"path", e.path}, {"line", e.line}, {"column", e.column}, {"message", e.message}});
  return j;
}

std::string indent_block(const std::string& text, const std::string& pad) {
  std::istringstream is(text);
  std::string line, out;
  while (std::getline(is, line)) out += pad + line + "\n";
  return out;
}

std::string to_text(const ObligationReport& r) {
  std::ostringstream os;
  os << "theorem " << (r.theorem.empty() ? "(unnamed)" : r.theorem) << ": " << to_string(r.status) << "\n";
  for (const auto& e : r.errors)
    os << "  error " << (e.path.empty() ? "-" : e.path) << " (" << e.line << ":" << e.column << "): " << e.message
       << "\n";
  std::vector<const LeafReport*> sorted;
  for (const auto& l : r.leaves) sorted.push_back(&l);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const LeafReport* a, const LeafReport* b) { return a->path < b->path; });
  std::map<std::string, int> tally;
  for (const auto* l : sorted) {
    tally[l->outcome.status]++;
    os << "  [" << l->id << "] " << (l->path.empty() ? "(theorem)" : l->path) << " " << l->kind << ": "
       << l->outcome.status;
    if (l->outcome.status == "proved") os << " (depth " << l->outcome.depth << ")";
    if (!l->outcome.reason.empty()) os << " (" << l->outcome.reason << ")";
    if (l->millis > 0) os << " " << l->millis << " ms";
    os << "\n";
    if (l->outcome.status != "proved" && l->outcome.status != "skipped")
      os << indent_block(l->filtered, "      ");
  }
  os << "  " << r.leaves.size() << " leaves";
  for (const auto& [status, n] : tally) os << ", " << n << " " << status;
  os << "\n";
  return os.str();
}

template <class T>
T field(const ordered_json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) throw std::invalid_argument(std::string("missing field '") + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("field '") + name + "': " + e.what());
  }
}

}  // namespace

std::string write_report(const ObligationReport& r, ReportFormat f) {
  if (f == ReportFormat::Json) return to_json(r).dump(2) + "\n";
  return to_text(r);
}

std::string write_reports(const std::vector<ObligationReport>& rs, ReportFormat f) {
  if (rs.size() == 1) return write_report(rs.front(), f);
  if (f == ReportFormat::Json) {
    ordered_json all = ordered_json::array();
    for (const auto& r : rs) all.push_back(to_json(r));
    return all.dump(2) + "\n";
  }
  std::string out;
  for (const auto& r : rs) out += to_text(r);
  return out;
}

ObligationReport parse_report(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("not JSON: ") + e.what());
  }
  ObligationReport r;
  r.theorem = field<std::string>(j, "theorem");
  auto st = run_status_from_string(field<std::string>(j, "status"));
  if (!st) throw std::invalid_argument("unknown status");
  r.status = *st;
  for (const auto& l : field<ordered_json>(j, "leaves")) {
    LeafReport lr;
    lr.id = field<int>(l, "id");
    lr.path = field<std::string>(l, "path");
    lr.kind = field<std::string>(l, "kind");
    lr.omitted = field<bool>(l, "omitted");
    lr.obligation = field<std::string>(l, "obligation");
    lr.filtered = field<std::string>(l, "filtered");
    lr.embedding = field<std::string>(l, "embedding");
    auto o = field<ordered_json>(l, "outcome");
    lr.outcome.status = field<std::string>(o, "status");
    lr.outcome.depth = field<int>(o, "depth");
    lr.outcome.reason = field<std::string>(o, "reason");
    lr.millis = field<long>(l, "millis");
    r.leaves.push_back(std::move(lr));
  }
  for (const auto& e : field<ordered_json>(j, "errors")) {
    ReportError re;
    re.path = field<std::string>(e, "path");
    re.line = field<int>(e, "line");
    re.column = field<int>(e, "column");
    re.message = field<std::string>(e, "message");
    r.errors.push_back(std::move(re));
  }
  return r;
}

void write_embeddings(const std::vector<Obligation>& obligations, std::ostream& out) {
  for (const auto& o : obligations) out << embed(o) << "\n";
}

std::string write_embeddings(const std::vector<Obligation>& obligations) {
  std::ostringstream os;
  write_embeddings(obligations, os);
  return os.str();
}

}  // namespace stepwise
