#include <needlefinder/triage/triage.hpp>

#include <algorithm>
#include <cmath>

namespace nf::triage {

using source::GroundType;

std::string_view decision_name(Decision d)
{
  return d == Decision::Accept ? "accept" : "reject";
}

bool has_spec(const source::FunctionFacts &facts, const TriageConfig &cfg)
{
  for(const auto &a : facts.assert_sites)
    if(cfg.assert_macro_names.count(a.macro))
      return true;
  return !facts.deref_sites.empty();
}

bool allowed_type(const GroundType &type, const TriageConfig &cfg)
{
  if(type.is_scalar())
    return cfg.allowed_ground_kinds.count(type.kind()) > 0;
  if(!cfg.allow_pointers_to_allowed)
    return false;
  return allowed_type(type.element(), cfg);
}

std::vector<Reason> type_gate(const source::FunctionFacts &facts, const TriageConfig &cfg)
{
  std::vector<Reason> out;
  auto check = [&](const std::vector<source::TypedName> &names) {
    for(const auto &n : names)
      if(!allowed_type(n.type, cfg))
        out.push_back({"BAD_TYPE", n.name, to_string(n.type)});
  };
  check(facts.params);
  check(facts.locals);
  check(facts.reads_globals);
  return out;
}

TriageVerdict triage_function(const source::FunctionFacts &facts, const source::CallGraph &graph,
                              const TriageConfig &cfg)
{
  TriageVerdict v;
  v.function = facts.name;
  v.path = facts.path;
  v.assert_sites = static_cast<int>(facts.assert_sites.size());

  if(facts.opaque)
    v.reasons.push_back({"OPAQUE", "", facts.opaque_reason});
  else if(!has_spec(facts, cfg))
    v.reasons.push_back({"NO_SPEC", "", ""});
  for(auto &r : type_gate(facts, cfg))
    v.reasons.push_back(std::move(r));
  bool recursive = facts.is_recursive || graph.is_recursive(facts.name);
  if(cfg.forbid_recursion && recursive)
    v.reasons.push_back({"RECURSIVE", "", ""});
  if(facts.max_loop_nesting > cfg.max_loop_nesting)
    v.reasons.push_back({"DEEP_LOOPS", "", std::to_string(facts.max_loop_nesting)});

  auto unresolved = graph.unresolved_in(facts.name);
  int bad_calls = 0;
  for(const auto &site : facts.call_sites)
    if(cfg.bad_callee_names.count(site.callee))
    {
      ++bad_calls;
      v.notes.push_back({"BAD_CALLEE", site.callee, site.loc.str()});
    }
  for(const auto &u : unresolved)
  {
    Reason r{"UNRESOLVED_CALL", u.callee, u.why};
    if(cfg.forbid_unresolved_callees)
      v.reasons.push_back({"UNRESOLVED_CALLEE", u.callee, u.why});
    else
      v.notes.push_back(r);
  }

  if(!v.reasons.empty())
  {
    v.decision = Decision::Reject;
    v.score = 0.0;
    return v;
  }
  v.decision = Decision::Accept;
  const auto &w = cfg.weights;
  v.score = std::pow(w.loop_nesting, facts.max_loop_nesting) *
            std::pow(w.callee, static_cast<double>(facts.callees.size())) *
            std::pow(w.bad_callee, bad_calls) *
            std::pow(w.unresolved_call, static_cast<double>(unresolved.size()));
  return v;
}

void rank(std::vector<TriageVerdict> &verdicts)
{
  std::stable_sort(verdicts.begin(), verdicts.end(),
                   [](const TriageVerdict &a, const TriageVerdict &b) {
                     if(a.decision != b.decision)
                       return a.decision == Decision::Accept;
                     if(a.decision == Decision::Accept)
                     {
                       if(a.score != b.score)
                         return a.score > b.score;
                       if(a.assert_sites != b.assert_sites)
                         return a.assert_sites > b.assert_sites;
                     }
                     if(a.function != b.function)
                       return a.function < b.function;
                     return a.path < b.path;
                   });
}

std::vector<TriageVerdict> triage_corpus(const std::vector<source::SourceUnit> &units,
                                         const TriageConfig &cfg)
{
  source::FactsOptions options{cfg.assert_macro_names};
  auto graph = source::build_call_graph(units, options);
  std::vector<TriageVerdict> out;
  for(const auto &u : units)
  {
    auto facts = source::extract_facts(u, options);
    source::mark_recursion(facts, graph);
    for(const auto &f : facts)
      out.push_back(triage_function(f, graph, cfg));
  }
  rank(out);
  return out;
}

void to_json(nlohmann::json &j, const Reason &r)
{
  j = {{"code", r.code}, {"subject", r.subject}, {"detail", r.detail}};
}

void from_json(const nlohmann::json &j, Reason &r)
{
  r.code = j.at("code").get<std::string>();
  r.subject = j.value("subject", "");
  r.detail = j.value("detail", "");
}

void to_json(nlohmann::json &j, const TriageVerdict &v)
{
  j = {{"function", v.function},
       {"path", v.path},
       {"decision", decision_name(v.decision)},
       {"reasons", v.reasons},
       {"notes", v.notes},
       {"score", v.score},
       {"assert_sites", v.assert_sites}};
}

void from_json(const nlohmann::json &j, TriageVerdict &v)
{
  v.function = j.at("function").get<std::string>();
  v.path = j.value("path", "");
  v.decision = j.at("decision").get<std::string>() == "accept" ? Decision::Accept : Decision::Reject;
  v.reasons = j.value("reasons", std::vector<Reason>{});
  v.notes = j.value("notes", std::vector<Reason>{});
  v.score = j.value("score", 0.0);
  v.assert_sites = j.value("assert_sites", 0);
}

namespace {

GroundType::Kind kind_from_name(const std::string &name)
{
  for(auto k : {GroundType::Kind::Int, GroundType::Kind::Short, GroundType::Kind::Long,
                GroundType::Kind::Char, GroundType::Kind::Void})
    if(source::kind_name(k) == name)
      return k;
  throw FormatError("unknown ground kind '" + name + "'");
}

} // namespace

void to_json(nlohmann::json &j, const TriageConfig &c)
{
  std::vector<std::string> kinds;
  for(auto k : c.allowed_ground_kinds)
    kinds.emplace_back(source::kind_name(k));
  j = {{"allowed_ground_kinds", kinds},
       {"allow_pointers_to_allowed", c.allow_pointers_to_allowed},
       {"max_loop_nesting", c.max_loop_nesting},
       {"forbid_recursion", c.forbid_recursion},
       {"forbid_unresolved_callees", c.forbid_unresolved_callees},
       {"assert_macro_names", c.assert_macro_names},
       {"bad_callee_names", c.bad_callee_names},
       {"weights",
        {{"loop_nesting", c.weights.loop_nesting},
         {"callee", c.weights.callee},
         {"bad_callee", c.weights.bad_callee},
         {"unresolved_call", c.weights.unresolved_call}}}};
}

void from_json(const nlohmann::json &j, TriageConfig &c)
{
  if(j.contains("allowed_ground_kinds"))
  {
    c.allowed_ground_kinds.clear();
    for(const auto &k : j.at("allowed_ground_kinds"))
      c.allowed_ground_kinds.insert(kind_from_name(k.get<std::string>()));
    if(c.allowed_ground_kinds.empty())
      throw FormatError("allowed_ground_kinds must not be empty");
  }
  c.allow_pointers_to_allowed = j.value("allow_pointers_to_allowed", c.allow_pointers_to_allowed);
  c.max_loop_nesting = j.value("max_loop_nesting", c.max_loop_nesting);
  c.forbid_recursion = j.value("forbid_recursion", c.forbid_recursion);
  c.forbid_unresolved_callees = j.value("forbid_unresolved_callees", c.forbid_unresolved_callees);
  c.assert_macro_names = j.value("assert_macro_names", c.assert_macro_names);
  c.bad_callee_names = j.value("bad_callee_names", c.bad_callee_names);
  if(j.contains("weights"))
  {
    const auto &w = j.at("weights");
    c.weights.loop_nesting = w.value("loop_nesting", c.weights.loop_nesting);
    c.weights.callee = w.value("callee", c.weights.callee);
    c.weights.bad_callee = w.value("bad_callee", c.weights.bad_callee);
    c.weights.unresolved_call = w.value("unresolved_call", c.weights.unresolved_call);
  }
}

} // namespace nf::triage
