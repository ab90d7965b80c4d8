#pragma once

#include <needlefinder/source/call_graph.hpp>
#include <needlefinder/source/facts.hpp>

#include <json.hpp>

#include <set>
#include <string>
#include <vector>

namespace nf::triage {

struct PenaltyWeights
{
  double loop_nesting = 0.8;    // per level of loop nesting
  double callee = 0.8;          // per distinct callee
  double bad_callee = 0.8;      // per call of a bad_callee_names entry
  double unresolved_call = 0.8; // per unresolved call site
};

struct TriageConfig
{
  std::set<source::GroundType::Kind> allowed_ground_kinds = {
    source::GroundType::Kind::Int, source::GroundType::Kind::Short,
    source::GroundType::Kind::Long, source::GroundType::Kind::Char,
    source::GroundType::Kind::Void};
  bool allow_pointers_to_allowed = true;
  int max_loop_nesting = 3;
  bool forbid_recursion = true;
  bool forbid_unresolved_callees = false;
  std::set<std::string> assert_macro_names = {"assert", "JS_ASSERT"};
  std::set<std::string> bad_callee_names = {
    "malloc", "calloc", "realloc", "free",  "memcpy", "memmove", "memset", "system",
    "exit",   "abort",  "fopen",   "fclose", "read",  "write",   "open",   "close"};
  PenaltyWeights weights;
};

enum class Decision { Accept, Reject };

/// A coded reason: NO_SPEC, BAD_TYPE, RECURSIVE, OPAQUE, DEEP_LOOPS,
/// UNRESOLVED_CALLEE (rejects) or BAD_CALLEE, UNRESOLVED_CALL (notes).
struct Reason
{
  std::string code;
  std::string subject; // parameter, variable or callee name
  std::string detail;  // e.g. the offending type
  bool operator==(const Reason &) const = default;
};

struct TriageVerdict
{
  std::string function;
  std::string path;
  Decision decision = Decision::Reject;
  std::vector<Reason> reasons; // why rejected; empty on accept
  std::vector<Reason> notes;   // penalties applied on accept
  double score = 0.0;
  int assert_sites = 0;
  bool operator==(const TriageVerdict &) const = default;
};

bool has_spec(const source::FunctionFacts &facts, const TriageConfig &cfg);
std::vector<Reason> type_gate(const source::FunctionFacts &facts, const TriageConfig &cfg);
bool allowed_type(const source::GroundType &type, const TriageConfig &cfg);

TriageVerdict triage_function(const source::FunctionFacts &facts, const source::CallGraph &graph,
                              const TriageConfig &cfg);

/// Accepted functions first, by score desc, assert count desc, name asc;
/// then rejects by name.
std::vector<TriageVerdict> triage_corpus(const std::vector<source::SourceUnit> &units,
                                         const TriageConfig &cfg);

void rank(std::vector<TriageVerdict> &verdicts);

std::string_view decision_name(Decision d);

void to_json(nlohmann::json &j, const Reason &r);
void from_json(const nlohmann::json &j, Reason &r);
void to_json(nlohmann::json &j, const TriageVerdict &v);
void from_json(const nlohmann::json &j, TriageVerdict &v);
void to_json(nlohmann::json &j, const TriageConfig &c);
void from_json(const nlohmann::json &j, TriageConfig &c);

} // namespace nf::triage
