#pragma once

#include <needlefinder/check/checker.hpp>
#include <needlefinder/invariant/invariant.hpp>
#include <needlefinder/triage/triage.hpp>

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace nf::pipeline {

constexpr int report_schema_version = 1;
constexpr const char *tool_version = "0.1.0";

enum class Classification { LikelyBug, CleanToBound, Skipped };

std::string_view classification_name(Classification c);
Classification classification_from_name(std::string_view s);

struct FunctionReport
{
  std::string fixture;
  triage::TriageVerdict triage;
  std::vector<invariant::Invariant> invariants; // assumed by the harness
  std::optional<check::CheckResult> check;
  Classification classification = Classification::Skipped;
  std::string skip_reason;
};

struct FileReport
{
  std::string fixture;
  std::string path;
  std::string error; // empty when the file parsed
};

struct TraceReport
{
  std::string fixture;
  std::string source; // driver kind, "checked-in" or "none"
  std::size_t tests = 0;
  std::size_t records = 0;
  std::size_t malformed = 0;
  std::size_t failures = 0;
  std::string first_failure;
  std::vector<std::string> skipped_points; // below min_support
};

struct Summary
{
  std::size_t files = 0;
  std::size_t parse_failures = 0;
  std::size_t functions = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t checked = 0;
  std::size_t likely_bugs = 0;
  std::size_t clean_to_bound = 0;
  std::size_t skipped = 0;
  std::size_t truncated = 0; // accepted functions over the per-run limit
};

struct Report
{
  int schema_version = report_schema_version;
  bool incomplete = false;
  std::string failed_stage;
  std::string failure;
  std::string backend = "internal";
  std::vector<FunctionReport> functions; // ranked
  std::vector<FileReport> files;
  std::vector<TraceReport> traces;
  std::size_t malformed_trace_lines = 0;
  Summary summary;

  /// Recomputes summary from the entries.
  void tally();
};

/// Classification from a check verdict; Skipped also for ResourceOut and
/// ToolError, with the message as reason.
Classification classify(const check::CheckResult &r, std::string *reason = nullptr);

/// Accepted entries by score desc (ties: likely-bug first, then name),
/// then rejected ones by name.
void rank(std::vector<FunctionReport> &entries);

void to_json(nlohmann::json &j, const Report &r);
void from_json(const nlohmann::json &j, Report &r);

std::string render_json(const Report &r);
std::string render_markdown(const Report &r);

/// 2 when incomplete, 1 with likely bugs, else 0.
int exit_code(const Report &r);

} // namespace nf::pipeline
