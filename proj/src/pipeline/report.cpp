#include <needlefinder/errors.hpp>
#include <needlefinder/pipeline/report.hpp>

#include <algorithm>
#include <cstdio>
#include <tuple>

namespace nf::pipeline {

namespace {

std::string cell(std::string s)
{
  std::string out;
  for(char c : s)
  {
    if(c == '|')
      out += "\\|";
    else if(c == '\n')
      out += ' ';
    else
      out += c;
  }
  return out;
}

std::string fixed2(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string witness_summary(const check::CheckResult &r)
{
  std::string s;
  for(const auto &c : r.witness.choices)
    s += (s.empty() ? "" : ", ") + c.name + "=" + std::to_string(c.value);
  if(s.empty())
    for(const auto &[k, v] : r.witness.values)
      s += (s.empty() ? "" : ", ") + k + "=" + std::to_string(v);
  return s;
}

nlohmann::json function_json(const FunctionReport &f)
{
  nlohmann::json j = {{"fixture", f.fixture},
                      {"function", f.triage.function},
                      {"triage", f.triage},
                      {"invariants", f.invariants},
                      {"classification", classification_name(f.classification)}};
  if(f.check)
  {
    auto c = nlohmann::json(*f.check);
    c["stats"].erase("ms");
    j["check"] = c;
  }
  if(!f.skip_reason.empty())
    j["skip_reason"] = f.skip_reason;
  return j;
}

} // namespace

std::string_view classification_name(Classification c)
{
  switch(c)
  {
  case Classification::LikelyBug: return "likely-bug";
  case Classification::CleanToBound: return "clean-to-bound";
  case Classification::Skipped: return "skipped";
  }
  return "?";
}

Classification classification_from_name(std::string_view s)
{
  for(auto c : {Classification::LikelyBug, Classification::CleanToBound, Classification::Skipped})
    if(classification_name(c) == s)
      return c;
  throw FormatError("unknown classification '" + std::string(s) + "'");
}

Classification classify(const check::CheckResult &r, std::string *reason)
{
  switch(r.verdict)
  {
  case check::Verdict::Counterexample: return Classification::LikelyBug;
  case check::Verdict::ExhaustedClean:
  case check::Verdict::VerifiedToBound: return Classification::CleanToBound;
  case check::Verdict::ResourceOut:
  case check::Verdict::ToolError:
    if(reason)
      *reason = std::string(check::verdict_name(r.verdict)) + (r.message.empty() ? "" : ": " + r.message);
    break;
  }
  return Classification::Skipped;
}

void rank(std::vector<FunctionReport> &entries)
{
  std::stable_sort(entries.begin(), entries.end(), [](const FunctionReport &a, const FunctionReport &b) {
    bool aa = a.triage.decision == triage::Decision::Accept;
    bool ba = b.triage.decision == triage::Decision::Accept;
    if(aa != ba)
      return aa;
    if(!aa)
      return std::tie(a.triage.function, a.fixture) < std::tie(b.triage.function, b.fixture);
    if(a.triage.score != b.triage.score)
      return a.triage.score > b.triage.score;
    bool abug = a.classification == Classification::LikelyBug;
    bool bbug = b.classification == Classification::LikelyBug;
    if(abug != bbug)
      return abug;
    return std::tie(a.triage.function, a.fixture) < std::tie(b.triage.function, b.fixture);
  });
}

void Report::tally()
{
  std::size_t files_total = files.size(), truncated = summary.truncated;
  summary = {};
  summary.files = files_total;
  summary.truncated = truncated;
  for(const auto &f : files)
    summary.parse_failures += !f.error.empty();
  for(const auto &f : functions)
  {
    ++summary.functions;
    if(f.triage.decision == triage::Decision::Accept)
      ++summary.accepted;
    else
      ++summary.rejected;
    if(f.check)
      ++summary.checked;
    switch(f.classification)
    {
    case Classification::LikelyBug: ++summary.likely_bugs; break;
    case Classification::CleanToBound: ++summary.clean_to_bound; break;
    case Classification::Skipped: ++summary.skipped; break;
    }
  }
  malformed_trace_lines = 0;
  for(const auto &t : traces)
    malformed_trace_lines += t.malformed;
}

void to_json(nlohmann::json &j, const Report &r)
{
  nlohmann::json functions = nlohmann::json::array();
  for(const auto &f : r.functions)
    functions.push_back(function_json(f));
  nlohmann::json files = nlohmann::json::array();
  for(const auto &f : r.files)
  {
    nlohmann::json e = {{"fixture", f.fixture}, {"path", f.path}};
    if(!f.error.empty())
      e["error"] = f.error;
    files.push_back(e);
  }
  nlohmann::json traces = nlohmann::json::array();
  for(const auto &t : r.traces)
  {
    nlohmann::json e = {{"fixture", t.fixture},     {"source", t.source},     {"tests", t.tests},
                        {"records", t.records},     {"malformed", t.malformed}, {"failures", t.failures},
                        {"skipped_points", t.skipped_points}};
    if(!t.first_failure.empty())
      e["first_failure"] = t.first_failure;
    traces.push_back(e);
  }
  const auto &s = r.summary;
  j = {{"schema_version", r.schema_version},
       {"incomplete", r.incomplete},
       {"tool", {{"name", "needlefinder"}, {"version", tool_version}, {"backend", r.backend}}},
       {"summary",
        {{"files", s.files},
         {"parse_failures", s.parse_failures},
         {"functions", s.functions},
         {"accepted", s.accepted},
         {"rejected", s.rejected},
         {"checked", s.checked},
         {"likely_bugs", s.likely_bugs},
         {"clean_to_bound", s.clean_to_bound},
         {"skipped", s.skipped},
         {"truncated", s.truncated}}},
       {"malformed_trace_lines", r.malformed_trace_lines},
       {"files", files},
       {"traces", traces},
       {"functions", functions}};
  if(r.incomplete)
    j["failure"] = {{"stage", r.failed_stage}, {"cause", r.failure}};
}

void from_json(const nlohmann::json &j, Report &r)
{
  r = Report{};
  try
  {
    r.schema_version = j.at("schema_version").get<int>();
    if(r.schema_version != report_schema_version)
      throw FormatError("unsupported report schema_version " + std::to_string(r.schema_version));
    r.incomplete = j.value("incomplete", false);
    if(j.contains("failure"))
    {
      r.failed_stage = j.at("failure").value("stage", "");
      r.failure = j.at("failure").value("cause", "");
    }
    if(j.contains("tool"))
      r.backend = j.at("tool").value("backend", "internal");
    for(const auto &f : j.value("functions", nlohmann::json::array()))
    {
      FunctionReport e;
      e.fixture = f.value("fixture", "");
      e.triage = f.at("triage").get<triage::TriageVerdict>();
      e.invariants = f.value("invariants", std::vector<invariant::Invariant>{});
      if(f.contains("check"))
        e.check = f.at("check").get<check::CheckResult>();
      e.classification = classification_from_name(f.at("classification").get<std::string>());
      e.skip_reason = f.value("skip_reason", "");
      r.functions.push_back(std::move(e));
    }
    for(const auto &f : j.value("files", nlohmann::json::array()))
      r.files.push_back({f.value("fixture", ""), f.at("path").get<std::string>(), f.value("error", "")});
    for(const auto &t : j.value("traces", nlohmann::json::array()))
    {
      TraceReport e;
      e.fixture = t.value("fixture", "");
      e.source = t.value("source", "");
      e.tests = t.value("tests", std::size_t{0});
      e.records = t.value("records", std::size_t{0});
      e.malformed = t.value("malformed", std::size_t{0});
      e.failures = t.value("failures", std::size_t{0});
      e.first_failure = t.value("first_failure", "");
      e.skipped_points = t.value("skipped_points", std::vector<std::string>{});
      r.traces.push_back(std::move(e));
    }
    if(j.contains("summary"))
      r.summary.truncated = j.at("summary").value("truncated", std::size_t{0});
  }
  catch(const nlohmann::json::exception &e)
  {
    throw FormatError(std::string("report: ") + e.what());
  }
  r.tally();
}

std::string render_json(const Report &r)
{
  return nlohmann::json(r).dump(2) + "\n";
}

std::string render_markdown(const Report &r)
{
  const auto &s = r.summary;
  std::string md = "# needlefinder report\n\n";
  if(r.incomplete)
    md += "**Incomplete:** stage `" + r.failed_stage + "` failed: " + cell(r.failure) + "\n\n";
  md += "Backend: " + r.backend + ". Files: " + std::to_string(s.files) + " (" + std::to_string(s.parse_failures) +
        " failed to parse). Functions: " + std::to_string(s.functions) + " (" + std::to_string(s.accepted) +
        " accepted, " + std::to_string(s.rejected) + " rejected).\n\n";
  md += "Likely bugs: " + std::to_string(s.likely_bugs) + ". Clean to bound: " + std::to_string(s.clean_to_bound) +
        ". Skipped: " + std::to_string(s.skipped) + ".";
  if(s.truncated)
    md += " Truncated: " + std::to_string(s.truncated) + " accepted functions over the limit.";
  md += "\n\n";

  if(!r.functions.empty())
  {
    md += "| # | function | fixture | score | classification | verdict | detail | witness |\n";
    md += "|---|---|---|---|---|---|---|---|\n";
    int n = 0;
    for(const auto &f : r.functions)
    {
      std::string verdict = "-", detail = f.skip_reason, witness;
      if(f.check)
      {
        verdict = std::string(check::verdict_name(f.check->verdict));
        if(f.check->unwind)
          verdict += " (unwind " + std::to_string(f.check->unwind) + ")";
        if(f.check->property)
        {
          const auto &p = *f.check->property;
          detail = check::describe(p) + (p.function == "main" ? " at harness line " : " at line ") +
                   std::to_string(p.loc.line);
        }
        witness = witness_summary(*f.check);
      }
      md += "| " + std::to_string(++n) + " | " + cell(f.triage.function) + " | " + cell(f.fixture) + " | " +
            fixed2(f.triage.score) + " | " + std::string(classification_name(f.classification)) + " | " + verdict +
            " | " + cell(detail) + " | " + cell(witness) + " |\n";
    }
    md += "\n";
  }
  else
    md += "No functions.\n\n";

  if(!r.traces.empty())
  {
    md += "## Traces\n\n| fixture | source | tests | records | malformed | test failures |\n|---|---|---|---|---|---|\n";
    for(const auto &t : r.traces)
      md += "| " + cell(t.fixture) + " | " + cell(t.source) + " | " + std::to_string(t.tests) + " | " +
            std::to_string(t.records) + " | " + std::to_string(t.malformed) + " | " + std::to_string(t.failures) +
            " |\n";
    md += "\n";
  }
  bool parse_errors = std::any_of(r.files.begin(), r.files.end(), [](const FileReport &f) { return !f.error.empty(); });
  if(parse_errors)
  {
    md += "## Files that failed to parse\n\n";
    for(const auto &f : r.files)
      if(!f.error.empty())
        md += "- `" + f.path + "`: " + cell(f.error) + "\n";
    md += "\n";
  }
  return md;
}

int exit_code(const Report &r)
{
  if(r.incomplete)
    return 2;
  for(const auto &f : r.functions)
    if(f.classification == Classification::LikelyBug)
      return 1;
  return 0;
}

} // namespace nf::pipeline
