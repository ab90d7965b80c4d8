#pragma once

#include <needlefinder/check/checker.hpp>
#include <needlefinder/invariant/invariant.hpp>
#include <needlefinder/pipeline/manifest.hpp>
#include <needlefinder/pipeline/report.hpp>
#include <needlefinder/triage/triage.hpp>

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace nf::pipeline {

struct PipelineConfig
{
  /// corpus.json; when empty, `sources` form a single fixture "corpus".
  std::string manifest;
  std::vector<std::string> sources;
  std::vector<std::string> fixtures; // restrict to these; empty means all
  std::string out_dir = "nf-out";

  triage::TriageConfig triage;
  invariant::InferenceConfig inference;
  /// Infer at every instrumented point rather than only at accepted
  /// functions and the functions their harnesses call.
  bool infer_all_points = false;

  /// Replaces every fixture's driver when set.
  std::string test_command;
  std::optional<std::uint32_t> seed; // overrides random_ops seeds
  bool checked_in_traces = false;    // copy the manifest's trace files instead of running tests

  /// Extra harness targets, added to every fixture.
  std::vector<check::HarnessConfig> targets;
  std::string backend = "internal"; // internal | external
  check::BmcOptions bmc;
  std::uint64_t budget = 10'000'000;
  int unwind = 0;      // fixed bound; 0 uses the suggested schedule
  int unwind_cap = 16;
  std::size_t max_functions = 32; // accepted functions checked per run

  /// Reuse artifacts already in out_dir.
  bool resume = true;

  /// Throws Error.
  void validate() const;
};

void from_json(const nlohmann::json &j, PipelineConfig &c);

/// triage -> instrument -> trace -> infer -> harness -> check, per
/// fixture, persisting each stage under out_dir/<fixture>/. A failing stage
/// yields a partial report with `incomplete` set.
Report run_pipeline(const PipelineConfig &cfg);

/// Writes report.json and report.md into out_dir.
void write_report(const Report &report, const std::string &out_dir);

/// Stage names in order, as used in artifacts and failures.
const std::vector<std::string> &stage_names();

} // namespace nf::pipeline
