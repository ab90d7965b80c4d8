#pragma once

#include <needlefinder/check/harness.hpp>

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nf::check {

enum class Verdict { Counterexample, ExhaustedClean, VerifiedToBound, ResourceOut, ToolError };

std::string_view verdict_name(Verdict v);
Verdict verdict_from_name(std::string_view name);

struct Witness
{
  std::vector<Choice> choices;                 // in the order they were made
  std::map<std::string, std::int64_t> values;  // symbolic name -> value
  bool operator==(const Witness &) const = default;
};

struct CheckStats
{
  std::uint64_t paths = 0;     // executions started
  std::uint64_t completed = 0; // reached the end of main
  std::uint64_t pruned = 0;    // an assume failed
  std::uint64_t cut = 0;       // a loop hit the unwind cap
  std::uint64_t violations = 0;
  std::uint64_t steps = 0;
  double ms = 0;
};

struct CheckResult
{
  Verdict verdict = Verdict::ToolError;
  std::string backend = "internal";
  int unwind = 0; // 0: no cap
  std::vector<int> schedule;
  Witness witness;
  std::optional<Property> property; // Counterexample
  Violation violation;              // as executed, harness coordinates
  std::string message;              // ToolError / ResourceOut detail
  CheckStats stats;
};

void to_json(nlohmann::json &j, const CheckResult &r);
void from_json(const nlohmann::json &j, CheckResult &r);

struct CheckOptions
{
  /// Executions allowed before giving up with ResourceOut.
  std::uint64_t budget = 10'000'000;
  /// Body iterations per loop entry; 0 means uncapped.
  int unwind = 0;
  bool stop_on_violation = true;
  MachineOptions machine;
};

/// Enumerates every assignment of the harness inputs in lexicographic
/// order of the choices as they are made, pruning at failed assumes.
/// `explored` receives the choices of every path that passed all assumes.
CheckResult exhaustive_check(const HarnessSource &harness, const CheckOptions &options = {},
                             std::vector<std::vector<Choice>> *explored = nullptr);

/// Re-runs the harness on a witness; the violation it hits, if any.
std::optional<Violation> replay(const HarnessSource &harness, const Witness &witness,
                                const CheckOptions &options = {});

/// Maps a violation to the target property it breaks, or describes it.
Property attribute(const Violation &v, const HarnessSource &harness);

/// Loop bounds to try: max hi + 1 over invariants on loop-relevant
/// variables (branch counters and identifiers compared in loop
/// conditions, closed over assignments), then doubling up to `cap`.
/// Without such invariants: 2, 4, 8, ... up to `cap`.
std::vector<int> suggest_unwind(const source::SourceUnit &unit, const std::vector<std::string> &functions,
                                const std::vector<invariant::Invariant> &invariants, int cap = 16);

/// exhaustive_check at each bound until a verdict other than VerifiedToBound.
CheckResult run_schedule(const HarnessSource &harness, const std::vector<int> &schedule,
                         const CheckOptions &options = {});

struct BmcOptions
{
  /// {file}, {unwind} and {flags} are substituted.
  std::string command = "cbmc {file} --unwind {unwind} {flags}";
  int timeout_seconds = 300;
  int unwind = 8;
};

/// Runs an external checker on a harness written to `path`.
CheckResult run_external_bmc(const std::string &path, const HarnessSource &harness, const BmcOptions &options);

/// Verdict from checker output and exit status. `harness` maps lines back
/// to properties.
CheckResult parse_bmc_output(const std::string &output, int exit_code, const HarnessSource *harness = nullptr);

/// Command-line flags for the properties a harness checks.
std::string bmc_flags(const HarnessSource &harness);

} // namespace nf::check
