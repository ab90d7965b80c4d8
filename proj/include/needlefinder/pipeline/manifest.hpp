#pragma once

#include <needlefinder/check/harness.hpp>

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace nf::pipeline {

enum class DriverKind { RandomOps, Cases, Sweep, Command };

/// How a fixture's tests are run to collect traces.
struct DriverSpec
{
  DriverKind kind = DriverKind::Command;

  // random_ops: num_tests sequences of max_len calls op(value),
  // op drawn from ops, value from [value_lo, value_hi)
  std::vector<std::string> ops;
  std::int64_t value_lo = 0;
  std::int64_t value_hi = 20;
  std::uint32_t seed = 0;
  std::size_t num_tests = 0;
  std::size_t max_len = 0;

  // cases / sweep
  std::string function;
  std::vector<nlohmann::json> cases; // parameter name -> int or int list
  std::string param;
  std::int64_t from = 0, to = 0, step = 1;
  std::vector<std::int64_t> extra;

  /// Oracle called after each op (random_ops, no arguments) or each call
  /// (cases/sweep: the call's arguments then its result). Zero is a failure.
  std::string check;

  /// Command: run through /bin/sh with NF_TRACE_FILE set; {source} is the
  /// instrumented file.
  std::string command;
};

void from_json(const nlohmann::json &j, DriverSpec &d);
void to_json(nlohmann::json &j, const DriverSpec &d);
std::string_view driver_kind_name(DriverKind k);

struct BugSpec
{
  std::string location;
  std::string mutation;
  std::string property;
  std::map<std::string, std::int64_t> witness;
};

struct Fixture
{
  std::string name;
  std::vector<std::string> sources; // relative to the manifest
  std::vector<std::string> fixed_sources;
  std::vector<std::string> bug_sources;
  std::vector<std::string> oracles; // never triaged as targets, never instrumented
  DriverSpec driver;
  std::string trace; // checked-in trace, relative
  std::vector<check::HarnessConfig> targets;
  BugSpec bug;
};

struct TriageLabel
{
  std::string function;
  std::string decision; // accept | reject
  std::vector<std::string> reasons;
  std::string rationale;
};

struct Manifest
{
  int schema_version = 1;
  std::string base_dir; // directory of corpus.json
  std::vector<Fixture> fixtures;
  std::vector<std::string> triage_sources;
  std::vector<TriageLabel> labels;

  std::string path_of(const std::string &relative) const;
  const Fixture *find(const std::string &name) const;
};

/// Throws IoError or FormatError.
Manifest load_manifest(const std::string &path);
Manifest parse_manifest(const nlohmann::json &j, const std::string &base_dir);

} // namespace nf::pipeline
