#pragma once

#include <needlefinder/check/interp.hpp>
#include <needlefinder/instrument/instrument.hpp>
#include <needlefinder/pipeline/manifest.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace nf::pipeline {

struct DriverFailure
{
  std::size_t test = 0;
  std::string calls;  // e.g. "add(3); remove(3)"
  std::string reason; // failed check, violation or trap
};

struct DriverResult
{
  std::size_t tests = 0;
  std::size_t calls = 0;
  std::size_t records = 0; // trace lines written (in-process drivers)
  std::size_t failure_count = 0;
  std::vector<DriverFailure> failures; // the first max_failures
  int exit_code = 0;  // command driver
  std::string output; // command driver, combined stdout and stderr
};

struct DriverOptions
{
  check::MachineOptions machine;
  /// Instrumented source on disk, substituted for {source} in commands.
  std::string source_path;
  std::size_t max_failures = 20; // failures kept in the result
};

/// Runs the fixture's tests against the probe-instrumented unit in the
/// interpreter, appending trace records to `trace`. Globals are reset
/// before every test. Command drivers are rejected here.
DriverResult run_in_process(const instrument::InstrumentedSource &inst, const DriverSpec &spec,
                            std::ostream &trace, const DriverOptions &options = {});

/// Runs `command` through the shell with NF_TRACE_FILE=trace_path.
DriverResult run_command(const std::string &command, const std::string &trace_path,
                         const DriverOptions &options = {});

/// Either of the above; the trace file is truncated first.
DriverResult run_driver(const instrument::InstrumentedSource &inst, const DriverSpec &spec,
                        const std::string &trace_path, const DriverOptions &options = {});

} // namespace nf::pipeline
