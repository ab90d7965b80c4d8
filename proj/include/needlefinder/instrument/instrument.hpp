#pragma once

#include <needlefinder/source/ast.hpp>

#include <map>
#include <set>
#include <string>
#include <vector>

namespace nf::instrument {

/// Which arm of a branch statement a counter records.
enum class Arm { Then, Else, Body };

struct PointInfo
{
  std::string id;       // "<function>:<kind>:<ordinal>"
  std::string function;
  std::string kind;     // entry | exit | branch
  std::vector<Location> locations;
  std::vector<std::string> vars; // observable names logged here
  // branch points: the if/loop statement and the arm it counts
  Location anchor;
  Arm arm = Arm::Then;
  bool synthesized = false; // else arm that did not exist in the source
};

struct Insertion
{
  std::size_t offset = 0; // into the original text
  std::string text;
  int rank = 0; // order among insertions at the same offset
  std::string tag; // decl | counter | reset | probe | shim
};

struct InstrumentedSource
{
  std::string path;
  std::string original;
  std::string text;
  std::vector<Insertion> insertions; // sorted by (offset, rank)
  std::map<std::string, PointInfo> point_map;
  std::vector<std::string> counter_decls; // br0, br1, ... in number order
  std::map<std::string, std::vector<std::string>> counters_by_function;
  std::set<std::string> functions; // instrumented functions
  bool has_probes = false;
};

enum class CounterReset { PerCall, PerTest };

struct InstrumentOptions
{
  /// Functions to instrument; empty means every non-opaque function.
  std::set<std::string> functions;
  /// Never instrumented (oracles such as repOK).
  std::set<std::string> exclude;
  CounterReset reset = CounterReset::PerCall;
};

/// Adds branch counters: one per leaf arm (an arm with no nested if or
/// loop), numbered brN in file order. An if without else gets a counter
/// on a synthesized else arm when its then-arm can fall through.
/// Throws UnsupportedConstruct for an explicitly requested opaque function.
InstrumentedSource inject_counters(const source::SourceUnit &unit,
                                   const InstrumentOptions &options = {});

/// Adds entry and exit probes calling nf_trace(). Entry logs
/// `observables[f]` (default: the integer parameters of f); exit logs the
/// counters of f and `__ret` for integer returns.
InstrumentedSource inject_probes(InstrumentedSource inst, const source::SourceUnit &unit,
                                 const std::map<std::string, std::vector<std::string>> &observables = {},
                                 const InstrumentOptions &options = {});

/// Convenience: counters then probes.
InstrumentedSource instrument(const source::SourceUnit &unit,
                              const std::map<std::string, std::vector<std::string>> &observables = {},
                              const InstrumentOptions &options = {});

/// Removes every recorded insertion from `inst.text`.
std::string strip(const InstrumentedSource &inst);

/// Position in `inst.original` of an offset into `inst.text`. Offsets
/// inside inserted text map to where the insertion was made.
std::size_t original_offset(const InstrumentedSource &inst, std::size_t text_offset);
Location original_location(const InstrumentedSource &inst, std::size_t text_offset);

/// Line and column of `offset` in `text`.
Location location_at(const std::string &text, std::size_t offset);

/// Applies insertions to `original`.
std::string render(const std::string &original, std::vector<Insertion> insertions);

/// Default entry observables: the parameters with integer type.
std::vector<std::string> default_observables(const source::SourceUnit &unit,
                                             const source::FunctionDef &fn);

constexpr const char *shim_prototype =
  "void nf_trace(const char* pp, const char** names, long long* vals, int n);";

std::string point_id(const std::string &function, const std::string &kind, int ordinal);

} // namespace nf::instrument
