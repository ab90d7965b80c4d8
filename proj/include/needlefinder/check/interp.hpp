#pragma once

#include <needlefinder/errors.hpp>
#include <needlefinder/instrument/instrument.hpp>
#include <needlefinder/instrument/trace.hpp>
#include <needlefinder/source/ast.hpp>
#include <needlefinder/source/types.hpp>

#include <cstdint>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace nf::check {

enum class PropertyKind { UserAssert, ArrayBound, NullDeref, Overflow };

std::string_view property_kind_name(PropertyKind kind);
PropertyKind property_kind_from_name(std::string_view name);

/// An integer, or a pointer into an object (element offset).
struct Value
{
  std::int64_t n = 0;
  std::int32_t obj = -1; // pointers: -1 is null
  bool ptr = false;

  static Value of(std::int64_t v) { return {v, -1, false}; }
  bool truthy() const { return ptr ? obj >= 0 : n != 0; }
};

/// A property failing at run time, located in the executed unit.
struct Violation
{
  PropertyKind kind = PropertyKind::UserAssert;
  std::string function;
  Location loc;
  std::string detail; // condition or access text
};

enum class StopKind { AssumeFailed, Violated, Trap, LoopCap };

/// Thrown to end the current execution path.
struct Stop
{
  StopKind kind = StopKind::Trap;
  Violation violation; // Violated
  std::string message; // Trap
  Location loc;
};

/// One nondeterministic choice: the value taken and its domain.
struct Choice
{
  std::string name;
  std::int64_t value = 0;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  bool operator==(const Choice &) const = default;
};

struct MachineOptions
{
  /// Calls to these report UserAssert when their argument is false.
  std::set<std::string> assert_macros = {"assert", "JS_ASSERT"};
  bool check_overflow = false;
  /// Functions with signed-overflow checks; empty means all but main.
  std::set<std::string> overflow_functions;
  /// Body iterations allowed per loop entry; 0 disables the cap.
  std::int64_t loop_cap = 0;
  std::int64_t max_steps = 50'000'000;
  int max_depth = 256;
};

class Program;

/// Lowers every function of `unit`. Functions outside the executable
/// subset are kept and trap when called.
std::shared_ptr<const Program> compile(const source::SourceUnit &unit,
                                       const MachineOptions &options = {});

/// Why a function could not be lowered, empty if it can run.
std::string unsupported_reason(const Program &program, const std::string &function);

class Machine
{
public:
  explicit Machine(std::shared_ptr<const Program> program);
  ~Machine();

  MachineOptions &options() { return options_; }

  /// Globals and global arrays back to their initial values.
  void reset();

  /// Runs a function. Throws Stop when the path ends early.
  Value call(const std::string &function, const std::vector<Value> &args = {});
  bool has_function(const std::string &function) const;

  /// A fresh array object; `size` cells, the first values.size() set.
  Value make_array(const std::vector<std::int64_t> &values, std::size_t size,
                   source::ScalarLayout element = {});
  std::vector<std::int64_t> read_array(Value pointer, std::size_t count) const;

  std::int64_t global(const std::string &name) const;
  void set_global(const std::string &name, std::int64_t value);
  bool has_global(const std::string &name) const;

  /// Nondet calls read choices[cursor++], appending a new choice at the
  /// low end of its domain when the vector runs out.
  std::vector<Choice> *choices = nullptr;
  std::size_t cursor = 0;

  /// Every if (Then or Else, also for a missing else) and every loop body
  /// iteration, located at the statement.
  std::function<void(const Location &, instrument::Arm)> on_arm;
  /// nf_trace() calls.
  std::function<void(const instrument::TraceRecord &)> on_trace;

  std::uint64_t steps() const { return steps_; }

private:
  struct Impl;
  friend struct Impl;
  std::shared_ptr<const Program> program_;
  MachineOptions options_;
  std::unique_ptr<Impl> impl_;
  std::uint64_t steps_ = 0;
};

} // namespace nf::check
