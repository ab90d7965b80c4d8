#pragma once

#include <needlefinder/check/property.hpp>
#include <needlefinder/instrument/instrument.hpp>
#include <needlefinder/invariant/invariant.hpp>

#include <json.hpp>

#include <map>
#include <set>
#include <string>
#include <vector>

namespace nf::check {

struct Domain
{
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  bool operator==(const Domain &) const = default;
};

/// A pointer parameter backed by a harness array of `size` cells, of
/// which the first `length` (a parameter name, or all when empty) are
/// symbolic.
struct ArraySpec
{
  std::int64_t size = 0;
  std::string length;
  bool operator==(const ArraySpec &) const = default;
};

struct HarnessConfig
{
  invariant::Dialect dialect = invariant::Dialect::Cbmc;
  /// Calls made by main, in order; the last one is checked.
  std::vector<std::string> call_sequence;
  /// Keyed by parameter name or symbolic name; arrays give element bounds.
  std::map<std::string, Domain> domains;
  std::map<std::string, ArraySpec> arrays;
  /// Asserted after the checked call; may use nf_result.
  std::string post_check;
  bool prefer_ranges = false;
  bool check_overflow = false;
  int unwind = 0; // 0: use the suggested schedule

  const std::string &target() const { return call_sequence.back(); }
  /// Throws Error on an empty sequence, an empty domain or unwind < 0.
  void validate() const;
  bool operator==(const HarnessConfig &) const = default;
};

void to_json(nlohmann::json &j, const HarnessConfig &c);
void from_json(const nlohmann::json &j, HarnessConfig &c);

struct SymbolicInput
{
  std::string name;     // as declared in main
  std::string function; // callee it is passed to
  std::string param;
  int call = 0;         // index into the call sequence
  std::string type;     // C spelling of the scalar or element type
  source::ScalarLayout layout;
  Domain domain;
  bool is_array = false;
  std::int64_t size = 0;
  std::string length; // symbolic name of the length input
};

struct HarnessSource
{
  std::string text;
  invariant::Dialect dialect = invariant::Dialect::Cbmc;
  std::string target;
  std::vector<SymbolicInput> inputs;
  std::vector<invariant::Invariant> invariants; // assumed, as given
  std::string assume_condition;                 // empty when nothing is assumed
  std::vector<Property> properties;             // of the target, in original coordinates
  Property post_property;                       // the final assert, if any
  bool has_post = false;
  bool check_overflow = false;
  instrument::InstrumentedSource unit;          // counters only
  std::size_t unit_offset = 0;                  // unit.text starts here in text
  std::size_t main_offset = 0;
};

/// The invariants of `all` that can be assumed before the checked call:
/// entry invariants over parameters of any call in the sequence, and exit
/// invariants of earlier calls over counters and return values.
std::vector<invariant::Invariant> select_invariants(const std::vector<invariant::Invariant> &all,
                                                    const source::SourceUnit &unit,
                                                    const HarnessConfig &cfg);

/// Builds the checker entry point around the counter-instrumented unit.
/// `io` must match the options used when the traces were collected so the
/// counter names line up. Throws UnrenderableInvariant.
HarnessSource generate_harness(const source::SourceUnit &unit,
                               const std::vector<invariant::Invariant> &invariants,
                               const std::vector<Property> &properties, const HarnessConfig &cfg,
                               const instrument::InstrumentOptions &io = {});

/// Keywords used by each dialect.
struct DialectWords
{
  std::string nondet_int;
  std::string nondet_long;
  std::string assume;
};
DialectWords dialect_words(invariant::Dialect d);

} // namespace nf::check
