#pragma once

#include <needlefinder/instrument/trace.hpp>

#include <json.hpp>

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace nf::invariant {

enum class Form { Constant, OneOf, Range, NonZero, Linear };

/// Checker input dialect; it decides keywords, not condition syntax.
enum class Dialect { Cbmc, Svcomp };

struct Invariant
{
  std::string pp;
  Form form = Form::Constant;
  std::string var;                  // y for Linear
  std::int64_t value = 0;           // Constant
  std::vector<std::int64_t> values; // OneOf, ascending
  std::int64_t lo = 0, hi = 0;      // Range
  std::string x;                    // Linear: var == a*x + b
  std::int64_t a = 0, b = 0;
  std::size_t support = 0;

  /// Variables the invariant mentions.
  std::vector<std::string> variables() const;
  bool operator==(const Invariant &) const = default;
};

struct InferenceConfig
{
  std::size_t one_of_cap = 3;
  std::size_t min_support = 5;
  std::set<Form> enabled = {Form::Constant, Form::OneOf, Form::Range, Form::NonZero,
                            Form::Linear};
  std::int64_t linear_max_a = 16;
  std::int64_t linear_max_b = std::int64_t{1} << 20;
};

/// Invariants holding on every sample at `pp`, sorted deterministically.
/// Throws InsufficientSupport when the point has fewer than min_support
/// records.
std::vector<Invariant> infer(const instrument::SampleStore &store, const std::string &pp,
                             const InferenceConfig &cfg = {});

/// infer() over every point whose function is in `functions` (all when
/// empty); points below min_support are listed in `skipped`.
std::vector<Invariant> infer_all(const instrument::SampleStore &store,
                                 const InferenceConfig &cfg = {},
                                 const std::set<std::string> &functions = {},
                                 std::vector<std::string> *skipped = nullptr);

/// C boolean expression, e.g. `(0<=br1 && br1<=2)`. Names are mapped
/// through `rename` when present.
std::string render_condition(const Invariant &inv, Dialect dialect = Dialect::Cbmc,
                             const std::map<std::string, std::string> &rename = {});

/// Range(min, max) of a OneOf; other forms are returned unchanged.
Invariant widen_to_range(const Invariant &inv);

/// Evaluates the invariant on one sample; variables missing from the
/// sample make it false.
bool holds(const Invariant &inv, const std::map<std::string, std::int64_t> &sample);

std::string_view form_name(Form form);
Form form_from_name(std::string_view name);
std::string_view dialect_name(Dialect d);
Dialect dialect_from_name(std::string_view name);

/// Function part of a program point id.
std::string point_function(const std::string &pp);
std::string point_kind(const std::string &pp);

void to_json(nlohmann::json &j, const Invariant &inv);
void from_json(const nlohmann::json &j, Invariant &inv);

} // namespace nf::invariant
