#pragma once

#include <needlefinder/check/interp.hpp>
#include <needlefinder/source/facts.hpp>

#include <json.hpp>

#include <string>
#include <vector>

namespace nf::check {

struct Property
{
  PropertyKind kind = PropertyKind::UserAssert;
  std::string function;
  Location loc;
  std::string subject;   // array, pointer or expression text
  std::string index;     // ArrayBound only
  std::string condition; // what must hold
  bool operator==(const Property &) const = default;
};

/// One UserAssert per assert site, one ArrayBound per indexed access, one
/// NullDeref per pointer dereference, and Overflow per signed arithmetic
/// operator when `check_overflow` is set. Ordered by source offset.
std::vector<Property> derive_properties(const source::FunctionFacts &facts, const source::SourceUnit &unit,
                                        bool check_overflow = false);

/// "ArrayBound quarter_load[q]" style label.
std::string describe(const Property &p);

void to_json(nlohmann::json &j, const Property &p);
void from_json(const nlohmann::json &j, Property &p);

} // namespace nf::check
