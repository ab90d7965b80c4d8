#pragma once

#include <needlefinder/source/ast.hpp>
#include <needlefinder/source/types.hpp>

#include <set>
#include <string>
#include <vector>

namespace nf::source {

struct TypedName
{
  std::string name;
  GroundType type;
  std::string spelled; // the type as written
};

struct AssertSite
{
  Location loc;
  std::string macro;
  std::string condition; // C text of the first argument
};

struct DerefSite
{
  enum class Kind { Index, Star, Arrow };
  Kind kind = Kind::Index;
  Location loc;
  std::string base;  // C text of the pointer/array operand
  std::string index; // Index only
  bool is_write = false;
};

struct CallRef
{
  std::string callee; // empty when the target is an expression
  Location loc;
};

struct FunctionFacts
{
  std::string name;
  std::string path;
  Location loc;
  GroundType return_type;
  std::vector<TypedName> params;
  std::vector<TypedName> locals;
  std::vector<TypedName> reads_globals;
  std::vector<AssertSite> assert_sites;
  std::vector<DerefSite> deref_sites;
  int loop_count = 0;
  int max_loop_nesting = 0;
  bool is_recursive = false;
  std::vector<std::string> callees; // direct callees by name, sorted, unique
  std::vector<CallRef> call_sites;  // every call except assert macros
  bool opaque = false;
  std::string opaque_reason;
};

struct FactsOptions
{
  std::set<std::string> assert_macros = {"assert", "JS_ASSERT"};
};

/// Static facts for every function in `unit`, in source order.
/// `is_recursive` is only set for direct self-calls; build_call_graph()
/// and mark_recursion() give the full answer.
std::vector<FunctionFacts> extract_facts(const SourceUnit &unit, const FactsOptions &options = {});

std::string_view deref_kind_name(DerefSite::Kind kind);

} // namespace nf::source
