#pragma once

#include <needlefinder/source/ast.hpp>

#include <map>
#include <string>
#include <string_view>

namespace nf::source {

struct ParseOptions
{
  /// Extra object-like macros, as from `--defines k=v`.
  std::map<std::string, std::string> defines;
};

/// Parses a translation unit in the supported C subset.
///
/// File-level syntax errors throw ParseError. A function whose body uses a
/// construct outside the subset (switch, goto, labels, ...) is kept with
/// `opaque` set instead of failing the unit. Typedef cycles throw
/// TypedefCycle.
SourceUnit parse_unit(std::string_view source_text, std::string path,
                      const ParseOptions &options = {});

/// Parses a C type name ("const jschar *", "int [4]") against the typedefs
/// of `unit`. Unknown leading identifiers are taken as type names.
TypeExpr parse_type_name(std::string_view text, const SourceUnit &unit);

/// Parses a standalone expression (used for configured check calls).
ExprPtr parse_expression(std::string_view text);

} // namespace nf::source
