#pragma once

#include <needlefinder/source/ast.hpp>

#include <memory>
#include <string>
#include <string_view>

namespace nf::source {

/// A typedef-free type over the kinds triage cares about. Qualifiers and
/// signedness are stripped; anything else (structs, floats, function
/// types, unknown names) is `Unresolved` carrying the original name.
class GroundType
{
public:
  enum class Kind { Int, Short, Long, Char, Void, Pointer, Array, Unresolved };

  static GroundType scalar(Kind kind);
  static GroundType pointer_to(GroundType element);
  static GroundType array_of(GroundType element, std::int64_t length);
  static GroundType unresolved(std::string name);

  Kind kind() const { return kind_; }
  bool is_scalar() const { return kind_ != Kind::Pointer && kind_ != Kind::Array; }
  /// Element type of a pointer or array.
  const GroundType &element() const { return *element_; }
  std::int64_t length() const { return length_; }
  const std::string &name() const { return name_; }

  /// The innermost non-pointer, non-array type.
  const GroundType &base() const;
  int indirection_depth() const;

  bool operator==(const GroundType &other) const;

private:
  Kind kind_ = Kind::Int;
  std::shared_ptr<const GroundType> element_;
  std::int64_t length_ = -1;
  std::string name_;
};

/// C type-name spelling that resolve_type() maps back to the same value.
std::string to_string(const GroundType &type);
std::string_view kind_name(GroundType::Kind kind);

/// Expands typedef chains and strips qualifiers. Throws TypedefCycle.
GroundType resolve_type(const TypeExpr &type, const SourceUnit &unit);
/// Parses `text` as a type name in the context of `unit`, then resolves it.
GroundType resolve_type(std::string_view text, const SourceUnit &unit);

/// Integer layout of a scalar C type, as the interpreter sees it.
struct ScalarLayout
{
  int bits = 32;
  bool is_unsigned = false;
  bool operator==(const ScalarLayout &) const = default;
};

/// Resolved type with signedness preserved, for execution.
struct ExecType
{
  bool is_void = false;
  bool is_function = false;
  bool unresolved = false;
  std::string unresolved_name;
  ScalarLayout scalar;
  /// Pointer/array layers from the base outward.
  std::vector<Derivation> derived;
};

ExecType resolve_exec_type(const TypeExpr &type, const SourceUnit &unit);

} // namespace nf::source
