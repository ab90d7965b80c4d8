#pragma once

#include <needlefinder/errors.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace nf::source {

/// One step of a C declarator, applied from the base type outward:
/// `char *names[3]` is {Pointer, Array(3)}.
struct Derivation
{
  enum class Kind { Pointer, Array, Function };
  Kind kind = Kind::Pointer;
  std::int64_t length = -1; // arrays; -1 when unspecified
  bool operator==(const Derivation &) const = default;
};

/// A type as written: declaration specifiers plus declarator derivations.
struct TypeExpr
{
  /// Specifier words in source order, e.g. {"const", "jschar"} or
  /// {"struct", "node"}. Storage classes are not included.
  std::vector<std::string> specifiers;
  std::vector<Derivation> derived;
  bool operator==(const TypeExpr &) const = default;
};

/// Renders a type-expression as C type-name text ("const jschar *").
std::string to_string(const TypeExpr &type);

enum class ExprKind {
  IntLit,
  StrLit,
  Ident,
  Unary,   // op: - + ! ~ * &
  Binary,  // arithmetic, relational, logical
  Assign,  // op: = += -= ...
  Conditional,
  Call,    // args[0] is the callee
  Index,   // args[0][args[1]]
  Member,  // op: . or ->; name is the member
  Cast,
  SizeofType,
  SizeofExpr,
  Comma,
  PreInc,
  PreDec,
  PostInc,
  PostDec,
  InitList
};

struct Expr
{
  ExprKind kind = ExprKind::IntLit;
  Location loc;
  std::size_t end = 0;
  std::string op;
  std::string name;   // identifiers, members, string literal contents
  std::int64_t value = 0;
  bool is_unsigned = false;
  bool is_long = false;
  std::vector<std::unique_ptr<Expr>> args;
  std::optional<TypeExpr> type; // casts and sizeof(type)
};
using ExprPtr = std::unique_ptr<Expr>;

struct VarDecl
{
  std::string name;
  TypeExpr type;
  ExprPtr init;
  Location loc;
  bool is_static = false;
  bool is_extern = false;
};

enum class StmtKind { Compound, Decl, Expr, If, While, DoWhile, For, Return, Break, Continue, Empty };

struct Stmt
{
  StmtKind kind = StmtKind::Empty;
  Location loc;       // first token; '{' for compounds
  std::size_t end = 0; // one past the last token; past '}' for compounds
  std::vector<std::unique_ptr<Stmt>> items; // Compound
  std::vector<VarDecl> decls;               // Decl
  ExprPtr expr;  // Expr, Return value, condition of If/While/DoWhile/For
  std::unique_ptr<Stmt> init; // For
  ExprPtr step;               // For
  std::unique_ptr<Stmt> body; // then-branch of If; body of loops
  std::unique_ptr<Stmt> else_body;
};
using StmtPtr = std::unique_ptr<Stmt>;

struct Param
{
  std::string name; // may be empty in prototypes
  TypeExpr type;
  Location loc;
};

struct FunctionDef
{
  std::string name;
  TypeExpr return_type;
  std::vector<Param> params;
  bool variadic = false;
  bool is_static = false;
  Location loc;           // the function name
  std::size_t begin = 0;  // first token of the definition
  std::size_t end = 0;    // one past the closing brace
  std::size_t body_open = 0;  // offset of '{'
  std::size_t body_close = 0; // offset of '}'
  StmtPtr body;           // null when opaque
  bool opaque = false;
  std::string opaque_reason;
  Location opaque_loc;
};

struct FunctionDecl
{
  std::string name;
  TypeExpr return_type;
  std::vector<Param> params;
  Location loc;
};

struct SourceUnit
{
  std::string path;
  std::string text;
  std::vector<FunctionDef> functions;
  std::vector<FunctionDecl> prototypes;
  std::map<std::string, TypeExpr> typedefs;
  std::vector<VarDecl> globals;
  /// Integer constants: substituted macros and enumerators.
  std::map<std::string, std::int64_t> constants;
  std::set<std::string> struct_tags;

  const FunctionDef *find_function(const std::string &name) const;
};

/// Canonical structural dump, used to compare parses.
std::string dump(const SourceUnit &unit);
std::string dump(const Expr &expr);

/// C text of an expression, normalized (used for conditions in reports).
std::string to_c(const Expr &expr);

/// Folds an integer constant expression; nullopt if it is not constant.
std::optional<std::int64_t> fold_constant(const Expr &expr,
                                          const std::map<std::string, std::int64_t> &constants);

} // namespace nf::source
