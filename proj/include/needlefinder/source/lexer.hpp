#pragma once

#include <needlefinder/errors.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace nf::source {

enum class TokenKind { Identifier, Number, String, Char, Punct, End };

struct Token
{
  TokenKind kind = TokenKind::End;
  std::string text; // spelling; decoded contents for string literals
  std::int64_t value = 0;
  bool is_unsigned = false;
  bool is_long = false;
  Location loc;
  std::size_t end = 0; // offset one past the last source character

  bool is(std::string_view punct) const
  {
    return kind == TokenKind::Punct && text == punct;
  }
  bool is_ident(std::string_view name) const
  {
    return kind == TokenKind::Identifier && text == name;
  }
};

struct LexResult
{
  std::vector<Token> tokens; // always terminated by an End token
  /// Object-like integer macros that were substituted, by name.
  std::map<std::string, std::int64_t> defines;
  /// Directives that were skipped (includes, conditionals, function-like
  /// macros), kept for diagnostics.
  std::vector<std::string> skipped_directives;
};

/// Tokenizes C-subset text. `#define NAME <integer constant expression>`
/// lines are recorded and their uses substituted; other directives are
/// skipped. `extra_defines` behaves like leading `#define` lines.
LexResult lex(std::string_view text,
              const std::map<std::string, std::string> &extra_defines = {});

} // namespace nf::source
