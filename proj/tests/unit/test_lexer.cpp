#include <doctest.h>

#include <needlefinder/source/lexer.hpp>

using namespace nf::source;

TEST_CASE("lexer: punctuation and numbers")
{
  auto r = lex("x += 0x1F >> 2; y = 'a';");
  std::vector<std::string> texts;
  for(const auto &t : r.tokens)
    texts.push_back(t.text);
  CHECK(texts == std::vector<std::string>{"x", "+=", "0x1F", ">>", "2", ";", "y", "=", "'a'", ";", ""});
  CHECK(r.tokens[2].value == 31);
  CHECK(r.tokens[8].value == 97);
  CHECK(r.tokens.back().kind == TokenKind::End);
}

TEST_CASE("lexer: define substitution keeps use-site location")
{
  auto r = lex("#define N (2 * 3)\nint a[N];\n");
  REQUIRE(r.defines.count("N"));
  CHECK(r.defines.at("N") == 6);
  // The body is spliced in token by token at the use site.
  CHECK(r.tokens[3].is("("));
  const Token &n = r.tokens[4];
  CHECK(n.kind == TokenKind::Number);
  CHECK(n.value == 2);
  CHECK(n.loc.line == 2);
  CHECK(n.loc.column == 7);
  CHECK(r.tokens[7].is(")"));
  CHECK(r.tokens[8].is("]"));
}

TEST_CASE("lexer: other directives are skipped")
{
  auto r = lex("#include <stdio.h>\n#define F(x) x\n#ifdef A\nint b;\n#endif\n");
  CHECK(r.skipped_directives.size() == 4);
  CHECK(r.tokens.size() == 4); // int b ; End
}

TEST_CASE("lexer: comments and strings")
{
  auto r = lex("/* a */ f(\"x\\ny\"); // tail\n");
  CHECK(r.tokens[0].text == "f");
  CHECK(r.tokens[2].kind == TokenKind::String);
  CHECK(r.tokens[2].text == "x\ny");
}

TEST_CASE("lexer: extra defines")
{
  auto r = lex("int a[SIZE];", {{"SIZE", "8"}});
  CHECK(r.tokens[3].value == 8);
}

TEST_CASE("lexer: unterminated comment is an error")
{
  CHECK_THROWS_AS(lex("int a; /* open"), nf::ParseError);
}
