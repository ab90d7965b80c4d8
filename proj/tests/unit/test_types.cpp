#include "common.hpp"

#include <doctest.h>

#include <needlefinder/source/types.hpp>

using namespace nf::source;
using K = GroundType::Kind;

namespace {

SourceUnit typedef_unit()
{
  return parse_unit("typedef unsigned short uint16;\n"
                    "typedef unsigned char uint8;\n"
                    "typedef uint16 jschar;\n"
                    "typedef jschar *jsstr;\n"
                    "typedef int vec3[3];\n"
                    "typedef struct JSRuntime JSRuntime;\n",
                    "t.c");
}

} // namespace

TEST_CASE("types: const jschar * is pointer to short")
{
  auto u = typedef_unit();
  CHECK(resolve_type("const jschar *", u) == GroundType::pointer_to(GroundType::scalar(K::Short)));
  CHECK(resolve_type("jsstr", u) == GroundType::pointer_to(GroundType::scalar(K::Short)));
}

TEST_CASE("types: identity and qualifiers")
{
  auto u = typedef_unit();
  CHECK(resolve_type("int", u) == GroundType::scalar(K::Int));
  CHECK(resolve_type("unsigned long long", u) == GroundType::scalar(K::Long));
  CHECK(resolve_type("signed char", u) == GroundType::scalar(K::Char));
  CHECK(resolve_type("const volatile unsigned", u) == GroundType::scalar(K::Int));
  CHECK(resolve_type("void *", u) == GroundType::pointer_to(GroundType::scalar(K::Void)));
}

TEST_CASE("types: unknown and struct names stay verbatim")
{
  auto u = typedef_unit();
  GroundType t = resolve_type("JSCompiler *", u);
  REQUIRE(t.kind() == K::Pointer);
  CHECK(t.element() == GroundType::unresolved("JSCompiler"));
  CHECK(resolve_type("JSRuntime *", u) ==
        GroundType::pointer_to(GroundType::unresolved("struct JSRuntime")));
  CHECK(resolve_type("float", u) == GroundType::unresolved("float"));
}

TEST_CASE("types: arrays through typedefs")
{
  auto u = typedef_unit();
  CHECK(resolve_type("uint8 [4]", u) == GroundType::array_of(GroundType::scalar(K::Char), 4));
  GroundType v = resolve_type("vec3 *", u);
  CHECK(v == GroundType::pointer_to(GroundType::array_of(GroundType::scalar(K::Int), 3)));
  CHECK(v.indirection_depth() == 2);
  CHECK(v.base() == GroundType::scalar(K::Int));
}

TEST_CASE("types: rendering round-trips through resolve_type")
{
  auto u = typedef_unit();
  std::vector<GroundType> samples = {
    GroundType::scalar(K::Int),
    GroundType::scalar(K::Char),
    GroundType::pointer_to(GroundType::scalar(K::Short)),
    GroundType::array_of(GroundType::pointer_to(GroundType::scalar(K::Char)), 3),
    GroundType::pointer_to(GroundType::array_of(GroundType::scalar(K::Char), 3)),
    GroundType::pointer_to(GroundType::pointer_to(GroundType::scalar(K::Long))),
    GroundType::pointer_to(GroundType::unresolved("JSCompiler")),
    GroundType::array_of(GroundType::array_of(GroundType::scalar(K::Int), 2), 5),
  };
  for(const auto &t : samples)
  {
    CAPTURE(to_string(t));
    CHECK(resolve_type(to_string(t), u) == t);
  }
  CHECK(to_string(samples[3]) == "char *[3]");
  CHECK(to_string(samples[4]) == "char (*)[3]");
}

TEST_CASE("types: typedef cycle raised by resolve_type")
{
  SourceUnit u;
  u.typedefs["A"] = TypeExpr{{"B"}, {}};
  u.typedefs["B"] = TypeExpr{{"A"}, {}};
  CHECK_THROWS_AS(resolve_type("A", u), nf::TypedefCycle);
}

TEST_CASE("types: exec layout keeps signedness and width")
{
  auto u = typedef_unit();
  ExecType t = resolve_exec_type(parse_type_name("jschar", u), u);
  CHECK(t.scalar == ScalarLayout{16, true});
  ExecType c = resolve_exec_type(parse_type_name("char", u), u);
  CHECK(c.scalar == ScalarLayout{8, false});
  ExecType p = resolve_exec_type(parse_type_name("const uint8 *", u), u);
  CHECK(p.scalar == ScalarLayout{8, true});
  REQUIRE(p.derived.size() == 1);
  CHECK(p.derived[0].kind == Derivation::Kind::Pointer);
}
