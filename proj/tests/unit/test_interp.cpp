#include "common.hpp"

#include <doctest.h>

#include <needlefinder/check/interp.hpp>
#include <needlefinder/instrument/instrument.hpp>

#include <climits>
#include <random>

using namespace nf;
using namespace nf::check;

namespace {

Machine machine_for(const std::string &src, MachineOptions o = {})
{
  static std::vector<std::shared_ptr<source::SourceUnit>> keep;
  keep.push_back(std::make_shared<source::SourceUnit>(source::parse_unit(src, "t.c")));
  return Machine(compile(*keep.back(), o));
}

std::int64_t run(Machine &m, const std::string &fn, std::vector<std::int64_t> args = {})
{
  std::vector<Value> v;
  for(auto a : args)
    v.push_back(Value::of(a));
  return m.call(fn, v).n;
}

Stop stop_of(Machine &m, const std::string &fn, std::vector<std::int64_t> args = {})
{
  try
  {
    run(m, fn, std::move(args));
  }
  catch(const Stop &s)
  {
    return s;
  }
  FAIL("no stop");
  return {};
}

// first match of pat in text at or after start, chars compared as ints
std::int64_t naive_find(const std::vector<std::int64_t> &text, const std::vector<std::int64_t> &pat, std::int64_t start)
{
  for(std::int64_t k = start; k + static_cast<std::int64_t>(pat.size()) <= static_cast<std::int64_t>(text.size()); ++k)
  {
    bool ok = true;
    for(std::size_t j = 0; j < pat.size() && ok; ++j)
      ok = text[k + j] == pat[j];
    if(ok)
      return k;
  }
  return -1;
}

} // namespace

TEST_CASE("interp: integer semantics")
{
  auto m = machine_for(R"(
typedef unsigned char u8;
int add(int a, int b) { return a + b; }
int narrow(int x) { u8 c = (u8)x; return c; }
int shorts(int x) { short s = x; return s; }
int udiv(int a) { unsigned u = a; return u / 2; }
int mix(int a) { unsigned u = 1; return a < u; }
int cdiv(int a, int b) { return a / b; }
int cmod(int a, int b) { return a % b; }
long wide(int a) { long l = a; return l * 100000; }
int logic(int a, int b) { return (a && b) + 2 * (a || b) + 4 * !a; }
int incs(int a) { int b = a++; int c = ++a; return b * 100 + c * 10 + a; }
int tern(int a) { return a > 0 ? a : -a; }
int compound(int a) { a += 3; a *= 2; a -= 1; a <<= 1; a >>= 1; a %= 7; return a; }
int neg(int a) { return ~a + -a; }
)");
  CHECK(run(m, "add", {2, 3}) == 5);
  CHECK(run(m, "add", {INT_MAX, 1}) == INT_MIN); // wraps when unchecked
  CHECK(run(m, "narrow", {300}) == 44);
  CHECK(run(m, "narrow", {-1}) == 255);
  CHECK(run(m, "shorts", {40000}) == 40000 - 65536);
  CHECK(run(m, "udiv", {-2}) == static_cast<int>(static_cast<unsigned>(-2) / 2));
  CHECK(run(m, "mix", {-1}) == 0); // -1 converts to UINT_MAX
  CHECK(run(m, "cdiv", {-7, 2}) == -3);
  CHECK(run(m, "cmod", {-7, 2}) == -1);
  CHECK(run(m, "wide", {100000}) == 10000000000LL);
  for(int a : {0, 1})
    for(int b : {0, 1})
      CHECK(run(m, "logic", {a, b}) == ((a && b) + 2 * (a || b) + 4 * !a));
  CHECK(run(m, "incs", {5}) == 5 * 100 + 7 * 10 + 7);
  CHECK(run(m, "tern", {-4}) == 4);
  {
    int a = 9;
    a += 3;
    a *= 2;
    a -= 1;
    a <<= 1;
    a >>= 1;
    a %= 7;
    CHECK(run(m, "compound", {9}) == a);
  }
  CHECK(run(m, "neg", {5}) == ~5 + -5);
  CHECK(stop_of(m, "cdiv", {1, 0}).kind == StopKind::Trap);
}

TEST_CASE("interp: overflow checks")
{
  const char *src = R"(
int mul(int a) { return a * 60; }
int dec(int a) { a--; return a; }
int ok(unsigned a) { return a * 2u; }
int main(void) { int x = 2147483647; x = x + 1; return x; }
)";
  MachineOptions o;
  o.check_overflow = true;
  auto m = machine_for(src, o);
  CHECK(run(m, "mul", {1000}) == 60000);
  auto s = stop_of(m, "mul", {INT_MIN});
  CHECK(s.kind == StopKind::Violated);
  CHECK(s.violation.kind == PropertyKind::Overflow);
  CHECK(s.violation.function == "mul");
  CHECK(s.violation.detail == "a * 60");
  CHECK(stop_of(m, "dec", {INT_MIN}).violation.kind == PropertyKind::Overflow);
  // unsigned arithmetic never overflows
  CHECK_NOTHROW(run(m, "ok", {0x90000000LL}));
  // main is left out by default
  CHECK(run(m, "main") == INT_MIN);
  m.options().overflow_functions = {"main"};
  CHECK(stop_of(m, "main").violation.kind == PropertyKind::Overflow);
  CHECK(run(m, "mul", {INT_MIN}) == static_cast<int>(static_cast<unsigned>(INT_MIN) * 60u));
}

TEST_CASE("interp: memory checks on the corpus")
{
  auto u = parse_corpus("minutes/minutes.c");
  Machine m(compile(u));
  // minute 0 maps to q = 0 - 1 only for m == 1
  CHECK_NOTHROW(run(m, "quarter_load_at", {0}));
  auto s = stop_of(m, "quarter_load_at", {1});
  CHECK(s.violation.kind == PropertyKind::ArrayBound);
  CHECK(s.violation.loc.line == 16);
  CHECK(s.violation.detail == "quarter_load[q]");
  // the last minute of the day stays in range
  CHECK_NOTHROW(run(m, "quarter_load_at", {1439}));
  CHECK(stop_of(m, "quarter_load_at", {1440}).violation.kind == PropertyKind::ArrayBound);
}

TEST_CASE("interp: null and bound violations through pointers")
{
  auto m = machine_for(R"(
int first(int *p) { return *p; }
int at(int *p, int i) { return p[i]; }
void put(int *p, int i, int v) { p[i] = v; }
int walk(int *p, int n) { int s = 0; int *q = p; while (n > 0) { s = s + *q; q++; n--; } return s; }
)");
  auto null_stop = [&](const char *fn, std::vector<Value> args) {
    try
    {
      m.call(fn, args);
    }
    catch(const Stop &s)
    {
      return s.violation.kind;
    }
    return PropertyKind::UserAssert;
  };
  CHECK(null_stop("first", {Value{0, -1, true}}) == PropertyKind::NullDeref);
  Value arr = m.make_array({4, 5, 6}, 3);
  CHECK(m.call("at", {arr, Value::of(2)}).n == 6);
  CHECK(null_stop("at", {arr, Value::of(3)}) == PropertyKind::ArrayBound);
  CHECK(null_stop("at", {arr, Value::of(-1)}) == PropertyKind::ArrayBound);
  m.call("put", {arr, Value::of(0), Value::of(40)});
  CHECK(m.read_array(arr, 3) == std::vector<std::int64_t>{40, 5, 6});
  CHECK(m.call("walk", {arr, Value::of(3)}).n == 51);
  CHECK(null_stop("walk", {arr, Value::of(4)}) == PropertyKind::ArrayBound);
}

TEST_CASE("interp: bmh agrees with naive search")
{
  auto u = parse_corpus("bmh/bmh.c");
  Machine m(compile(u));
  REQUIRE(unsupported_reason(*compile(u), "js_BoyerMooreHorspool").empty());
  std::mt19937 rng(11);
  for(int trial = 0; trial < 2000; ++trial)
  {
    std::size_t tl = rng() % 7, pl = 1 + rng() % 3;
    std::vector<std::int64_t> text(tl), pat(pl);
    for(auto &c : text)
      c = rng() % 4;
    for(auto &c : pat)
      c = rng() % 4;
    std::int64_t start = rng() % 2;
    m.reset();
    Value t = m.make_array(text, 6, {16, true});
    Value p = m.make_array(pat, 3, {16, true});
    CAPTURE(trial);
    auto got = m.call("js_BoyerMooreHorspool",
                      {t, Value::of(static_cast<std::int64_t>(tl)), p, Value::of(static_cast<std::int64_t>(pl)),
                       Value::of(start)});
    CHECK(got.n == naive_find(text, pat, start));
    auto post = m.call("bmh_post", {t, Value::of(static_cast<std::int64_t>(tl)), p,
                                    Value::of(static_cast<std::int64_t>(pl)), Value::of(start), got});
    CHECK(post.n == 1);
  }
  // JS_ASSERT is an assertion
  m.reset();
  Value t = m.make_array({}, 6, {16, true});
  Value p = m.make_array({}, 3, {16, true});
  try
  {
    m.call("js_BoyerMooreHorspool", {t, Value::of(0), p, Value::of(0), Value::of(0)});
    FAIL("expected assertion");
  }
  catch(const Stop &s)
  {
    CHECK(s.violation.kind == PropertyKind::UserAssert);
    CHECK(s.violation.loc.line == 26);
  }
}

TEST_CASE("interp: observers and traces")
{
  auto u = parse_corpus("bmh/bmh.c");
  instrument::InstrumentOptions io;
  io.functions = {"js_BoyerMooreHorspool"};
  auto inst = instrument::instrument(u, {}, io);
  auto iu = source::parse_unit(inst.text, "bmh.c");
  Machine m(compile(iu));
  std::vector<instrument::TraceRecord> recs;
  m.on_trace = [&](const instrument::TraceRecord &r) { recs.push_back(r); };
  int arms = 0;
  m.on_arm = [&](const Location &, instrument::Arm) { ++arms; };
  Value t = m.make_array({0, 1, 2, 3, 1, 2}, 6, {16, true});
  Value p = m.make_array({1, 2}, 3, {16, true});
  auto r = m.call("js_BoyerMooreHorspool", {t, Value::of(6), p, Value::of(2), Value::of(0)});
  CHECK(r.n == 1);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].pp == "js_BoyerMooreHorspool:entry:0");
  CHECK(recs[0].vars == std::vector<std::pair<std::string, std::int64_t>>{{"textlen", 6}, {"patlen", 2}, {"start", 0}});
  CHECK(recs[1].pp == "js_BoyerMooreHorspool:exit:0");
  CHECK(recs[1].vars.back() == std::pair<std::string, std::int64_t>{"__ret", 1});
  // skip loop 4 times: br0 counts loop bodies
  CHECK(recs[1].vars[0] == std::pair<std::string, std::int64_t>{"br0", 4});
  CHECK(arms > 0);

  // each counted if has one arm event per evaluation
  auto plain = machine_for("int f(int x) { int n = 0; while (x > 0) { if (x % 2) n++; x--; } return n; }\n");
  int then_arms = 0, else_arms = 0, bodies = 0;
  plain.on_arm = [&](const Location &, instrument::Arm a) {
    then_arms += a == instrument::Arm::Then;
    else_arms += a == instrument::Arm::Else;
    bodies += a == instrument::Arm::Body;
  };
  CHECK(run(plain, "f", {7}) == 4);
  CHECK(bodies == 7);
  CHECK(then_arms == 4);
  CHECK(else_arms == 3);
}

TEST_CASE("interp: nondet choices and narrowing")
{
  auto m = machine_for(R"(
extern int nondet_int(void);
extern unsigned char nondet_uchar(void);
int main(void)
{
    int a[3];
    int i;
    int x;
    unsigned char c = nondet_uchar();
    x = nondet_int();
    __CPROVER_assume(0 <= x && x < 5);
    for (i = 0; i < 3; i++) {
        a[i] = nondet_int();
        __CPROVER_assume(a[i] >= -1 && 2 >= a[i]);
    }
    assert(x != 3 || a[1] != 2);
    return c;
}
)");
  std::vector<Choice> ch;
  m.choices = &ch;
  m.cursor = 0;
  CHECK(run(m, "main") == 0);
  REQUIRE(ch.size() == 5);
  CHECK(ch[0] == Choice{"c", 0, 0, 255});
  CHECK(ch[1] == Choice{"x", 0, 0, 4});
  CHECK(ch[2] == Choice{"a[0]", -1, -1, 2});
  CHECK(ch[3].name == "a[1]");
  CHECK(ch[4].name == "a[2]");

  ch = {{"c", 7, 0, 255}, {"x", 3, 0, 4}, {"a[0]", 0, -1, 2}, {"a[1]", 2, -1, 2}, {"a[2]", 0, -1, 2}};
  m.reset();
  m.choices = &ch;
  auto s = stop_of(m, "main");
  CHECK(s.kind == StopKind::Violated);
  CHECK(s.violation.kind == PropertyKind::UserAssert);
  CHECK(s.violation.detail == "x != 3 || a[1] != 2");

  // a failing assume ends the path
  ch = {{"c", 7, 0, 255}, {"x", 9, 0, 4}};
  m.reset();
  CHECK(stop_of(m, "main").kind == StopKind::AssumeFailed);
}

TEST_CASE("interp: loop cap, globals and unsupported code")
{
  MachineOptions o;
  o.loop_cap = 3;
  auto m = machine_for(R"(
int g = 5;
int arr[4] = {1, 2, 3};
struct s { int a; };
int loop(int n) { int i = 0; while (i < n) i++; return i; }
void bump(void) { g = g + 1; arr[3] = 9; }
int member(struct s *p) { return p->a; }
int calls_undefined(void) { return mystery(1); }
int uses_member(struct s *p) { return member(p); }
)",
                       o);
  CHECK(run(m, "loop", {3}) == 3);
  CHECK(stop_of(m, "loop", {4}).kind == StopKind::LoopCap);
  m.options().loop_cap = 0;
  CHECK(run(m, "loop", {100}) == 100);

  CHECK(m.global("g") == 5);
  run(m, "bump");
  CHECK(m.global("g") == 6);
  m.reset();
  CHECK(m.global("g") == 5);
  m.set_global("g", 1);
  CHECK(m.global("g") == 1);
  CHECK_FALSE(m.has_global("h"));

  CHECK(stop_of(m, "calls_undefined").kind == StopKind::Trap);
  auto member_stop = stop_of(m, "member", {0});
  CHECK(member_stop.kind == StopKind::Trap);
  CHECK(member_stop.message.find("struct") != std::string::npos);
  CHECK(stop_of(m, "uses_member", {0}).kind == StopKind::Trap);
  CHECK(stop_of(m, "nosuch").kind == StopKind::Trap);
}

TEST_CASE("interp: bintree operations")
{
  auto u = parse_corpus("bintree/bintree_fixed.c");
  Machine m(compile(u));
  for(const char *fn : {"add", "find", "remove", "repOK"})
    CHECK(unsupported_reason(*compile(u), fn).empty());
  // a small set model as the oracle
  std::set<std::int64_t> model;
  std::mt19937 rng(3);
  for(int i = 0; i < 300; ++i)
  {
    if(i % 20 == 0)
    {
      m.reset();
      model.clear();
    }
    std::int64_t v = rng() % 20;
    switch(rng() % 3)
    {
    case 0:
      run(m, "add", {v});
      model.insert(v);
      break;
    case 1: CHECK((run(m, "find", {v}) != 0) == (model.count(v) == 1)); break;
    case 2:
      run(m, "remove", {v});
      model.erase(v);
      break;
    }
    CHECK(run(m, "repOK") != 0);
  }
}
