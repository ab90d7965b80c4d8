#include "common.hpp"

#include <doctest.h>

#include <needlefinder/errors.hpp>
#include <needlefinder/instrument/instrument.hpp>

#include <regex>

using namespace nf;
using namespace nf::instrument;

namespace {

// counters incremented in the text, by regex, in text order
std::vector<std::string> increments(const std::string &text)
{
  std::vector<std::string> out;
  std::regex re(R"((br\d+) = (br\d+) \+ 1;)");
  for(auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it)
  {
    REQUIRE((*it)[1] == (*it)[2]);
    out.push_back((*it)[1]);
  }
  return out;
}

std::vector<int> branch_lines(const InstrumentedSource &inst, const std::string &fn)
{
  std::vector<std::pair<int, int>> by_counter;
  for(const auto &[id, p] : inst.point_map)
    if(p.function == fn && p.kind == "branch")
      by_counter.emplace_back(std::stoi(p.vars.at(0).substr(2)), p.locations.at(0).line);
  std::sort(by_counter.begin(), by_counter.end());
  std::vector<int> out;
  for(auto [_, line] : by_counter)
    out.push_back(line);
  return out;
}

const source::Stmt *first_if(const source::Stmt &s)
{
  if(s.kind == source::StmtKind::If)
    return &s;
  for(const auto &i : s.items)
    if(auto f = first_if(*i))
      return f;
  return nullptr;
}

const char *edge_src = R"(int g;
int straight(int a, int b)
{
    int c = a + b;
    return c * 2;
}
void dangle(int a, int b)
{
    if (a)
        if (b) g = 1; else g = 2;
    g = g + 1;
}
void noargs(void)
{
    g = 0;
}
int one_if(int x)
{
    if (x > 3) { g = x; }
    while (x > 0) x--;
    return x;
}
int early(int x)
{
    if (x) return 1;
    return 0;
}
)";

} // namespace

TEST_CASE("instrument: bintree counter numbering and arm positions")
{
  auto u = parse_corpus("bintree/bintree.c");
  InstrumentOptions o;
  o.exclude = {"repOK"};
  auto inst = inject_counters(u, o);

  // hand counts of leaf arms per function
  CHECK(inst.counters_by_function["add"] == std::vector<std::string>{"br0", "br1", "br2", "br3", "br4"});
  CHECK(inst.counters_by_function["new_node"].empty());
  CHECK(inst.counters_by_function["find"].size() == 5);
  CHECK(inst.counters_by_function["removeNode"].size() == 9);
  CHECK(inst.counters_by_function["remove"].size() == 5);
  CHECK(inst.counters_by_function["repOK"].empty());
  CHECK(inst.counter_decls.size() == 24);

  // add: root==-1 then, left-null then, left else, right-null then, right else
  CHECK(branch_lines(inst, "add") == std::vector<int>{35, 41, 44, 48, 51});
  // an else arm is anchored at its if
  CHECK(inst.point_map.at("add:branch:2").anchor.line == 41);
  CHECK(inst.point_map.at("add:branch:2").arm == Arm::Else);
  // numbering follows file order
  auto inc = increments(inst.text);
  REQUIRE(inc.size() == 24);
  for(std::size_t i = 0; i < inc.size(); ++i)
    CHECK(inc[i] == "br" + std::to_string(i));
}

TEST_CASE("instrument: bmh counters and entry observables")
{
  auto u = parse_corpus("bmh/bmh.c");
  InstrumentOptions o;
  o.functions = {"js_BoyerMooreHorspool"};
  auto inst = instrument::instrument(u, {}, o);
  CHECK(inst.counter_decls.size() == 4);
  CHECK(branch_lines(inst, "js_BoyerMooreHorspool") == std::vector<int>{28, 33, 41, 43});
  const auto &entry = inst.point_map.at("js_BoyerMooreHorspool:entry:0");
  CHECK(entry.vars == std::vector<std::string>{"textlen", "patlen", "start"});
  const auto &exit = inst.point_map.at("js_BoyerMooreHorspool:exit:0");
  CHECK(exit.vars == std::vector<std::string>{"br0", "br1", "br2", "br3", "__ret"});
  // three returns in the source
  CHECK(exit.locations.size() == 3);
  CHECK(inst.point_map.count("bmh_post:entry:0") == 0);
}

TEST_CASE("instrument: strip restores every corpus file")
{
  for(const char *rel : {"bintree/bintree.c", "bintree/bintree_fixed.c", "bmh/bmh.c", "bmh/bmh_bug.c",
                         "minutes/minutes.c", "triage/misc.c", "triage/strings.c", "triage/compiler.c"})
  {
    CAPTURE(rel);
    auto u = parse_corpus(rel);
    auto inst = instrument::instrument(u);
    CHECK(inst.text != inst.original);
    CHECK(strip(inst) == read_corpus(rel));
    CHECK(render(inst.original, inst.insertions) == inst.text);
    // counters alone round-trip too
    auto counters = inject_counters(u);
    CHECK(strip(counters) == read_corpus(rel));
    // the output is still in the supported subset
    CHECK_NOTHROW(source::parse_unit(inst.text, rel));
  }
}

TEST_CASE("instrument: leaf-arm rule on small functions")
{
  auto u = source::parse_unit(edge_src, "edge.c");
  auto inst = instrument::instrument(u);

  CHECK(inst.counters_by_function["straight"].empty());
  CHECK(inst.counters_by_function["noargs"].empty());
  // then + synthesized else + loop body
  CHECK(inst.counters_by_function["one_if"].size() == 3);
  // inner then, inner else, synthesized outer else
  CHECK(inst.counters_by_function["dangle"].size() == 3);
  // then arm returns: no synthesized else
  CHECK(inst.counters_by_function["early"].size() == 1);

  int synthesized = 0;
  for(const auto &[id, p] : inst.point_map)
    synthesized += p.synthesized;
  CHECK(synthesized == 2);

  // the synthesized else must attach to the outer if
  auto re = source::parse_unit(inst.text, "edge.c");
  const auto *fn = re.find_function("dangle");
  REQUIRE(fn);
  const auto *outer = first_if(*fn->body);
  REQUIRE(outer);
  REQUIRE(outer->else_body);
  CHECK(inst.text.substr(outer->else_body->loc.offset, outer->else_body->end - outer->else_body->loc.offset)
          .find(inst.counters_by_function["dangle"].back()) != std::string::npos);
}

TEST_CASE("instrument: probes")
{
  auto u = source::parse_unit(edge_src, "edge.c");
  auto inst = instrument::instrument(u);
  CHECK(inst.text.rfind(shim_prototype, 0) == 0);
  CHECK(inst.has_probes);

  CHECK(inst.text.find("return nf_exit_straight(c * 2);") != std::string::npos);
  CHECK(inst.point_map.at("straight:exit:0").vars == std::vector<std::string>{"__ret"});
  CHECK(inst.point_map.at("straight:entry:0").vars == std::vector<std::string>{"a", "b"});
  CHECK(inst.text.find("nf_trace(\"noargs:entry:0\", 0, 0, 0);") != std::string::npos);
  CHECK(inst.text.find("nf_exit_noargs(); }") != std::string::npos);
  CHECK(inst.point_map.at("dangle:exit:0").locations.at(0).line == 12);
  CHECK(inst.point_map.at("early:exit:0").locations.size() == 2);

  // per-call reset by default
  auto reset_at = inst.text.find("static void nf_enter_one_if");
  CHECK(inst.text.find("br3 = 0;", reset_at) != std::string::npos);

  InstrumentOptions per_test;
  per_test.reset = CounterReset::PerTest;
  auto pt = instrument::instrument(u, {}, per_test);
  auto at = pt.text.find("static void nf_enter_one_if");
  auto helper_end = pt.text.find("}", at);
  CHECK(pt.text.substr(at, helper_end - at).find("br3 = 0;") == std::string::npos);
  CHECK(strip(pt) == std::string(edge_src));

  // designated observables replace the defaults
  auto obs = instrument::instrument(u, {{"one_if", {"x", "g"}}});
  CHECK(obs.point_map.at("one_if:entry:0").vars == std::vector<std::string>{"x", "g"});
}

TEST_CASE("instrument: selection and errors")
{
  auto u = source::parse_unit(edge_src, "edge.c");
  InstrumentOptions o;
  o.functions = {"one_if"};
  auto inst = instrument::instrument(u, {}, o);
  CHECK(inst.functions == std::set<std::string>{"one_if"});
  CHECK(inst.counter_decls == std::vector<std::string>{"br0", "br1", "br2"});

  auto opaque = source::parse_unit("int f(int x) { asm(\"nop\"); return x; }\n", "o.c");
  REQUIRE(opaque.functions.at(0).opaque);
  InstrumentOptions want_f;
  want_f.functions = {"f"};
  CHECK_THROWS_AS(inject_counters(opaque, want_f), UnsupportedConstruct);
  // opaque functions are skipped when nothing is requested explicitly
  CHECK(strip(instrument::instrument(opaque)) == opaque.text);

  CHECK(point_id("add", "exit", 0) == "add:exit:0");
}
