#include "common.hpp"

#include <doctest.h>

#include <needlefinder/check/checker.hpp>
#include <needlefinder/errors.hpp>
#include <needlefinder/source/facts.hpp>

#include <array>
#include <fstream>
#include <functional>
#include <set>

using namespace nf;
using namespace nf::check;
using invariant::Form;
using invariant::Invariant;

namespace {

Invariant range(const std::string &pp, const std::string &var, std::int64_t lo, std::int64_t hi)
{
  Invariant i;
  i.pp = pp;
  i.form = Form::Range;
  i.var = var;
  i.lo = lo;
  i.hi = hi;
  return i;
}

HarnessConfig config(std::vector<std::string> seq, std::map<std::string, Domain> domains,
                     std::string post = "")
{
  HarnessConfig c;
  c.call_sequence = std::move(seq);
  c.domains = std::move(domains);
  c.post_check = std::move(post);
  return c;
}

std::vector<Property> properties_of(const source::SourceUnit &u, const std::string &fn, bool overflow = false)
{
  for(const auto &f : source::extract_facts(u))
    if(f.name == fn)
      return derive_properties(f, u, overflow);
  FAIL("no facts for " << fn);
  return {};
}

struct Built
{
  source::SourceUnit unit;
  HarnessSource h;
};

Built build(source::SourceUnit u, const HarnessConfig &cfg, const std::vector<Invariant> &inv = {},
            std::set<std::string> exclude = {})
{
  instrument::InstrumentOptions io;
  io.exclude = std::move(exclude);
  auto props = properties_of(u, cfg.target(), cfg.check_overflow);
  auto h = generate_harness(u, inv, props, cfg, io);
  return {std::move(u), std::move(h)};
}

Built bintree(const std::string &file, std::int64_t hi, const std::vector<Invariant> &inv = {})
{
  return build(parse_corpus("bintree/" + file),
               config({"add", "add", "add", "remove"}, {{"x", {0, hi}}}, "repOK()"), inv, {"repOK"});
}

std::string after_main(const std::string &text)
{
  auto at = text.find("int main(void)");
  REQUIRE(at != std::string::npos);
  return text.substr(at);
}

std::string fixture(const std::string &name)
{
  std::ifstream in(std::string(NF_FIXTURE_DIR) + "/bmc/" + name);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// pool-based BST written from the defect description, not from the C file:
// a right-only child that is a left child gets hung on the parent's right
struct ModelTree
{
  struct N
  {
    int v, l = -1, r = -1;
  };
  std::vector<N> pool;
  int root = -1, size = 0;
  bool buggy = true;

  void add(int x)
  {
    int fresh = static_cast<int>(pool.size());
    if(root == -1)
    {
      pool.push_back({x});
      root = fresh;
      ++size;
      return;
    }
    for(int cur = root;;)
    {
      if(pool[cur].v == x)
        return;
      int &next = x < pool[cur].v ? pool[cur].l : pool[cur].r;
      if(next == -1)
      {
        next = fresh;
        pool.push_back({x});
        ++size;
        return;
      }
      cur = next;
    }
  }

  void remove(int x)
  {
    int parent = -1, cur = root;
    while(cur != -1 && pool[cur].v != x)
    {
      parent = cur;
      cur = x < pool[cur].v ? pool[cur].l : pool[cur].r;
    }
    if(cur == -1)
      return;
    N &n = pool[cur];
    --size;
    if(n.l != -1 && n.r != -1)
    {
      int sp = cur, s = n.r;
      while(pool[s].l != -1)
        sp = s, s = pool[s].l;
      n.v = pool[s].v;
      (sp == cur ? pool[sp].r : pool[sp].l) = pool[s].r;
      return;
    }
    int child = n.l != -1 ? n.l : n.r;
    if(parent == -1)
      root = child;
    else if(pool[parent].l == cur)
      (buggy && n.r != -1 ? pool[parent].r : pool[parent].l) = child;
    else
      pool[parent].r = child;
  }

  bool ok() const
  {
    std::set<int> seen;
    std::function<bool(int, long, long)> walk = [&](int n, long lo, long hi) {
      if(n == -1)
        return true;
      if(!seen.insert(n).second || pool[n].v <= lo || pool[n].v >= hi)
        return false;
      return walk(pool[n].l, lo, pool[n].v) && walk(pool[n].r, pool[n].v, hi);
    };
    return walk(root, -1000000, 1000000) && static_cast<int>(seen.size()) == size;
  }
};

} // namespace

TEST_CASE("properties of minutes and bmh")
{
  auto mu = parse_corpus("minutes/minutes.c");
  auto mp = properties_of(mu, "quarter_load_at", true);
  REQUIRE(mp.size() == 3);
  CHECK(mp[0].kind == PropertyKind::Overflow);
  CHECK(mp[0].subject == "m * 60");
  CHECK(mp[0].loc.line == 12);
  CHECK(mp[1].kind == PropertyKind::Overflow);
  CHECK(mp[1].loc.line == 15);
  CHECK(mp[2].kind == PropertyKind::ArrayBound);
  CHECK(mp[2].condition == "0 <= q && q < 96");
  CHECK(describe(mp[2]) == "ArrayBound quarter_load[q]");
  CHECK(properties_of(mu, "quarter_load_at").size() == 1);

  auto bu = parse_corpus("bmh/bmh.c");
  auto bp = properties_of(bu, "js_BoyerMooreHorspool");
  REQUIRE(bp.size() == 8);
  CHECK(bp[0].kind == PropertyKind::UserAssert);
  CHECK(bp[0].subject == "JS_ASSERT");
  CHECK(bp[0].loc.line == 26);
  std::vector<std::string> subjects;
  for(std::size_t i = 1; i < bp.size(); ++i)
  {
    CHECK(bp[i].kind == PropertyKind::ArrayBound);
    subjects.push_back(describe(bp[i]));
  }
  CHECK(subjects == std::vector<std::string>{"ArrayBound skip[i]", "ArrayBound pat[i]", "ArrayBound skip[c]",
                                             "ArrayBound text[k]", "ArrayBound skip[c]", "ArrayBound text[i]",
                                             "ArrayBound pat[j]"});
  CHECK(bp[0].condition == "0 < patlen && patlen <= 3");
  CHECK(bp[5].loc.line == 38);
  CHECK(bp[1].condition == "0 <= i && i < 4");
  CHECK(bp[2].condition == "0 <= i && i < len(pat)");

  auto j = nlohmann::json(bp[3]);
  CHECK(j.at("index") == "c");
  CHECK(j.get<Property>().condition == bp[3].condition);
}

TEST_CASE("bintree harness shape")
{
  auto b = bintree("bintree.c", 19, {range("add:exit:0", "br1", 0, 2), range("add:exit:0", "br2", 0, 2)});
  CHECK(b.h.text.rfind("int nondet_int(void);\n", 0) == 0);
  CHECK(after_main(b.h.text) == "int main(void)\n"
                                "{\n"
                                "    int v1, v2, v3, v4; // symbolic inputs\n"
                                "\n"
                                "    v1 = nondet_int();\n"
                                "    __CPROVER_assume(0 <= v1 && v1 <= 19);\n"
                                "    v2 = nondet_int();\n"
                                "    __CPROVER_assume(0 <= v2 && v2 <= 19);\n"
                                "    v3 = nondet_int();\n"
                                "    __CPROVER_assume(0 <= v3 && v3 <= 19);\n"
                                "    v4 = nondet_int();\n"
                                "    __CPROVER_assume(0 <= v4 && v4 <= 19);\n"
                                "\n"
                                "    add(v1);\n"
                                "    add(v2);\n"
                                "    add(v3);\n"
                                "    __CPROVER_assume((0<=br1 && br1<=2) && (0<=br2 && br2<=2));\n"
                                "    remove(v4);\n"
                                "    assert(repOK());\n"
                                "    return 0;\n"
                                "}\n");
  CHECK(b.h.inputs.size() == 4);
  CHECK(b.h.inputs[3].function == "remove");
  CHECK(b.h.inputs[3].call == 3);
  CHECK(b.h.has_post);
  // counters only, no probes
  CHECK(b.h.text.find("nf_trace") == std::string::npos);
  CHECK(b.h.text.find("br1 = br1 + 1") != std::string::npos);

  auto plain = bintree("bintree.c", 19);
  CHECK(plain.h.assume_condition.empty());
  CHECK(after_main(plain.h.text).find("__CPROVER_assume((") == std::string::npos);
}

TEST_CASE("minutes harness assumes before the call")
{
  auto cfg = config({"quarter_load_at"}, {{"m", {INT32_MIN, INT32_MAX}}});
  cfg.check_overflow = true;
  auto b = build(parse_corpus("minutes/minutes.c"), cfg, {range("quarter_load_at:entry:0", "m", 0, 1439)});
  auto main = after_main(b.h.text);
  // the full int range needs no domain assume
  CHECK(main.find("m = nondet_int();\n\n    __CPROVER_assume((0<=m && m<=1439));\n    nf_result = quarter_load_at(m);") !=
        std::string::npos);
  CHECK(main.find("__CPROVER_assume(0 <= m") == std::string::npos);
  CHECK(main.find("nf_result = quarter_load_at(m);") != std::string::npos);
  CHECK(bmc_flags(b.h).find("--signed-overflow-check") != std::string::npos);

  cfg.check_overflow = false;
  auto nb = build(parse_corpus("minutes/minutes.c"), cfg);
  CHECK(bmc_flags(nb.h) == "--bounds-check --pointer-check");
}

TEST_CASE("svcomp dialect")
{
  auto cfg = config({"js_BoyerMooreHorspool"},
                    {{"text", {0, 3}}, {"pat", {0, 3}}, {"textlen", {0, 6}}, {"patlen", {1, 3}}, {"start", {0, 1}}},
                    "bmh_post(text, textlen, pat, patlen, start, nf_result)");
  cfg.arrays = {{"text", {6, "textlen"}}, {"pat", {3, "patlen"}}};
  cfg.dialect = invariant::Dialect::Svcomp;
  auto b = build(parse_corpus("bmh/bmh.c"), cfg, {}, {"bmh_post"});
  const auto &t = b.h.text;
  CHECK(t.find("extern unsigned short __VERIFIER_nondet_ushort(void);") != std::string::npos);
  CHECK(t.find("extern void __VERIFIER_assume(int cond);") != std::string::npos);
  CHECK(t.find("void JS_ASSERT(int cond)") != std::string::npos);
  CHECK(t.find("if (!(bmh_post(text, textlen, pat, patlen, start, nf_result))) reach_error();") !=
        std::string::npos);
  CHECK(t.find("__CPROVER") == std::string::npos);
  CHECK(t.find("for (nf_i = 0; nf_i < textlen; nf_i++)") != std::string::npos);
  CHECK(dialect_words(invariant::Dialect::Svcomp).assume == "__VERIFIER_assume");

  // a correct unit stays clean under the svcomp spelling too
  auto r = exhaustive_check(b.h, {.unwind = 7});
  CHECK(r.verdict == Verdict::ExhaustedClean);
}

TEST_CASE("harness rejects what it cannot express")
{
  auto u = parse_corpus("bintree/bintree.c");
  auto cfg = config({"add", "add", "add", "remove"}, {{"x", {0, 19}}}, "repOK()");
  CHECK_THROWS_AS(generate_harness(u, {range("remove:exit:0", "br1", 0, 2)}, {}, cfg), UnrenderableInvariant);
  CHECK_THROWS_AS(generate_harness(u, {range("add:branch:1", "x", 0, 2)}, {}, cfg), UnrenderableInvariant);

  auto sel = select_invariants({range("remove:exit:0", "br1", 0, 2), range("add:branch:1", "x", 0, 2),
                                range("add:exit:0", "br2", 0, 2), range("find:entry:0", "x", 0, 5),
                                range("remove:entry:0", "x", 1, 3)},
                               u, cfg);
  REQUIRE(sel.size() == 2);
  CHECK(sel[0].pp == "add:exit:0");
  CHECK(sel[1].pp == "remove:entry:0");

  auto bad = config({"js_BoyerMooreHorspool"}, {{"textlen", {0, 8}}, {"patlen", {1, 3}}});
  bad.arrays = {{"text", {6, "textlen"}}, {"pat", {3, "patlen"}}};
  CHECK_THROWS_AS(generate_harness(parse_corpus("bmh/bmh.c"), {}, {}, bad), Error);

  CHECK_THROWS_AS(config({}, {}).validate(), Error);
  CHECK_THROWS_AS(config({"f"}, {{"x", {3, 1}}}).validate(), Error);
  CHECK_THROWS_AS(generate_harness(source::parse_unit("int main(void) { return 0; }", "m.c"), {}, {},
                                   config({"main"}, {})),
                  Error);

  auto j = nlohmann::json(cfg);
  CHECK(j.get<HarnessConfig>() == cfg);
  j["target"] = "add";
  CHECK_THROWS(j.get<HarnessConfig>());
}

TEST_CASE("suggested unwind schedules")
{
  auto bt = parse_corpus("bintree/bintree.c");
  std::vector<std::string> seq{"add", "add", "add", "remove"};
  CHECK(suggest_unwind(bt, seq, {range("add:exit:0", "br1", 0, 2), range("add:exit:0", "br2", 0, 2)}) ==
        std::vector<int>{3, 6, 12, 16});
  CHECK(suggest_unwind(bt, seq, {}) == std::vector<int>{2, 4, 8, 16});

  auto bmh = parse_corpus("bmh/bmh.c");
  std::vector<std::string> one{"js_BoyerMooreHorspool"};
  CHECK(suggest_unwind(bmh, one, {range("js_BoyerMooreHorspool:entry:0", "patlen", 1, 3)}).front() == 4);
  CHECK(suggest_unwind(bmh, one,
                       {range("js_BoyerMooreHorspool:entry:0", "patlen", 1, 3),
                        range("js_BoyerMooreHorspool:entry:0", "textlen", 0, 6)}) == std::vector<int>{7, 14, 16});
  // start flows into k, so it counts; past the cap only the cap is left
  CHECK(suggest_unwind(bmh, one, {range("js_BoyerMooreHorspool:entry:0", "start", 0, 40)}) == std::vector<int>{16});
}

TEST_CASE("bintree counterexample matches the brute-force model")
{
  // first violating tuple in lexicographic order over [0,3]^4
  std::optional<std::array<int, 4>> first;
  int violating = 0;
  for(int t = 0; t < 256; ++t)
  {
    std::array<int, 4> v{t >> 6, (t >> 4) & 3, (t >> 2) & 3, t & 3};
    ModelTree m;
    m.add(v[0]);
    m.add(v[1]);
    m.add(v[2]);
    m.remove(v[3]);
    if(!m.ok())
    {
      ++violating;
      if(!first)
        first = v;
    }
  }
  REQUIRE(first);
  CHECK(*first == std::array<int, 4>{2, 0, 1, 0});

  auto b = bintree("bintree.c", 3);
  auto r = exhaustive_check(b.h);
  REQUIRE(r.verdict == Verdict::Counterexample);
  CHECK(r.witness.values == std::map<std::string, std::int64_t>{{"v1", 2}, {"v2", 0}, {"v3", 1}, {"v4", 0}});
  REQUIRE(r.property);
  CHECK(r.property->kind == PropertyKind::UserAssert);
  CHECK(r.property->condition == "repOK()");
  CHECK(r.stats.paths == 2 * 64 + 4 + 1); // tuples up to and including 2,0,1,0

  auto v = replay(b.h, r.witness);
  REQUIRE(v);
  CHECK(v->kind == PropertyKind::UserAssert);

  // every violating tuple is reported when the checker keeps going
  CheckOptions all;
  all.stop_on_violation = false;
  auto ra = exhaustive_check(b.h, all);
  CHECK(ra.verdict == Verdict::Counterexample);
  CHECK(ra.stats.violations == static_cast<std::uint64_t>(violating));
  CHECK(ra.stats.completed + ra.stats.violations == 256);

  // the model without the defect is clean, and so is the fixed unit
  for(int t = 0; t < 256; ++t)
  {
    ModelTree m;
    m.buggy = false;
    m.add(t >> 6);
    m.add((t >> 4) & 3);
    m.add((t >> 2) & 3);
    m.remove(t & 3);
    CHECK(m.ok());
  }
  CHECK(exhaustive_check(bintree("bintree_fixed.c", 3).h).verdict == Verdict::ExhaustedClean);
}

TEST_CASE("assumed invariants shrink the explored set exactly")
{
  const char *src = "int g;\n"
                    "int f(int x, int y)\n"
                    "{\n"
                    "    int a[8];\n"
                    "    a[x + y] = 1;\n"
                    "    return a[y];\n"
                    "}\n";
  auto u = source::parse_unit(src, "f.c");
  auto cfg = config({"f"}, {{"x", {0, 3}}, {"y", {0, 3}}});

  Invariant lin;
  lin.pp = "f:entry:0";
  lin.form = Form::Linear;
  lin.var = "y";
  lin.x = "x";
  lin.a = 2;
  lin.b = -1;
  std::vector<std::pair<std::vector<Invariant>, std::function<bool(int, int)>>> cases = {
    {{}, [](int, int) { return true; }},
    {{range("f:entry:0", "x", 1, 2)}, [](int x, int) { return 1 <= x && x <= 2; }},
    {{lin}, [](int x, int y) { return y == 2 * x - 1; }},
    {{range("f:entry:0", "x", 1, 3), lin}, [](int x, int y) { return x >= 1 && y == 2 * x - 1; }},
  };
  for(const auto &[inv, keep] : cases)
  {
    auto h = generate_harness(u, inv, properties_of(u, "f"), cfg);
    std::vector<std::vector<Choice>> explored;
    CheckOptions o;
    o.stop_on_violation = false;
    auto r = exhaustive_check(h, o, &explored);
    CHECK(r.verdict == Verdict::ExhaustedClean);
    std::set<std::pair<std::int64_t, std::int64_t>> got, want;
    for(const auto &path : explored)
    {
      REQUIRE(path.size() == 2);
      CHECK(path[0].name == "x");
      got.insert({path[0].value, path[1].value});
    }
    for(int x = 0; x <= 3; ++x)
      for(int y = 0; y <= 3; ++y)
        if(keep(x, y))
          want.insert({x, y});
    CHECK(got == want);
    CHECK(explored.size() == want.size());
  }
}

TEST_CASE("verdicts other than counterexample")
{
  const char *src = "int count_up(int n)\n"
                    "{\n"
                    "    int i = 0;\n"
                    "    while (i < n)\n"
                    "        i = i + 1;\n"
                    "    return i;\n"
                    "}\n"
                    "int ratio(int d)\n"
                    "{\n"
                    "    return 100 / d;\n"
                    "}\n";
  auto u = source::parse_unit(src, "v.c");
  auto h = generate_harness(u, {}, {}, config({"count_up"}, {{"n", {0, 10}}}));
  auto capped = exhaustive_check(h, {.unwind = 3});
  CHECK(capped.verdict == Verdict::VerifiedToBound);
  CHECK(capped.stats.cut == 7);
  CHECK(capped.unwind == 3);
  CHECK(exhaustive_check(h, {.unwind = 10}).verdict == Verdict::ExhaustedClean);

  auto sched = run_schedule(h, {2, 4, 8, 16});
  CHECK(sched.verdict == Verdict::ExhaustedClean);
  CHECK(sched.unwind == 16);
  CHECK(sched.schedule == std::vector<int>{2, 4, 8, 16});
  auto short_sched = run_schedule(h, {2, 4});
  CHECK(short_sched.verdict == Verdict::VerifiedToBound);
  CHECK(short_sched.unwind == 4);

  auto out = exhaustive_check(h, {.budget = 5});
  CHECK(out.verdict == Verdict::ResourceOut);
  CHECK(out.stats.paths == 5);

  auto div = generate_harness(u, {}, {}, config({"ratio"}, {{"d", {0, 2}}}));
  auto err = exhaustive_check(div);
  CHECK(err.verdict == Verdict::ToolError);
  CHECK(err.message.find("division by zero") != std::string::npos);

  for(auto v : {Verdict::Counterexample, Verdict::ExhaustedClean, Verdict::VerifiedToBound, Verdict::ResourceOut,
                Verdict::ToolError})
    CHECK(verdict_from_name(verdict_name(v)) == v);
  CHECK_THROWS(verdict_from_name("Maybe"));
}

TEST_CASE("minutes verdicts grow with the domain")
{
  auto with = [](Domain d, bool overflow, std::vector<Invariant> inv = {}) {
    auto cfg = config({"quarter_load_at"}, {{"m", d}});
    cfg.check_overflow = overflow;
    return exhaustive_check(build(parse_corpus("minutes/minutes.c"), cfg, inv).h);
  };
  auto raw = with({INT32_MIN, INT32_MAX}, true);
  REQUIRE(raw.verdict == Verdict::Counterexample);
  CHECK(raw.property->kind == PropertyKind::Overflow);
  CHECK(raw.property->loc.line == 12);
  CHECK(raw.witness.values.at("m") == INT32_MIN);

  auto assumed = with({INT32_MIN, INT32_MAX}, true, {range("quarter_load_at:entry:0", "m", 0, 1439)});
  REQUIRE(assumed.verdict == Verdict::Counterexample);
  CHECK(assumed.property->kind == PropertyKind::ArrayBound);
  CHECK(assumed.property->loc.line == 16);
  CHECK(assumed.witness.values.at("m") == 1);

  CHECK(with({0, 0}, false).verdict == Verdict::ExhaustedClean);
  for(std::int64_t hi : {1, 5, 1439})
  {
    auto r = with({0, hi}, false);
    CHECK(r.verdict == Verdict::Counterexample);
    CHECK(r.witness.values.at("m") == 1);
  }

  auto j = nlohmann::json(assumed);
  CHECK(j.at("verdict") == "Counterexample");
  auto back = j.get<CheckResult>();
  CHECK(back.witness == assumed.witness);
  CHECK(back.property->condition == assumed.property->condition);
  CHECK(nlohmann::json(with({0, 0}, false)).contains("witness") == false);
}

TEST_CASE("external checker transcripts")
{
  // the transcript was taken on the harness with the counter assume
  auto b = bintree("bintree.c", 19, {range("add:exit:0", "br1", 0, 2), range("add:exit:0", "br2", 0, 2)});
  auto r = parse_bmc_output(fixture("bintree_failed.txt"), 10, &b.h);
  CHECK(r.verdict == Verdict::Counterexample);
  CHECK(r.backend == "external");
  CHECK(r.witness.values == std::map<std::string, std::int64_t>{{"v1", 2}, {"v2", 0}, {"v3", 1}, {"v4", 0}});
  REQUIRE(r.property);
  CHECK(r.property->kind == PropertyKind::UserAssert);
  CHECK(r.property->loc.line == b.h.post_property.loc.line);
  CHECK(r.property->condition == "repOK()");
  // the internal checker agrees on the witness
  auto v = replay(b.h, r.witness);
  REQUIRE(v);
  CHECK(v->kind == PropertyKind::UserAssert);

  auto bb = parse_bmc_output(fixture("bmh_bounds_failed.txt"), 10);
  CHECK(bb.verdict == Verdict::Counterexample);
  CHECK(bb.violation.kind == PropertyKind::ArrayBound);
  CHECK(bb.violation.function == "js_BoyerMooreHorspool");
  CHECK(bb.violation.loc.line == 40);
  CHECK(bb.witness.values ==
        std::map<std::string, std::int64_t>{{"textlen", 3}, {"text[0]", 1}, {"text[2]", 3}, {"patlen", -1}});

  CHECK(parse_bmc_output(fixture("successful.txt"), 0).verdict == Verdict::VerifiedToBound);
  CHECK(parse_bmc_output(fixture("unwinding_failed.txt"), 10).verdict == Verdict::VerifiedToBound);

  auto junk = parse_bmc_output(fixture("garbage.txt"), 6);
  CHECK(junk.verdict == Verdict::ToolError);
  CHECK(junk.message.find("PARSING ERROR") != std::string::npos);

  auto missing = parse_bmc_output("sh: 1: cbmc: not found\n", 127);
  CHECK(missing.verdict == Verdict::ToolError);
  CHECK(missing.message.rfind("NotFound", 0) == 0);
  CHECK(parse_bmc_output("", 1).message.rfind("NotFound", 0) == 0);
  CHECK(parse_bmc_output("partial", 124).verdict == Verdict::ResourceOut);
}

TEST_CASE("external checker process")
{
  auto b = bintree("bintree.c", 19);
  BmcOptions o;
  o.command = "cat '" + std::string(NF_FIXTURE_DIR) + "/bmc/bintree_failed.txt'; test -n {file} && exit 10";
  o.unwind = 5;
  auto r = run_external_bmc("/tmp/nf_harness.c", b.h, o);
  CHECK(r.verdict == Verdict::Counterexample);
  CHECK(r.unwind == 5);
  CHECK(r.witness.values.at("v1") == 2);

  o.command = "nf-no-such-checker {file} --unwind {unwind} {flags}";
  auto nf = run_external_bmc("/tmp/nf_harness.c", b.h, o);
  CHECK(nf.verdict == Verdict::ToolError);
  CHECK(nf.message.rfind("NotFound", 0) == 0);

  o.command = "sleep 5";
  o.timeout_seconds = 1;
  CHECK(run_external_bmc("/tmp/nf_harness.c", b.h, o).verdict == Verdict::ResourceOut);
}
