#include "common.hpp"

#include <doctest.h>

#include <needlefinder/errors.hpp>
#include <needlefinder/instrument/trace.hpp>
#include <needlefinder/pipeline/driver.hpp>
#include <needlefinder/pipeline/pipeline.hpp>

#include <filesystem>
#include <unistd.h>

using namespace nf;
using namespace nf::pipeline;
namespace fs = std::filesystem;

namespace {

struct TempDir
{
  fs::path path;
  explicit TempDir(const std::string &tag)
  {
    path = fs::temp_directory_path() / ("nf_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string &rel) const { return (path / rel).string(); }
};

void write(const std::string &path, const std::string &text)
{
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream(path) << text;
}

std::string slurp(const std::string &path)
{
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Manifest corpus()
{
  return load_manifest(corpus_path("corpus.json"));
}

instrument::InstrumentedSource probed(const Manifest &m, const Fixture &f, const std::string &rel)
{
  auto unit = source::parse_unit(slurp(m.path_of(rel)), rel);
  instrument::InstrumentOptions io;
  io.exclude = {f.oracles.begin(), f.oracles.end()};
  return instrument::instrument(unit, {}, io);
}

DriverResult drive(const instrument::InstrumentedSource &inst, const DriverSpec &spec, std::string &trace)
{
  std::ostringstream out;
  auto r = run_in_process(inst, spec, out);
  trace = out.str();
  return r;
}

} // namespace

TEST_CASE("corpus manifest")
{
  auto m = corpus();
  REQUIRE(m.fixtures.size() == 3);
  const auto *bt = m.find("bintree");
  REQUIRE(bt);
  CHECK(bt->driver.kind == DriverKind::RandomOps);
  CHECK(bt->driver.seed == 20);
  CHECK(bt->driver.num_tests == 5000);
  CHECK(bt->driver.max_len == 4);
  CHECK(bt->driver.value_lo == 0);
  CHECK(bt->driver.value_hi == 20);
  REQUIRE(bt->targets.size() == 1);
  CHECK(bt->targets[0].call_sequence == std::vector<std::string>{"add", "add", "add", "remove"});
  CHECK(bt->bug.witness.at("v1") == 2);
  CHECK(m.find("bmh")->driver.cases.size() == 8);
  CHECK(m.find("minutes")->driver.extra == std::vector<std::int64_t>{1439});
  CHECK(m.labels.size() == 20);
  for(const auto &l : m.labels)
    CHECK(!l.rationale.empty());
  CHECK(fs::exists(m.path_of(bt->sources[0])));

  CHECK_THROWS_AS(load_manifest("/nonexistent/corpus.json"), IoError);
  CHECK_THROWS_AS(parse_manifest(nlohmann::json::parse(R"({"fixtures":[{"name":"x","sources":[],
                  "driver":{"kind":"fuzz"}}]})"), "."),
                  FormatError);
  CHECK_THROWS_AS(parse_manifest(nlohmann::json::parse(R"({"schema_version":2})"), "."), FormatError);
  CHECK_THROWS_AS(parse_manifest(nlohmann::json::parse(R"({"fixtures":[{"name":"x","sources":[]},
                  {"name":"x","sources":[]}]})"), "."),
                  FormatError);

  auto d = bt->driver;
  CHECK(nlohmann::json(d).get<DriverSpec>().ops == d.ops);
}

TEST_CASE("random_ops driver")
{
  auto m = corpus();
  const auto &bt = *m.find("bintree");
  auto inst = probed(m, bt, bt.sources[0]);
  auto spec = bt.driver;

  spec.num_tests = 0;
  std::string trace;
  auto none = drive(inst, spec, trace);
  CHECK(none.tests == 0);
  CHECK(trace.empty());

  spec.num_tests = 300;
  std::string a, b, c;
  auto ra = drive(inst, spec, a);
  drive(inst, spec, b);
  CHECK(a == b);
  CHECK(ra.calls == 300 * 4);
  CHECK(ra.failure_count == 0);
  spec.seed = 21;
  drive(inst, spec, c);
  CHECK(a != c);

  // each add is logged once at entry and once at exit, in call order
  std::istringstream in(a);
  auto store = instrument::ingest(in);
  CHECK(store.record_count("add:entry:0") == store.record_count("add:exit:0"));
  CHECK(store.record_count("add:entry:0") + store.record_count("remove:entry:0") +
            store.record_count("find:entry:0") ==
        ra.calls);

  // long sequences reach the defect
  spec.num_tests = 200;
  spec.max_len = 50;
  auto deep = drive(inst, spec, c);
  CHECK(deep.failure_count > 0);
  REQUIRE(!deep.failures.empty());
  CHECK(deep.failures[0].reason == "repOK returned 0");
  CHECK(deep.failures.size() <= 20);

  // the same sequences on the fixed tree never fail
  auto fixed = probed(m, bt, bt.fixed_sources[0]);
  CHECK(drive(fixed, spec, c).failure_count == 0);
}

TEST_CASE("cases and sweep drivers")
{
  auto m = corpus();
  const auto &bmh = *m.find("bmh");
  std::string trace;
  auto ok = drive(probed(m, bmh, bmh.sources[0]), bmh.driver, trace);
  CHECK(ok.tests == 8);
  CHECK(ok.failure_count == 0);
  CHECK(ok.records == 16);
  CHECK(trace.find(R"({"pp":"js_BoyerMooreHorspool:entry:0","vars":{"textlen":6,"patlen":2,"start":0}})") !=
        std::string::npos);

  auto bug = drive(probed(m, bmh, bmh.bug_sources[0]), bmh.driver, trace);
  CHECK(bug.failure_count > 0);
  CHECK(bug.failures[0].reason.find("bmh_post returned 0") != std::string::npos);
  CHECK(bug.failures[0].calls.rfind("js_BoyerMooreHorspool([0,1,2,3,0,1], 6, [2,3], 2, 0)", 0) == 0);

  const auto &mn = *m.find("minutes");
  auto sw = drive(probed(m, mn, mn.sources[0]), mn.driver, trace);
  CHECK(sw.tests == 289);
  CHECK(sw.failure_count == 0);
  std::istringstream in(trace);
  auto store = instrument::ingest(in);
  const auto *entry = store.find("quarter_load_at:entry:0");
  REQUIRE(entry);
  std::vector<std::int64_t> want;
  for(int v = 0; v <= 1435; v += 5)
    want.push_back(v);
  want.push_back(1439);
  CHECK(entry->columns.at("m") == want);

  auto spec = mn.driver;
  spec.extra = {1};
  CHECK(drive(probed(m, mn, mn.sources[0]), spec, trace).failure_count == 1);
}

TEST_CASE("command driver")
{
  TempDir dir("cmd");
  auto trace = dir / "t.trace";
  auto r = run_command(R"(printf '{"pp":"f:entry:0","vars":{}}\n' > "$NF_TRACE_FILE")", trace);
  CHECK(r.exit_code == 0);
  CHECK(r.failure_count == 0);
  CHECK(slurp(trace) == "{\"pp\":\"f:entry:0\",\"vars\":{}}\n");

  auto failed = run_command("echo boom; exit 3", trace);
  CHECK(failed.exit_code == 3);
  CHECK(failed.failure_count == 1);
  CHECK(failed.output == "boom\n");

  DriverOptions o;
  o.source_path = dir / "it's.c";
  write(o.source_path, "int x;\n");
  CHECK(run_command("test -f {source}", trace, o).exit_code == 0);

  DriverSpec spec;
  spec.command = "true";
  instrument::InstrumentedSource inst;
  std::ostringstream out;
  CHECK_THROWS_AS(run_in_process(inst, spec, out), Error);
}

TEST_CASE("report rendering")
{
  Report empty;
  empty.tally();
  auto j = nlohmann::json::parse(render_json(empty));
  CHECK(j.at("schema_version") == report_schema_version);
  CHECK(j.at("functions").empty());
  CHECK(j.at("incomplete") == false);
  CHECK(exit_code(empty) == 0);

  Report r;
  FunctionReport bug;
  bug.fixture = "bintree";
  bug.triage.function = "remove";
  bug.triage.decision = triage::Decision::Accept;
  bug.triage.score = 0.64;
  check::CheckResult cr;
  cr.verdict = check::Verdict::Counterexample;
  cr.unwind = 3;
  cr.witness.choices = {{"v1", 2, 0, 19}, {"v2", 0, 0, 19}};
  cr.witness.values = {{"v1", 2}, {"v2", 0}};
  check::Property p;
  p.kind = check::PropertyKind::UserAssert;
  p.function = "main";
  p.condition = "repOK()";
  p.subject = "assert";
  p.loc.line = 249;
  cr.property = p;
  cr.stats.ms = 123;
  bug.check = cr;
  bug.classification = classify(cr);
  FunctionReport rejected;
  rejected.fixture = "bintree";
  rejected.triage.function = "a_rejected";
  rejected.triage.reasons = {{"NO_SPEC", "", ""}};
  rejected.skip_reason = "rejected: NO_SPEC";
  FunctionReport clean;
  clean.fixture = "bmh";
  clean.triage.function = "bmh";
  clean.triage.decision = triage::Decision::Accept;
  clean.triage.score = 0.64;
  check::CheckResult ok;
  ok.verdict = check::Verdict::ExhaustedClean;
  clean.check = ok;
  clean.classification = classify(ok);
  r.functions = {rejected, clean, bug};
  rank(r.functions);
  r.tally();
  CHECK(r.functions[0].triage.function == "remove"); // ties go to the likely bug
  CHECK(r.functions[2].triage.function == "a_rejected");
  CHECK(r.summary.likely_bugs == 1);
  CHECK(r.summary.clean_to_bound == 1);
  CHECK(r.summary.skipped == 1);
  CHECK(exit_code(r) == 1);

  auto md = render_markdown(r);
  CHECK(md.find("| 1 | remove | bintree | 0.64 | likely-bug | Counterexample (unwind 3) | UserAssert repOK() at "
                "harness line 249 | v1=2, v2=0 |") != std::string::npos);
  std::size_t rows = 0;
  for(std::size_t at = md.find("likely-bug |"); at != std::string::npos; at = md.find("likely-bug |", at + 1))
    ++rows;
  CHECK(rows == 1);

  auto text = render_json(r);
  CHECK(text.find("\"ms\"") == std::string::npos);
  auto back = nlohmann::json::parse(text).get<Report>();
  CHECK(render_json(back) == text);

  check::CheckResult err;
  err.verdict = check::Verdict::ToolError;
  err.message = "NotFound: cbmc";
  std::string reason;
  CHECK(classify(err, &reason) == Classification::Skipped);
  CHECK(reason == "ToolError: NotFound: cbmc");

  r.incomplete = true;
  r.failed_stage = "trace";
  r.failure = "boom";
  auto partial = nlohmann::json::parse(render_json(r));
  CHECK(partial.at("incomplete") == true);
  CHECK(partial.at("failure").at("stage") == "trace");
  CHECK(exit_code(r) == 2);
  CHECK(render_markdown(r).find("**Incomplete:**") != std::string::npos);
}

TEST_CASE("pipeline on the minutes fixture")
{
  TempDir dir("pipe");
  PipelineConfig cfg;
  cfg.manifest = corpus_path("corpus.json");
  cfg.fixtures = {"minutes"};
  cfg.out_dir = dir / "out";
  auto r = run_pipeline(cfg);
  CHECK_FALSE(r.incomplete);
  REQUIRE(r.functions.size() == 1);
  const auto &f = r.functions[0];
  CHECK(f.classification == Classification::LikelyBug);
  REQUIRE(f.check);
  CHECK(f.check->property->kind == check::PropertyKind::ArrayBound);
  CHECK(f.check->witness.values.at("m") == 1);
  REQUIRE(f.invariants.size() == 1);
  CHECK(f.invariants[0].var == "m");
  CHECK(r.traces.at(0).tests == 289);
  for(const auto *a : {"minutes/triage.json", "minutes/instrument/minutes.c", "minutes/nf.trace",
                       "minutes/invariants.json", "minutes/harness/quarter_load_at.c",
                       "minutes/check/quarter_load_at.json"})
    CHECK_MESSAGE(fs::exists(dir / ("out/" + std::string(a))), a);
  write_report(r, cfg.out_dir);
  auto first = slurp(dir / "out/report.json");

  // resumed and rebuilt runs agree byte for byte
  fs::remove(dir / "out/minutes/invariants.json");
  write_report(run_pipeline(cfg), cfg.out_dir);
  CHECK(slurp(dir / "out/report.json") == first);
  cfg.resume = false;
  write_report(run_pipeline(cfg), cfg.out_dir);
  CHECK(slurp(dir / "out/report.json") == first);

  // the checked-in trace is what the driver writes
  cfg.checked_in_traces = true;
  cfg.out_dir = dir / "checked";
  auto rc = run_pipeline(cfg);
  CHECK(rc.traces.at(0).source == "checked-in");
  CHECK(slurp(dir / "checked/minutes/nf.trace") == slurp(corpus_path("traces/minutes.trace")));
  CHECK(slurp(dir / "out/minutes/nf.trace") == slurp(corpus_path("traces/minutes.trace")));
}

TEST_CASE("pipeline edge cases")
{
  TempDir dir("edge");
  write(dir / "plain.c", "int add1(int x)\n{\n    return x + 1;\n}\n");
  write(dir / "broken.c", "int f(int x {\n");
  PipelineConfig cfg;
  cfg.sources = {dir / "plain.c", dir / "broken.c"};
  cfg.out_dir = dir / "out";
  auto r = run_pipeline(cfg);
  CHECK_FALSE(r.incomplete);
  CHECK(r.summary.files == 2);
  CHECK(r.summary.parse_failures == 1);
  CHECK(r.summary.accepted == 0);
  CHECK(r.summary.checked == 0);
  REQUIRE(r.functions.size() == 1);
  CHECK(r.functions[0].skip_reason == "rejected: NO_SPEC");
  CHECK(exit_code(r) == 0);

  // a driver naming a missing function fails the trace stage
  auto manifest = nlohmann::json::parse(slurp(corpus_path("corpus.json")));
  auto &mj = manifest["fixtures"][2];
  mj["driver"]["function"] = "no_such_function";
  mj["sources"] = {corpus_path("minutes/minutes.c")};
  write(dir / "m/corpus.json", manifest.dump());
  PipelineConfig bad;
  bad.manifest = dir / "m/corpus.json";
  bad.fixtures = {"minutes"};
  bad.out_dir = dir / "bad";
  auto partial = run_pipeline(bad);
  CHECK(partial.incomplete);
  CHECK(partial.failed_stage == "trace");
  REQUIRE(partial.functions.size() == 1);
  CHECK(partial.functions[0].classification == Classification::Skipped);
  CHECK(exit_code(partial) == 2);
  CHECK(nlohmann::json::parse(render_json(partial)).at("incomplete") == true);

  // the per-run limit truncates
  PipelineConfig capped;
  capped.manifest = corpus_path("corpus.json");
  capped.fixtures = {"bintree"};
  capped.out_dir = dir / "capped";
  capped.max_functions = 2;
  capped.targets = {};
  auto rc = run_pipeline(capped);
  CHECK(rc.summary.truncated == rc.summary.accepted - 2);
  CHECK(rc.summary.truncated > 0);

  PipelineConfig nothing;
  CHECK_THROWS_AS(run_pipeline(nothing), Error);
  nothing.sources = {"x.c"};
  nothing.backend = "cbmc";
  CHECK_THROWS_AS(run_pipeline(nothing), Error);
}
