#include <needlefinder/errors.hpp>
#include <needlefinder/instrument/instrument.hpp>
#include <needlefinder/instrument/trace.hpp>
#include <needlefinder/pipeline/driver.hpp>
#include <needlefinder/pipeline/pipeline.hpp>
#include <needlefinder/source/facts.hpp>
#include <needlefinder/source/parser.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace nf::pipeline {

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string &path)
{
  std::ifstream in(path, std::ios::binary);
  if(!in)
    throw IoError(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path &path, const std::string &text)
{
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if(!out)
    throw IoError(path.string());
  out << text;
  if(!out)
    throw IoError(path.string());
}

nlohmann::json read_json(const fs::path &path)
{
  try
  {
    return nlohmann::json::parse(read_file(path.string()));
  }
  catch(const nlohmann::json::exception &e)
  {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string dump(const nlohmann::json &j)
{
  return j.dump(2) + "\n";
}

template <class F>
auto stage(const std::string &name, F &&body) -> decltype(body())
{
  try
  {
    return body();
  }
  catch(const StageFailure &)
  {
    throw;
  }
  catch(const std::exception &e)
  {
    throw StageFailure(name, e.what());
  }
}

struct Unit
{
  std::string path; // as reported
  source::SourceUnit unit;
  instrument::InstrumentedSource probed;
};

struct FixtureRun
{
  const PipelineConfig &cfg;
  const Fixture &fx;
  std::function<std::string(const std::string &)> resolve;
  fs::path dir;
  Report &report;
  std::size_t &budget_left; // accepted functions still allowed

  std::vector<Unit> units;
  std::vector<triage::TriageVerdict> verdicts;
  std::vector<invariant::Invariant> invariants;
  instrument::InstrumentOptions io;
  std::vector<FunctionReport> entries;

  bool reuse(const fs::path &p) const { return cfg.resume && fs::exists(p); }

  Unit *unit_defining(const std::string &fn)
  {
    for(auto &u : units)
      if(const auto *f = u.unit.find_function(fn); f && !f->opaque)
        return &u;
    return nullptr;
  }

  std::vector<check::HarnessConfig> targets() const
  {
    auto all = fx.targets;
    all.insert(all.end(), cfg.targets.begin(), cfg.targets.end());
    return all;
  }

  void parse()
  {
    for(const auto &rel : fx.sources)
    {
      FileReport file{fx.name, rel, ""};
      try
      {
        units.push_back({rel, source::parse_unit(read_file(resolve(rel)), rel), {}});
      }
      catch(const Error &e)
      {
        file.error = e.what();
      }
      report.files.push_back(file);
    }
    io.exclude = {fx.oracles.begin(), fx.oracles.end()};
  }

  void do_triage()
  {
    auto path = dir / "triage.json";
    if(reuse(path))
    {
      verdicts = read_json(path).at("verdicts").get<std::vector<triage::TriageVerdict>>();
      return;
    }
    std::vector<source::SourceUnit> copies;
    for(const auto &u : units)
      copies.push_back(source::parse_unit(u.unit.text, u.path));
    std::set<std::string> oracles(fx.oracles.begin(), fx.oracles.end());
    for(auto &v : triage::triage_corpus(copies, cfg.triage))
      if(!oracles.count(v.function))
        verdicts.push_back(std::move(v));
    write_file(path, dump({{"schema_version", report_schema_version}, {"verdicts", verdicts}}));
  }

  void do_instrument()
  {
    nlohmann::json points = nlohmann::json::object();
    for(auto &u : units)
    {
      u.probed = instrument::instrument(u.unit, {}, io);
      auto out = dir / "instrument" / fs::path(u.path).filename();
      if(!reuse(out))
        write_file(out, u.probed.text);
      for(const auto &[id, p] : u.probed.point_map)
        points[id] = {{"function", p.function}, {"kind", p.kind}, {"vars", p.vars}, {"source", u.path}};
    }
    auto pp = dir / "instrument" / "points.json";
    if(!reuse(pp))
      write_file(pp, dump(points));
  }

  void do_trace()
  {
    auto trace_path = dir / "nf.trace";
    auto meta_path = dir / "trace.json";
    TraceReport t;
    t.fixture = fx.name;
    if(reuse(trace_path) && reuse(meta_path))
    {
      auto j = read_json(meta_path);
      t.source = j.value("source", "");
      t.tests = j.value("tests", std::size_t{0});
      t.failures = j.value("failures", std::size_t{0});
      t.first_failure = j.value("first_failure", "");
      report.traces.push_back(t);
      return;
    }

    DriverSpec spec = fx.driver;
    bool has_driver = !spec.command.empty() || spec.kind != DriverKind::Command;
    if(!cfg.test_command.empty())
    {
      spec = {};
      spec.kind = DriverKind::Command;
      spec.command = cfg.test_command;
      has_driver = true;
    }
    if(cfg.seed && spec.kind == DriverKind::RandomOps)
      spec.seed = *cfg.seed;

    if(cfg.checked_in_traces && !fx.trace.empty() && fs::exists(resolve(fx.trace)))
    {
      write_file(trace_path, read_file(resolve(fx.trace)));
      t.source = "checked-in";
    }
    else if(!has_driver || units.empty())
    {
      write_file(trace_path, "");
      t.source = "none";
    }
    else
    {
      std::string fn = spec.kind == DriverKind::RandomOps ? spec.ops.front() : spec.function;
      Unit *u = spec.kind == DriverKind::Command ? &units.front() : unit_defining(fn);
      if(!u)
        throw Error("driver calls '" + fn + "', which no source defines");
      DriverOptions o;
      o.machine.assert_macros = cfg.triage.assert_macro_names;
      o.source_path = fs::absolute(dir / "instrument" / fs::path(u->path).filename()).string();
      auto r = run_driver(u->probed, spec, trace_path.string(), o);
      t.source = std::string(driver_kind_name(spec.kind));
      t.tests = r.tests;
      t.failures = r.failure_count;
      if(!r.failures.empty())
        t.first_failure = r.failures.front().calls + " -> " + r.failures.front().reason;
    }
    write_file(meta_path, dump({{"source", t.source},
                                {"tests", t.tests},
                                {"failures", t.failures},
                                {"first_failure", t.first_failure}}));
    report.traces.push_back(t);
  }

  std::set<std::string> inferred_functions() const
  {
    std::set<std::string> fns;
    for(const auto &v : verdicts)
      if(v.decision == triage::Decision::Accept)
        fns.insert(v.function);
    for(const auto &t : targets())
      fns.insert(t.call_sequence.begin(), t.call_sequence.end());
    return fns;
  }

  void do_infer()
  {
    auto path = dir / "invariants.json";
    auto &t = report.traces.back();
    if(reuse(path))
    {
      auto j = read_json(path);
      invariants = j.at("invariants").get<std::vector<invariant::Invariant>>();
      t.records = j.value("records", std::size_t{0});
      t.malformed = j.value("malformed", std::size_t{0});
      t.skipped_points = j.value("skipped_points", std::vector<std::string>{});
      return;
    }
    instrument::IngestStats stats;
    auto store = instrument::ingest_file((dir / "nf.trace").string(), {}, &stats);
    std::set<std::string> fns;
    if(!cfg.infer_all_points)
    {
      fns = inferred_functions();
      if(fns.empty())
        fns.insert(""); // nothing to infer
    }
    std::vector<std::string> skipped;
    invariants = invariant::infer_all(store, cfg.inference, fns, &skipped);
    t.records = stats.records;
    t.malformed = stats.malformed;
    t.skipped_points = skipped;
    write_file(path, dump({{"records", stats.records},
                           {"malformed", stats.malformed},
                           {"skipped_points", skipped},
                           {"invariants", invariants}}));
  }

  check::CheckResult check_target(const Unit &u, const check::HarnessSource &h, const check::HarnessConfig &t,
                                   const std::vector<invariant::Invariant> &assumed, const fs::path &harness_path)
  {
    std::vector<int> schedule;
    if(t.unwind > 0)
      schedule = {t.unwind};
    else if(cfg.unwind > 0)
      schedule = {cfg.unwind};
    else
      schedule = check::suggest_unwind(u.unit, t.call_sequence, assumed, cfg.unwind_cap);

    check::CheckResult r;
    if(cfg.backend == "external")
    {
      for(int k : schedule)
      {
        auto b = cfg.bmc;
        b.unwind = k;
        r = check::run_external_bmc(fs::absolute(harness_path).string(), h, b);
        if(r.verdict != check::Verdict::VerifiedToBound)
          break;
      }
      r.schedule = schedule;
    }
    else
    {
      check::CheckOptions o;
      o.budget = cfg.budget;
      o.machine.assert_macros = cfg.triage.assert_macro_names;
      r = check::run_schedule(h, schedule, o);
    }
    r.stats.ms = 0;
    return r;
  }

  void check_function(FunctionReport &e, const check::HarnessConfig &t)
  {
    Unit *u = unit_defining(t.target());
    if(!u)
    {
      e.skip_reason = "no source defines '" + t.target() + "'";
      return;
    }
    std::vector<check::Property> props;
    for(const auto &f : source::extract_facts(u->unit))
      if(f.name == t.target())
        props = check::derive_properties(f, u->unit, t.check_overflow);

    auto assumed = stage("harness", [&] { return check::select_invariants(invariants, u->unit, t); });
    check::HarnessSource h;
    try
    {
      h = check::generate_harness(u->unit, assumed, props, t, io);
    }
    catch(const Error &err)
    {
      e.skip_reason = std::string("harness: ") + err.what();
      return;
    }
    e.invariants = h.invariants;
    auto base = dir / "harness" / t.target();
    stage("harness", [&] {
      if(!reuse(base.string() + ".c"))
        write_file(base.string() + ".c", h.text);
      if(!reuse(base.string() + ".json"))
        write_file(base.string() + ".json", dump({{"config", t}, {"invariants", h.invariants}}));
    });

    auto result_path = dir / "check" / (t.target() + ".json");
    check::CheckResult r;
    if(reuse(result_path))
      r = stage("check", [&] { return read_json(result_path).get<check::CheckResult>(); });
    else
    {
      r = check_target(*u, h, t, h.invariants, base.string() + ".c");
      stage("check", [&] {
        auto j = nlohmann::json(r);
        j["stats"].erase("ms");
        write_file(result_path, dump(j));
      });
    }
    std::string reason;
    e.classification = classify(r, &reason);
    e.skip_reason = reason;
    e.check = r;
  }

  void do_check()
  {
    std::map<std::string, check::HarnessConfig> by_target;
    for(const auto &t : targets())
      by_target.emplace(t.target(), t);
    for(const auto &v : verdicts)
    {
      FunctionReport e;
      e.fixture = fx.name;
      e.triage = v;
      if(v.decision == triage::Decision::Reject)
      {
        std::string codes;
        for(const auto &r : v.reasons)
          codes += (codes.empty() ? "" : ",") + r.code;
        e.skip_reason = "rejected: " + codes;
      }
      else if(budget_left == 0)
      {
        e.skip_reason = "over the per-run function limit";
        ++report.summary.truncated;
      }
      else
      {
        --budget_left;
        auto it = by_target.find(v.function);
        if(it == by_target.end())
          e.skip_reason = "no harness target";
        else
          check_function(e, it->second);
      }
      entries.push_back(std::move(e));
    }
  }

  // entries for whatever triage produced, when a later stage failed
  void abandon(const std::string &why)
  {
    std::set<std::string> done;
    for(const auto &e : entries)
      done.insert(e.triage.function);
    for(const auto &v : verdicts)
      if(!done.count(v.function))
      {
        FunctionReport e;
        e.fixture = fx.name;
        e.triage = v;
        e.skip_reason = why;
        entries.push_back(std::move(e));
      }
  }
};

} // namespace

const std::vector<std::string> &stage_names()
{
  static const std::vector<std::string> names{"triage", "instrument", "trace", "infer", "harness", "check"};
  return names;
}

void PipelineConfig::validate() const
{
  if(manifest.empty() && sources.empty())
    throw Error("no corpus: give a manifest or source files");
  if(out_dir.empty())
    throw Error("output directory is empty");
  if(backend != "internal" && backend != "external")
    throw Error("unknown backend '" + backend + "'");
  if(unwind < 0 || unwind_cap < 1)
    throw Error("unwind bounds must be positive");
  for(const auto &t : targets)
    t.validate();
}

void from_json(const nlohmann::json &j, PipelineConfig &c)
{
  c.manifest = j.value("manifest", c.manifest);
  c.sources = j.value("sources", c.sources);
  c.fixtures = j.value("fixtures", c.fixtures);
  c.out_dir = j.value("out_dir", c.out_dir);
  if(j.contains("triage"))
    c.triage = j.at("triage").get<triage::TriageConfig>();
  if(j.contains("inference"))
  {
    const auto &i = j.at("inference");
    c.inference.one_of_cap = i.value("one_of_cap", c.inference.one_of_cap);
    c.inference.min_support = i.value("min_support", c.inference.min_support);
    c.inference.linear_max_a = i.value("linear_max_a", c.inference.linear_max_a);
    c.inference.linear_max_b = i.value("linear_max_b", c.inference.linear_max_b);
    if(i.contains("forms"))
    {
      c.inference.enabled.clear();
      for(const auto &f : i.at("forms"))
        c.inference.enabled.insert(invariant::form_from_name(f.get<std::string>()));
    }
  }
  c.infer_all_points = j.value("infer_all_points", c.infer_all_points);
  c.test_command = j.value("test_command", c.test_command);
  if(j.contains("seed"))
    c.seed = j.at("seed").get<std::uint32_t>();
  c.checked_in_traces = j.value("checked_in_traces", c.checked_in_traces);
  c.targets = j.value("targets", c.targets);
  c.backend = j.value("backend", c.backend);
  c.bmc.command = j.value("bmc_command", c.bmc.command);
  c.bmc.timeout_seconds = j.value("bmc_timeout", c.bmc.timeout_seconds);
  c.budget = j.value("budget", c.budget);
  c.unwind = j.value("unwind", c.unwind);
  c.unwind_cap = j.value("unwind_cap", c.unwind_cap);
  c.max_functions = j.value("max_functions", c.max_functions);
  c.resume = j.value("resume", c.resume);
}

Report run_pipeline(const PipelineConfig &cfg)
{
  cfg.validate();
  Report report;
  report.backend = cfg.backend;

  Manifest manifest;
  try
  {
    if(!cfg.manifest.empty())
      manifest = load_manifest(cfg.manifest);
    else
    {
      Fixture f;
      f.name = "corpus";
      f.sources = cfg.sources;
      manifest.fixtures.push_back(f);
    }
  }
  catch(const Error &e)
  {
    report.incomplete = true;
    report.failed_stage = "triage";
    report.failure = e.what();
    report.tally();
    return report;
  }
  auto resolve = [&](const std::string &rel) { return cfg.manifest.empty() ? rel : manifest.path_of(rel); };

  std::size_t budget_left = cfg.max_functions;
  for(const auto &fx : manifest.fixtures)
  {
    if(!cfg.fixtures.empty() &&
       std::find(cfg.fixtures.begin(), cfg.fixtures.end(), fx.name) == cfg.fixtures.end())
      continue;
    FixtureRun run{cfg, fx, resolve, fs::path(cfg.out_dir) / fx.name, report, budget_left, {}, {}, {}, {}, {}};
    try
    {
      stage("triage", [&] {
        run.parse();
        run.do_triage();
      });
      stage("instrument", [&] { run.do_instrument(); });
      stage("trace", [&] { run.do_trace(); });
      stage("infer", [&] { run.do_infer(); });
      run.do_check();
    }
    catch(const StageFailure &e)
    {
      report.incomplete = true;
      report.failed_stage = e.stage;
      report.failure = e.what();
      run.abandon("not reached: stage '" + e.stage + "' failed");
      report.functions.insert(report.functions.end(), run.entries.begin(), run.entries.end());
      break;
    }
    report.functions.insert(report.functions.end(), run.entries.begin(), run.entries.end());
  }
  rank(report.functions);
  report.tally();
  return report;
}

void write_report(const Report &report, const std::string &out_dir)
{
  write_file(fs::path(out_dir) / "report.json", render_json(report));
  write_file(fs::path(out_dir) / "report.md", render_markdown(report));
}

} // namespace nf::pipeline
