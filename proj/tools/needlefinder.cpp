#include <needlefinder/check/checker.hpp>
#include <needlefinder/errors.hpp>
#include <needlefinder/instrument/instrument.hpp>
#include <needlefinder/instrument/trace.hpp>
#include <needlefinder/pipeline/driver.hpp>
#include <needlefinder/pipeline/pipeline.hpp>
#include <needlefinder/source/facts.hpp>
#include <needlefinder/source/parser.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>

namespace fs = std::filesystem;
using namespace nf;

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

nlohmann::json read_json(const std::string &path)
{
  try
  {
    return nlohmann::json::parse(read_file(path));
  }
  catch(const nlohmann::json::exception &e)
  {
    throw FormatError(path + ": " + e.what());
  }
}

// to `path`, or stdout for "" and "-"
void emit(const std::string &path, const std::string &text)
{
  if(path.empty() || path == "-")
  {
    std::cout << text;
    return;
  }
  if(fs::path(path).has_parent_path())
    fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if(!out || !(out << text))
    throw IoError(path);
}

std::vector<std::string> c_files(const std::vector<std::string> &paths)
{
  std::vector<std::string> out;
  for(const auto &p : paths)
  {
    if(fs::is_directory(p))
    {
      std::vector<std::string> found;
      for(const auto &e : fs::recursive_directory_iterator(p))
        if(e.is_regular_file() && e.path().extension() == ".c")
          found.push_back(e.path().string());
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    }
    else if(fs::exists(p))
      out.push_back(p);
    else
      throw IoError(p);
  }
  return out;
}

std::vector<invariant::Invariant> load_invariants(const std::string &path)
{
  if(path.empty())
    return {};
  auto j = read_json(path);
  if(j.is_object())
    j = j.at("invariants");
  return j.get<std::vector<invariant::Invariant>>();
}

// "x=0:19,m=-5:5"
void apply_domains(check::HarnessConfig &cfg, const std::string &spec)
{
  static const std::regex one(R"(\s*([A-Za-z_]\w*)\s*=\s*(-?\d+)\s*:\s*(-?\d+)\s*)");
  std::stringstream ss(spec);
  std::string item;
  while(std::getline(ss, item, ','))
  {
    std::smatch m;
    if(!std::regex_match(item, m, one))
      throw Error("bad domain '" + item + "', expected name=lo:hi");
    cfg.domains[m[1]] = {std::stoll(m[2]), std::stoll(m[3])};
  }
}

struct HarnessInputs
{
  std::string source;
  std::string config;
  std::string invariants;
  std::vector<std::string> exclude;
  std::string dialect;
  std::string domains;
};

void harness_options(CLI::App *app, HarnessInputs &in)
{
  app->add_option("source", in.source, "C source file")->required()->check(CLI::ExistingFile);
  app->add_option("--config,-c", in.config, "harness configuration (JSON)")->required()->check(CLI::ExistingFile);
  app->add_option("--invariants,-i", in.invariants, "invariants from `infer`")->check(CLI::ExistingFile);
  app->add_option("--exclude", in.exclude, "functions left uninstrumented, as when tracing")->delimiter(',');
  app->add_option("--dialect", in.dialect, "cbmc or svcomp")->check(CLI::IsMember({"cbmc", "svcomp"}));
  app->add_option("--domains", in.domains, "override domains: name=lo:hi,...");
}

struct BuiltHarness
{
  source::SourceUnit unit;
  check::HarnessConfig cfg;
  check::HarnessSource h;
};

BuiltHarness build_harness(const HarnessInputs &in)
{
  BuiltHarness b{source::parse_unit(read_file(in.source), in.source), read_json(in.config).get<check::HarnessConfig>(),
                 {}};
  if(!in.dialect.empty())
    b.cfg.dialect = invariant::dialect_from_name(in.dialect);
  if(!in.domains.empty())
    apply_domains(b.cfg, in.domains);
  b.cfg.validate();
  auto invs = check::select_invariants(load_invariants(in.invariants), b.unit, b.cfg);
  std::vector<check::Property> props;
  for(const auto &f : source::extract_facts(b.unit))
    if(f.name == b.cfg.target())
      props = check::derive_properties(f, b.unit, b.cfg.check_overflow);
  instrument::InstrumentOptions io;
  io.exclude = {in.exclude.begin(), in.exclude.end()};
  b.h = check::generate_harness(b.unit, invs, props, b.cfg, io);
  return b;
}

std::string summary_line(const check::CheckResult &r)
{
  std::string s(check::verdict_name(r.verdict));
  if(r.unwind)
    s += " (unwind " + std::to_string(r.unwind) + ")";
  if(r.property)
    s += ": " + check::describe(*r.property) + (r.property->function == "main" ? " at harness line " : " at line ") +
         std::to_string(r.property->loc.line);
  if(!r.witness.choices.empty())
  {
    s += " with";
    for(const auto &c : r.witness.choices)
      s += " " + c.name + "=" + std::to_string(c.value);
  }
  if(!r.message.empty() && r.verdict != check::Verdict::Counterexample)
    s += ": " + r.message.substr(0, r.message.find('\n'));
  return s;
}

int verdict_exit(const check::CheckResult &r)
{
  switch(r.verdict)
  {
  case check::Verdict::Counterexample: return 1;
  case check::Verdict::ToolError: return 2;
  default: return 0;
  }
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"needlefinder: find small C functions worth model checking, infer their preconditions from "
               "test traces, and check them under those preconditions"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pipeline::tool_version));

  // triage
  auto *tri = app.add_subcommand("triage", "rank functions by how well they suit bounded checking");
  std::vector<std::string> tri_paths;
  std::string tri_config, tri_out;
  tri->add_option("paths", tri_paths, "C files or directories")->required();
  tri->add_option("--config", tri_config, "triage configuration (JSON)")->check(CLI::ExistingFile);
  tri->add_option("--out,-o", tri_out, "report file (default stdout)");

  // instrument
  auto *ins = app.add_subcommand("instrument", "add branch counters and trace probes");
  std::string ins_source, ins_out, ins_points;
  std::vector<std::string> ins_functions, ins_exclude;
  bool ins_counters_only = false, ins_per_test = false;
  ins->add_option("source", ins_source, "C source file")->required()->check(CLI::ExistingFile);
  ins->add_option("--functions", ins_functions, "only these functions")->delimiter(',');
  ins->add_option("--exclude", ins_exclude, "never instrument these (oracles)")->delimiter(',');
  ins->add_flag("--counters-only", ins_counters_only, "no trace probes");
  ins->add_flag("--per-test-reset", ins_per_test, "reset counters once per test instead of per call");
  ins->add_option("--out,-o", ins_out, "instrumented source (default stdout)");
  ins->add_option("--points", ins_points, "program point map (JSON)");

  // trace
  auto *trc = app.add_subcommand("trace", "run tests and collect a trace file");
  std::string trc_manifest, trc_fixture, trc_source, trc_driver, trc_command, trc_out;
  std::optional<std::uint32_t> trc_seed;
  trc->add_option("--manifest", trc_manifest, "corpus.json")->check(CLI::ExistingFile);
  trc->add_option("--fixture", trc_fixture, "fixture to run (with --manifest)");
  trc->add_option("--source", trc_source, "instrumented source (with --driver)")->check(CLI::ExistingFile);
  trc->add_option("--driver", trc_driver, "driver description (JSON)")->check(CLI::ExistingFile);
  trc->add_option("--command", trc_command, "shell command run with NF_TRACE_FILE set");
  trc->add_option("--seed", trc_seed, "seed for random_ops drivers");
  trc->add_option("--out,-o", trc_out, "trace file (default $NF_TRACE_FILE, else nf.trace)");

  // infer
  auto *inf = app.add_subcommand("infer", "infer likely invariants from trace files");
  std::vector<std::string> inf_traces, inf_functions, inf_forms;
  std::string inf_out;
  std::size_t inf_cap = 3, inf_support = 5;
  double inf_malformed = 0.10;
  inf->add_option("traces", inf_traces, "trace files")->required()->check(CLI::ExistingFile);
  inf->add_option("--functions", inf_functions, "only points of these functions")->delimiter(',');
  inf->add_option("--forms", inf_forms, "constant,one_of,range,nonzero,linear")->delimiter(',');
  inf->add_option("--one-of-cap", inf_cap, "largest one_of set")->check(CLI::PositiveNumber);
  inf->add_option("--min-support", inf_support, "records needed at a point");
  inf->add_option("--max-malformed", inf_malformed, "fraction of bad lines tolerated")->check(CLI::Range(0.0, 1.0));
  inf->add_option("--out,-o", inf_out, "invariants (default stdout)");

  // harness
  auto *har = app.add_subcommand("harness", "write a verification harness");
  HarnessInputs har_in;
  std::string har_out;
  harness_options(har, har_in);
  har->add_option("--out,-o", har_out, "harness source (default stdout)");

  // check
  auto *chk = app.add_subcommand("check", "check a harness with the internal or an external checker");
  HarnessInputs chk_in;
  std::string chk_backend = "internal", chk_out, chk_bmc_cmd, chk_harness_out;
  int chk_unwind = 0, chk_timeout = 300, chk_cap = 16;
  std::uint64_t chk_budget = 10'000'000;
  harness_options(chk, chk_in);
  chk->add_option("--backend", chk_backend, "internal or external")->check(CLI::IsMember({"internal", "external"}));
  chk->add_option("--unwind", chk_unwind, "fixed loop bound (default: suggested schedule)");
  chk->add_option("--unwind-cap", chk_cap, "largest bound the schedule tries")->check(CLI::PositiveNumber);
  chk->add_option("--budget", chk_budget, "paths before giving up (internal)");
  chk->add_option("--bmc-cmd", chk_bmc_cmd, "external command; {file} {unwind} {flags} are substituted");
  chk->add_option("--timeout", chk_timeout, "seconds per external run");
  chk->add_option("--harness-out", chk_harness_out, "where the harness is written for the external checker");
  chk->add_option("--out,-o", chk_out, "result JSON (default stdout)");

  // run
  auto *run = app.add_subcommand("run", "run the whole pipeline and write report.json and report.md");
  pipeline::PipelineConfig run_cfg;
  std::string run_config, run_test_command;
  std::vector<std::string> run_sources, run_targets;
  std::optional<std::uint32_t> run_seed;
  std::optional<std::string> run_backend, run_manifest, run_out_dir, run_bmc_cmd;
  std::optional<int> run_unwind;
  std::optional<std::size_t> run_max;
  bool run_fresh = false, run_checked_in = false;
  run->add_option("sources", run_sources, "C files or directories (without --manifest)");
  run->add_option("--manifest", run_manifest, "corpus.json")->check(CLI::ExistingFile);
  run->add_option("--config", run_config, "pipeline configuration (JSON)")->check(CLI::ExistingFile);
  run->add_option("--out-dir", run_out_dir, "artifact directory (default nf-out)");
  run->add_option("--fixture", run_cfg.fixtures, "only these fixtures")->delimiter(',');
  run->add_option("--harness", run_targets, "extra harness configurations (JSON)")->check(CLI::ExistingFile);
  run->add_option("--test-command", run_test_command, "replaces fixture drivers; runs with NF_TRACE_FILE set");
  run->add_option("--seed", run_seed, "seed for random_ops drivers");
  run->add_option("--backend", run_backend, "internal or external")->check(CLI::IsMember({"internal", "external"}));
  run->add_option("--bmc-cmd", run_bmc_cmd, "external checker command");
  run->add_option("--unwind", run_unwind, "fixed loop bound");
  run->add_option("--max-functions", run_max, "accepted functions checked per run");
  run->add_flag("--checked-in-traces", run_checked_in, "use the manifest's trace files instead of running tests");
  run->add_flag("--fresh", run_fresh, "ignore artifacts from earlier runs");

  // report
  auto *rep = app.add_subcommand("report", "render a report.json");
  std::string rep_in, rep_format = "markdown", rep_out;
  rep->add_option("report", rep_in, "report.json")->required()->check(CLI::ExistingFile);
  rep->add_option("--format,-f", rep_format, "json or markdown")->check(CLI::IsMember({"json", "markdown", "md"}));
  rep->add_option("--out,-o", rep_out, "output file (default stdout)");

  try
  {
    app.parse(argc, argv);
  }
  catch(const CLI::ParseError &e)
  {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try
  {
    if(tri->parsed())
    {
      triage::TriageConfig cfg;
      if(!tri_config.empty())
        cfg = read_json(tri_config).get<triage::TriageConfig>();
      std::vector<source::SourceUnit> units;
      nlohmann::json failures = nlohmann::json::array();
      for(const auto &f : c_files(tri_paths))
      {
        try
        {
          units.push_back(source::parse_unit(read_file(f), f));
        }
        catch(const Error &e)
        {
          failures.push_back({{"path", f}, {"error", e.what()}});
        }
      }
      auto verdicts = triage::triage_corpus(units, cfg);
      nlohmann::json j = {{"schema_version", pipeline::report_schema_version},
                          {"verdicts", verdicts},
                          {"parse_failures", failures}};
      emit(tri_out, j.dump(2) + "\n");
      return 0;
    }

    if(ins->parsed())
    {
      auto unit = source::parse_unit(read_file(ins_source), ins_source);
      instrument::InstrumentOptions io;
      io.functions = {ins_functions.begin(), ins_functions.end()};
      io.exclude = {ins_exclude.begin(), ins_exclude.end()};
      io.reset = ins_per_test ? instrument::CounterReset::PerTest : instrument::CounterReset::PerCall;
      auto inst = ins_counters_only ? instrument::inject_counters(unit, io) : instrument::instrument(unit, {}, io);
      emit(ins_out, inst.text);
      if(!ins_points.empty())
      {
        nlohmann::json points = nlohmann::json::object();
        for(const auto &[id, p] : inst.point_map)
        {
          nlohmann::json locs = nlohmann::json::array();
          for(const auto &l : p.locations)
            locs.push_back({{"line", l.line}, {"column", l.column}});
          points[id] = {{"function", p.function}, {"kind", p.kind}, {"vars", p.vars}, {"locations", locs}};
        }
        emit(ins_points, nlohmann::json{{"counters", inst.counter_decls}, {"points", points}}.dump(2) + "\n");
      }
      return 0;
    }

    if(trc->parsed())
    {
      std::string out = trc_out;
      if(out.empty())
        out = std::getenv("NF_TRACE_FILE") ? std::getenv("NF_TRACE_FILE") : "nf.trace";
      pipeline::DriverResult r;
      if(!trc_command.empty())
        r = pipeline::run_command(trc_command, out);
      else if(!trc_manifest.empty())
      {
        auto m = pipeline::load_manifest(trc_manifest);
        const auto *fx = m.find(trc_fixture);
        if(!fx)
          throw Error("no fixture '" + trc_fixture + "' in " + trc_manifest);
        auto spec = fx->driver;
        if(trc_seed)
          spec.seed = *trc_seed;
        auto rel = fx->sources.front();
        auto unit = source::parse_unit(read_file(m.path_of(rel)), rel);
        instrument::InstrumentOptions io;
        io.exclude = {fx->oracles.begin(), fx->oracles.end()};
        r = pipeline::run_driver(instrument::instrument(unit, {}, io), spec, out);
      }
      else if(!trc_source.empty() && !trc_driver.empty())
      {
        instrument::InstrumentedSource inst;
        inst.path = trc_source;
        inst.text = read_file(trc_source);
        auto spec = read_json(trc_driver).get<pipeline::DriverSpec>();
        if(trc_seed)
          spec.seed = *trc_seed;
        r = pipeline::run_driver(inst, spec, out);
      }
      else
        throw Error("trace needs --command, --manifest with --fixture, or --source with --driver");
      std::cerr << "tests " << r.tests << ", trace records " << r.records << ", failures " << r.failure_count << "\n";
      for(const auto &f : r.failures)
        std::cerr << "  test " << f.test << ": " << f.calls << " -> " << f.reason << "\n";
      if(!r.output.empty())
        std::cerr << r.output;
      return r.failure_count ? 1 : 0;
    }

    if(inf->parsed())
    {
      instrument::SampleStore store;
      instrument::IngestOptions opts;
      opts.max_malformed_fraction = inf_malformed;
      std::size_t malformed = 0;
      for(const auto &t : inf_traces)
      {
        instrument::IngestStats stats;
        store.merge(instrument::ingest_file(t, opts, &stats));
        malformed += stats.malformed;
      }
      invariant::InferenceConfig cfg;
      cfg.one_of_cap = inf_cap;
      cfg.min_support = inf_support;
      if(!inf_forms.empty())
      {
        cfg.enabled.clear();
        for(const auto &f : inf_forms)
          cfg.enabled.insert(invariant::form_from_name(f));
      }
      std::vector<std::string> skipped;
      auto invs = invariant::infer_all(store, cfg, {inf_functions.begin(), inf_functions.end()}, &skipped);
      if(malformed)
        std::cerr << "skipped " << malformed << " malformed trace lines\n";
      for(const auto &pp : skipped)
        std::cerr << "insufficient support at " << pp << "\n";
      emit(inf_out, nlohmann::json(invs).dump(2) + "\n");
      return 0;
    }

    if(har->parsed())
    {
      auto b = build_harness(har_in);
      emit(har_out, b.h.text);
      return 0;
    }

    if(chk->parsed())
    {
      auto b = build_harness(chk_in);
      std::vector<int> schedule;
      if(chk_unwind > 0)
        schedule = {chk_unwind};
      else if(b.cfg.unwind > 0)
        schedule = {b.cfg.unwind};
      else
        schedule = check::suggest_unwind(b.unit, b.cfg.call_sequence, b.h.invariants, chk_cap);
      check::CheckResult r;
      if(chk_backend == "external")
      {
        std::string path = chk_harness_out.empty() ? (fs::temp_directory_path() / "nf_harness.c").string()
                                                   : chk_harness_out;
        emit(path, b.h.text);
        check::BmcOptions o;
        if(!chk_bmc_cmd.empty())
          o.command = chk_bmc_cmd;
        o.timeout_seconds = chk_timeout;
        for(int k : schedule)
        {
          o.unwind = k;
          r = check::run_external_bmc(path, b.h, o);
          if(r.verdict != check::Verdict::VerifiedToBound)
            break;
        }
        r.schedule = schedule;
      }
      else
      {
        check::CheckOptions o;
        o.budget = chk_budget;
        r = check::run_schedule(b.h, schedule, o);
      }
      auto j = nlohmann::json(r).dump(2) + "\n";
      if(chk_out.empty())
        std::cout << j;
      else
      {
        emit(chk_out, j);
        std::cout << summary_line(r) << "\n";
      }
      return verdict_exit(r);
    }

    if(run->parsed())
    {
      if(!run_config.empty())
        run_cfg = read_json(run_config).get<pipeline::PipelineConfig>();
      if(run_manifest)
        run_cfg.manifest = *run_manifest;
      if(!run_sources.empty())
        run_cfg.sources = c_files(run_sources);
      if(run_out_dir)
        run_cfg.out_dir = *run_out_dir;
      for(const auto &t : run_targets)
        run_cfg.targets.push_back(read_json(t).get<check::HarnessConfig>());
      if(!run_test_command.empty())
        run_cfg.test_command = run_test_command;
      if(run_seed)
        run_cfg.seed = run_seed;
      if(run_backend)
        run_cfg.backend = *run_backend;
      if(run_bmc_cmd)
        run_cfg.bmc.command = *run_bmc_cmd;
      if(run_unwind)
        run_cfg.unwind = *run_unwind;
      if(run_max)
        run_cfg.max_functions = *run_max;
      run_cfg.checked_in_traces = run_cfg.checked_in_traces || run_checked_in;
      if(run_fresh)
        run_cfg.resume = false;
      auto report = pipeline::run_pipeline(run_cfg);
      pipeline::write_report(report, run_cfg.out_dir);
      std::cout << pipeline::render_markdown(report);
      if(report.incomplete)
        std::cerr << "needlefinder: " << report.failure << "\n";
      return pipeline::exit_code(report);
    }

    if(rep->parsed())
    {
      auto report = read_json(rep_in).get<pipeline::Report>();
      emit(rep_out, rep_format == "json" ? pipeline::render_json(report) : pipeline::render_markdown(report));
      return pipeline::exit_code(report);
    }
  }
  catch(const std::exception &e)
  {
    std::cerr << "needlefinder: error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
