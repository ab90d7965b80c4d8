#include <needlefinder/errors.hpp>
#include <needlefinder/instrument/trace.hpp>
#include <needlefinder/pipeline/driver.hpp>
#include <needlefinder/source/parser.hpp>
#include <needlefinder/source/types.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sys/wait.h>

namespace nf::pipeline {

namespace {

using check::Machine;
using check::Stop;
using check::Value;

std::string describe_stop(const Stop &s)
{
  if(s.kind == check::StopKind::Violated)
    return std::string(check::property_kind_name(s.violation.kind)) + " at line " +
           std::to_string(s.violation.loc.line) + ": " + s.violation.detail;
  return s.message;
}

struct Runner
{
  const source::SourceUnit &unit;
  Machine machine;
  DriverResult result;
  std::size_t max_failures;

  void fail(std::size_t test, std::string calls, std::string reason)
  {
    ++result.failure_count;
    if(result.failures.size() < max_failures)
      result.failures.push_back({test, std::move(calls), std::move(reason)});
  }

  const source::FunctionDef &function(const std::string &name) const
  {
    const auto *fn = unit.find_function(name);
    if(!fn)
      throw Error("driver: no function '" + name + "'");
    return *fn;
  }

  // nonzero result, or the reason it failed
  std::string run_check(const std::string &check, const std::vector<Value> &args)
  {
    if(check.empty())
      return "";
    try
    {
      if(machine.call(check, args).n == 0)
        return check + " returned 0";
    }
    catch(const Stop &s)
    {
      return check + ": " + describe_stop(s);
    }
    return "";
  }
};

std::string call_text(const std::string &fn, const std::vector<std::string> &args)
{
  std::string s = fn + "(";
  for(std::size_t i = 0; i < args.size(); ++i)
    s += (i ? ", " : "") + args[i];
  return s + ")";
}

void random_ops(Runner &r, const DriverSpec &spec)
{
  std::mt19937 rng(spec.seed);
  std::vector<std::size_t> arity;
  for(const auto &op : spec.ops)
    arity.push_back(r.function(op).params.size());
  auto span = static_cast<std::uint64_t>(spec.value_hi - spec.value_lo);
  for(std::size_t t = 0; t < spec.num_tests; ++t)
  {
    r.machine.reset();
    ++r.result.tests;
    std::string calls;
    for(std::size_t k = 0; k < spec.max_len; ++k)
    {
      std::size_t op = rng() % spec.ops.size();
      std::int64_t value = spec.value_lo + static_cast<std::int64_t>(rng() % span);
      std::vector<Value> args;
      if(arity[op] > 0)
        args.push_back(Value::of(value));
      calls += (calls.empty() ? "" : "; ") + call_text(spec.ops[op], arity[op] ? std::vector{std::to_string(value)}
                                                                              : std::vector<std::string>{});
      ++r.result.calls;
      std::string why;
      try
      {
        r.machine.call(spec.ops[op], args);
        why = r.run_check(spec.check, {});
      }
      catch(const Stop &s)
      {
        why = describe_stop(s);
      }
      if(!why.empty())
      {
        r.fail(t, calls, why);
        break;
      }
    }
  }
}

Value argument(Runner &r, const source::Param &p, const nlohmann::json &v, std::string &text)
{
  if(v.is_array())
  {
    auto values = v.get<std::vector<std::int64_t>>();
    auto t = source::resolve_exec_type(p.type, r.unit);
    text = v.dump();
    return r.machine.make_array(values, std::max<std::size_t>(values.size(), 1), t.scalar);
  }
  auto n = v.is_null() ? 0 : v.get<std::int64_t>();
  text = std::to_string(n);
  return Value::of(n);
}

void call_and_check(Runner &r, const DriverSpec &spec, std::size_t test, const std::vector<Value> &args,
                    const std::string &calls)
{
  ++r.result.calls;
  std::string why;
  try
  {
    auto result = r.machine.call(spec.function, args);
    auto check_args = args;
    check_args.push_back(result);
    why = r.run_check(spec.check, check_args);
  }
  catch(const Stop &s)
  {
    why = describe_stop(s);
  }
  if(!why.empty())
    r.fail(test, calls, why);
}

void cases(Runner &r, const DriverSpec &spec)
{
  const auto &fn = r.function(spec.function);
  for(std::size_t t = 0; t < spec.cases.size(); ++t)
  {
    r.machine.reset();
    ++r.result.tests;
    std::vector<Value> args;
    std::vector<std::string> texts;
    for(const auto &p : fn.params)
    {
      std::string text;
      const auto &c = spec.cases[t];
      args.push_back(argument(r, p, c.contains(p.name) ? c.at(p.name) : nlohmann::json(), text));
      texts.push_back(text);
    }
    call_and_check(r, spec, t, args, call_text(spec.function, texts));
  }
}

void sweep(Runner &r, const DriverSpec &spec)
{
  const auto &fn = r.function(spec.function);
  std::vector<std::int64_t> values;
  for(auto v = spec.from; v <= spec.to; v += spec.step)
    values.push_back(v);
  values.insert(values.end(), spec.extra.begin(), spec.extra.end());
  for(std::size_t t = 0; t < values.size(); ++t)
  {
    r.machine.reset();
    ++r.result.tests;
    std::vector<Value> args;
    std::vector<std::string> texts;
    for(const auto &p : fn.params)
    {
      bool swept = spec.param.empty() ? args.empty() : p.name == spec.param;
      args.push_back(Value::of(swept ? values[t] : 0));
      texts.push_back(std::to_string(args.back().n));
    }
    call_and_check(r, spec, t, args, call_text(spec.function, texts));
  }
}

std::string shell_quote(const std::string &s)
{
  std::string q = "'";
  for(char c : s)
    q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

} // namespace

DriverResult run_in_process(const instrument::InstrumentedSource &inst, const DriverSpec &spec, std::ostream &trace,
                            const DriverOptions &options)
{
  if(spec.kind == DriverKind::Command)
    throw Error("command drivers run outside the interpreter");
  auto unit = source::parse_unit(inst.text, inst.path);
  Runner r{unit, Machine(check::compile(unit, options.machine)), {}, std::max<std::size_t>(options.max_failures, 1)};
  r.machine.options() = options.machine;
  instrument::TraceWriter writer(trace);
  r.machine.on_trace = [&](const instrument::TraceRecord &rec) { writer.write(rec); };
  switch(spec.kind)
  {
  case DriverKind::RandomOps: random_ops(r, spec); break;
  case DriverKind::Cases: cases(r, spec); break;
  case DriverKind::Sweep: sweep(r, spec); break;
  case DriverKind::Command: break;
  }
  r.result.records = writer.count();
  return r.result;
}

DriverResult run_command(const std::string &command, const std::string &trace_path, const DriverOptions &options)
{
  std::string cmd = command;
  for(auto at = cmd.find("{source}"); at != std::string::npos; at = cmd.find("{source}", at))
  {
    auto q = shell_quote(options.source_path);
    cmd.replace(at, 8, q);
    at += q.size();
  }
  std::string full = "NF_TRACE_FILE=" + shell_quote(trace_path) + " /bin/sh -c " + shell_quote(cmd) + " 2>&1";
  DriverResult r;
  FILE *pipe = popen(full.c_str(), "r");
  if(!pipe)
    throw Error("cannot run test command '" + command + "'");
  std::array<char, 4096> buf{};
  while(std::size_t n = fread(buf.data(), 1, buf.size(), pipe))
    r.output.append(buf.data(), n);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128;
  r.tests = 1;
  if(r.exit_code != 0)
    r.failure_count = 1, r.failures.push_back({0, command, "exit status " + std::to_string(r.exit_code)});
  return r;
}

DriverResult run_driver(const instrument::InstrumentedSource &inst, const DriverSpec &spec,
                        const std::string &trace_path, const DriverOptions &options)
{
  if(spec.kind == DriverKind::Command)
  {
    std::ofstream(trace_path, std::ios::trunc);
    return run_command(spec.command, trace_path, options);
  }
  std::ofstream out(trace_path, std::ios::trunc);
  if(!out)
    throw IoError(trace_path);
  auto r = run_in_process(inst, spec, out, options);
  out.flush();
  if(!out)
    throw IoError(trace_path);
  return r;
}

} // namespace nf::pipeline
