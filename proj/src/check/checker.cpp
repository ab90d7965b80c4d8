#include <needlefinder/check/checker.hpp>
#include <needlefinder/source/parser.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <regex>
#include <sstream>
#include <sys/wait.h>

namespace nf::check {

using invariant::Invariant;
using source::Expr;
using source::ExprKind;
using source::Stmt;
using source::StmtKind;

std::string_view verdict_name(Verdict v)
{
  switch(v)
  {
  case Verdict::Counterexample: return "Counterexample";
  case Verdict::ExhaustedClean: return "ExhaustedClean";
  case Verdict::VerifiedToBound: return "VerifiedToBound";
  case Verdict::ResourceOut: return "ResourceOut";
  case Verdict::ToolError: return "ToolError";
  }
  return "?";
}

Verdict verdict_from_name(std::string_view name)
{
  for(auto v : {Verdict::Counterexample, Verdict::ExhaustedClean, Verdict::VerifiedToBound, Verdict::ResourceOut,
                Verdict::ToolError})
    if(verdict_name(v) == name)
      return v;
  throw FormatError("unknown verdict '" + std::string(name) + "'");
}

void to_json(nlohmann::json &j, const CheckResult &r)
{
  j = nlohmann::json{{"verdict", verdict_name(r.verdict)}, {"backend", r.backend}, {"unwind", r.unwind},
                     {"schedule", r.schedule}};
  if(r.verdict == Verdict::Counterexample)
  {
    nlohmann::json w = nlohmann::json::object();
    for(const auto &c : r.witness.choices)
      w[c.name] = c.value;
    j["witness"] = w;
    nlohmann::json order = nlohmann::json::array();
    for(const auto &c : r.witness.choices)
      order.push_back({{"name", c.name}, {"value", c.value}, {"lo", c.lo}, {"hi", c.hi}});
    j["choices"] = order;
    if(r.property)
      j["property"] = *r.property;
  }
  if(!r.message.empty())
    j["message"] = r.message;
  j["stats"] = {{"paths", r.stats.paths},         {"completed", r.stats.completed}, {"pruned", r.stats.pruned},
                {"cut", r.stats.cut},             {"violations", r.stats.violations}, {"steps", r.stats.steps},
                {"ms", static_cast<std::int64_t>(r.stats.ms)}};
}

void from_json(const nlohmann::json &j, CheckResult &r)
{
  r = CheckResult{};
  r.verdict = verdict_from_name(j.at("verdict").get<std::string>());
  r.backend = j.value("backend", "internal");
  r.unwind = j.value("unwind", 0);
  r.schedule = j.value("schedule", std::vector<int>{});
  if(j.contains("choices"))
    for(const auto &c : j.at("choices"))
    {
      Choice ch{c.at("name").get<std::string>(), c.at("value").get<std::int64_t>(), c.value("lo", std::int64_t{0}),
                c.value("hi", std::int64_t{0})};
      r.witness.choices.push_back(ch);
    }
  if(j.contains("witness"))
    for(const auto &[k, v] : j.at("witness").items())
      r.witness.values[k] = v.get<std::int64_t>();
  if(j.contains("property"))
    r.property = j.at("property").get<Property>();
  r.message = j.value("message", "");
  if(j.contains("stats"))
  {
    const auto &s = j.at("stats");
    r.stats.paths = s.value("paths", std::uint64_t{0});
    r.stats.completed = s.value("completed", std::uint64_t{0});
    r.stats.pruned = s.value("pruned", std::uint64_t{0});
    r.stats.cut = s.value("cut", std::uint64_t{0});
    r.stats.violations = s.value("violations", std::uint64_t{0});
    r.stats.steps = s.value("steps", std::uint64_t{0});
    r.stats.ms = s.value("ms", 0.0);
  }
}

namespace {

struct Compiled
{
  std::shared_ptr<const Program> program;
};

Compiled compile_harness(const HarnessSource &h, const CheckOptions &o)
{
  auto unit = source::parse_unit(h.text, "harness.c");
  MachineOptions mo = o.machine;
  mo.check_overflow = mo.check_overflow || h.check_overflow;
  mo.loop_cap = o.unwind;
  auto p = compile(unit, mo);
  auto why = unsupported_reason(*p, "main");
  if(!why.empty())
    throw UnsupportedConstruct({}, "harness main: " + why);
  return {p};
}

std::string detail_of(const Property &p)
{
  switch(p.kind)
  {
  case PropertyKind::UserAssert: return p.condition;
  case PropertyKind::ArrayBound: return p.subject + "[" + p.index + "]";
  case PropertyKind::NullDeref: return "*" + p.subject;
  case PropertyKind::Overflow: return p.subject;
  }
  return {};
}

Witness witness_of(const std::vector<Choice> &choices)
{
  Witness w;
  w.choices = choices;
  for(const auto &c : choices)
    w.values[c.name] = c.value;
  return w;
}

std::string where(const HarnessSource &h, const Location &loc)
{
  if(loc.offset >= h.unit_offset && loc.offset < h.unit_offset + h.unit.text.size())
    return h.unit.path + ":" + instrument::original_location(h.unit, loc.offset - h.unit_offset).str();
  return "harness:" + loc.str();
}

} // namespace

Property attribute(const Violation &v, const HarnessSource &h)
{
  if(v.loc.offset >= h.unit_offset && v.loc.offset < h.unit_offset + h.unit.text.size())
  {
    std::size_t off = instrument::original_offset(h.unit, v.loc.offset - h.unit_offset);
    const Property *loose = nullptr;
    for(const auto &p : h.properties)
      if(p.kind == v.kind && p.loc.offset == off)
      {
        if(detail_of(p) == v.detail)
          return p;
        if(!loose)
          loose = &p;
      }
    if(loose)
      return *loose;
    Property p;
    p.kind = v.kind;
    p.function = v.function;
    p.loc = instrument::location_at(h.unit.original, off);
    p.subject = v.detail;
    p.condition = v.detail;
    return p;
  }
  if(h.has_post && v.kind == PropertyKind::UserAssert && v.loc.line == h.post_property.loc.line)
    return h.post_property;
  Property p;
  p.kind = v.kind;
  p.function = v.function;
  p.loc = v.loc;
  p.subject = v.detail;
  p.condition = v.detail;
  return p;
}

CheckResult exhaustive_check(const HarnessSource &h, const CheckOptions &o,
                             std::vector<std::vector<Choice>> *explored)
{
  auto t0 = std::chrono::steady_clock::now();
  CheckResult r;
  r.unwind = o.unwind;
  auto finish = [&]() {
    r.stats.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return r;
  };
  Compiled c;
  try
  {
    c = compile_harness(h, o);
  }
  catch(const Error &e)
  {
    r.verdict = Verdict::ToolError;
    r.message = e.what();
    return finish();
  }
  Machine m(c.program);
  std::vector<Choice> choices;
  bool clean = true;
  for(;;)
  {
    if(r.stats.paths >= o.budget)
    {
      r.verdict = Verdict::ResourceOut;
      r.message = "path budget of " + std::to_string(o.budget) + " exhausted";
      return finish();
    }
    m.reset();
    m.choices = &choices;
    m.cursor = 0;
    ++r.stats.paths;
    try
    {
      m.call("main");
      ++r.stats.completed;
      if(explored)
        explored->emplace_back(choices.begin(), choices.begin() + static_cast<std::ptrdiff_t>(m.cursor));
    }
    catch(const Stop &s)
    {
      switch(s.kind)
      {
      case StopKind::AssumeFailed: ++r.stats.pruned; break;
      case StopKind::LoopCap:
        ++r.stats.cut;
        clean = false;
        break;
      case StopKind::Violated:
      {
        ++r.stats.violations;
        if(explored)
          explored->emplace_back(choices.begin(), choices.begin() + static_cast<std::ptrdiff_t>(m.cursor));
        if(r.stats.violations == 1)
        {
          r.violation = s.violation;
          r.property = attribute(s.violation, h);
          r.witness = witness_of({choices.begin(), choices.begin() + static_cast<std::ptrdiff_t>(m.cursor)});
        }
        if(o.stop_on_violation)
        {
          r.verdict = Verdict::Counterexample;
          r.stats.steps += m.steps();
          return finish();
        }
        break;
      }
      case StopKind::Trap:
        r.verdict = Verdict::ToolError;
        r.message = where(h, s.loc) + ": " + s.message;
        r.stats.steps += m.steps();
        return finish();
      }
    }
    r.stats.steps += m.steps();
    choices.resize(m.cursor);
    while(!choices.empty() && choices.back().value >= choices.back().hi)
      choices.pop_back();
    if(choices.empty())
      break;
    ++choices.back().value;
  }
  if(r.stats.violations > 0)
    r.verdict = Verdict::Counterexample;
  else
    r.verdict = clean ? Verdict::ExhaustedClean : Verdict::VerifiedToBound;
  return finish();
}

std::optional<Violation> replay(const HarnessSource &h, const Witness &w, const CheckOptions &o)
{
  auto c = compile_harness(h, o);
  Machine m(c.program);
  std::vector<Choice> choices = w.choices;
  m.choices = &choices;
  m.cursor = 0;
  try
  {
    m.call("main");
  }
  catch(const Stop &s)
  {
    if(s.kind == StopKind::Violated)
      return s.violation;
  }
  return std::nullopt;
}

namespace {

void idents(const Expr &e, std::set<std::string> &out)
{
  if(e.kind == ExprKind::Ident)
    out.insert(e.name);
  for(const auto &a : e.args)
    if(a)
      idents(*a, out);
}

bool relational(const std::string &op)
{
  return op == "<" || op == "<=" || op == ">" || op == ">=";
}

// identifiers compared by <, <=, >, >= in a loop condition
void compared(const Expr &e, std::set<std::string> &out)
{
  if(e.kind == ExprKind::Binary && relational(e.op))
  {
    idents(*e.args[0], out);
    idents(*e.args[1], out);
    return;
  }
  for(const auto &a : e.args)
    if(a)
      compared(*a, out);
}

struct LoopScan
{
  std::set<std::string> relevant;
  std::vector<std::pair<std::string, std::set<std::string>>> flows; // target <- sources

  void expr(const Expr &e)
  {
    if(e.kind == ExprKind::Assign && e.args[0]->kind == ExprKind::Ident)
    {
      std::set<std::string> src;
      idents(*e.args[1], src);
      flows.emplace_back(e.args[0]->name, src);
    }
    for(const auto &a : e.args)
      if(a)
        expr(*a);
  }

  void stmt(const Stmt &s)
  {
    if((s.kind == StmtKind::While || s.kind == StmtKind::DoWhile || s.kind == StmtKind::For) && s.expr)
      compared(*s.expr, relevant);
    for(const auto &d : s.decls)
      if(d.init)
      {
        std::set<std::string> src;
        idents(*d.init, src);
        flows.emplace_back(d.name, src);
        expr(*d.init);
      }
    for(const Expr *e : {s.expr.get(), s.step.get()})
      if(e)
        expr(*e);
    for(const auto &i : s.items)
      stmt(*i);
    for(const Stmt *sub : {s.init.get(), s.body.get(), s.else_body.get()})
      if(sub)
        stmt(*sub);
  }

  void close()
  {
    bool grew = true;
    while(grew)
    {
      grew = false;
      for(const auto &[target, src] : flows)
        if(relevant.count(target))
          for(const auto &s : src)
            grew |= relevant.insert(s).second;
    }
  }
};

bool is_counter(const std::string &v)
{
  static const std::regex re(R"(br\d+)");
  return std::regex_match(v, re);
}

} // namespace

std::vector<int> suggest_unwind(const source::SourceUnit &unit, const std::vector<std::string> &functions,
                                const std::vector<Invariant> &invariants, int cap)
{
  cap = std::max(cap, 1);
  LoopScan scan;
  for(const auto &name : functions)
    if(const auto *fn = unit.find_function(name); fn && fn->body)
      scan.stmt(*fn->body);
  scan.close();

  std::optional<std::int64_t> top;
  for(const auto &inv : invariants)
  {
    if(!is_counter(inv.var) && !scan.relevant.count(inv.var))
      continue;
    std::optional<std::int64_t> hi;
    switch(inv.form)
    {
    case invariant::Form::Constant: hi = inv.value; break;
    case invariant::Form::OneOf:
      if(!inv.values.empty())
        hi = inv.values.back();
      break;
    case invariant::Form::Range: hi = inv.hi; break;
    default: break;
    }
    if(hi && (!top || *hi > *top))
      top = hi;
  }
  std::vector<int> out;
  std::int64_t first = top ? std::max<std::int64_t>(*top + 1, 1) : 2;
  int k = static_cast<int>(std::min<std::int64_t>(first, cap));
  while(k < cap)
  {
    out.push_back(k);
    k *= 2;
  }
  out.push_back(cap);
  return out;
}

CheckResult run_schedule(const HarnessSource &h, const std::vector<int> &schedule, const CheckOptions &o)
{
  CheckResult last;
  std::vector<int> tried;
  double ms = 0;
  for(int k : schedule)
  {
    CheckOptions step = o;
    step.unwind = k;
    tried.push_back(k);
    last = exhaustive_check(h, step);
    ms += last.stats.ms;
    if(last.verdict != Verdict::VerifiedToBound)
      break;
  }
  last.schedule = tried;
  last.stats.ms = ms;
  return last;
}

std::string bmc_flags(const HarnessSource &h)
{
  std::string f = "--bounds-check --pointer-check";
  if(h.check_overflow)
    f += " --signed-overflow-check";
  return f;
}

namespace {

std::string shell_quote(const std::string &s)
{
  std::string out = "'";
  for(char c : s)
    out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

std::string substitute(std::string t, const std::string &key, const std::string &value)
{
  for(std::size_t at = t.find(key); at != std::string::npos; at = t.find(key, at + value.size()))
    t.replace(at, key.size(), value);
  return t;
}

PropertyKind kind_of_bmc_property(const std::string &id, const std::string &text)
{
  auto has = [&](const char *s) { return id.find(s) != std::string::npos || text.find(s) != std::string::npos; };
  if(has("overflow"))
    return PropertyKind::Overflow;
  if(has("array_bounds") || has("bounds") || has("upper bound") || has("lower bound"))
    return PropertyKind::ArrayBound;
  if(has("pointer_dereference") || has("NULL pointer"))
    return PropertyKind::NullDeref;
  return PropertyKind::UserAssert;
}

std::size_t line_offset(const std::string &text, int line)
{
  std::size_t off = 0;
  for(int l = 1; l < line && off < text.size(); ++off)
    if(text[off] == '\n')
      ++l;
  return off;
}

} // namespace

CheckResult parse_bmc_output(const std::string &output, int exit_code, const HarnessSource *h)
{
  CheckResult r;
  r.backend = "external";
  if(exit_code == 124)
  {
    r.verdict = Verdict::ResourceOut;
    r.message = "external checker timed out";
    return r;
  }
  bool blank = output.find_first_not_of(" \t\r\n") == std::string::npos;
  if(exit_code == 127 || (blank && exit_code != 0))
  {
    r.verdict = Verdict::ToolError;
    r.message = "NotFound: external checker could not be run (exit " + std::to_string(exit_code) + ")";
    return r;
  }
  bool failed = output.find("VERIFICATION FAILED") != std::string::npos;
  bool ok = output.find("VERIFICATION SUCCESSFUL") != std::string::npos;
  if(ok && !failed)
  {
    r.verdict = Verdict::VerifiedToBound;
    return r;
  }
  if(!failed)
  {
    r.verdict = Verdict::ToolError;
    r.message = output;
    return r;
  }

  static const std::regex result_re(R"(^\[([^\]]+)\] (?:line (\d+) )?(.*): FAILURE\s*$)");
  static const std::regex state_re(R"(^\s+([A-Za-z_]\w*(?:\[\d+[a-zA-Z]*\])?)=(-?\d+)(?:[a-zA-Z]*)?(?:\s|$))");
  std::istringstream in(output);
  std::string line;
  std::string failing_id;
  std::string failing_text;
  int failing_line = 0;
  bool only_unwinding = true;
  std::map<std::string, std::int64_t> values;
  std::vector<std::string> order;
  bool in_trace = false;
  while(std::getline(in, line))
  {
    std::smatch m;
    if(std::regex_match(line, m, result_re))
    {
      std::string id = m[1];
      bool unwinding = id.find(".unwind.") != std::string::npos ||
                       m[3].str().find("unwinding assertion") != std::string::npos;
      if(!unwinding && failing_id.empty())
      {
        failing_id = id;
        failing_text = m[3];
        failing_line = m[2].matched ? std::stoi(m[2]) : 0;
      }
      only_unwinding &= unwinding;
      continue;
    }
    if(line.rfind("Trace for ", 0) == 0)
    {
      in_trace = failing_id.empty() || line.find(failing_id) != std::string::npos;
      continue;
    }
    if(in_trace && std::regex_search(line, m, state_re))
    {
      std::string name = m[1];
      // CBMC prints indices with a type suffix: text[2l]
      name = std::regex_replace(name, std::regex(R"(\[(\d+)[a-zA-Z]+\])"), "[$1]");
      if(!values.count(name))
        order.push_back(name);
      values[name] = std::stoll(m[2]);
    }
  }
  if(failing_id.empty())
  {
    if(only_unwinding && output.find("unwinding assertion") != std::string::npos)
    {
      r.verdict = Verdict::VerifiedToBound;
      r.message = "unwinding assertion failed";
      return r;
    }
    r.verdict = Verdict::ToolError;
    r.message = output;
    return r;
  }

  r.verdict = Verdict::Counterexample;
  std::set<std::string> inputs;
  if(h)
    for(const auto &in : h->inputs)
      inputs.insert(in.name);
  for(const auto &name : order)
  {
    auto base = name.substr(0, name.find('['));
    if(h && !inputs.count(base))
      continue;
    r.witness.values[name] = values[name];
    r.witness.choices.push_back({name, values[name], values[name], values[name]});
  }

  Violation v;
  v.kind = kind_of_bmc_property(failing_id, failing_text);
  v.function = failing_id.substr(0, failing_id.find('.'));
  v.detail = failing_text;
  v.loc.line = failing_line;
  if(h)
  {
    v.loc = instrument::location_at(h->text, line_offset(h->text, failing_line));
    Property p = attribute(v, *h);
    // the checker's text differs from ours; fall back to line and kind
    if(p.subject == v.detail && v.loc.offset >= h->unit_offset &&
       v.loc.offset < h->unit_offset + h->unit.text.size())
    {
      auto orig = instrument::original_location(h->unit, v.loc.offset - h->unit_offset);
      for(const auto &q : h->properties)
        if(q.kind == v.kind && q.loc.line == orig.line)
        {
          p = q;
          break;
        }
    }
    r.property = p;
  }
  else
  {
    Property p;
    p.kind = v.kind;
    p.function = v.function;
    p.loc = v.loc;
    p.subject = failing_text;
    p.condition = failing_text;
    r.property = p;
  }
  r.violation = v;
  return r;
}

CheckResult run_external_bmc(const std::string &path, const HarnessSource &h, const BmcOptions &o)
{
  std::string cmd = o.command;
  cmd = substitute(cmd, "{file}", shell_quote(path));
  cmd = substitute(cmd, "{unwind}", std::to_string(o.unwind));
  cmd = substitute(cmd, "{flags}", bmc_flags(h));
  std::string full = "timeout " + std::to_string(o.timeout_seconds) + " /bin/sh -c " + shell_quote(cmd) + " 2>&1";
  auto t0 = std::chrono::steady_clock::now();
  FILE *pipe = popen(full.c_str(), "r");
  if(!pipe)
  {
    CheckResult r;
    r.backend = "external";
    r.verdict = Verdict::ToolError;
    r.message = "NotFound: cannot start '" + cmd + "'";
    return r;
  }
  std::string output;
  std::array<char, 4096> buf{};
  while(std::size_t n = fread(buf.data(), 1, buf.size(), pipe))
    output.append(buf.data(), n);
  int status = pclose(pipe);
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : 128;
  auto r = parse_bmc_output(output, code, &h);
  r.unwind = o.unwind;
  r.stats.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

} // namespace nf::check
