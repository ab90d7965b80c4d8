#include <needlefinder/instrument/instrument.hpp>
#include <needlefinder/source/types.hpp>

#include <algorithm>

namespace nf::instrument {

using source::FunctionDef;
using source::Stmt;
using source::StmtKind;

std::string point_id(const std::string &function, const std::string &kind, int ordinal)
{
  return function + ":" + kind + ":" + std::to_string(ordinal);
}

namespace {

int opener(int depth) { return depth; }
int closer(int depth) { return -depth - 1; }

bool is_loop(const Stmt &s)
{
  return s.kind == StmtKind::While || s.kind == StmtKind::DoWhile || s.kind == StmtKind::For;
}

bool has_branching(const Stmt &s)
{
  if(s.kind == StmtKind::If || is_loop(s))
    return true;
  for(const auto &i : s.items)
    if(has_branching(*i))
      return true;
  return false;
}

bool completes_normally(const Stmt &s)
{
  switch(s.kind)
  {
  case StmtKind::Return:
  case StmtKind::Break:
  case StmtKind::Continue: return false;
  case StmtKind::Compound: return s.items.empty() || completes_normally(*s.items.back());
  default: return true;
  }
}

std::string counter_bump(const std::string &c)
{
  return c + " = " + c + " + 1;";
}

bool selected(const FunctionDef &fn, const InstrumentOptions &options)
{
  if(options.exclude.count(fn.name))
    return false;
  if(!options.functions.empty() && !options.functions.count(fn.name))
    return false;
  if(fn.opaque)
  {
    if(!options.functions.empty())
      throw UnsupportedConstruct(fn.opaque_loc, "'" + fn.name + "' is opaque: " + fn.opaque_reason);
    return false;
  }
  return true;
}

class CounterPass
{
public:
  CounterPass(InstrumentedSource &out, const FunctionDef &fn) : out_(out), fn_(fn) {}

  void run()
  {
    stmt(*fn_.body, 1);
  }

private:
  std::string fresh(const Stmt &anchor, const Stmt *arm, Arm which, bool synthesized)
  {
    int n = static_cast<int>(out_.counter_decls.size());
    std::string name = "br" + std::to_string(n);
    out_.counter_decls.push_back(name);
    out_.counters_by_function[fn_.name].push_back(name);
    PointInfo p;
    p.id = point_id(fn_.name, "branch", n);
    p.function = fn_.name;
    p.kind = "branch";
    p.locations.push_back(arm ? arm->loc : anchor.loc);
    p.vars = {name};
    p.anchor = anchor.loc;
    p.arm = which;
    p.synthesized = synthesized;
    out_.point_map[p.id] = p;
    return name;
  }

  void add(std::size_t offset, std::string text, int rank)
  {
    out_.insertions.push_back({offset, std::move(text), rank, "counter"});
  }

  // Counts entries into `arm`; returns true if it added braces.
  bool count_arm(const Stmt &anchor, const Stmt &arm, Arm which, int depth)
  {
    std::string c = fresh(anchor, &arm, which, false);
    if(arm.kind == StmtKind::Compound)
    {
      add(arm.loc.offset + 1, " " + counter_bump(c), opener(depth + 1));
      return false;
    }
    add(arm.loc.offset, "{ " + counter_bump(c) + " ", opener(depth));
    add(arm.end, " }", closer(depth));
    return true;
  }

  void stmt(const Stmt &s, int depth)
  {
    switch(s.kind)
    {
    case StmtKind::Compound:
      for(const auto &i : s.items)
        stmt(*i, depth + 1);
      break;
    case StmtKind::If:
    {
      bool braced = false;
      if(!has_branching(*s.body))
        braced = count_arm(s, *s.body, Arm::Then, depth + 1);
      stmt(*s.body, depth + 1);
      if(s.else_body)
      {
        if(!has_branching(*s.else_body))
          count_arm(s, *s.else_body, Arm::Else, depth + 1);
        stmt(*s.else_body, depth + 1);
      }
      else if(completes_normally(*s.body))
      {
        if(!braced && s.body->kind != StmtKind::Compound)
        {
          // keep a synthesized else from binding to a nested if
          add(s.body->loc.offset, "{ ", opener(depth + 1));
          add(s.body->end, " }", closer(depth + 1));
        }
        std::string c = fresh(s, nullptr, Arm::Else, true);
        add(s.end, " else { " + counter_bump(c) + " }", closer(depth));
      }
      break;
    }
    case StmtKind::While:
    case StmtKind::DoWhile:
    case StmtKind::For:
      if(!has_branching(*s.body))
        count_arm(s, *s.body, Arm::Body, depth + 1);
      stmt(*s.body, depth + 1);
      break;
    default: break;
    }
  }

  InstrumentedSource &out_;
  const FunctionDef &fn_;
};

void collect_returns(const Stmt &s, int depth, std::vector<std::pair<const Stmt *, int>> &out)
{
  if(s.kind == StmtKind::Return)
    out.push_back({&s, depth});
  for(const auto &i : s.items)
    collect_returns(*i, depth + 1, out);
  if(s.init)
    collect_returns(*s.init, depth + 1, out);
  if(s.body)
    collect_returns(*s.body, depth + 1, out);
  if(s.else_body)
    collect_returns(*s.else_body, depth + 1, out);
}

bool integer_type(const source::GroundType &t)
{
  using K = source::GroundType::Kind;
  return t.kind() == K::Int || t.kind() == K::Short || t.kind() == K::Long || t.kind() == K::Char;
}

std::string quoted_list(const std::vector<std::string> &names)
{
  std::string s;
  for(std::size_t i = 0; i < names.size(); ++i)
    s += (i ? ", \"" : "\"") + names[i] + "\"";
  return s;
}

// Body of a probe that logs `values` (C expressions) under `names`.
std::string trace_call(const std::string &pp, const std::vector<std::string> &names,
                       const std::vector<std::string> &values)
{
  if(names.empty())
    return "    nf_trace(\"" + pp + "\", 0, 0, 0);\n";
  std::string s = "    const char *nf_names[] = {" + quoted_list(names) + "};\n";
  s += "    long long nf_vals[" + std::to_string(names.size()) + "];\n";
  for(std::size_t i = 0; i < values.size(); ++i)
    s += "    nf_vals[" + std::to_string(i) + "] = " + values[i] + ";\n";
  s += "    nf_trace(\"" + pp + "\", nf_names, nf_vals, " + std::to_string(names.size()) + ");\n";
  return s;
}

void sort_insertions(std::vector<Insertion> &ins)
{
  std::stable_sort(ins.begin(), ins.end(), [](const Insertion &a, const Insertion &b) {
    if(a.offset != b.offset)
      return a.offset < b.offset;
    return a.rank < b.rank;
  });
}

} // namespace

Location location_at(const std::string &text, std::size_t offset)
{
  Location loc;
  loc.offset = offset;
  for(std::size_t i = 0; i < offset && i < text.size(); ++i)
  {
    if(text[i] == '\n')
    {
      ++loc.line;
      loc.column = 1;
    }
    else
      ++loc.column;
  }
  return loc;
}

std::size_t original_offset(const InstrumentedSource &inst, std::size_t text_offset)
{
  auto ins = inst.insertions;
  sort_insertions(ins);
  std::size_t shift = 0;
  for(const auto &i : ins)
  {
    std::size_t pos = i.offset + shift;
    if(text_offset < pos)
      break;
    if(text_offset < pos + i.text.size())
      return i.offset;
    shift += i.text.size();
  }
  return text_offset - shift;
}

Location original_location(const InstrumentedSource &inst, std::size_t text_offset)
{
  return location_at(inst.original, original_offset(inst, text_offset));
}

std::string render(const std::string &original, std::vector<Insertion> insertions)
{
  sort_insertions(insertions);
  std::string out;
  std::size_t at = 0;
  for(const auto &i : insertions)
  {
    out.append(original, at, i.offset - at);
    out += i.text;
    at = i.offset;
  }
  out.append(original, at, std::string::npos);
  return out;
}

std::string strip(const InstrumentedSource &inst)
{
  auto ins = inst.insertions;
  sort_insertions(ins);
  std::string out;
  std::size_t at = 0; // position in inst.text
  std::size_t shift = 0;
  for(const auto &i : ins)
  {
    std::size_t pos = i.offset + shift;
    if(inst.text.compare(pos, i.text.size(), i.text) != 0)
      throw Error("instrumented text does not contain insertion at offset " +
                  std::to_string(i.offset));
    out.append(inst.text, at, pos - at);
    at = pos + i.text.size();
    shift += i.text.size();
  }
  out.append(inst.text, at, std::string::npos);
  return out;
}

std::vector<std::string> default_observables(const source::SourceUnit &unit,
                                             const source::FunctionDef &fn)
{
  std::vector<std::string> out;
  for(const auto &p : fn.params)
    if(!p.name.empty() && integer_type(source::resolve_type(p.type, unit)))
      out.push_back(p.name);
  return out;
}

InstrumentedSource inject_counters(const source::SourceUnit &unit, const InstrumentOptions &options)
{
  InstrumentedSource out;
  out.path = unit.path;
  out.original = unit.text;
  for(const auto &fn : unit.functions)
  {
    if(!selected(fn, options))
      continue;
    out.functions.insert(fn.name);
    out.counters_by_function[fn.name];
    std::size_t before = out.counter_decls.size();
    CounterPass(out, fn).run();
    const auto &mine = out.counters_by_function[fn.name];
    if(mine.empty())
      continue;
    std::string decls;
    for(std::size_t i = before; i < out.counter_decls.size(); ++i)
      decls += "int " + out.counter_decls[i] + " = 0;\n";
    out.insertions.push_back({fn.begin, decls, 0, "decl"});
    if(options.reset == CounterReset::PerCall)
    {
      std::string reset;
      for(const auto &c : mine)
        reset += " " + c + " = 0;";
      out.insertions.push_back({fn.body_open + 1, reset, 0, "reset"});
    }
  }
  sort_insertions(out.insertions);
  out.text = render(out.original, out.insertions);
  return out;
}

InstrumentedSource inject_probes(InstrumentedSource inst, const source::SourceUnit &unit,
                                 const std::map<std::string, std::vector<std::string>> &observables,
                                 const InstrumentOptions &options)
{
  // Probes take over counter resets.
  std::erase_if(inst.insertions, [](const Insertion &i) { return i.tag == "reset"; });
  inst.insertions.push_back({0, std::string(shim_prototype) + "\n", -1000000, "shim"});
  inst.has_probes = true;

  std::set<std::string> globals;
  for(const auto &g : unit.globals)
    globals.insert(g.name);

  for(const auto &fn : unit.functions)
  {
    if(!inst.functions.count(fn.name))
      continue;
    const auto &counters = inst.counters_by_function[fn.name];

    std::vector<std::string> entry_vars;
    if(auto it = observables.find(fn.name); it != observables.end())
      entry_vars = it->second;
    else
      entry_vars = default_observables(unit, fn);
    std::set<std::string> params;
    for(const auto &p : fn.params)
      params.insert(p.name);
    std::vector<std::string> entry_args;
    for(const auto &v : entry_vars)
    {
      if(params.count(v))
        entry_args.push_back(v);
      else if(!globals.count(v))
        throw Error("observable '" + v + "' is not in scope at entry of '" + fn.name + "'");
    }

    source::GroundType ret = source::resolve_type(fn.return_type, unit);
    bool is_void = ret.kind() == source::GroundType::Kind::Void;
    bool log_ret = integer_type(ret);
    std::string ret_text = to_string(fn.return_type);

    std::vector<std::string> exit_vars = counters;
    std::vector<std::string> exit_vals = counters;
    if(log_ret)
    {
      exit_vars.push_back("__ret");
      exit_vals.push_back("nf_ret");
    }

    std::string entry_pp = point_id(fn.name, "entry", 0);
    std::string exit_pp = point_id(fn.name, "exit", 0);

    std::string helpers;
    helpers += "static void nf_enter_" + fn.name + "(";
    for(std::size_t i = 0; i < entry_args.size(); ++i)
      helpers += (i ? ", long long " : "long long ") + entry_args[i];
    if(entry_args.empty())
      helpers += "void";
    helpers += ")\n{\n";
    if(options.reset == CounterReset::PerCall)
      for(const auto &c : counters)
        helpers += "    " + c + " = 0;\n";
    helpers += trace_call(entry_pp, entry_vars, entry_vars);
    helpers += "}\n";
    if(is_void)
      helpers += "static void nf_exit_" + fn.name + "(void)\n{\n";
    else
      helpers += "static " + ret_text + " nf_exit_" + fn.name + "(" + ret_text + " nf_ret)\n{\n";
    helpers += trace_call(exit_pp, exit_vars, exit_vals);
    if(!is_void)
      helpers += "    return nf_ret;\n";
    helpers += "}\n";
    inst.insertions.push_back({fn.begin, helpers, 1, "probe"});

    std::string entry_call = " nf_enter_" + fn.name + "(";
    for(std::size_t i = 0; i < entry_args.size(); ++i)
      entry_call += (i ? ", " : "") + entry_args[i];
    entry_call += ");";
    inst.insertions.push_back({fn.body_open + 1, entry_call, 0, "probe"});

    PointInfo entry;
    entry.id = entry_pp;
    entry.function = fn.name;
    entry.kind = "entry";
    entry.locations = {fn.loc};
    entry.vars = entry_vars;
    inst.point_map[entry_pp] = entry;

    PointInfo exit;
    exit.id = exit_pp;
    exit.function = fn.name;
    exit.kind = "exit";
    exit.vars = exit_vars;

    std::vector<std::pair<const Stmt *, int>> returns;
    collect_returns(*fn.body, 1, returns);
    std::string exit_name = "nf_exit_" + fn.name;
    for(const auto &[r, depth] : returns)
    {
      exit.locations.push_back(r->loc);
      if(r->expr)
      {
        inst.insertions.push_back({r->expr->loc.offset, exit_name + "(", opener(depth + 1), "probe"});
        inst.insertions.push_back({r->expr->end, ")", closer(depth + 1), "probe"});
      }
      else
      {
        inst.insertions.push_back({r->loc.offset, "{ " + exit_name + "(); ", opener(depth), "probe"});
        inst.insertions.push_back({r->end, " }", closer(depth), "probe"});
      }
    }
    if(is_void && completes_normally(*fn.body))
    {
      exit.locations.push_back(location_at(inst.original, fn.body_close));
      inst.insertions.push_back({fn.body_close, exit_name + "(); ", 0, "probe"});
    }
    inst.point_map[exit_pp] = exit;
  }
  sort_insertions(inst.insertions);
  inst.text = render(inst.original, inst.insertions);
  return inst;
}

InstrumentedSource instrument(const source::SourceUnit &unit,
                              const std::map<std::string, std::vector<std::string>> &observables,
                              const InstrumentOptions &options)
{
  return inject_probes(inject_counters(unit, options), unit, observables, options);
}

} // namespace nf::instrument
