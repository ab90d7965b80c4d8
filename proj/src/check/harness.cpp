#include <needlefinder/check/harness.hpp>

#include <algorithm>
#include <limits>

namespace nf::check {

using invariant::Dialect;
using invariant::Invariant;

void HarnessConfig::validate() const
{
  if(call_sequence.empty())
    throw Error("harness call sequence is empty");
  if(unwind < 0)
    throw Error("unwind must be at least 1");
  for(const auto &[name, d] : domains)
    if(d.lo > d.hi)
      throw Error("empty domain for '" + name + "'");
  for(const auto &[name, a] : arrays)
    if(a.size < 1)
      throw Error("array '" + name + "' needs a positive size");
}

void to_json(nlohmann::json &j, const HarnessConfig &c)
{
  j = nlohmann::json{{"dialect", invariant::dialect_name(c.dialect)}, {"call_sequence", c.call_sequence}};
  nlohmann::json d = nlohmann::json::object();
  for(const auto &[k, v] : c.domains)
    d[k] = {v.lo, v.hi};
  j["domains"] = d;
  nlohmann::json a = nlohmann::json::object();
  for(const auto &[k, v] : c.arrays)
    a[k] = {{"size", v.size}, {"length", v.length}};
  j["arrays"] = a;
  j["post_check"] = c.post_check;
  j["prefer_ranges"] = c.prefer_ranges;
  j["check_overflow"] = c.check_overflow;
  j["unwind"] = c.unwind;
}

void from_json(const nlohmann::json &j, HarnessConfig &c)
{
  c = HarnessConfig{};
  if(j.contains("dialect"))
    c.dialect = invariant::dialect_from_name(j.at("dialect").get<std::string>());
  c.call_sequence = j.at("call_sequence").get<std::vector<std::string>>();
  if(j.contains("target") && (c.call_sequence.empty() || c.call_sequence.back() != j.at("target")))
    throw FormatError("harness target must be the last call of the sequence");
  auto domains = j.value("domains", nlohmann::json::object());
  for(const auto &[k, v] : domains.items())
  {
    if(!v.is_array() || v.size() != 2)
      throw FormatError("domain for '" + k + "' must be [lo, hi]");
    c.domains[k] = {v[0].get<std::int64_t>(), v[1].get<std::int64_t>()};
  }
  auto arrays = j.value("arrays", nlohmann::json::object());
  for(const auto &[k, v] : arrays.items())
    c.arrays[k] = {v.at("size").get<std::int64_t>(), v.value("length", "")};
  c.post_check = j.value("post_check", "");
  c.prefer_ranges = j.value("prefer_ranges", false);
  c.check_overflow = j.value("check_overflow", false);
  c.unwind = j.value("unwind", 0);
  c.validate();
}

DialectWords dialect_words(Dialect d)
{
  if(d == Dialect::Svcomp)
    return {"__VERIFIER_nondet_int", "__VERIFIER_nondet_long", "__VERIFIER_assume"};
  return {"nondet_int", "nondet_long", "__CPROVER_assume"};
}

namespace {

const source::FunctionDef &function_of(const source::SourceUnit &unit, const std::string &name)
{
  const auto *fn = unit.find_function(name);
  if(!fn)
    throw Error("harness calls '" + name + "', which is not defined in " + unit.path);
  if(fn->opaque)
    throw UnsupportedConstruct(fn->opaque_loc, fn->opaque_reason);
  return *fn;
}

bool is_void_param_list(const source::FunctionDef &fn)
{
  return fn.params.size() == 1 && fn.params[0].name.empty();
}

std::vector<const source::Param *> params_of(const source::FunctionDef &fn)
{
  std::vector<const source::Param *> out;
  if(!is_void_param_list(fn))
    for(const auto &p : fn.params)
      out.push_back(&p);
  return out;
}

bool returns_value(const source::FunctionDef &fn, const source::SourceUnit &unit)
{
  auto t = source::resolve_exec_type(fn.return_type, unit);
  return !(t.is_void && t.derived.empty());
}

// nondet suffix for a layout: int, uint, short, ...
std::string nondet_kind(source::ScalarLayout l)
{
  std::string base;
  switch(l.bits)
  {
  case 8: base = "char"; break;
  case 16: base = "short"; break;
  case 64: base = "long"; break;
  default: base = "int"; break;
  }
  return (l.is_unsigned ? "u" : "") + base;
}

std::string c_type_of(source::ScalarLayout l)
{
  std::string base;
  switch(l.bits)
  {
  case 8: base = "char"; break;
  case 16: base = "short"; break;
  case 64: base = "long"; break;
  default: base = "int"; break;
  }
  return l.is_unsigned ? "unsigned " + base : base;
}

Domain full_range(source::ScalarLayout l)
{
  if(l.bits >= 64)
    return l.is_unsigned ? Domain{0, std::numeric_limits<std::int64_t>::max()}
                         : Domain{std::numeric_limits<std::int64_t>::min(), std::numeric_limits<std::int64_t>::max()};
  if(l.is_unsigned)
    return {0, (std::int64_t{1} << l.bits) - 1};
  return {-(std::int64_t{1} << (l.bits - 1)), (std::int64_t{1} << (l.bits - 1)) - 1};
}

std::string spelled(source::TypeExpr t)
{
  std::erase_if(t.specifiers, [](const std::string &s) { return s == "const" || s == "volatile"; });
  return source::to_string(t);
}

struct Planner
{
  const source::SourceUnit &unit;
  const HarnessConfig &cfg;
  std::vector<SymbolicInput> inputs;
  std::vector<std::vector<std::string>> args; // per call: symbolic names

  void plan()
  {
    bool by_param = cfg.call_sequence.size() == 1;
    int counter = 0;
    for(std::size_t k = 0; k < cfg.call_sequence.size(); ++k)
    {
      const auto &fn = function_of(unit, cfg.call_sequence[k]);
      std::vector<std::string> call_args;
      std::map<std::string, std::string> local; // param -> symbolic
      for(const auto *p : params_of(fn))
      {
        SymbolicInput in;
        in.name = by_param ? p->name : "v" + std::to_string(++counter);
        if(in.name.empty())
          throw Error("parameter without a name in '" + fn.name + "'");
        in.function = fn.name;
        in.param = p->name;
        in.call = static_cast<int>(k);
        auto t = source::resolve_exec_type(p->type, unit);
        if(t.unresolved || t.is_function)
          throw UnsupportedConstruct(p->loc, "parameter type " + source::to_string(p->type));
        if(!t.derived.empty())
        {
          if(t.derived.size() != 1)
            throw UnsupportedConstruct(p->loc, "parameter with more than one level of indirection");
          auto a = cfg.arrays.find(p->name);
          if(a == cfg.arrays.end())
            a = cfg.arrays.find(in.name);
          if(a == cfg.arrays.end())
            throw Error("pointer parameter '" + p->name + "' of '" + fn.name + "' needs an array size");
          in.is_array = true;
          in.size = a->second.size;
          in.length = a->second.length; // resolved below
          source::TypeExpr el = p->type;
          if(!el.derived.empty())
            el.derived.pop_back();
          in.type = t.is_void ? "int" : spelled(el);
        }
        else
          in.type = spelled(p->type);
        in.layout = t.is_void ? source::ScalarLayout{} : t.scalar;
        in.domain = full_range(in.layout);
        auto d = cfg.domains.find(in.name);
        if(d == cfg.domains.end())
          d = cfg.domains.find(p->name);
        if(d != cfg.domains.end())
          in.domain = d->second;
        local[p->name] = in.name;
        call_args.push_back(in.name);
        inputs.push_back(in);
      }
      // array lengths name parameters of the same call
      for(auto &in : inputs)
        if(in.call == static_cast<int>(k) && in.is_array && !in.length.empty())
        {
          auto it = local.find(in.length);
          if(it == local.end())
            throw Error("array '" + in.param + "' length '" + in.length + "' is not a parameter of '" + fn.name + "'");
          in.length = it->second;
        }
      args.push_back(call_args);
    }
    for(const auto &in : inputs)
      if(in.is_array && !in.length.empty())
      {
        auto len = std::find_if(inputs.begin(), inputs.end(), [&](const SymbolicInput &s) { return s.name == in.length; });
        if(len->domain.lo < 0 || len->domain.hi > in.size)
          throw Error("array '" + in.name + "' of size " + std::to_string(in.size) +
                      " is smaller than its length domain [" + std::to_string(len->domain.lo) + ", " +
                      std::to_string(len->domain.hi) + "]");
      }
  }

  // calls of `fn` before the checked call
  std::vector<int> calls_of(const std::string &fn, bool prefix_only) const
  {
    std::vector<int> out;
    int n = static_cast<int>(cfg.call_sequence.size());
    for(int k = 0; k < n; ++k)
      if(cfg.call_sequence[k] == fn && (!prefix_only || k + 1 < n))
        out.push_back(k);
    return out;
  }
};

// conditions for one invariant, or throws UnrenderableInvariant
std::vector<std::string> render_at_assume(const Invariant &raw, const Planner &plan,
                                          const instrument::InstrumentedSource &counters)
{
  Invariant inv = plan.cfg.prefer_ranges ? invariant::widen_to_range(raw) : raw;
  auto fn_name = invariant::point_function(inv.pp);
  auto kind = invariant::point_kind(inv.pp);
  const auto *fn = plan.unit.find_function(fn_name);
  if(!fn)
    throw UnrenderableInvariant(inv.pp, "no function '" + fn_name + "'");
  std::vector<std::string> out;
  if(kind == "entry")
  {
    auto calls = plan.calls_of(fn_name, false);
    if(calls.empty())
      throw UnrenderableInvariant(inv.pp, "'" + fn_name + "' is not called by the harness");
    for(int k : calls)
    {
      std::map<std::string, std::string> rename;
      for(const auto &in : plan.inputs)
        if(in.call == k && !in.is_array)
          rename[in.param] = in.name;
      for(const auto &v : inv.variables())
        if(!rename.count(v))
          throw UnrenderableInvariant(inv.pp, "'" + v + "' is not a scalar parameter of '" + fn_name + "'");
      out.push_back(invariant::render_condition(inv, plan.cfg.dialect, rename));
    }
    return out;
  }
  if(kind == "exit")
  {
    auto calls = plan.calls_of(fn_name, true);
    if(calls.empty())
      throw UnrenderableInvariant(inv.pp, "exit of '" + fn_name + "' is not reached before the checked call");
    int k = calls.back();
    std::map<std::string, std::string> rename;
    auto cit = counters.counters_by_function.find(fn_name);
    for(const auto &v : inv.variables())
    {
      bool counter = cit != counters.counters_by_function.end() &&
                     std::find(cit->second.begin(), cit->second.end(), v) != cit->second.end();
      if(counter)
        continue;
      if(v == "__ret" && returns_value(*fn, plan.unit))
      {
        rename[v] = "nf_r" + std::to_string(k + 1);
        continue;
      }
      throw UnrenderableInvariant(inv.pp, "'" + v + "' is not in scope after '" + fn_name + "' returns");
    }
    out.push_back(invariant::render_condition(inv, plan.cfg.dialect, rename));
    return out;
  }
  throw UnrenderableInvariant(inv.pp, "branch points are not observable from the harness");
}

instrument::InstrumentedSource counters_for(const source::SourceUnit &unit, const instrument::InstrumentOptions &io)
{
  return instrument::inject_counters(unit, io);
}

std::set<std::string> used_assert_macros(const source::SourceUnit &unit, const std::set<std::string> &macros)
{
  std::set<std::string> out;
  for(const auto &f : source::extract_facts(unit))
    for(const auto &a : f.assert_sites)
      if(macros.count(a.macro))
        out.insert(a.macro);
  return out;
}

} // namespace

std::vector<Invariant> select_invariants(const std::vector<Invariant> &all, const source::SourceUnit &unit,
                                         const HarnessConfig &cfg)
{
  Planner plan{unit, cfg, {}, {}};
  plan.plan();
  auto counters = counters_for(unit, {});
  std::vector<Invariant> out;
  for(const auto &inv : all)
  {
    try
    {
      render_at_assume(inv, plan, counters);
      out.push_back(inv);
    }
    catch(const UnrenderableInvariant &)
    {
    }
  }
  return out;
}

HarnessSource generate_harness(const source::SourceUnit &unit, const std::vector<Invariant> &invariants,
                               const std::vector<Property> &properties, const HarnessConfig &cfg,
                               const instrument::InstrumentOptions &io)
{
  cfg.validate();
  if(unit.find_function("main"))
    throw Error(unit.path + " defines main; the harness needs its own");
  Planner plan{unit, cfg, {}, {}};
  plan.plan();

  HarnessSource h;
  h.dialect = cfg.dialect;
  h.target = cfg.target();
  h.inputs = plan.inputs;
  h.invariants = invariants;
  h.properties = properties;
  h.check_overflow = cfg.check_overflow;
  h.unit = counters_for(unit, io);

  std::vector<std::string> conds;
  for(const auto &inv : invariants)
    for(auto &c : render_at_assume(inv, plan, h.unit))
      if(std::find(conds.begin(), conds.end(), c) == conds.end())
        conds.push_back(std::move(c));
  for(std::size_t i = 0; i < conds.size(); ++i)
    h.assume_condition += (i ? " && " : "") + conds[i];

  auto words = dialect_words(cfg.dialect);
  bool svcomp = cfg.dialect == Dialect::Svcomp;
  auto nondet = [&](source::ScalarLayout l) {
    return (svcomp ? "__VERIFIER_nondet_" : "nondet_") + nondet_kind(l);
  };
  auto assert_line = [&](const std::string &c) {
    return svcomp ? "if (!(" + c + ")) reach_error();" : "assert(" + c + ");";
  };

  // prelude
  std::string pre;
  std::set<std::pair<int, bool>> layouts;
  for(const auto &in : plan.inputs)
    layouts.insert({in.layout.bits, in.layout.is_unsigned});
  for(auto [bits, is_unsigned] : layouts)
  {
    source::ScalarLayout l{bits, is_unsigned};
    pre += (svcomp ? "extern " : "") + c_type_of(l) + " " + nondet(l) + "(void);\n";
  }
  if(svcomp)
  {
    pre += "extern void __VERIFIER_assume(int cond);\n";
    pre += "extern void reach_error(void);\n";
  }
  // assert macros the unit uses but does not define
  std::set<std::string> macros = {"assert", "JS_ASSERT"};
  for(const auto &m : used_assert_macros(unit, macros))
  {
    if(unit.find_function(m))
      continue;
    if(m == "assert" && !svcomp)
      continue;
    pre += "void " + m + "(int cond) { " + assert_line("cond") + " }\n";
  }
  pre += "\n";

  h.unit_offset = pre.size();
  std::string text = pre + h.unit.text;
  if(!text.empty() && text.back() != '\n')
    text += "\n";
  text += "\n";
  h.main_offset = text.size();

  // main
  std::string m = "int main(void)\n{\n";
  std::vector<std::string> type_order;
  std::map<std::string, std::vector<std::string>> by_type;
  for(const auto &in : plan.inputs)
  {
    std::string decl = in.is_array ? in.name + "[" + std::to_string(in.size) + "]" : in.name;
    if(!by_type.count(in.type))
      type_order.push_back(in.type);
    by_type[in.type].push_back(decl);
  }
  for(const auto &t : type_order)
  {
    m += "    " + t + " ";
    for(std::size_t i = 0; i < by_type[t].size(); ++i)
      m += (i ? ", " : "") + by_type[t][i];
    m += "; // symbolic inputs\n";
  }
  bool any_array = std::any_of(plan.inputs.begin(), plan.inputs.end(), [](const auto &i) { return i.is_array; });
  if(any_array)
    m += "    int nf_i;\n";
  const auto &target_fn = function_of(unit, cfg.target());
  bool target_returns = returns_value(target_fn, unit);
  std::vector<std::string> results;
  for(std::size_t k = 0; k + 1 < cfg.call_sequence.size(); ++k)
  {
    const auto &fn = function_of(unit, cfg.call_sequence[k]);
    if(returns_value(fn, unit))
      m += "    " + spelled(fn.return_type) + " nf_r" + std::to_string(k + 1) + ";\n";
  }
  if(target_returns)
    m += "    " + spelled(target_fn.return_type) + " nf_result;\n";
  m += "\n";

  for(const auto &in : plan.inputs)
    if(!in.is_array)
    {
      m += "    " + in.name + " = " + nondet(in.layout) + "();\n";
      if(in.domain != full_range(in.layout))
        m += "    " + words.assume + "(" + std::to_string(in.domain.lo) + " <= " + in.name + " && " + in.name +
             " <= " + std::to_string(in.domain.hi) + ");\n";
    }
  for(const auto &in : plan.inputs)
    if(in.is_array)
    {
      std::string limit = in.length.empty() ? std::to_string(in.size) : in.length;
      std::string cell = in.name + "[nf_i]";
      m += "    for (nf_i = 0; nf_i < " + limit + "; nf_i++) {\n";
      m += "        " + cell + " = " + nondet(in.layout) + "();\n";
      if(in.domain != full_range(in.layout))
        m += "        " + words.assume + "(" + std::to_string(in.domain.lo) + " <= " + cell + " && " + cell +
             " <= " + std::to_string(in.domain.hi) + ");\n";
      m += "    }\n";
    }
  m += "\n";

  auto call_text = [&](std::size_t k) {
    std::string s = cfg.call_sequence[k] + "(";
    for(std::size_t i = 0; i < plan.args[k].size(); ++i)
      s += (i ? ", " : "") + plan.args[k][i];
    return s + ")";
  };
  for(std::size_t k = 0; k + 1 < cfg.call_sequence.size(); ++k)
  {
    const auto &fn = function_of(unit, cfg.call_sequence[k]);
    m += "    ";
    if(returns_value(fn, unit))
      m += "nf_r" + std::to_string(k + 1) + " = ";
    m += call_text(k) + ";\n";
  }
  if(!h.assume_condition.empty())
    m += "    " + words.assume + "(" + h.assume_condition + ");\n";
  m += "    ";
  if(target_returns)
    m += "nf_result = ";
  m += call_text(cfg.call_sequence.size() - 1) + ";\n";
  if(!cfg.post_check.empty())
  {
    std::size_t at = text.size() + m.size() + 4;
    m += "    " + assert_line(cfg.post_check) + "\n";
    h.has_post = true;
    h.post_property.kind = PropertyKind::UserAssert;
    h.post_property.function = "main";
    h.post_property.subject = svcomp ? "reach_error" : "assert";
    h.post_property.condition = cfg.post_check;
    h.post_property.loc = instrument::location_at(text + m, at);
  }
  m += "    return 0;\n}\n";
  h.text = text + m;
  return h;
}

} // namespace nf::check
