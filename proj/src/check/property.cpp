#include <needlefinder/check/property.hpp>

#include <algorithm>
#include <tuple>

namespace nf::check {

namespace {

using source::Expr;
using source::ExprKind;
using source::Stmt;

std::int64_t array_length(const source::TypeExpr &type, const source::SourceUnit &unit)
{
  try
  {
    auto t = source::resolve_exec_type(type, unit);
    if(!t.derived.empty() && t.derived.back().kind == source::Derivation::Kind::Array)
      return t.derived.back().length;
  }
  catch(const Error &)
  {
  }
  return -1;
}

struct Lengths
{
  const source::SourceUnit &unit;
  std::map<std::string, std::int64_t> known;

  void scan(const Stmt &s)
  {
    for(const auto &d : s.decls)
    {
      auto n = array_length(d.type, unit);
      if(n < 0 && d.init && d.init->kind == ExprKind::InitList)
        n = static_cast<std::int64_t>(d.init->args.size());
      if(n >= 0)
        known[d.name] = n;
    }
    for(const auto &i : s.items)
      scan(*i);
    for(const Stmt *sub : {s.init.get(), s.body.get(), s.else_body.get()})
      if(sub)
        scan(*sub);
  }
};

void overflow_sites(const Expr &e, const std::string &fn, std::vector<Property> &out)
{
  bool arith = (e.kind == ExprKind::Binary && (e.op == "+" || e.op == "-" || e.op == "*")) ||
               (e.kind == ExprKind::Assign && (e.op == "+=" || e.op == "-=" || e.op == "*=")) ||
               (e.kind == ExprKind::Unary && e.op == "-") || e.kind == ExprKind::PreInc ||
               e.kind == ExprKind::PreDec || e.kind == ExprKind::PostInc || e.kind == ExprKind::PostDec;
  // pointer steps and literal negation are not arithmetic on values
  if(e.kind == ExprKind::Unary && e.args[0]->kind == ExprKind::IntLit)
    arith = false;
  if(arith)
  {
    auto text = source::to_c(e);
    out.push_back({PropertyKind::Overflow, fn, e.loc, text, "", text + " does not overflow"});
  }
  for(const auto &a : e.args)
    if(a)
      overflow_sites(*a, fn, out);
}

void overflow_sites(const Stmt &s, const std::string &fn, std::vector<Property> &out)
{
  for(const auto &d : s.decls)
    if(d.init)
      overflow_sites(*d.init, fn, out);
  for(const Expr *e : {s.expr.get(), s.step.get()})
    if(e)
      overflow_sites(*e, fn, out);
  for(const auto &i : s.items)
    overflow_sites(*i, fn, out);
  for(const Stmt *sub : {s.init.get(), s.body.get(), s.else_body.get()})
    if(sub)
      overflow_sites(*sub, fn, out);
}

} // namespace

std::vector<Property> derive_properties(const source::FunctionFacts &facts, const source::SourceUnit &unit,
                                        bool check_overflow)
{
  std::vector<Property> out;
  const source::FunctionDef *fn = unit.find_function(facts.name);

  Lengths lengths{unit, {}};
  for(const auto &g : unit.globals)
  {
    auto n = array_length(g.type, unit);
    if(n < 0 && g.init && g.init->kind == ExprKind::InitList)
      n = static_cast<std::int64_t>(g.init->args.size());
    if(n >= 0)
      lengths.known[g.name] = n;
  }
  if(fn)
  {
    for(const auto &p : fn->params)
      lengths.known.erase(p.name); // parameters shadow globals and decay
    if(fn->body)
      lengths.scan(*fn->body);
  }

  for(const auto &a : facts.assert_sites)
    out.push_back({PropertyKind::UserAssert, facts.name, a.loc, a.macro, "", a.condition});

  for(const auto &d : facts.deref_sites)
  {
    Property p;
    p.function = facts.name;
    p.loc = d.loc;
    p.subject = d.base;
    switch(d.kind)
    {
    case source::DerefSite::Kind::Index:
    {
      p.kind = PropertyKind::ArrayBound;
      p.index = d.index;
      auto it = lengths.known.find(d.base);
      std::string len = it != lengths.known.end() ? std::to_string(it->second) : "len(" + d.base + ")";
      p.condition = "0 <= " + d.index + " && " + d.index + " < " + len;
      break;
    }
    case source::DerefSite::Kind::Star:
    case source::DerefSite::Kind::Arrow:
      p.kind = PropertyKind::NullDeref;
      p.condition = d.base + " != 0";
      break;
    }
    out.push_back(p);
  }

  if(check_overflow && fn && fn->body)
    overflow_sites(*fn->body, facts.name, out);

  std::stable_sort(out.begin(), out.end(), [](const Property &a, const Property &b) {
    return std::tie(a.loc.offset, a.kind) < std::tie(b.loc.offset, b.kind);
  });
  return out;
}

std::string describe(const Property &p)
{
  std::string s(property_kind_name(p.kind));
  switch(p.kind)
  {
  case PropertyKind::UserAssert: return s + " " + p.condition;
  case PropertyKind::ArrayBound: return s + " " + p.subject + "[" + p.index + "]";
  case PropertyKind::NullDeref: return s + " *" + p.subject;
  case PropertyKind::Overflow: return s + " " + p.subject;
  }
  return s;
}

void to_json(nlohmann::json &j, const Property &p)
{
  j = nlohmann::json{{"kind", property_kind_name(p.kind)},
                     {"function", p.function},
                     {"line", p.loc.line},
                     {"column", p.loc.column},
                     {"offset", p.loc.offset},
                     {"subject", p.subject},
                     {"condition", p.condition}};
  if(p.kind == PropertyKind::ArrayBound)
    j["index"] = p.index;
}

void from_json(const nlohmann::json &j, Property &p)
{
  p.kind = property_kind_from_name(j.at("kind").get<std::string>());
  p.function = j.at("function").get<std::string>();
  p.loc.line = j.at("line").get<int>();
  p.loc.column = j.at("column").get<int>();
  p.loc.offset = j.value("offset", std::size_t{0});
  p.subject = j.value("subject", "");
  p.index = j.value("index", "");
  p.condition = j.at("condition").get<std::string>();
}

} // namespace nf::check
