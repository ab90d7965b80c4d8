#include <needlefinder/source/facts.hpp>

#include <algorithm>

namespace nf::source {

std::string_view deref_kind_name(DerefSite::Kind kind)
{
  switch(kind)
  {
  case DerefSite::Kind::Index: return "index";
  case DerefSite::Kind::Star: return "deref";
  case DerefSite::Kind::Arrow: return "arrow";
  }
  return "?";
}

namespace {

class FactsWalker
{
public:
  FactsWalker(const SourceUnit &unit, const FunctionDef &fn, const FactsOptions &options,
              FunctionFacts &out)
    : unit_(unit), fn_(fn), options_(options), out_(out)
  {
    for(const auto &p : fn.params)
      if(!p.name.empty())
        scoped_.insert(p.name);
    for(const auto &g : unit.globals)
      globals_[g.name] = &g;
  }

  void run()
  {
    if(fn_.body)
      stmt(*fn_.body, 0);
    std::sort(out_.callees.begin(), out_.callees.end());
    out_.callees.erase(std::unique(out_.callees.begin(), out_.callees.end()), out_.callees.end());
  }

private:
  void declare(const VarDecl &d)
  {
    out_.locals.push_back({d.name, resolve_type(d.type, unit_), to_string(d.type)});
    scoped_.insert(d.name);
    if(d.init)
      expr(*d.init, false);
  }

  void stmt(const Stmt &s, int depth)
  {
    switch(s.kind)
    {
    case StmtKind::Compound:
      for(const auto &item : s.items)
        stmt(*item, depth);
      break;
    case StmtKind::Decl:
      for(const auto &d : s.decls)
        declare(d);
      break;
    case StmtKind::Expr:
    case StmtKind::Return:
      if(s.expr)
        expr(*s.expr, false);
      break;
    case StmtKind::If:
      expr(*s.expr, false);
      stmt(*s.body, depth);
      if(s.else_body)
        stmt(*s.else_body, depth);
      break;
    case StmtKind::While:
    case StmtKind::DoWhile:
    case StmtKind::For:
    {
      ++out_.loop_count;
      out_.max_loop_nesting = std::max(out_.max_loop_nesting, depth + 1);
      if(s.init)
        stmt(*s.init, depth);
      if(s.expr)
        expr(*s.expr, false);
      if(s.step)
        expr(*s.step, false);
      stmt(*s.body, depth + 1);
      break;
    }
    default: break;
    }
  }

  void note_global(const std::string &name)
  {
    if(scoped_.count(name))
      return;
    auto it = globals_.find(name);
    if(it == globals_.end())
      return;
    for(const auto &g : out_.reads_globals)
      if(g.name == name)
        return;
    out_.reads_globals.push_back(
      {name, resolve_type(it->second->type, unit_), to_string(it->second->type)});
  }

  void expr(const Expr &e, bool is_write)
  {
    switch(e.kind)
    {
    case ExprKind::Ident: note_global(e.name); return;
    case ExprKind::Call:
    {
      const Expr &callee = *e.args[0];
      bool direct = callee.kind == ExprKind::Ident && !scoped_.count(callee.name) &&
                    !globals_.count(callee.name);
      if(direct && options_.assert_macros.count(callee.name))
        out_.assert_sites.push_back(
          {e.loc, callee.name, e.args.size() > 1 ? to_c(*e.args[1]) : std::string()});
      else if(direct)
      {
        out_.callees.push_back(callee.name);
        out_.call_sites.push_back({callee.name, e.loc});
      }
      else
      {
        out_.call_sites.push_back({"", e.loc});
        expr(callee, false);
      }
      for(std::size_t i = 1; i < e.args.size(); ++i)
        expr(*e.args[i], false);
      return;
    }
    case ExprKind::Index:
      out_.deref_sites.push_back(
        {DerefSite::Kind::Index, e.loc, to_c(*e.args[0]), to_c(*e.args[1]), is_write});
      expr(*e.args[0], false);
      expr(*e.args[1], false);
      return;
    case ExprKind::Unary:
      if(e.op == "*")
        out_.deref_sites.push_back({DerefSite::Kind::Star, e.loc, to_c(*e.args[0]), "", is_write});
      if(e.op == "&")
      {
        expr(*e.args[0], is_write);
        return;
      }
      expr(*e.args[0], false);
      return;
    case ExprKind::Member:
      if(e.op == "->")
        out_.deref_sites.push_back({DerefSite::Kind::Arrow, e.loc, to_c(*e.args[0]), "", is_write});
      expr(*e.args[0], false);
      return;
    case ExprKind::Assign:
      expr(*e.args[0], true);
      expr(*e.args[1], false);
      return;
    case ExprKind::PreInc:
    case ExprKind::PreDec:
    case ExprKind::PostInc:
    case ExprKind::PostDec: expr(*e.args[0], true); return;
    case ExprKind::SizeofExpr:
    case ExprKind::SizeofType: return;
    default:
      for(const auto &a : e.args)
        expr(*a, false);
      return;
    }
  }

  const SourceUnit &unit_;
  const FunctionDef &fn_;
  const FactsOptions &options_;
  FunctionFacts &out_;
  std::set<std::string> scoped_;
  std::map<std::string, const VarDecl *> globals_;
};

} // namespace

std::vector<FunctionFacts> extract_facts(const SourceUnit &unit, const FactsOptions &options)
{
  std::vector<FunctionFacts> result;
  for(const auto &fn : unit.functions)
  {
    FunctionFacts f;
    f.name = fn.name;
    f.path = unit.path;
    f.loc = fn.loc;
    f.return_type = resolve_type(fn.return_type, unit);
    for(const auto &p : fn.params)
      f.params.push_back({p.name, resolve_type(p.type, unit), to_string(p.type)});
    f.opaque = fn.opaque;
    f.opaque_reason = fn.opaque_reason;
    FactsWalker(unit, fn, options, f).run();
    f.is_recursive = std::binary_search(f.callees.begin(), f.callees.end(), f.name);
    result.push_back(std::move(f));
  }
  return result;
}

} // namespace nf::source
