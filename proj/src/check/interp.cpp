#include <needlefinder/check/interp.hpp>

#include <algorithm>
#include <limits>
#include <map>
#include <optional>

namespace nf::check {

using source::Expr;
using source::ExprKind;
using source::ScalarLayout;
using source::Stmt;
using source::StmtKind;
using i128 = __int128;

std::string_view property_kind_name(PropertyKind kind)
{
  switch(kind)
  {
  case PropertyKind::UserAssert: return "UserAssert";
  case PropertyKind::ArrayBound: return "ArrayBound";
  case PropertyKind::NullDeref: return "NullDeref";
  case PropertyKind::Overflow: return "Overflow";
  }
  return "?";
}

PropertyKind property_kind_from_name(std::string_view name)
{
  for(auto k : {PropertyKind::UserAssert, PropertyKind::ArrayBound, PropertyKind::NullDeref,
                PropertyKind::Overflow})
    if(property_kind_name(k) == name)
      return k;
  throw FormatError("unknown property kind '" + std::string(name) + "'");
}

namespace {

// static type: pointer depth over a scalar base
struct SType
{
  int depth = 0;
  ScalarLayout base;
  bool is_void = false;

  bool is_ptr() const { return depth > 0; }
  SType element() const { return {depth - 1, base, false}; }
};

constexpr ScalarLayout int_layout{32, false};

i128 widen(std::int64_t v, ScalarLayout l)
{
  if(l.is_unsigned && l.bits >= 64)
    return static_cast<i128>(static_cast<std::uint64_t>(v));
  return v;
}

std::int64_t wrap(i128 v, ScalarLayout l)
{
  if(l.bits >= 64)
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(v));
  std::uint64_t mask = (std::uint64_t{1} << l.bits) - 1;
  std::uint64_t u = static_cast<std::uint64_t>(v) & mask;
  if(l.is_unsigned)
    return static_cast<std::int64_t>(u);
  if(u >> (l.bits - 1))
    u |= ~mask;
  return static_cast<std::int64_t>(u);
}

i128 min_of(ScalarLayout l)
{
  return l.is_unsigned ? 0 : -(i128{1} << (l.bits - 1));
}

i128 max_of(ScalarLayout l)
{
  return l.is_unsigned ? (i128{1} << l.bits) - 1 : (i128{1} << (l.bits - 1)) - 1;
}

ScalarLayout promote(ScalarLayout l)
{
  return l.bits < 32 ? int_layout : l;
}

ScalarLayout common(ScalarLayout a, ScalarLayout b)
{
  a = promote(a);
  b = promote(b);
  if(a.bits != b.bits)
    return a.bits > b.bits ? a : b;
  return {a.bits, a.is_unsigned || b.is_unsigned};
}

enum class K : std::uint8_t {
  // expressions
  Const,
  Str,
  Local,
  Global,
  Index,
  Deref,
  Neg,
  Not,
  BitNot,
  Arith,   // op in `op`
  Compare, // op in `op`
  PtrArith,
  PtrDiff,
  PtrCompare,
  LAnd,
  LOr,
  Cond,
  Assign, // op: 0 plain, else compound arithmetic op
  IncDec,
  Cast,
  Call,
  Builtin,
  Comma,
  Discard,
  // statements
  Block,
  DeclScalar,
  DeclArray,
  ExprStmt,
  If,
  While,
  DoWhile,
  For,
  Return,
  Break,
  Continue,
  Nop
};

enum class Op : std::uint8_t { None, Add, Sub, Mul, Div, Mod, Shl, Shr, And, Or, Xor, Lt, Le, Gt, Ge, Eq, Ne };

enum class BuiltinId : std::uint8_t { Nondet, Assume, Assert, ReachError, Trace, Undefined };

struct Node
{
  K k = K::Nop;
  Op op = Op::None;
  SType t;
  std::int32_t a = -1; // slot, function, object, builtin
  std::int64_t imm = 0;
  std::int64_t lo = 0, hi = 0; // nondet domain
  bool flag = false;           // IncDec: increment; Builtin assume-like; post for IncDec in flag2
  bool flag2 = false;
  Node *c[4] = {nullptr, nullptr, nullptr, nullptr};
  std::vector<Node *> list;
  Location loc;
  std::string text; // detail for reports, names
};

struct FuncIR
{
  std::string name;
  std::vector<SType> param_types;
  SType ret;
  int nslots = 0;
  Node *body = nullptr;
  std::string unsupported;
  bool defined = false;
};

struct GlobalIR
{
  std::string name;
  SType type;
  bool is_array = false;
  std::int64_t length = 0;
  SType elem;
  Node *init = nullptr; // scalar initializer or init list / string
};

struct Object
{
  std::vector<Value> cells;
  SType elem;
  bool readonly = false;
};

} // namespace

class Program
{
public:
  std::vector<std::unique_ptr<Node>> arena;
  std::vector<FuncIR> funcs;
  std::map<std::string, int> func_index;
  std::vector<GlobalIR> globals;
  std::map<std::string, int> global_index;
  std::vector<std::string> strings; // string literal objects, ids 0..n-1
  MachineOptions options;
  std::string path;
};

std::string unsupported_reason(const Program &program, const std::string &function)
{
  auto it = program.func_index.find(function);
  if(it == program.func_index.end())
    return "no such function";
  return program.funcs[it->second].unsupported;
}

namespace {

struct Unsupported
{
  Location loc;
  std::string what;
};

struct VarInfo
{
  bool global = false;
  int slot = 0;
  SType type;
  bool is_array = false;
  std::int64_t length = 0;
};

using Domain = std::pair<std::int64_t, std::int64_t>;

// nondet call -> narrowed domain, found from assumes that follow it
class Narrowing
{
public:
  Narrowing(const source::SourceUnit &unit, const MachineOptions &opts) : unit_(unit), opts_(opts) {}

  void scan_function(const source::FunctionDef &fn)
  {
    if(!fn.body)
      return;
    walk(*fn.body);
    top_level(*fn.body);
  }

  std::optional<Domain> find(const Expr *call) const
  {
    auto it = domains_.find(call);
    if(it == domains_.end())
      return std::nullopt;
    return it->second;
  }

  static bool is_nondet_name(const std::string &n)
  {
    return n.rfind("nondet_", 0) == 0 || n.rfind("__VERIFIER_nondet_", 0) == 0;
  }
  static bool is_assume_name(const std::string &n)
  {
    return n == "__CPROVER_assume" || n == "__VERIFIER_assume";
  }

private:
  const source::SourceUnit &unit_;
  const MachineOptions &opts_;
  std::map<const Expr *, Domain> domains_;

  struct Target
  {
    const Expr *call = nullptr;
    std::string lhs;
    bool simple = false; // plain identifier
  };

  static bool is_nondet_call(const Expr *e)
  {
    return e && e->kind == ExprKind::Call && e->args[0]->kind == ExprKind::Ident &&
           is_nondet_name(e->args[0]->name);
  }

  static std::optional<Target> nondet_target(const Stmt &s)
  {
    if(s.kind == StmtKind::Expr && s.expr && s.expr->kind == ExprKind::Assign && s.expr->op == "=" &&
       is_nondet_call(s.expr->args[1].get()))
      return Target{s.expr->args[1].get(), source::to_c(*s.expr->args[0]),
                    s.expr->args[0]->kind == ExprKind::Ident};
    if(s.kind == StmtKind::Decl && s.decls.size() == 1 && is_nondet_call(s.decls[0].init.get()))
      return Target{s.decls[0].init.get(), s.decls[0].name, true};
    return std::nullopt;
  }

  static const Expr *assume_cond(const Stmt &s)
  {
    if(s.kind == StmtKind::Expr && s.expr && s.expr->kind == ExprKind::Call &&
       s.expr->args[0]->kind == ExprKind::Ident && is_assume_name(s.expr->args[0]->name) &&
       s.expr->args.size() == 2)
      return s.expr->args[1].get();
    return nullptr;
  }

  static void conjuncts(const Expr &e, std::vector<const Expr *> &out)
  {
    if(e.kind == ExprKind::Binary && e.op == "&&")
    {
      conjuncts(*e.args[0], out);
      conjuncts(*e.args[1], out);
    }
    else
      out.push_back(&e);
  }

  void bound(const Expr &cond, const std::string &name, Domain &d) const
  {
    std::vector<const Expr *> cs;
    conjuncts(cond, cs);
    for(const Expr *c : cs)
    {
      if(c->kind != ExprKind::Binary)
        continue;
      std::string op = c->op;
      auto lhs = source::to_c(*c->args[0]), rhs = source::to_c(*c->args[1]);
      std::optional<std::int64_t> k;
      if(lhs == name)
        k = source::fold_constant(*c->args[1], unit_.constants);
      else if(rhs == name)
      {
        k = source::fold_constant(*c->args[0], unit_.constants);
        // mirror so the variable is on the left
        if(op == "<")
          op = ">";
        else if(op == "<=")
          op = ">=";
        else if(op == ">")
          op = "<";
        else if(op == ">=")
          op = "<=";
      }
      if(!k)
        continue;
      if(op == "<=")
        d.second = std::min(d.second, *k);
      else if(op == "<")
        d.second = std::min(d.second, *k - 1);
      else if(op == ">=")
        d.first = std::max(d.first, *k);
      else if(op == ">")
        d.first = std::max(d.first, *k + 1);
      else if(op == "==")
      {
        d.first = std::max(d.first, *k);
        d.second = std::min(d.second, *k);
      }
    }
  }

  void narrow(const Expr *call, const Expr &cond, const std::string &name)
  {
    auto it = domains_.try_emplace(call, std::numeric_limits<std::int64_t>::min(),
                                   std::numeric_limits<std::int64_t>::max())
                .first;
    bound(cond, name, it->second);
  }

  void walk(const Stmt &s)
  {
    if(s.kind == StmtKind::Compound)
    {
      for(std::size_t i = 0; i + 1 < s.items.size(); ++i)
        if(auto t = nondet_target(*s.items[i]))
          for(std::size_t j = i + 1; j < s.items.size(); ++j)
          {
            const Expr *c = assume_cond(*s.items[j]);
            if(!c)
              break;
            narrow(t->call, *c, t->lhs);
          }
      for(const auto &i : s.items)
        walk(*i);
    }
    for(const Stmt *sub : {s.init.get(), s.body.get(), s.else_body.get()})
      if(sub)
        walk(*sub);
  }

  // counts writes to `name` anywhere below
  static int writes(const Expr &e, const std::string &name)
  {
    int n = 0;
    bool is_write = e.kind == ExprKind::Assign || e.kind == ExprKind::PreInc || e.kind == ExprKind::PreDec ||
                    e.kind == ExprKind::PostInc || e.kind == ExprKind::PostDec ||
                    (e.kind == ExprKind::Unary && e.op == "&");
    if(is_write && e.args[0]->kind == ExprKind::Ident && e.args[0]->name == name)
      ++n;
    for(const auto &a : e.args)
      if(a)
        n += writes(*a, name);
    return n;
  }

  static int writes(const Stmt &s, const std::string &name)
  {
    int n = 0;
    for(const auto &d : s.decls)
    {
      if(d.name == name && d.init)
        ++n;
      if(d.init)
        n += writes(*d.init, name);
    }
    for(const Expr *e : {s.expr.get(), s.step.get()})
      if(e)
        n += writes(*e, name);
    for(const auto &i : s.items)
      n += writes(*i, name);
    for(const Stmt *sub : {s.init.get(), s.body.get(), s.else_body.get()})
      if(sub)
        n += writes(*sub, name);
    return n;
  }

  // later top-level assumes bound a local assigned exactly once
  void top_level(const Stmt &body)
  {
    if(body.kind != StmtKind::Compound)
      return;
    for(std::size_t i = 0; i < body.items.size(); ++i)
    {
      auto t = nondet_target(*body.items[i]);
      if(!t || !t->simple || writes(body, t->lhs) != 1)
        continue;
      for(std::size_t j = i + 1; j < body.items.size(); ++j)
      {
        // a path may end inside a call before reaching the assume
        if(user_call(*body.items[j]))
          break;
        if(const Expr *c = assume_cond(*body.items[j]))
          narrow(t->call, *c, t->lhs);
      }
    }
  }

  bool user_call(const Expr &e) const
  {
    if(e.kind == ExprKind::Call)
    {
      const Expr &callee = *e.args[0];
      bool builtin = callee.kind == ExprKind::Ident &&
                     (is_nondet_name(callee.name) || is_assume_name(callee.name) ||
                      opts_.assert_macros.count(callee.name) || callee.name == "__CPROVER_assert");
      if(!builtin)
        return true;
    }
    for(const auto &a : e.args)
      if(a && user_call(*a))
        return true;
    return false;
  }

  bool user_call(const Stmt &s) const
  {
    for(const auto &d : s.decls)
      if(d.init && user_call(*d.init))
        return true;
    for(const Expr *e : {s.expr.get(), s.step.get()})
      if(e && user_call(*e))
        return true;
    for(const auto &i : s.items)
      if(user_call(*i))
        return true;
    for(const Stmt *sub : {s.init.get(), s.body.get(), s.else_body.get()})
      if(sub && user_call(*sub))
        return true;
    return false;
  }
};

class Lowering
{
public:
  Lowering(const source::SourceUnit &unit, Program &p) : unit_(unit), p_(p), narrowing_(unit, p.options) {}

  void run()
  {
    for(const auto &proto : unit_.prototypes)
      declare(proto.name, proto.return_type, proto.params, false);
    for(const auto &fn : unit_.functions)
      declare(fn.name, fn.return_type, fn.params, true);
    for(const auto &g : unit_.globals)
      global(g);
    for(const auto &fn : unit_.functions)
    {
      narrowing_.scan_function(fn);
      auto &ir = p_.funcs[p_.func_index.at(fn.name)];
      if(fn.opaque || !fn.body)
      {
        ir.unsupported = fn.opaque ? "opaque: " + fn.opaque_reason : "no body";
        continue;
      }
      try
      {
        function(fn, ir);
      }
      catch(const Unsupported &u)
      {
        ir.unsupported = u.loc.str() + ": " + u.what;
        ir.body = nullptr;
      }
    }
  }

private:
  const source::SourceUnit &unit_;
  Program &p_;
  Narrowing narrowing_;
  std::vector<std::map<std::string, VarInfo>> scopes_;
  int next_slot_ = 0;
  const FuncIR *current_ = nullptr;

  Node *node(K k, Location loc)
  {
    p_.arena.push_back(std::make_unique<Node>());
    Node *n = p_.arena.back().get();
    n->k = k;
    n->loc = loc;
    return n;
  }

  [[noreturn]] void unsupported(Location loc, std::string what) { throw Unsupported{loc, std::move(what)}; }

  SType stype(const source::TypeExpr &type, Location loc, bool *is_array = nullptr,
              std::int64_t *length = nullptr)
  {
    source::ExecType t;
    try
    {
      t = source::resolve_exec_type(type, unit_);
    }
    catch(const TypedefCycle &c)
    {
      unsupported(loc, c.what());
    }
    if(t.unresolved)
      unsupported(loc, "type '" + t.unresolved_name + "'");
    if(t.is_function)
      unsupported(loc, "function pointer");
    SType s;
    s.base = t.scalar;
    s.depth = static_cast<int>(t.derived.size());
    s.is_void = t.is_void && s.depth == 0;
    if(is_array)
    {
      *is_array = !t.derived.empty() && t.derived.back().kind == source::Derivation::Kind::Array;
      if(*is_array && length)
        *length = t.derived.back().length;
      for(std::size_t i = 0; i + 1 < t.derived.size(); ++i)
        if(*is_array && t.derived[i].kind == source::Derivation::Kind::Array)
          unsupported(loc, "multidimensional array");
    }
    return s;
  }

  void declare(const std::string &name, const source::TypeExpr &ret, const std::vector<source::Param> &params,
               bool defined)
  {
    auto [it, fresh] = p_.func_index.try_emplace(name, static_cast<int>(p_.funcs.size()));
    if(fresh)
      p_.funcs.push_back(FuncIR{name, {}, {}, 0, nullptr, "", false});
    FuncIR &f = p_.funcs[it->second];
    if(defined)
      f.defined = true;
    try
    {
      f.ret = stype(ret, {});
      f.param_types.clear();
      for(const auto &prm : params)
      {
        SType s = stype(prm.type, prm.loc);
        if(s.is_void && prm.name.empty())
          continue; // (void)
        f.param_types.push_back(s);
      }
    }
    catch(const Unsupported &u)
    {
      f.unsupported = u.loc.str() + ": " + u.what;
    }
  }

  void global(const source::VarDecl &d)
  {
    GlobalIR g;
    g.name = d.name;
    try
    {
      g.type = stype(d.type, d.loc, &g.is_array, &g.length);
      if(g.is_array)
      {
        g.elem = g.type.element();
        if(g.length < 0 && d.init && d.init->kind == ExprKind::InitList)
          g.length = static_cast<std::int64_t>(d.init->args.size());
        if(g.length < 0)
          unsupported(d.loc, "array without length");
      }
      if(d.init)
      {
        scopes_.clear();
        g.init = d.init->kind == ExprKind::InitList ? init_list(*d.init, g.elem) : expr(*d.init);
      }
    }
    catch(const Unsupported &)
    {
      g.init = nullptr; // left zero
    }
    auto it = p_.global_index.find(d.name);
    if(it != p_.global_index.end())
    {
      if(d.init || !p_.globals[it->second].init)
        p_.globals[it->second] = g; // tentative definition replaced
      return;
    }
    p_.global_index[d.name] = static_cast<int>(p_.globals.size());
    p_.globals.push_back(g);
  }

  Node *init_list(const Expr &e, SType elem)
  {
    Node *n = node(K::Block, e.loc);
    for(const auto &a : e.args)
    {
      if(a->kind == ExprKind::InitList)
        unsupported(a->loc, "nested initializer");
      Node *v = expr(*a);
      n->list.push_back(elem.is_ptr() ? v : convert(v, elem));
    }
    return n;
  }

  const VarInfo *lookup(const std::string &name) const
  {
    for(auto it = scopes_.rbegin(); it != scopes_.rend(); ++it)
    {
      auto f = it->find(name);
      if(f != it->end())
        return &f->second;
    }
    return nullptr;
  }

  void function(const source::FunctionDef &fn, FuncIR &ir)
  {
    current_ = &ir;
    scopes_.assign(1, {});
    next_slot_ = 0;
    std::size_t pi = 0;
    for(const auto &prm : fn.params)
    {
      SType s = stype(prm.type, prm.loc);
      if(s.is_void && prm.name.empty())
        continue;
      VarInfo v;
      v.slot = next_slot_++;
      v.type = s;
      if(!prm.name.empty())
        scopes_.back()[prm.name] = v;
      ++pi;
    }
    ir.body = stmt(*fn.body);
    ir.nslots = next_slot_;
    (void)pi;
  }

  Node *stmt(const Stmt &s)
  {
    switch(s.kind)
    {
    case StmtKind::Compound:
    {
      Node *n = node(K::Block, s.loc);
      scopes_.emplace_back();
      for(const auto &i : s.items)
        n->list.push_back(stmt(*i));
      scopes_.pop_back();
      return n;
    }
    case StmtKind::Decl:
    {
      Node *n = node(K::Block, s.loc);
      for(const auto &d : s.decls)
        n->list.push_back(local_decl(d));
      return n;
    }
    case StmtKind::Expr:
    {
      Node *n = node(K::ExprStmt, s.loc);
      n->c[0] = expr(*s.expr);
      return n;
    }
    case StmtKind::If:
    {
      Node *n = node(K::If, s.loc);
      n->c[0] = expr(*s.expr);
      n->c[1] = scoped(*s.body);
      n->c[2] = s.else_body ? scoped(*s.else_body) : nullptr;
      return n;
    }
    case StmtKind::While:
    case StmtKind::DoWhile:
    {
      Node *n = node(s.kind == StmtKind::While ? K::While : K::DoWhile, s.loc);
      n->c[0] = expr(*s.expr);
      n->c[1] = scoped(*s.body);
      return n;
    }
    case StmtKind::For:
    {
      scopes_.emplace_back();
      Node *n = node(K::For, s.loc);
      n->c[0] = s.init ? stmt(*s.init) : nullptr;
      n->c[1] = s.expr ? expr(*s.expr) : nullptr;
      n->c[2] = s.step ? expr(*s.step) : nullptr;
      n->c[3] = scoped(*s.body);
      scopes_.pop_back();
      return n;
    }
    case StmtKind::Return:
    {
      Node *n = node(K::Return, s.loc);
      if(s.expr)
      {
        Node *v = expr(*s.expr);
        n->c[0] = current_->ret.is_void ? v : convert(v, current_->ret);
      }
      return n;
    }
    case StmtKind::Break: return node(K::Break, s.loc);
    case StmtKind::Continue: return node(K::Continue, s.loc);
    case StmtKind::Empty: return node(K::Nop, s.loc);
    }
    unsupported(s.loc, "statement");
  }

  Node *scoped(const Stmt &s)
  {
    scopes_.emplace_back();
    Node *n = stmt(s);
    scopes_.pop_back();
    return n;
  }

  Node *local_decl(const source::VarDecl &d)
  {
    if(d.is_extern)
      return node(K::Nop, d.loc);
    VarInfo v;
    std::int64_t length = -1;
    v.type = stype(d.type, d.loc, &v.is_array, &length);
    if(v.type.is_void)
      unsupported(d.loc, "void variable");
    if(d.is_static)
      unsupported(d.loc, "static local");
    v.slot = next_slot_++;
    Node *n;
    if(v.is_array)
    {
      if(length < 0 && d.init && d.init->kind == ExprKind::InitList)
        length = static_cast<std::int64_t>(d.init->args.size());
      if(length < 0 && d.init && d.init->kind == ExprKind::StrLit)
        length = static_cast<std::int64_t>(d.init->name.size()) + 1;
      if(length < 0)
        unsupported(d.loc, "array without length");
      v.length = length;
      n = node(K::DeclArray, d.loc);
      n->a = v.slot;
      n->imm = length;
      n->t = v.type.element();
      if(d.init && d.init->kind == ExprKind::InitList)
        n->c[0] = init_list(*d.init, n->t);
      else if(d.init)
        unsupported(d.loc, "array initializer");
    }
    else
    {
      n = node(K::DeclScalar, d.loc);
      n->a = v.slot;
      n->t = v.type;
      if(d.init)
      {
        if(d.init->kind == ExprKind::InitList)
          unsupported(d.loc, "scalar initializer list");
        // declared before its initializer is lowered, as in C
        scopes_.back()[d.name] = v;
        n->c[0] = convert(expr(*d.init, d.name), v.type);
        return n;
      }
    }
    scopes_.back()[d.name] = v;
    return n;
  }

  Node *convert(Node *v, SType to)
  {
    if(to.is_ptr() || v->t.is_ptr() || to.is_void)
      return v;
    if(promote(v->t.base) == to.base && v->t.base.bits >= to.base.bits && v->t.base.is_unsigned == to.base.is_unsigned)
      return v;
    Node *c = node(K::Cast, v->loc);
    c->c[0] = v;
    c->t = to;
    return c;
  }

  Node *lvalue(const Expr &e)
  {
    Node *n = expr(e);
    if(n->k != K::Local && n->k != K::Global && n->k != K::Index && n->k != K::Deref)
      unsupported(e.loc, "not an lvalue");
    if((n->k == K::Local || n->k == K::Global) && n->flag)
      unsupported(e.loc, "assignment to an array");
    return n;
  }

  static Op arith_op(const std::string &op)
  {
    static const std::map<std::string, Op> m = {
      {"+", Op::Add}, {"-", Op::Sub}, {"*", Op::Mul}, {"/", Op::Div}, {"%", Op::Mod}, {"<<", Op::Shl},
      {">>", Op::Shr}, {"&", Op::And}, {"|", Op::Or},  {"^", Op::Xor}, {"<", Op::Lt},  {"<=", Op::Le},
      {">", Op::Gt},  {">=", Op::Ge}, {"==", Op::Eq}, {"!=", Op::Ne}};
    auto it = m.find(op);
    return it == m.end() ? Op::None : it->second;
  }

  Node *binary(Op op, Node *l, Node *r, const Expr &src)
  {
    bool cmp = op >= Op::Lt;
    if(l->t.is_ptr() || r->t.is_ptr())
    {
      if(cmp)
      {
        Node *n = node(K::PtrCompare, src.loc);
        n->op = op;
        n->c[0] = l;
        n->c[1] = r;
        n->t = {0, int_layout, false};
        return n;
      }
      if(op == Op::Sub && l->t.is_ptr() && r->t.is_ptr())
      {
        Node *n = node(K::PtrDiff, src.loc);
        n->c[0] = l;
        n->c[1] = r;
        n->t = {0, {64, false}, false};
        return n;
      }
      if(op == Op::Add || op == Op::Sub)
      {
        Node *n = node(K::PtrArith, src.loc);
        bool left_ptr = l->t.is_ptr();
        n->c[0] = left_ptr ? l : r;
        n->c[1] = left_ptr ? r : l;
        n->imm = op == Op::Sub ? -1 : 1;
        if(op == Op::Sub && !left_ptr)
          unsupported(src.loc, "integer minus pointer");
        n->t = n->c[0]->t;
        return n;
      }
      unsupported(src.loc, "pointer operator");
    }
    Node *n = node(cmp ? K::Compare : K::Arith, src.loc);
    n->op = op;
    n->c[0] = l;
    n->c[1] = r;
    ScalarLayout ct = (op == Op::Shl || op == Op::Shr) ? promote(l->t.base) : common(l->t.base, r->t.base);
    n->imm = ct.bits;
    n->flag = ct.is_unsigned;
    n->t = {0, cmp ? int_layout : ct, false};
    n->text = source::to_c(src);
    return n;
  }

  Node *expr(const Expr &e, const std::string &assigned_name = {})
  {
    switch(e.kind)
    {
    case ExprKind::IntLit:
    {
      Node *n = node(K::Const, e.loc);
      n->imm = e.value;
      bool wide = e.is_long || e.value > std::numeric_limits<std::int32_t>::max() ||
                  e.value < std::numeric_limits<std::int32_t>::min();
      n->t = {0, {wide ? 64 : 32, e.is_unsigned}, false};
      return n;
    }
    case ExprKind::StrLit:
    {
      Node *n = node(K::Str, e.loc);
      n->a = static_cast<std::int32_t>(p_.strings.size());
      p_.strings.push_back(e.name);
      n->t = {1, {8, false}, false};
      return n;
    }
    case ExprKind::Ident:
    {
      if(const VarInfo *v = lookup(e.name))
      {
        Node *n = node(K::Local, e.loc);
        n->a = v->slot;
        n->t = v->type;
        n->flag = v->is_array;
        n->text = e.name;
        return n;
      }
      auto g = p_.global_index.find(e.name);
      if(g != p_.global_index.end())
      {
        Node *n = node(K::Global, e.loc);
        n->a = g->second;
        n->t = p_.globals[g->second].type;
        n->flag = p_.globals[g->second].is_array;
        n->text = e.name;
        return n;
      }
      auto c = unit_.constants.find(e.name);
      if(c != unit_.constants.end())
      {
        Node *n = node(K::Const, e.loc);
        n->imm = c->second;
        n->t = {0, int_layout, false};
        return n;
      }
      unsupported(e.loc, "unknown identifier '" + e.name + "'");
    }
    case ExprKind::Unary:
    {
      if(e.op == "&")
      {
        const Expr &inner = *e.args[0];
        if(inner.kind == ExprKind::Index)
        {
          Node *base = expr(*inner.args[0]);
          Node *idx = expr(*inner.args[1]);
          if(!base->t.is_ptr())
            unsupported(e.loc, "address of non-array element");
          Node *n = node(K::PtrArith, e.loc);
          n->c[0] = base;
          n->c[1] = idx;
          n->imm = 1;
          n->t = base->t;
          return n;
        }
        if(inner.kind == ExprKind::Unary && inner.op == "*")
          return expr(*inner.args[0]);
        unsupported(e.loc, "address-of");
      }
      Node *v = expr(*e.args[0]);
      if(e.op == "*")
      {
        if(!v->t.is_ptr())
          unsupported(e.loc, "dereference of non-pointer");
        Node *n = node(K::Deref, e.loc);
        n->c[0] = v;
        n->t = v->t.element();
        n->text = source::to_c(e);
        return n;
      }
      if(e.op == "+")
        return v;
      if(e.op == "!")
      {
        Node *n = node(K::Not, e.loc);
        n->c[0] = v;
        n->t = {0, int_layout, false};
        return n;
      }
      if(v->t.is_ptr())
        unsupported(e.loc, "arithmetic on pointer");
      Node *n = node(e.op == "-" ? K::Neg : K::BitNot, e.loc);
      n->c[0] = v;
      n->t = {0, promote(v->t.base), false};
      n->text = source::to_c(e);
      return n;
    }
    case ExprKind::Binary:
    {
      if(e.op == "&&" || e.op == "||")
      {
        Node *n = node(e.op == "&&" ? K::LAnd : K::LOr, e.loc);
        n->c[0] = expr(*e.args[0]);
        n->c[1] = expr(*e.args[1]);
        n->t = {0, int_layout, false};
        return n;
      }
      Op op = arith_op(e.op);
      if(op == Op::None)
        unsupported(e.loc, "operator " + e.op);
      return binary(op, expr(*e.args[0]), expr(*e.args[1]), e);
    }
    case ExprKind::Assign:
    {
      Node *lv = lvalue(*e.args[0]);
      Node *rhs = expr(*e.args[1], e.op == "=" ? source::to_c(*e.args[0]) : std::string());
      Node *n = node(K::Assign, e.loc);
      n->c[0] = lv;
      n->t = lv->t;
      if(e.op == "=")
        n->c[1] = convert(rhs, lv->t);
      else
      {
        Op op = arith_op(e.op.substr(0, e.op.size() - 1));
        if(op == Op::None)
          unsupported(e.loc, "operator " + e.op);
        // lv op= rhs evaluates lv once: the binary node reads through c[2]
        Node *read = node(K::Discard, e.loc); // placeholder for the current value
        read->t = lv->t;
        n->c[1] = convert(binary(op, read, rhs, e), lv->t);
        n->c[2] = read;
      }
      return n;
    }
    case ExprKind::Conditional:
    {
      Node *n = node(K::Cond, e.loc);
      n->c[0] = expr(*e.args[0]);
      Node *a = expr(*e.args[1]);
      Node *b = expr(*e.args[2]);
      if(a->t.is_ptr() || b->t.is_ptr())
        n->t = a->t.is_ptr() ? a->t : b->t;
      else
      {
        n->t = {0, common(a->t.base, b->t.base), false};
        a = convert(a, n->t);
        b = convert(b, n->t);
      }
      n->c[1] = a;
      n->c[2] = b;
      return n;
    }
    case ExprKind::Call: return call(e, assigned_name);
    case ExprKind::Index:
    {
      Node *base = expr(*e.args[0]);
      Node *idx = expr(*e.args[1]);
      if(!base->t.is_ptr() && idx->t.is_ptr())
        std::swap(base, idx);
      if(!base->t.is_ptr())
        unsupported(e.loc, "subscript of non-array");
      Node *n = node(K::Index, e.loc);
      n->c[0] = base;
      n->c[1] = idx;
      n->t = base->t.element();
      n->text = source::to_c(e);
      return n;
    }
    case ExprKind::Member: unsupported(e.loc, "struct member access");
    case ExprKind::Cast:
    {
      Node *v = expr(*e.args[0]);
      SType to = stype(*e.type, e.loc);
      if(to.is_void)
      {
        Node *n = node(K::Discard, e.loc);
        n->c[0] = v;
        n->t = to;
        return n;
      }
      if(to.is_ptr())
      {
        v->t = v->t.is_ptr() ? to : v->t; // pointer reinterpretation keeps the value
        if(!v->t.is_ptr())
        {
          Node *n = node(K::Cast, e.loc);
          n->c[0] = v;
          n->t = to;
          return n;
        }
        return v;
      }
      Node *n = node(K::Cast, e.loc);
      n->c[0] = v;
      n->t = to;
      return n;
    }
    case ExprKind::SizeofType:
    {
      bool is_array = false;
      std::int64_t len = -1;
      SType t = stype(*e.type, e.loc, &is_array, &len);
      Node *n = node(K::Const, e.loc);
      n->imm = is_array ? len * (t.depth > 1 ? 8 : t.base.bits / 8) : (t.is_ptr() ? 8 : t.base.bits / 8);
      n->t = {0, {64, true}, false};
      return n;
    }
    case ExprKind::SizeofExpr:
    {
      const Expr &inner = *e.args[0];
      Node *n = node(K::Const, e.loc);
      n->t = {0, {64, true}, false};
      if(inner.kind == ExprKind::Ident)
        if(const VarInfo *v = lookup(inner.name); v && v->is_array)
        {
          SType el = v->type.element();
          n->imm = v->length * (el.is_ptr() ? 8 : el.base.bits / 8);
          return n;
        }
      Node *v = expr(inner);
      n->imm = v->t.is_ptr() ? 8 : v->t.base.bits / 8;
      return n;
    }
    case ExprKind::Comma:
    {
      Node *n = node(K::Comma, e.loc);
      n->c[0] = expr(*e.args[0]);
      n->c[1] = expr(*e.args[1]);
      n->t = n->c[1]->t;
      return n;
    }
    case ExprKind::PreInc:
    case ExprKind::PreDec:
    case ExprKind::PostInc:
    case ExprKind::PostDec:
    {
      Node *n = node(K::IncDec, e.loc);
      n->c[0] = lvalue(*e.args[0]);
      n->t = n->c[0]->t;
      n->flag = e.kind == ExprKind::PreInc || e.kind == ExprKind::PostInc;
      n->flag2 = e.kind == ExprKind::PostInc || e.kind == ExprKind::PostDec;
      n->text = source::to_c(e);
      return n;
    }
    case ExprKind::InitList: unsupported(e.loc, "initializer list");
    }
    unsupported(e.loc, "expression");
  }

  Node *call(const Expr &e, const std::string &assigned_name)
  {
    const Expr &callee = *e.args[0];
    if(callee.kind != ExprKind::Ident || lookup(callee.name) || p_.global_index.count(callee.name))
      unsupported(e.loc, "indirect call");
    const std::string &name = callee.name;
    std::vector<Node *> args;
    for(std::size_t i = 1; i < e.args.size(); ++i)
      args.push_back(expr(*e.args[i]));

    auto builtin = [&](BuiltinId id, SType t) {
      Node *n = node(K::Builtin, e.loc);
      n->a = static_cast<std::int32_t>(id);
      n->list = args;
      n->t = t;
      n->text = name;
      return n;
    };
    if(p_.options.assert_macros.count(name) || name == "__CPROVER_assert")
    {
      if(args.empty())
        unsupported(e.loc, "assert without condition");
      Node *n = builtin(BuiltinId::Assert, {0, int_layout, true});
      n->text = source::to_c(*e.args[1]);
      return n;
    }
    auto fi = p_.func_index.find(name);
    bool has_body = fi != p_.func_index.end() && p_.funcs[fi->second].defined;
    if(!has_body)
    {
      if(Narrowing::is_nondet_name(name))
      {
        SType t{0, int_layout, false};
        if(fi != p_.func_index.end() && !p_.funcs[fi->second].ret.is_void)
          t = p_.funcs[fi->second].ret;
        Node *n = builtin(BuiltinId::Nondet, t);
        n->lo = static_cast<std::int64_t>(min_of(t.base));
        n->hi = static_cast<std::int64_t>(max_of(t.base));
        if(auto d = narrowing_.find(&e))
        {
          n->lo = std::max(n->lo, d->first);
          n->hi = std::min(n->hi, d->second);
        }
        n->text = assigned_name.empty() ? name : assigned_name;
        return n;
      }
      if(Narrowing::is_assume_name(name))
        return builtin(BuiltinId::Assume, {0, int_layout, true});
      if(name == "reach_error" || name == "__VERIFIER_error")
        return builtin(BuiltinId::ReachError, {0, int_layout, true});
      if(name == "nf_trace")
        return builtin(BuiltinId::Trace, {0, int_layout, true});
      Node *n = builtin(BuiltinId::Undefined, {0, int_layout, false});
      n->text = name;
      return n;
    }
    const FuncIR &f = p_.funcs[fi->second];
    Node *n = node(K::Call, e.loc);
    n->a = fi->second;
    n->t = f.ret;
    if(f.param_types.size() != args.size())
      unsupported(e.loc, "call to '" + name + "' with " + std::to_string(args.size()) + " arguments");
    for(std::size_t i = 0; i < args.size(); ++i)
      n->list.push_back(convert(args[i], f.param_types[i]));
    n->text = name;
    return n;
  }
};

enum class Flow { Normal, Break, Continue, Return };

} // namespace

std::shared_ptr<const Program> compile(const source::SourceUnit &unit, const MachineOptions &options)
{
  auto p = std::make_shared<Program>();
  p->options = options;
  p->path = unit.path;
  Lowering(unit, *p).run();
  return p;
}

struct Machine::Impl
{
  Machine &m;
  const Program &p;
  std::vector<Value> globals;
  std::vector<Object> objects;
  std::vector<Value> init_globals;
  std::vector<Object> init_objects;
  std::vector<Value> stack;
  std::size_t frame = 0;
  std::vector<const FuncIR *> call_stack;
  std::vector<char> overflow_on;
  Value ret_value;
  Value compound_current; // value read by a compound assignment

  Impl(Machine &machine, const Program &program) : m(machine), p(program) {}

  [[noreturn]] void trap(Location loc, std::string msg)
  {
    Stop s;
    s.kind = StopKind::Trap;
    s.loc = loc;
    s.message = std::move(msg);
    throw s;
  }

  [[noreturn]] void violate(PropertyKind kind, const Node *n, std::string detail)
  {
    Stop s;
    s.kind = StopKind::Violated;
    s.loc = n->loc;
    s.violation = {kind, call_stack.empty() ? std::string() : call_stack.back()->name, n->loc, std::move(detail)};
    throw s;
  }

  void init()
  {
    overflow_on.assign(p.funcs.size(), 0);
    for(std::size_t i = 0; i < p.funcs.size(); ++i)
    {
      const auto &o = m.options_;
      bool on = o.check_overflow &&
                (o.overflow_functions.empty() ? p.funcs[i].name != "main" : o.overflow_functions.count(p.funcs[i].name) > 0);
      overflow_on[i] = on;
    }
    objects.clear();
    for(const auto &s : p.strings)
    {
      Object o;
      o.elem = {0, {8, false}, false};
      o.readonly = true;
      for(char c : s)
        o.cells.push_back(Value::of(static_cast<unsigned char>(c)));
      o.cells.push_back(Value::of(0));
      objects.push_back(std::move(o));
    }
    globals.assign(p.globals.size(), Value{});
    for(std::size_t i = 0; i < p.globals.size(); ++i)
    {
      const GlobalIR &g = p.globals[i];
      if(g.is_array)
      {
        Object o;
        o.elem = g.elem;
        o.cells.assign(static_cast<std::size_t>(g.length), g.elem.is_ptr() ? Value{0, -1, true} : Value{});
        if(g.init && g.init->k == K::Block)
          for(std::size_t j = 0; j < g.init->list.size() && j < o.cells.size(); ++j)
            o.cells[j] = eval(g.init->list[j]);
        globals[i] = Value{0, static_cast<std::int32_t>(objects.size()), true};
        objects.push_back(std::move(o));
      }
      else
      {
        globals[i] = g.type.is_ptr() ? Value{0, -1, true} : Value{};
        if(g.init)
        {
          Value v = eval(g.init);
          globals[i] = g.type.is_ptr() ? v : Value::of(wrap(widen(v.n, g.init->t.base), g.type.base));
        }
      }
    }
    init_globals = globals;
    init_objects = objects;
  }

  void reset()
  {
    globals = init_globals;
    objects = init_objects;
    stack.clear();
    frame = 0;
    call_stack.clear();
  }

  void step(Location loc)
  {
    if(++m.steps_ > static_cast<std::uint64_t>(m.options_.max_steps))
      trap(loc, "step limit exceeded");
  }

  bool overflow_checks() const
  {
    return !call_stack.empty() && overflow_on[call_stack.back() - p.funcs.data()];
  }

  // --- memory

  Value &cell(const Node *n, Value ptr, std::int64_t idx, bool write)
  {
    if(!ptr.ptr || ptr.obj < 0)
      violate(PropertyKind::NullDeref, n, n->text);
    if(static_cast<std::size_t>(ptr.obj) >= objects.size())
      trap(n->loc, "dangling pointer");
    Object &o = objects[static_cast<std::size_t>(ptr.obj)];
    std::int64_t at = ptr.n + idx;
    if(at < 0 || at >= static_cast<std::int64_t>(o.cells.size()))
      violate(PropertyKind::ArrayBound, n, n->text);
    if(write && o.readonly)
      trap(n->loc, "write to a string literal");
    return o.cells[static_cast<std::size_t>(at)];
  }

  Value &place(const Node *lv)
  {
    switch(lv->k)
    {
    case K::Local: return stack[frame + static_cast<std::size_t>(lv->a)];
    case K::Global: return globals[static_cast<std::size_t>(lv->a)];
    case K::Index:
    {
      Value base = eval(lv->c[0]);
      Value idx = eval(lv->c[1]);
      return cell(lv, base, idx.n, true);
    }
    case K::Deref: return cell(lv, eval(lv->c[0]), 0, true);
    default: trap(lv->loc, "not an lvalue");
    }
  }

  Value store_convert(Value v, const Node *from, SType to)
  {
    if(to.is_ptr())
      return v.ptr ? v : Value{0, -1, true};
    if(v.ptr)
      return Value::of(v.obj < 0 ? 0 : 1);
    return Value::of(wrap(widen(v.n, from->t.base), to.base));
  }

  // --- arithmetic

  std::int64_t arith(const Node *n, Op op, std::int64_t lv, ScalarLayout lt, std::int64_t rv, ScalarLayout rt)
  {
    ScalarLayout ct{static_cast<int>(n->imm), n->flag};
    i128 a = widen(wrap(widen(lv, lt), ct), ct);
    i128 b = (op == Op::Shl || op == Op::Shr) ? widen(rv, rt) : widen(wrap(widen(rv, rt), ct), ct);
    i128 r = 0;
    switch(op)
    {
    case Op::Add: r = a + b; break;
    case Op::Sub: r = a - b; break;
    case Op::Mul: r = a * b; break;
    case Op::Div:
    case Op::Mod:
      if(b == 0)
        trap(n->loc, "division by zero in " + n->text);
      r = op == Op::Div ? a / b : a % b;
      break;
    case Op::Shl:
      if(b < 0 || b >= ct.bits)
        trap(n->loc, "shift out of range in " + n->text);
      r = a << static_cast<int>(b);
      break;
    case Op::Shr:
      if(b < 0 || b >= ct.bits)
        trap(n->loc, "shift out of range in " + n->text);
      r = a >> static_cast<int>(b);
      break;
    case Op::And: r = a & b; break;
    case Op::Or: r = a | b; break;
    case Op::Xor: r = a ^ b; break;
    case Op::Lt: return a < b;
    case Op::Le: return a <= b;
    case Op::Gt: return a > b;
    case Op::Ge: return a >= b;
    case Op::Eq: return a == b;
    case Op::Ne: return a != b;
    case Op::None: break;
    }
    if(!ct.is_unsigned && (op == Op::Add || op == Op::Sub || op == Op::Mul || op == Op::Div) &&
       (r < min_of(ct) || r > max_of(ct)) && overflow_checks())
      violate(PropertyKind::Overflow, n, n->text);
    return wrap(r, ct);
  }

  // --- expressions

  Value eval(const Node *n)
  {
    switch(n->k)
    {
    case K::Const: return Value::of(n->imm);
    case K::Str: return Value{0, n->a, true};
    case K::Local: return stack[frame + static_cast<std::size_t>(n->a)];
    case K::Global: return globals[static_cast<std::size_t>(n->a)];
    case K::Index:
    {
      Value base = eval(n->c[0]);
      Value idx = eval(n->c[1]);
      return cell(n, base, idx.n, false);
    }
    case K::Deref: return cell(n, eval(n->c[0]), 0, false);
    case K::Neg:
    {
      Value v = eval(n->c[0]);
      ScalarLayout t = n->t.base;
      i128 r = -widen(wrap(widen(v.n, n->c[0]->t.base), t), t);
      if(!t.is_unsigned && r > max_of(t) && overflow_checks())
        violate(PropertyKind::Overflow, n, n->text);
      return Value::of(wrap(r, t));
    }
    case K::BitNot:
    {
      Value v = eval(n->c[0]);
      return Value::of(wrap(~widen(v.n, n->c[0]->t.base), n->t.base));
    }
    case K::Not: return Value::of(!eval(n->c[0]).truthy());
    case K::Arith:
    case K::Compare:
    {
      Value a = eval(n->c[0]);
      Value b = eval(n->c[1]);
      return Value::of(arith(n, n->op, a.n, n->c[0]->t.base, b.n, n->c[1]->t.base));
    }
    case K::PtrArith:
    {
      Value p = eval(n->c[0]);
      Value i = eval(n->c[1]);
      if(p.obj < 0)
        violate(PropertyKind::NullDeref, n, "arithmetic on a null pointer");
      return Value{p.n + n->imm * i.n, p.obj, true};
    }
    case K::PtrDiff:
    {
      Value a = eval(n->c[0]);
      Value b = eval(n->c[1]);
      return Value::of(a.n - b.n);
    }
    case K::PtrCompare:
    {
      Value a = eval(n->c[0]);
      Value b = eval(n->c[1]);
      auto key = [](Value v) { return std::pair<std::int64_t, std::int64_t>(v.ptr ? v.obj : (v.n == 0 ? -1 : -2), v.ptr ? v.n : 0); };
      auto ka = key(a), kb = key(b);
      switch(n->op)
      {
      case Op::Eq: return Value::of(ka == kb);
      case Op::Ne: return Value::of(ka != kb);
      case Op::Lt: return Value::of(ka < kb);
      case Op::Le: return Value::of(ka <= kb);
      case Op::Gt: return Value::of(ka > kb);
      case Op::Ge: return Value::of(ka >= kb);
      default: trap(n->loc, "pointer comparison");
      }
    }
    case K::LAnd: return Value::of(eval(n->c[0]).truthy() && eval(n->c[1]).truthy());
    case K::LOr: return Value::of(eval(n->c[0]).truthy() || eval(n->c[1]).truthy());
    case K::Cond: return eval(n->c[0]).truthy() ? eval(n->c[1]) : eval(n->c[2]);
    case K::Assign:
    {
      if(!n->c[2])
      {
        Value v = eval(n->c[1]);
        Value &dst = place(n->c[0]);
        dst = store_convert(v, n->c[1], n->c[0]->t);
        return dst;
      }
      Value &dst = place(n->c[0]);
      std::size_t dst_index = &dst - (dst_in_stack(&dst) ? stack.data() : nullptr);
      bool in_stack = dst_in_stack(&dst);
      Value saved = compound_current;
      compound_current = dst;
      Value v = eval(n->c[1]);
      compound_current = saved;
      // the right side may have grown the stack
      Value &dst2 = in_stack ? stack[dst_index] : place_again(n->c[0], &dst);
      dst2 = store_convert(v, n->c[1], n->c[0]->t);
      return dst2;
    }
    case K::Discard:
      if(n->c[0])
      {
        eval(n->c[0]);
        return Value{};
      }
      return compound_current;
    case K::IncDec:
    {
      Value &dst = place(n->c[0]);
      Value old = dst;
      if(n->t.is_ptr())
        dst.n += n->flag ? 1 : -1;
      else
      {
        ScalarLayout t = n->t.base;
        i128 r = widen(dst.n, t) + (n->flag ? 1 : -1);
        ScalarLayout pt = promote(t);
        if(!pt.is_unsigned && (r < min_of(pt) || r > max_of(pt)) && overflow_checks())
          violate(PropertyKind::Overflow, n, n->text);
        dst = Value::of(wrap(r, t));
      }
      return n->flag2 ? old : dst;
    }
    case K::Cast:
    {
      Value v = eval(n->c[0]);
      if(n->t.is_ptr())
        return v.ptr ? v : Value{0, -1, true};
      if(v.ptr)
        return Value::of(v.obj < 0 ? 0 : 1);
      return Value::of(wrap(widen(v.n, n->c[0]->t.base), n->t.base));
    }
    case K::Comma:
      eval(n->c[0]);
      return eval(n->c[1]);
    case K::Call: return call(n);
    case K::Builtin: return builtin(n);
    default: trap(n->loc, "statement used as expression");
    }
  }

  bool dst_in_stack(const Value *v) const
  {
    return !stack.empty() && v >= stack.data() && v < stack.data() + stack.size();
  }

  Value &place_again(const Node *lv, Value *old)
  {
    // globals and object cells do not move while the right side runs
    (void)lv;
    return *old;
  }

  Value builtin(const Node *n)
  {
    auto id = static_cast<BuiltinId>(n->a);
    switch(id)
    {
    case BuiltinId::Nondet:
    {
      if(!m.choices)
        trap(n->loc, "nondet call outside a checker run");
      auto &ch = *m.choices;
      if(m.cursor < ch.size())
        return Value::of(ch[m.cursor++].value);
      if(n->lo > n->hi)
      {
        Stop s;
        s.kind = StopKind::AssumeFailed;
        s.loc = n->loc;
        throw s;
      }
      ch.push_back({choice_name(n), n->lo, n->lo, n->hi});
      ++m.cursor;
      return Value::of(n->lo);
    }
    case BuiltinId::Assume:
      for(const Node *a : n->list)
        if(!eval(a).truthy())
        {
          Stop s;
          s.kind = StopKind::AssumeFailed;
          s.loc = n->loc;
          throw s;
        }
      return Value{};
    case BuiltinId::Assert:
      if(!eval(n->list[0]).truthy())
        violate(PropertyKind::UserAssert, n, n->text);
      return Value{};
    case BuiltinId::ReachError: violate(PropertyKind::UserAssert, n, "reach_error()");
    case BuiltinId::Trace:
    {
      if(n->list.size() != 4)
        trap(n->loc, "nf_trace takes 4 arguments");
      Value pp = eval(n->list[0]);
      Value names = eval(n->list[1]);
      Value vals = eval(n->list[2]);
      std::int64_t count = eval(n->list[3]).n;
      instrument::TraceRecord r;
      r.pp = read_string(n, pp);
      for(std::int64_t i = 0; i < count; ++i)
        r.vars.emplace_back(read_string(n, cell(n, names, i, false)), cell(n, vals, i, false).n);
      if(m.on_trace)
        m.on_trace(r);
      return Value{};
    }
    case BuiltinId::Undefined: trap(n->loc, "call to undefined function '" + n->text + "'");
    }
    return Value{};
  }

  std::string read_string(const Node *n, Value p)
  {
    std::string s;
    for(std::int64_t i = 0;; ++i)
    {
      Value c = cell(n, p, i, false);
      if(c.n == 0)
        return s;
      s.push_back(static_cast<char>(c.n));
    }
  }

  std::string choice_name(const Node *n)
  {
    // "text[nf_i]" is reported with the index evaluated
    const std::string &t = n->text;
    auto open = t.find('[');
    if(open == std::string::npos || t.back() != ']')
      return t;
    std::string index = t.substr(open + 1, t.size() - open - 2);
    // only plain local index variables are resolved
    for(std::size_t s = frame; s < stack.size(); ++s)
      (void)s;
    auto it = current_index_names.find(index);
    if(it != current_index_names.end())
      return t.substr(0, open) + "[" + std::to_string(it->second) + "]";
    return t;
  }
  std::map<std::string, std::int64_t> current_index_names;

  Value call(const Node *n)
  {
    const FuncIR &f = p.funcs[static_cast<std::size_t>(n->a)];
    std::vector<Value> args;
    args.reserve(n->list.size());
    for(const Node *a : n->list)
      args.push_back(eval(a));
    return invoke(f, args, n->loc);
  }

  Value invoke(const FuncIR &f, const std::vector<Value> &args, Location at)
  {
    if(!f.body)
      trap(at, "cannot execute '" + f.name + "': " + (f.unsupported.empty() ? "no body" : f.unsupported));
    if(static_cast<int>(call_stack.size()) >= m.options_.max_depth)
      trap(at, "call depth limit in '" + f.name + "'");
    std::size_t saved_frame = frame;
    std::size_t base = stack.size();
    std::size_t saved_objects = objects.size();
    stack.resize(base + static_cast<std::size_t>(f.nslots));
    for(std::size_t i = 0; i < args.size(); ++i)
    {
      const SType &t = f.param_types[i];
      Value v = args[i];
      stack[base + i] = t.is_ptr() ? (v.ptr ? v : Value{0, -1, true}) : Value::of(wrap(v.n, t.base));
    }
    frame = base;
    call_stack.push_back(&f);
    ret_value = Value{};
    exec(f.body);
    Value r = ret_value;
    call_stack.pop_back();
    stack.resize(base);
    frame = saved_frame;
    if(objects.size() > saved_objects && !r.ptr)
      objects.resize(saved_objects);
    if(f.ret.is_void)
      return Value{};
    return f.ret.is_ptr() ? (r.ptr ? r : Value{0, -1, true}) : Value::of(wrap(r.n, f.ret.base));
  }

  // --- statements

  Flow exec(const Node *n)
  {
    step(n->loc);
    switch(n->k)
    {
    case K::Block:
      for(const Node *s : n->list)
      {
        Flow f = exec(s);
        if(f != Flow::Normal)
          return f;
      }
      return Flow::Normal;
    case K::DeclScalar:
    {
      Value v = n->t.is_ptr() ? Value{0, -1, true} : Value{};
      if(n->c[0])
        v = store_convert(eval(n->c[0]), n->c[0], n->t);
      stack[frame + static_cast<std::size_t>(n->a)] = v;
      return Flow::Normal;
    }
    case K::DeclArray:
    {
      Object o;
      o.elem = n->t;
      o.cells.assign(static_cast<std::size_t>(n->imm), n->t.is_ptr() ? Value{0, -1, true} : Value{});
      if(n->c[0])
        for(std::size_t j = 0; j < n->c[0]->list.size() && j < o.cells.size(); ++j)
          o.cells[j] = store_convert(eval(n->c[0]->list[j]), n->c[0]->list[j], n->t);
      stack[frame + static_cast<std::size_t>(n->a)] = Value{0, static_cast<std::int32_t>(objects.size()), true};
      objects.push_back(std::move(o));
      return Flow::Normal;
    }
    case K::ExprStmt:
      track_index(n->c[0]);
      eval(n->c[0]);
      return Flow::Normal;
    case K::If:
    {
      bool c = eval(n->c[0]).truthy();
      if(m.on_arm)
        m.on_arm(n->loc, c ? instrument::Arm::Then : instrument::Arm::Else);
      if(c)
        return exec(n->c[1]);
      if(n->c[2])
        return exec(n->c[2]);
      return Flow::Normal;
    }
    case K::While:
    case K::DoWhile:
    {
      std::int64_t iterations = 0;
      bool first = n->k == K::DoWhile;
      for(;;)
      {
        if(!first && !eval(n->c[0]).truthy())
          break;
        first = false;
        if(Flow f = body(n, n->c[1], iterations); f == Flow::Break)
          break;
        else if(f == Flow::Return)
          return f;
        if(n->k == K::DoWhile && !eval(n->c[0]).truthy())
          break;
        first = n->k == K::DoWhile;
      }
      return Flow::Normal;
    }
    case K::For:
    {
      if(n->c[0])
        exec(n->c[0]);
      std::int64_t iterations = 0;
      for(;;)
      {
        if(n->c[1] && !eval(n->c[1]).truthy())
          break;
        Flow f = body(n, n->c[3], iterations);
        if(f == Flow::Break)
          break;
        if(f == Flow::Return)
          return f;
        if(n->c[2])
        {
          track_index(n->c[2]);
          eval(n->c[2]);
        }
      }
      return Flow::Normal;
    }
    case K::Return:
      ret_value = n->c[0] ? eval(n->c[0]) : Value{};
      return Flow::Return;
    case K::Break: return Flow::Break;
    case K::Continue: return Flow::Continue;
    case K::Nop: return Flow::Normal;
    default: eval(n); return Flow::Normal;
    }
  }

  Flow body(const Node *loop, const Node *b, std::int64_t &iterations)
  {
    std::int64_t cap = m.options_.loop_cap;
    if(cap > 0 && iterations >= cap)
    {
      Stop s;
      s.kind = StopKind::LoopCap;
      s.loc = loop->loc;
      throw s;
    }
    ++iterations;
    if(m.on_arm)
      m.on_arm(loop->loc, instrument::Arm::Body);
    Flow f = exec(b);
    return f == Flow::Continue ? Flow::Normal : f;
  }

  // remembers plain local values named in nondet targets, for choice names
  void track_index(const Node *)
  {
    current_index_names.clear();
    if(!call_stack.empty())
      for(const auto &[name, slot] : index_slots(*call_stack.back()))
        current_index_names[name] = stack[frame + static_cast<std::size_t>(slot)].n;
  }

  const std::map<std::string, int> &index_slots(const FuncIR &f)
  {
    static const std::map<std::string, int> none;
    auto it = index_slot_cache.find(&f);
    return it == index_slot_cache.end() ? none : it->second;
  }
  std::map<const FuncIR *, std::map<std::string, int>> index_slot_cache;
};

namespace {

// locals used as subscripts of nondet targets: "text[nf_i]" -> nf_i
void collect_index_slots(const Node *n, std::map<std::string, std::string> &wanted)
{
  if(!n)
    return;
  if(n->k == K::Builtin && static_cast<BuiltinId>(n->a) == BuiltinId::Nondet)
  {
    auto open = n->text.find('[');
    if(open != std::string::npos && n->text.back() == ']')
      wanted[n->text.substr(open + 1, n->text.size() - open - 2)] = "";
  }
  for(const Node *c : n->c)
    collect_index_slots(c, wanted);
  for(const Node *c : n->list)
    collect_index_slots(c, wanted);
}

void collect_locals(const Node *n, std::map<std::string, int> &out)
{
  if(!n)
    return;
  if(n->k == K::Local && !n->text.empty())
    out.emplace(n->text, n->a);
  for(const Node *c : n->c)
    collect_locals(c, out);
  for(const Node *c : n->list)
    collect_locals(c, out);
}

} // namespace

Machine::Machine(std::shared_ptr<const Program> program)
  : program_(std::move(program)), options_(program_->options), impl_(std::make_unique<Impl>(*this, *program_))
{
  for(const auto &f : program_->funcs)
  {
    std::map<std::string, std::string> wanted;
    collect_index_slots(f.body, wanted);
    if(wanted.empty())
      continue;
    std::map<std::string, int> locals;
    collect_locals(f.body, locals);
    for(const auto &[name, _] : wanted)
      if(auto it = locals.find(name); it != locals.end())
        impl_->index_slot_cache[&f][name] = it->second;
  }
  impl_->init();
}

Machine::~Machine() = default;

void Machine::reset()
{
  impl_->reset();
  cursor = 0;
  steps_ = 0;
}

bool Machine::has_function(const std::string &function) const
{
  auto it = program_->func_index.find(function);
  return it != program_->func_index.end() && program_->funcs[it->second].defined;
}

Value Machine::call(const std::string &function, const std::vector<Value> &args)
{
  // options may have changed since construction
  for(std::size_t i = 0; i < program_->funcs.size(); ++i)
    impl_->overflow_on[i] = options_.check_overflow &&
                            (options_.overflow_functions.empty() ? program_->funcs[i].name != "main"
                                                                 : options_.overflow_functions.count(program_->funcs[i].name) > 0);
  auto it = program_->func_index.find(function);
  if(it == program_->func_index.end() || !program_->funcs[it->second].defined)
    throw Stop{StopKind::Trap, {}, "no function '" + function + "'", {}};
  const FuncIR &f = program_->funcs[it->second];
  if(!f.body)
    throw Stop{StopKind::Trap, {}, "cannot execute '" + function + "': " + f.unsupported, {}};
  if(f.param_types.size() != args.size())
    throw Stop{StopKind::Trap, {}, "'" + function + "' takes " + std::to_string(f.param_types.size()) + " arguments", {}};
  impl_->stack.clear();
  impl_->frame = 0;
  impl_->call_stack.clear();
  return impl_->invoke(f, args, {});
}

Value Machine::make_array(const std::vector<std::int64_t> &values, std::size_t size, source::ScalarLayout element)
{
  Object o;
  o.elem = {0, element, false};
  o.cells.assign(std::max(size, values.size()), Value{});
  for(std::size_t i = 0; i < values.size(); ++i)
    o.cells[i] = Value::of(wrap(values[i], element));
  impl_->objects.push_back(std::move(o));
  return Value{0, static_cast<std::int32_t>(impl_->objects.size() - 1), true};
}

std::vector<std::int64_t> Machine::read_array(Value pointer, std::size_t count) const
{
  std::vector<std::int64_t> out;
  if(!pointer.ptr || pointer.obj < 0 || static_cast<std::size_t>(pointer.obj) >= impl_->objects.size())
    return out;
  const Object &o = impl_->objects[static_cast<std::size_t>(pointer.obj)];
  for(std::size_t i = 0; i < count && pointer.n + static_cast<std::int64_t>(i) < static_cast<std::int64_t>(o.cells.size()); ++i)
    out.push_back(o.cells[static_cast<std::size_t>(pointer.n) + i].n);
  return out;
}

bool Machine::has_global(const std::string &name) const
{
  return program_->global_index.count(name) > 0;
}

std::int64_t Machine::global(const std::string &name) const
{
  auto it = program_->global_index.find(name);
  if(it == program_->global_index.end())
    throw Error("no global '" + name + "'");
  return impl_->globals[static_cast<std::size_t>(it->second)].n;
}

void Machine::set_global(const std::string &name, std::int64_t value)
{
  auto it = program_->global_index.find(name);
  if(it == program_->global_index.end())
    throw Error("no global '" + name + "'");
  const GlobalIR &g = program_->globals[static_cast<std::size_t>(it->second)];
  impl_->globals[static_cast<std::size_t>(it->second)] = Value::of(wrap(value, g.type.base));
}

} // namespace nf::check
