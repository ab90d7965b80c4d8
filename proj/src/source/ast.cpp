#include <needlefinder/source/ast.hpp>

#include <sstream>

namespace nf::source {

std::string to_string(const TypeExpr &type)
{
  std::string base;
  for(const auto &w : type.specifiers)
    base += (base.empty() ? "" : " ") + w;
  std::string decl;
  for(auto it = type.derived.rbegin(); it != type.derived.rend(); ++it)
  {
    switch(it->kind)
    {
    case Derivation::Kind::Pointer: decl = "*" + decl; break;
    case Derivation::Kind::Array:
      if(!decl.empty() && decl.front() == '*')
        decl = "(" + decl + ")";
      decl += "[" + (it->length < 0 ? std::string() : std::to_string(it->length)) + "]";
      break;
    case Derivation::Kind::Function:
      if(!decl.empty() && decl.front() == '*')
        decl = "(" + decl + ")";
      decl += "()";
      break;
    }
  }
  return decl.empty() ? base : base + " " + decl;
}

namespace {

void dump_expr(std::ostream &out, const Expr &e)
{
  out << "(";
  switch(e.kind)
  {
  case ExprKind::IntLit: out << "int " << e.value; break;
  case ExprKind::StrLit: out << "str \"" << e.name << "\""; break;
  case ExprKind::Ident: out << "id " << e.name; break;
  case ExprKind::Unary: out << "unary " << e.op; break;
  case ExprKind::Binary: out << "bin " << e.op; break;
  case ExprKind::Assign: out << "assign " << e.op; break;
  case ExprKind::Conditional: out << "cond"; break;
  case ExprKind::Call: out << "call"; break;
  case ExprKind::Index: out << "index"; break;
  case ExprKind::Member: out << "member " << e.op << e.name; break;
  case ExprKind::Cast: out << "cast " << to_string(*e.type); break;
  case ExprKind::SizeofType: out << "sizeof " << to_string(*e.type); break;
  case ExprKind::SizeofExpr: out << "sizeof"; break;
  case ExprKind::Comma: out << "comma"; break;
  case ExprKind::PreInc: out << "preinc"; break;
  case ExprKind::PreDec: out << "predec"; break;
  case ExprKind::PostInc: out << "postinc"; break;
  case ExprKind::PostDec: out << "postdec"; break;
  case ExprKind::InitList: out << "init"; break;
  }
  out << "@" << e.loc.str();
  for(const auto &a : e.args)
  {
    out << " ";
    dump_expr(out, *a);
  }
  out << ")";
}

void dump_decl(std::ostream &out, const VarDecl &d)
{
  out << "(var " << d.name << " : " << to_string(d.type);
  if(d.is_static)
    out << " static";
  if(d.init)
  {
    out << " = ";
    dump_expr(out, *d.init);
  }
  out << ")";
}

void dump_stmt(std::ostream &out, const Stmt &s, int indent)
{
  std::string pad(indent * 2, ' ');
  out << pad << "(";
  switch(s.kind)
  {
  case StmtKind::Compound: out << "block"; break;
  case StmtKind::Decl: out << "decl"; break;
  case StmtKind::Expr: out << "expr"; break;
  case StmtKind::If: out << "if"; break;
  case StmtKind::While: out << "while"; break;
  case StmtKind::DoWhile: out << "do"; break;
  case StmtKind::For: out << "for"; break;
  case StmtKind::Return: out << "return"; break;
  case StmtKind::Break: out << "break"; break;
  case StmtKind::Continue: out << "continue"; break;
  case StmtKind::Empty: out << "empty"; break;
  }
  out << "@" << s.loc.str() << "-" << s.end;
  for(const auto &d : s.decls)
  {
    out << " ";
    dump_decl(out, d);
  }
  if(s.expr)
  {
    out << " ";
    dump_expr(out, *s.expr);
  }
  if(s.step)
  {
    out << " step ";
    dump_expr(out, *s.step);
  }
  out << "\n";
  if(s.init)
    dump_stmt(out, *s.init, indent + 1);
  for(const auto &item : s.items)
    dump_stmt(out, *item, indent + 1);
  if(s.body)
    dump_stmt(out, *s.body, indent + 1);
  if(s.else_body)
  {
    out << pad << " else\n";
    dump_stmt(out, *s.else_body, indent + 1);
  }
  out << pad << ")\n";
}

int precedence_of(const Expr &e)
{
  switch(e.kind)
  {
  case ExprKind::Comma: return 0;
  case ExprKind::Assign: return 1;
  case ExprKind::Conditional: return 2;
  case ExprKind::Binary:
  {
    const std::string &op = e.op;
    if(op == "||")
      return 3;
    if(op == "&&")
      return 4;
    if(op == "|")
      return 5;
    if(op == "^")
      return 6;
    if(op == "&")
      return 7;
    if(op == "==" || op == "!=")
      return 8;
    if(op == "<" || op == ">" || op == "<=" || op == ">=")
      return 9;
    if(op == "<<" || op == ">>")
      return 10;
    if(op == "+" || op == "-")
      return 11;
    return 12;
  }
  case ExprKind::Unary:
  case ExprKind::Cast:
  case ExprKind::PreInc:
  case ExprKind::PreDec:
  case ExprKind::SizeofExpr:
  case ExprKind::SizeofType: return 13;
  default: return 14;
  }
}

std::string wrap(const Expr &e, int min_prec)
{
  std::string s = to_c(e);
  return precedence_of(e) < min_prec ? "(" + s + ")" : s;
}

} // namespace

std::string dump(const Expr &expr)
{
  std::ostringstream out;
  dump_expr(out, expr);
  return out.str();
}

std::string dump(const SourceUnit &unit)
{
  std::ostringstream out;
  out << "(unit " << unit.path << "\n";
  for(const auto &[name, type] : unit.typedefs)
    out << " (typedef " << name << " : " << to_string(type) << ")\n";
  for(const auto &[name, value] : unit.constants)
    out << " (const " << name << " " << value << ")\n";
  for(const auto &g : unit.globals)
  {
    out << " ";
    dump_decl(out, g);
    out << "\n";
  }
  for(const auto &p : unit.prototypes)
    out << " (proto " << p.name << " : " << to_string(p.return_type) << " params "
        << p.params.size() << ")\n";
  for(const auto &f : unit.functions)
  {
    out << " (function " << f.name << " : " << to_string(f.return_type) << " @"
        << f.loc.str() << " [" << f.begin << "," << f.end << ")";
    for(const auto &p : f.params)
      out << " (param " << p.name << " : " << to_string(p.type) << ")";
    if(f.opaque)
      out << " opaque \"" << f.opaque_reason << "\"";
    out << "\n";
    if(f.body)
      dump_stmt(out, *f.body, 2);
    out << " )\n";
  }
  out << ")\n";
  return out.str();
}

std::string to_c(const Expr &e)
{
  switch(e.kind)
  {
  case ExprKind::IntLit: return std::to_string(e.value);
  case ExprKind::StrLit:
  {
    std::string s = "\"";
    for(char c : e.name)
    {
      if(c == '"' || c == '\\')
        s += '\\';
      if(c == '\n')
      {
        s += "\\n";
        continue;
      }
      s += c;
    }
    return s + "\"";
  }
  case ExprKind::Ident: return e.name;
  case ExprKind::Unary: return e.op + wrap(*e.args[0], 13);
  case ExprKind::Binary:
  {
    int p = precedence_of(e);
    return wrap(*e.args[0], p) + " " + e.op + " " + wrap(*e.args[1], p + 1);
  }
  case ExprKind::Assign: return wrap(*e.args[0], 13) + " " + e.op + " " + wrap(*e.args[1], 1);
  case ExprKind::Conditional:
    return wrap(*e.args[0], 3) + " ? " + wrap(*e.args[1], 0) + " : " + wrap(*e.args[2], 2);
  case ExprKind::Call:
  {
    std::string s = wrap(*e.args[0], 14) + "(";
    for(std::size_t i = 1; i < e.args.size(); ++i)
      s += (i > 1 ? ", " : "") + wrap(*e.args[i], 1);
    return s + ")";
  }
  case ExprKind::Index: return wrap(*e.args[0], 14) + "[" + to_c(*e.args[1]) + "]";
  case ExprKind::Member: return wrap(*e.args[0], 14) + e.op + e.name;
  case ExprKind::Cast: return "(" + to_string(*e.type) + ")" + wrap(*e.args[0], 13);
  case ExprKind::SizeofType: return "sizeof(" + to_string(*e.type) + ")";
  case ExprKind::SizeofExpr: return "sizeof " + wrap(*e.args[0], 13);
  case ExprKind::Comma: return wrap(*e.args[0], 0) + ", " + wrap(*e.args[1], 1);
  case ExprKind::PreInc: return "++" + wrap(*e.args[0], 13);
  case ExprKind::PreDec: return "--" + wrap(*e.args[0], 13);
  case ExprKind::PostInc: return wrap(*e.args[0], 14) + "++";
  case ExprKind::PostDec: return wrap(*e.args[0], 14) + "--";
  case ExprKind::InitList:
  {
    std::string s = "{";
    for(std::size_t i = 0; i < e.args.size(); ++i)
      s += (i ? ", " : "") + to_c(*e.args[i]);
    return s + "}";
  }
  }
  return "?";
}

std::optional<std::int64_t> fold_constant(const Expr &e,
                                          const std::map<std::string, std::int64_t> &constants)
{
  auto sub = [&](std::size_t i) { return fold_constant(*e.args[i], constants); };
  switch(e.kind)
  {
  case ExprKind::IntLit: return e.value;
  case ExprKind::Ident:
  {
    auto it = constants.find(e.name);
    if(it == constants.end())
      return std::nullopt;
    return it->second;
  }
  case ExprKind::Cast: return sub(0);
  case ExprKind::Unary:
  {
    auto v = sub(0);
    if(!v)
      return std::nullopt;
    if(e.op == "-")
      return -*v;
    if(e.op == "+")
      return *v;
    if(e.op == "~")
      return ~*v;
    if(e.op == "!")
      return *v == 0 ? 1 : 0;
    return std::nullopt;
  }
  case ExprKind::Binary:
  {
    auto a = sub(0), b = sub(1);
    if(!a || !b)
      return std::nullopt;
    const std::string &op = e.op;
    if(op == "+")
      return *a + *b;
    if(op == "-")
      return *a - *b;
    if(op == "*")
      return *a * *b;
    if(op == "/" || op == "%")
    {
      if(*b == 0)
        return std::nullopt;
      return op == "/" ? *a / *b : *a % *b;
    }
    if(op == "<<")
      return *a << (*b & 63);
    if(op == ">>")
      return *a >> (*b & 63);
    if(op == "&")
      return *a & *b;
    if(op == "|")
      return *a | *b;
    if(op == "^")
      return *a ^ *b;
    if(op == "<")
      return *a < *b;
    if(op == ">")
      return *a > *b;
    if(op == "<=")
      return *a <= *b;
    if(op == ">=")
      return *a >= *b;
    if(op == "==")
      return *a == *b;
    if(op == "!=")
      return *a != *b;
    if(op == "&&")
      return *a && *b;
    if(op == "||")
      return *a || *b;
    return std::nullopt;
  }
  case ExprKind::Conditional:
  {
    auto c = sub(0);
    if(!c)
      return std::nullopt;
    return *c ? sub(1) : sub(2);
  }
  default: return std::nullopt;
  }
}

} // namespace nf::source
