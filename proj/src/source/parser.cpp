#include <needlefinder/source/lexer.hpp>
#include <needlefinder/source/parser.hpp>
#include <needlefinder/source/types.hpp>

#include <set>

namespace nf::source {
namespace {

const std::set<std::string> type_keywords = {
  "void",   "char",     "short",    "int",      "long",  "signed", "unsigned",
  "float",  "double",   "_Bool",    "const",    "volatile", "struct", "union",
  "enum",   "static",   "extern",   "register", "inline", "typedef", "auto",
  "restrict", "__inline", "__restrict"};

const std::set<std::string> unsupported_keywords = {"switch", "case", "default", "goto", "asm",
                                                    "__asm__"};

// Thrown for constructs outside the subset; caught per function body.
struct UnsupportedSyntax
{
  Location where;
  std::string what;
};

struct Specifiers
{
  std::vector<std::string> words;
  bool is_typedef = false;
  bool is_static = false;
  bool is_extern = false;
};

struct Declarator
{
  std::string name;
  Location loc;
  std::vector<Derivation> derived;
  std::vector<Param> params; // parameters of a function suffix bound to the name
  bool has_params = false;
  bool variadic = false;
};

int binary_precedence(const Token &t)
{
  if(t.kind != TokenKind::Punct)
    return -1;
  const std::string &op = t.text;
  if(op == "||")
    return 1;
  if(op == "&&")
    return 2;
  if(op == "|")
    return 3;
  if(op == "^")
    return 4;
  if(op == "&")
    return 5;
  if(op == "==" || op == "!=")
    return 6;
  if(op == "<" || op == ">" || op == "<=" || op == ">=")
    return 7;
  if(op == "<<" || op == ">>")
    return 8;
  if(op == "+" || op == "-")
    return 9;
  if(op == "*" || op == "/" || op == "%")
    return 10;
  return -1;
}

bool is_assign_op(const Token &t)
{
  static const std::set<std::string> ops = {"=",  "+=", "-=", "*=",  "/=",  "%=",
                                            "&=", "|=", "^=", "<<=", ">>="};
  return t.kind == TokenKind::Punct && ops.count(t.text) > 0;
}

class Parser
{
public:
  Parser(std::vector<Token> tokens, SourceUnit &unit) : toks_(std::move(tokens)), unit_(unit)
  {
    for(const auto &[name, _] : unit_.typedefs)
      typedef_names_.insert(name);
  }

  void parse_translation_unit()
  {
    while(!at_end())
    {
      if(accept(";"))
        continue;
      external_declaration();
    }
  }

  TypeExpr type_name_only(bool allow_unknown)
  {
    TypeExpr t = type_name(allow_unknown);
    if(!at_end())
      throw ParseError(peek().loc, "trailing tokens after type name");
    return t;
  }

  ExprPtr expression_only()
  {
    ExprPtr e = expression();
    if(!at_end())
      throw ParseError(peek().loc, "trailing tokens after expression");
    return e;
  }

private:
  // ---- token helpers -------------------------------------------------
  const Token &peek(std::size_t ahead = 0) const
  {
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  bool at_end() const { return peek().kind == TokenKind::End; }
  const Token &next()
  {
    const Token &t = toks_[pos_];
    if(pos_ + 1 < toks_.size())
      ++pos_;
    prev_end_ = t.end;
    return t;
  }
  bool accept(std::string_view punct)
  {
    if(peek().is(punct))
    {
      next();
      return true;
    }
    return false;
  }
  const Token &expect(std::string_view punct)
  {
    if(!peek().is(punct))
      throw ParseError(peek().loc, "expected '" + std::string(punct) + "' before '" +
                                     describe(peek()) + "'");
    return next();
  }
  std::string expect_identifier()
  {
    if(peek().kind != TokenKind::Identifier)
      throw ParseError(peek().loc, "expected identifier before '" + describe(peek()) + "'");
    return next().text;
  }
  static std::string describe(const Token &t)
  {
    return t.kind == TokenKind::End ? std::string("end of input") : t.text;
  }

  bool is_typedef_name(const Token &t) const
  {
    return t.kind == TokenKind::Identifier && typedef_names_.count(t.text) > 0;
  }

  bool starts_type(const Token &t) const
  {
    return (t.kind == TokenKind::Identifier && type_keywords.count(t.text) > 0) ||
           is_typedef_name(t);
  }

  // An unknown identifier in type position, e.g. `JSCompiler *cx`.
  bool unknown_type_name_here() const
  {
    const Token &t = peek();
    if(t.kind != TokenKind::Identifier || type_keywords.count(t.text) ||
       unsupported_keywords.count(t.text) || is_typedef_name(t))
      return false;
    const Token &n = peek(1);
    return n.kind == TokenKind::Identifier || n.is("*");
  }

  // ---- declarations --------------------------------------------------
  Specifiers specifiers(bool allow_unknown)
  {
    Specifiers s;
    bool have_base = false;
    while(true)
    {
      const Token &t = peek();
      if(t.kind != TokenKind::Identifier)
        break;
      if(t.text == "typedef")
      {
        s.is_typedef = true;
        next();
        // `typedef A B;` where A is not yet known still names a type.
        if(peek().kind == TokenKind::Identifier && !starts_type(peek()) &&
           peek(1).kind == TokenKind::Identifier)
        {
          s.words.push_back(next().text);
          have_base = true;
        }
        continue;
      }
      if(t.text == "static")
      {
        s.is_static = true;
        next();
        continue;
      }
      if(t.text == "extern")
      {
        s.is_extern = true;
        next();
        continue;
      }
      if(t.text == "register" || t.text == "auto" || t.text == "inline" ||
         t.text == "__inline" || t.text == "restrict" || t.text == "__restrict" ||
         t.text == "volatile")
      {
        next();
        continue;
      }
      if(t.text == "struct" || t.text == "union" || t.text == "enum")
      {
        tagged_type(s);
        have_base = true;
        continue;
      }
      if(type_keywords.count(t.text))
      {
        if(t.text != "const")
          have_base = true;
        s.words.push_back(next().text);
        continue;
      }
      if(!have_base && is_typedef_name(t))
      {
        s.words.push_back(next().text);
        have_base = true;
        continue;
      }
      if(!have_base && allow_unknown && unknown_type_name_here())
      {
        s.words.push_back(next().text);
        have_base = true;
        continue;
      }
      break;
    }
    return s;
  }

  void tagged_type(Specifiers &s)
  {
    std::string keyword = next().text;
    std::string tag = "<anonymous>";
    if(peek().kind == TokenKind::Identifier)
      tag = next().text;
    s.words.push_back(keyword);
    s.words.push_back(tag);
    if(keyword != "enum")
      unit_.struct_tags.insert(keyword + " " + tag);
    if(!peek().is("{"))
      return;
    if(keyword == "enum")
    {
      next();
      std::int64_t value = 0;
      while(!peek().is("}"))
      {
        std::string name = expect_identifier();
        if(accept("="))
        {
          ExprPtr e = conditional();
          auto v = fold(*e);
          if(!v)
            throw ParseError(e->loc, "enumerator value is not constant");
          value = *v;
        }
        unit_.constants[name] = value++;
        if(!accept(","))
          break;
      }
      expect("}");
      return;
    }
    skip_balanced("{", "}");
  }

  void skip_balanced(std::string_view open, std::string_view close)
  {
    Location start = peek().loc;
    expect(open);
    int depth = 1;
    while(depth > 0)
    {
      if(at_end())
        throw ParseError(start, "unbalanced '" + std::string(open) + "'");
      const Token &t = next();
      if(t.is(open))
        ++depth;
      else if(t.is(close))
        --depth;
    }
  }

  Declarator declarator(bool abstract_ok)
  {
    Declarator d;
    int pointers = 0;
    while(peek().is("*"))
    {
      next();
      ++pointers;
      while(peek().is_ident("const") || peek().is_ident("volatile") ||
            peek().is_ident("restrict") || peek().is_ident("__restrict"))
        next();
    }
    Declarator inner;
    bool have_inner = false;
    bool name_here = false;
    if(peek().kind == TokenKind::Identifier && !type_keywords.count(peek().text))
    {
      d.loc = peek().loc;
      d.name = next().text;
      name_here = true;
    }
    else if(peek().is("(") && (peek(1).is("*") || peek(1).is("(") ||
                               (peek(1).kind == TokenKind::Identifier &&
                                !starts_type(peek(1)) && !abstract_ok)))
    {
      next();
      inner = declarator(abstract_ok);
      expect(")");
      have_inner = true;
      d.name = inner.name;
      d.loc = inner.loc;
    }
    else if(!abstract_ok)
      throw ParseError(peek().loc, "expected declarator before '" + describe(peek()) + "'");

    std::vector<Derivation> suffixes;
    bool first_suffix = true;
    while(true)
    {
      if(peek().is("["))
      {
        next();
        Derivation a{Derivation::Kind::Array, -1};
        if(!peek().is("]"))
        {
          ExprPtr len = conditional();
          if(auto v = fold(*len))
            a.length = *v;
        }
        expect("]");
        suffixes.push_back(a);
      }
      else if(peek().is("("))
      {
        bool bind = first_suffix && name_here;
        auto [params, variadic] = parameter_list();
        if(bind)
        {
          d.params = std::move(params);
          d.variadic = variadic;
          d.has_params = true;
        }
        suffixes.push_back({Derivation::Kind::Function, -1});
      }
      else
        break;
      first_suffix = false;
    }
    for(int i = 0; i < pointers; ++i)
      d.derived.push_back({Derivation::Kind::Pointer, -1});
    for(auto it = suffixes.rbegin(); it != suffixes.rend(); ++it)
      d.derived.push_back(*it);
    if(have_inner)
    {
      d.derived.insert(d.derived.end(), inner.derived.begin(), inner.derived.end());
      if(inner.has_params)
      {
        d.params = std::move(inner.params);
        d.variadic = inner.variadic;
        d.has_params = true;
      }
    }
    return d;
  }

  std::pair<std::vector<Param>, bool> parameter_list()
  {
    expect("(");
    std::vector<Param> params;
    bool variadic = false;
    if(accept(")"))
      return {params, variadic};
    if(peek().is_ident("void") && peek(1).is(")"))
    {
      next();
      next();
      return {params, variadic};
    }
    while(true)
    {
      if(accept("..."))
      {
        variadic = true;
        break;
      }
      Location loc = peek().loc;
      Specifiers s = specifiers(true);
      if(s.words.empty())
        throw ParseError(peek().loc, "expected parameter type before '" + describe(peek()) + "'");
      Declarator d = declarator(true);
      Param p;
      p.name = d.name;
      p.loc = d.name.empty() ? loc : d.loc;
      p.type.specifiers = s.words;
      p.type.derived = d.derived;
      // Array parameters are pointers.
      if(!p.type.derived.empty() && p.type.derived.back().kind == Derivation::Kind::Array)
        p.type.derived.back() = {Derivation::Kind::Pointer, -1};
      params.push_back(std::move(p));
      if(!accept(","))
        break;
    }
    expect(")");
    return {params, variadic};
  }

  TypeExpr type_name(bool allow_unknown)
  {
    Specifiers s = specifiers(allow_unknown);
    if(s.words.empty() && allow_unknown && peek().kind == TokenKind::Identifier)
      s.words.push_back(next().text);
    if(s.words.empty())
      throw ParseError(peek().loc, "expected type name");
    Declarator d = declarator(true);
    if(!d.name.empty())
      throw ParseError(d.loc, "unexpected name in type name");
    return TypeExpr{s.words, d.derived};
  }

  void external_declaration()
  {
    std::size_t begin = peek().loc.offset;
    Location start = peek().loc;
    Specifiers s = specifiers(true);
    if(s.words.empty())
    {
      // Implicit int, e.g. `main() {}`: only accept a following declarator.
      if(!(peek().kind == TokenKind::Identifier && peek(1).is("(")))
        throw ParseError(start, "expected declaration before '" + describe(peek()) + "'");
      s.words.push_back("int");
    }
    if(accept(";"))
      return;
    bool first = true;
    while(true)
    {
      Declarator d = declarator(false);
      TypeExpr type{s.words, d.derived};
      bool is_function = !d.derived.empty() && d.derived.back().kind == Derivation::Kind::Function;
      if(s.is_typedef)
      {
        unit_.typedefs[d.name] = type;
        typedef_names_.insert(d.name);
      }
      else if(is_function)
      {
        TypeExpr ret = type;
        ret.derived.pop_back();
        if(first && peek().is("{"))
        {
          function_definition(d, ret, s, begin);
          return;
        }
        FunctionDecl decl{d.name, ret, d.params, d.loc};
        unit_.prototypes.push_back(std::move(decl));
      }
      else
      {
        VarDecl v;
        v.name = d.name;
        v.type = type;
        v.loc = d.loc;
        v.is_static = s.is_static;
        v.is_extern = s.is_extern;
        if(accept("="))
          v.init = initializer();
        unit_.globals.push_back(std::move(v));
      }
      first = false;
      if(!accept(","))
        break;
    }
    expect(";");
  }

  void function_definition(const Declarator &d, const TypeExpr &ret, const Specifiers &s,
                           std::size_t begin)
  {
    FunctionDef f;
    f.name = d.name;
    f.return_type = ret;
    f.params = d.params;
    f.variadic = d.variadic;
    f.is_static = s.is_static;
    f.loc = d.loc;
    f.begin = begin;
    f.body_open = peek().loc.offset;
    std::size_t saved = pos_;
    try
    {
      f.body = compound();
      f.body_close = f.body->end - 1;
    }
    catch(const UnsupportedSyntax &u)
    {
      mark_opaque(f, saved, u.where, "unsupported construct: " + u.what);
    }
    catch(const ParseError &e)
    {
      mark_opaque(f, saved, e.location, e.detail);
    }
    f.end = prev_end_;
    for(const auto &existing : unit_.functions)
      if(existing.name == f.name)
        throw ParseError(f.loc, "redefinition of function '" + f.name + "'");
    unit_.functions.push_back(std::move(f));
  }

  void mark_opaque(FunctionDef &f, std::size_t body_start, Location where,
                   const std::string &why)
  {
    pos_ = body_start;
    f.body.reset();
    f.opaque = true;
    f.opaque_reason = why;
    f.opaque_loc = where;
    skip_balanced("{", "}");
    f.body_close = prev_end_ - 1;
  }

  ExprPtr initializer()
  {
    if(!peek().is("{"))
      return assignment();
    auto e = std::make_unique<Expr>();
    e->kind = ExprKind::InitList;
    e->loc = next().loc;
    while(!peek().is("}"))
    {
      e->args.push_back(initializer());
      if(!accept(","))
        break;
    }
    expect("}");
    e->end = prev_end_;
    return e;
  }

  // ---- statements ----------------------------------------------------
  StmtPtr make_stmt(StmtKind kind, Location loc)
  {
    auto s = std::make_unique<Stmt>();
    s->kind = kind;
    s->loc = loc;
    return s;
  }

  StmtPtr compound()
  {
    auto s = make_stmt(StmtKind::Compound, peek().loc);
    expect("{");
    while(!peek().is("}"))
    {
      if(at_end())
        throw ParseError(s->loc, "unterminated block");
      s->items.push_back(statement());
    }
    next();
    s->end = prev_end_;
    return s;
  }

  bool declaration_here() const
  {
    const Token &t = peek();
    if(starts_type(t))
    {
      // A typedef name followed by '(' ... could be a cast-free call; treat
      // `name (` as an expression unless it is a keyword.
      if(is_typedef_name(t) && peek(1).is("("))
        return false;
      return true;
    }
    // `Unknown name;` declares a variable of an unknown type.
    return t.kind == TokenKind::Identifier && !unsupported_keywords.count(t.text) &&
           peek(1).kind == TokenKind::Identifier && !type_keywords.count(t.text);
  }

  StmtPtr declaration_statement()
  {
    auto st = make_stmt(StmtKind::Decl, peek().loc);
    Specifiers s = specifiers(true);
    if(s.is_typedef)
      throw UnsupportedSyntax{st->loc, "block-scope typedef"};
    if(!accept(";"))
    {
      while(true)
      {
        Declarator d = declarator(false);
        VarDecl v;
        v.name = d.name;
        v.type = TypeExpr{s.words, d.derived};
        v.loc = d.loc;
        v.is_static = s.is_static;
        v.is_extern = s.is_extern;
        if(accept("="))
          v.init = initializer();
        st->decls.push_back(std::move(v));
        if(!accept(","))
          break;
      }
      expect(";");
    }
    st->end = prev_end_;
    return st;
  }

  StmtPtr statement()
  {
    const Token &t = peek();
    if(t.is("{"))
      return compound();
    if(t.is(";"))
    {
      auto s = make_stmt(StmtKind::Empty, t.loc);
      next();
      s->end = prev_end_;
      return s;
    }
    if(t.kind == TokenKind::Identifier)
    {
      if(unsupported_keywords.count(t.text))
        throw UnsupportedSyntax{t.loc, t.text + " statement"};
      if(peek(1).is(":") && !starts_type(t))
        throw UnsupportedSyntax{t.loc, "label"};
      if(t.text == "if")
        return if_statement();
      if(t.text == "while")
      {
        auto s = make_stmt(StmtKind::While, next().loc);
        expect("(");
        s->expr = expression();
        expect(")");
        s->body = statement();
        s->end = prev_end_;
        return s;
      }
      if(t.text == "do")
      {
        auto s = make_stmt(StmtKind::DoWhile, next().loc);
        s->body = statement();
        if(!peek().is_ident("while"))
          throw ParseError(peek().loc, "expected 'while' after do-body");
        next();
        expect("(");
        s->expr = expression();
        expect(")");
        expect(";");
        s->end = prev_end_;
        return s;
      }
      if(t.text == "for")
        return for_statement();
      if(t.text == "return")
      {
        auto s = make_stmt(StmtKind::Return, next().loc);
        if(!peek().is(";"))
          s->expr = expression();
        expect(";");
        s->end = prev_end_;
        return s;
      }
      if(t.text == "break" || t.text == "continue")
      {
        auto s = make_stmt(t.text == "break" ? StmtKind::Break : StmtKind::Continue, next().loc);
        expect(";");
        s->end = prev_end_;
        return s;
      }
      if(t.text == "else")
        throw ParseError(t.loc, "'else' without 'if'");
      if(declaration_here())
        return declaration_statement();
    }
    auto s = make_stmt(StmtKind::Expr, t.loc);
    s->expr = expression();
    expect(";");
    s->end = prev_end_;
    return s;
  }

  StmtPtr if_statement()
  {
    auto s = make_stmt(StmtKind::If, next().loc);
    expect("(");
    s->expr = expression();
    expect(")");
    s->body = statement();
    if(peek().is_ident("else"))
    {
      next();
      s->else_body = statement();
    }
    s->end = prev_end_;
    return s;
  }

  StmtPtr for_statement()
  {
    auto s = make_stmt(StmtKind::For, next().loc);
    expect("(");
    if(peek().is(";"))
    {
      s->init = make_stmt(StmtKind::Empty, peek().loc);
      next();
      s->init->end = prev_end_;
    }
    else if(declaration_here())
      s->init = declaration_statement();
    else
    {
      s->init = make_stmt(StmtKind::Expr, peek().loc);
      s->init->expr = expression();
      expect(";");
      s->init->end = prev_end_;
    }
    if(!peek().is(";"))
      s->expr = expression();
    expect(";");
    if(!peek().is(")"))
      s->step = expression();
    expect(")");
    s->body = statement();
    s->end = prev_end_;
    return s;
  }

  // ---- expressions ---------------------------------------------------
  ExprPtr make_expr(ExprKind kind, Location loc)
  {
    auto e = std::make_unique<Expr>();
    e->kind = kind;
    e->loc = loc;
    return e;
  }

  ExprPtr finish(ExprPtr e)
  {
    e->end = prev_end_;
    return e;
  }

  ExprPtr expression()
  {
    ExprPtr lhs = assignment();
    while(peek().is(","))
    {
      next();
      auto e = make_expr(ExprKind::Comma, lhs->loc);
      e->op = ",";
      e->args.push_back(std::move(lhs));
      e->args.push_back(assignment());
      lhs = finish(std::move(e));
    }
    return lhs;
  }

  ExprPtr assignment()
  {
    ExprPtr lhs = conditional();
    if(is_assign_op(peek()))
    {
      auto e = make_expr(ExprKind::Assign, lhs->loc);
      e->op = next().text;
      e->args.push_back(std::move(lhs));
      e->args.push_back(assignment());
      return finish(std::move(e));
    }
    return lhs;
  }

  ExprPtr conditional()
  {
    ExprPtr c = binary(1);
    if(!peek().is("?"))
      return c;
    next();
    auto e = make_expr(ExprKind::Conditional, c->loc);
    e->op = "?:";
    e->args.push_back(std::move(c));
    e->args.push_back(expression());
    expect(":");
    e->args.push_back(conditional());
    return finish(std::move(e));
  }

  ExprPtr binary(int min_prec)
  {
    ExprPtr lhs = unary();
    while(true)
    {
      int prec = binary_precedence(peek());
      if(prec < min_prec)
        return lhs;
      auto e = make_expr(ExprKind::Binary, lhs->loc);
      e->op = next().text;
      e->args.push_back(std::move(lhs));
      e->args.push_back(binary(prec + 1));
      lhs = finish(std::move(e));
    }
  }

  bool cast_here() const
  {
    return peek().is("(") && starts_type(peek(1)) &&
           !(is_typedef_name(peek(1)) && peek(2).is("("));
  }

  ExprPtr unary()
  {
    const Token &t = peek();
    Location loc = t.loc;
    if(t.is("++") || t.is("--"))
    {
      auto e = make_expr(t.is("++") ? ExprKind::PreInc : ExprKind::PreDec, loc);
      e->op = next().text;
      e->args.push_back(unary());
      return finish(std::move(e));
    }
    if(t.is("-") || t.is("+") || t.is("!") || t.is("~") || t.is("*") || t.is("&"))
    {
      auto e = make_expr(ExprKind::Unary, loc);
      e->op = next().text;
      e->args.push_back(unary());
      return finish(std::move(e));
    }
    if(t.is_ident("sizeof"))
    {
      next();
      if(cast_here())
      {
        next();
        auto e = make_expr(ExprKind::SizeofType, loc);
        e->type = type_name(false);
        expect(")");
        return finish(std::move(e));
      }
      auto e = make_expr(ExprKind::SizeofExpr, loc);
      e->args.push_back(unary());
      return finish(std::move(e));
    }
    if(cast_here())
    {
      next();
      auto e = make_expr(ExprKind::Cast, loc);
      e->type = type_name(false);
      expect(")");
      if(peek().is("{"))
        throw UnsupportedSyntax{loc, "compound literal"};
      e->args.push_back(unary());
      return finish(std::move(e));
    }
    return postfix(primary());
  }

  ExprPtr postfix(ExprPtr base)
  {
    while(true)
    {
      const Token &t = peek();
      if(t.is("["))
      {
        next();
        auto e = make_expr(ExprKind::Index, base->loc);
        e->args.push_back(std::move(base));
        e->args.push_back(expression());
        expect("]");
        base = finish(std::move(e));
      }
      else if(t.is("("))
      {
        next();
        auto e = make_expr(ExprKind::Call, base->loc);
        e->args.push_back(std::move(base));
        if(!peek().is(")"))
        {
          while(true)
          {
            e->args.push_back(assignment());
            if(!accept(","))
              break;
          }
        }
        expect(")");
        base = finish(std::move(e));
      }
      else if(t.is(".") || t.is("->"))
      {
        auto e = make_expr(ExprKind::Member, base->loc);
        e->op = next().text;
        e->name = expect_identifier();
        e->args.push_back(std::move(base));
        base = finish(std::move(e));
      }
      else if(t.is("++") || t.is("--"))
      {
        auto e = make_expr(t.is("++") ? ExprKind::PostInc : ExprKind::PostDec, base->loc);
        e->op = next().text;
        e->args.push_back(std::move(base));
        base = finish(std::move(e));
      }
      else
        return base;
    }
  }

  ExprPtr primary()
  {
    const Token &t = peek();
    if(t.kind == TokenKind::Number || t.kind == TokenKind::Char)
    {
      auto e = make_expr(ExprKind::IntLit, t.loc);
      e->value = t.value;
      e->is_unsigned = t.is_unsigned;
      e->is_long = t.is_long;
      e->name = t.text;
      next();
      return finish(std::move(e));
    }
    if(t.kind == TokenKind::String)
    {
      auto e = make_expr(ExprKind::StrLit, t.loc);
      while(peek().kind == TokenKind::String)
        e->name += next().text;
      return finish(std::move(e));
    }
    if(t.kind == TokenKind::Identifier)
    {
      if(type_keywords.count(t.text) || unsupported_keywords.count(t.text))
        throw ParseError(t.loc, "unexpected '" + t.text + "' in expression");
      auto e = make_expr(ExprKind::Ident, t.loc);
      e->name = next().text;
      return finish(std::move(e));
    }
    if(t.is("("))
    {
      next();
      ExprPtr inner = expression();
      expect(")");
      inner->end = prev_end_;
      return inner;
    }
    throw ParseError(t.loc, "expected expression before '" + describe(t) + "'");
  }

  std::optional<std::int64_t> fold(const Expr &e) const
  {
    return fold_constant(e, unit_.constants);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t prev_end_ = 0;
  SourceUnit &unit_;
  std::set<std::string> typedef_names_;
};

} // namespace

const FunctionDef *SourceUnit::find_function(const std::string &name) const
{
  for(const auto &f : functions)
    if(f.name == name)
      return &f;
  return nullptr;
}

SourceUnit parse_unit(std::string_view source_text, std::string path, const ParseOptions &options)
{
  SourceUnit unit;
  unit.path = std::move(path);
  unit.text = std::string(source_text);
  LexResult lexed = lex(source_text, options.defines);
  for(const auto &[name, value] : lexed.defines)
    unit.constants[name] = value;
  Parser parser(std::move(lexed.tokens), unit);
  try
  {
    parser.parse_translation_unit();
  }
  catch(const UnsupportedSyntax &u)
  {
    throw ParseError(u.where, "unsupported construct at file scope: " + u.what);
  }
  // Reject units with cyclic typedef chains.
  for(const auto &[name, type] : unit.typedefs)
    (void)resolve_type(type, unit);
  return unit;
}

TypeExpr parse_type_name(std::string_view text, const SourceUnit &unit)
{
  LexResult lexed = lex(text);
  SourceUnit scratch;
  scratch.typedefs = unit.typedefs;
  scratch.constants = unit.constants;
  Parser parser(std::move(lexed.tokens), scratch);
  return parser.type_name_only(true);
}

ExprPtr parse_expression(std::string_view text)
{
  LexResult lexed = lex(text);
  SourceUnit scratch;
  Parser parser(std::move(lexed.tokens), scratch);
  return parser.expression_only();
}

} // namespace nf::source
