#include <needlefinder/source/lexer.hpp>

#include <array>
#include <cctype>
#include <optional>

namespace nf::source {
namespace {

constexpr std::array<std::string_view, 24> multi_char_puncts = {
  ">>=", "<<=", "...", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
  "&&",  "||",  "+=",  "-=", "*=", "/=", "%=", "&=", "|=", "^=", "##", "::"};

class Scanner
{
public:
  explicit Scanner(std::string_view text) : text_(text) {}

  bool done() const { return pos_ >= text_.size(); }
  char peek(std::size_t ahead = 0) const
  {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }
  Location here() const { return {line_, column_, pos_}; }
  std::size_t pos() const { return pos_; }

  void advance()
  {
    if(text_[pos_] == '\n')
    {
      ++line_;
      column_ = 1;
    }
    else
      ++column_;
    ++pos_;
  }

  bool at_line_start() const
  {
    for(std::size_t i = pos_; i > 0; --i)
    {
      char c = text_[i - 1];
      if(c == '\n')
        return true;
      if(c != ' ' && c != '\t')
        return false;
    }
    return true;
  }

  std::string_view slice(std::size_t from, std::size_t to) const
  {
    return text_.substr(from, to - from);
  }

private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

bool ident_start(char c)
{
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool ident_char(char c)
{
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::int64_t decode_escape(Scanner &s)
{
  char c = s.peek();
  s.advance();
  switch(c)
  {
  case 'n': return '\n';
  case 't': return '\t';
  case 'r': return '\r';
  case '0':
  case '1':
  case '2':
  case '3':
  case '4':
  case '5':
  case '6':
  case '7':
  {
    std::int64_t v = c - '0';
    for(int i = 0; i < 2 && s.peek() >= '0' && s.peek() <= '7'; ++i)
    {
      v = v * 8 + (s.peek() - '0');
      s.advance();
    }
    return v;
  }
  case 'x':
  {
    std::int64_t v = 0;
    while(std::isxdigit(static_cast<unsigned char>(s.peek())))
    {
      char d = s.peek();
      v = v * 16 + (std::isdigit(static_cast<unsigned char>(d))
                      ? d - '0'
                      : std::tolower(d) - 'a' + 10);
      s.advance();
    }
    return v;
  }
  case 'a': return 7;
  case 'b': return 8;
  case 'f': return 12;
  case 'v': return 11;
  default: return static_cast<unsigned char>(c);
  }
}

Token lex_number(Scanner &s)
{
  Token t;
  t.kind = TokenKind::Number;
  t.loc = s.here();
  std::size_t start = s.pos();
  bool is_float = false;
  if(s.peek() == '0' && (s.peek(1) == 'x' || s.peek(1) == 'X'))
  {
    s.advance();
    s.advance();
    while(std::isxdigit(static_cast<unsigned char>(s.peek())))
      s.advance();
  }
  else
  {
    while(std::isdigit(static_cast<unsigned char>(s.peek())) || s.peek() == '.' ||
          ((s.peek() == 'e' || s.peek() == 'E') &&
           (std::isdigit(static_cast<unsigned char>(s.peek(1))) || s.peek(1) == '-' ||
            s.peek(1) == '+')))
    {
      if(s.peek() == '.' || s.peek() == 'e' || s.peek() == 'E')
      {
        is_float = true;
        if(s.peek() != '.')
          s.advance(); // exponent sign handled below
      }
      s.advance();
    }
  }
  std::size_t digits_end = s.pos();
  while(s.peek() == 'u' || s.peek() == 'U' || s.peek() == 'l' || s.peek() == 'L' ||
        s.peek() == 'f' || s.peek() == 'F')
  {
    char c = static_cast<char>(std::tolower(s.peek()));
    if(c == 'u')
      t.is_unsigned = true;
    if(c == 'l')
      t.is_long = true;
    s.advance();
  }
  std::string digits(s.slice(start, digits_end));
  t.text = std::string(s.slice(start, s.pos()));
  if(is_float)
    t.value = static_cast<std::int64_t>(std::stod(digits));
  else
    t.value = static_cast<std::int64_t>(std::stoull(digits, nullptr, 0));
  t.end = s.pos();
  return t;
}

// Minimal evaluator for the bodies of object-like integer macros.
class ConstFolder
{
public:
  explicit ConstFolder(const std::vector<Token> &toks) : toks_(toks) {}

  std::optional<std::int64_t> run()
  {
    if(toks_.empty())
      return std::nullopt;
    auto v = binary(0);
    if(!v || i_ != toks_.size())
      return std::nullopt;
    return v;
  }

private:
  static int precedence(const std::string &op)
  {
    if(op == "|")
      return 1;
    if(op == "^")
      return 2;
    if(op == "&")
      return 3;
    if(op == "<<" || op == ">>")
      return 4;
    if(op == "+" || op == "-")
      return 5;
    if(op == "*" || op == "/" || op == "%")
      return 6;
    return -1;
  }

  std::optional<std::int64_t> unary()
  {
    if(i_ >= toks_.size())
      return std::nullopt;
    const Token &t = toks_[i_];
    if(t.kind == TokenKind::Number || t.kind == TokenKind::Char)
    {
      ++i_;
      return t.value;
    }
    if(t.is("-") || t.is("+") || t.is("~"))
    {
      ++i_;
      auto v = unary();
      if(!v)
        return std::nullopt;
      if(t.is("-"))
        return -*v;
      if(t.is("~"))
        return ~*v;
      return v;
    }
    if(t.is("("))
    {
      ++i_;
      auto v = binary(0);
      if(!v || i_ >= toks_.size() || !toks_[i_].is(")"))
        return std::nullopt;
      ++i_;
      return v;
    }
    return std::nullopt;
  }

  std::optional<std::int64_t> binary(int min_prec)
  {
    auto lhs = unary();
    while(lhs && i_ < toks_.size() && toks_[i_].kind == TokenKind::Punct)
    {
      int prec = precedence(toks_[i_].text);
      if(prec < 0 || prec < min_prec)
        break;
      std::string op = toks_[i_].text;
      ++i_;
      auto rhs = binary(prec + 1);
      if(!rhs)
        return std::nullopt;
      std::int64_t a = *lhs, b = *rhs;
      if(op == "+")
        lhs = a + b;
      else if(op == "-")
        lhs = a - b;
      else if(op == "*")
        lhs = a * b;
      else if(op == "/" || op == "%")
      {
        if(b == 0)
          return std::nullopt;
        lhs = op == "/" ? a / b : a % b;
      }
      else if(op == "<<")
        lhs = a << (b & 63);
      else if(op == ">>")
        lhs = a >> (b & 63);
      else if(op == "&")
        lhs = a & b;
      else if(op == "|")
        lhs = a | b;
      else
        lhs = a ^ b;
    }
    return lhs;
  }

  const std::vector<Token> &toks_;
  std::size_t i_ = 0;
};

class Lexer
{
public:
  Lexer(std::string_view text, LexResult &out) : s_(text), out_(out) {}

  void define(const std::string &name, std::vector<Token> body)
  {
    std::vector<Token> expanded;
    for(auto &t : body)
    {
      auto it = macros_.find(t.text);
      if(t.kind == TokenKind::Identifier && it != macros_.end())
        expanded.insert(expanded.end(), it->second.begin(), it->second.end());
      else
        expanded.push_back(t);
    }
    auto value = ConstFolder(expanded).run();
    if(!value)
    {
      out_.skipped_directives.push_back("#define " + name);
      return;
    }
    macros_[name] = std::move(expanded);
    out_.defines[name] = *value;
  }

  void run()
  {
    while(true)
    {
      skip_space_and_comments();
      if(s_.done())
        break;
      if(s_.peek() == '#' && s_.at_line_start())
      {
        directive();
        continue;
      }
      Token t = next_token();
      emit(std::move(t));
    }
    Token end;
    end.kind = TokenKind::End;
    end.loc = s_.here();
    end.end = s_.pos();
    out_.tokens.push_back(end);
  }

private:
  void emit(Token t)
  {
    if(t.kind == TokenKind::Identifier)
    {
      auto it = macros_.find(t.text);
      if(it != macros_.end())
      {
        for(Token sub : it->second)
        {
          sub.loc = t.loc;
          sub.end = t.end;
          out_.tokens.push_back(std::move(sub));
        }
        return;
      }
    }
    out_.tokens.push_back(std::move(t));
  }

  void skip_space_and_comments()
  {
    while(!s_.done())
    {
      char c = s_.peek();
      if(std::isspace(static_cast<unsigned char>(c)))
        s_.advance();
      else if(c == '/' && s_.peek(1) == '/')
      {
        while(!s_.done() && s_.peek() != '\n')
          s_.advance();
      }
      else if(c == '/' && s_.peek(1) == '*')
      {
        Location start = s_.here();
        s_.advance();
        s_.advance();
        while(!s_.done() && !(s_.peek() == '*' && s_.peek(1) == '/'))
          s_.advance();
        if(s_.done())
          throw ParseError(start, "unterminated comment");
        s_.advance();
        s_.advance();
      }
      else
        break;
    }
  }

  // Reads one logical directive line (honouring backslash continuations)
  // and tokenizes it.
  void directive()
  {
    Location start = s_.here();
    s_.advance(); // '#'
    std::vector<Token> line;
    while(!s_.done())
    {
      while(!s_.done() && (s_.peek() == ' ' || s_.peek() == '\t'))
        s_.advance();
      if(s_.peek() == '\\' && (s_.peek(1) == '\n' || s_.peek(1) == '\r'))
      {
        s_.advance();
        while(s_.peek() == '\r' || s_.peek() == '\n')
        {
          bool nl = s_.peek() == '\n';
          s_.advance();
          if(nl)
            break;
        }
        continue;
      }
      if(s_.done() || s_.peek() == '\n')
        break;
      if(s_.peek() == '/' && s_.peek(1) == '*')
      {
        skip_space_and_comments();
        continue;
      }
      if(s_.peek() == '/' && s_.peek(1) == '/')
      {
        while(!s_.done() && s_.peek() != '\n')
          s_.advance();
        break;
      }
      if(s_.peek() == '<' && !line.empty() && line.front().is_ident("include"))
      {
        // header name
        std::size_t from = s_.pos();
        while(!s_.done() && s_.peek() != '>' && s_.peek() != '\n')
          s_.advance();
        if(s_.peek() == '>')
          s_.advance();
        Token t;
        t.kind = TokenKind::String;
        t.text = std::string(s_.slice(from, s_.pos()));
        line.push_back(t);
        continue;
      }
      line.push_back(next_token());
    }
    if(line.empty())
      return;
    std::string spelled = "#" + line.front().text;
    if(line.front().is_ident("define") && line.size() >= 2 &&
       line[1].kind == TokenKind::Identifier)
    {
      const Token &name = line[1];
      // Function-like macro: '(' immediately after the name.
      bool function_like = line.size() > 2 && line[2].is("(") &&
                           line[2].loc.offset == name.end;
      if(function_like)
      {
        out_.skipped_directives.push_back("#define " + name.text + "(...)");
        return;
      }
      define(name.text, std::vector<Token>(line.begin() + 2, line.end()));
      return;
    }
    (void)start;
    out_.skipped_directives.push_back(spelled);
  }

  Token next_token()
  {
    Token t;
    t.loc = s_.here();
    char c = s_.peek();
    if(ident_start(c))
    {
      std::size_t from = s_.pos();
      while(ident_char(s_.peek()))
        s_.advance();
      t.kind = TokenKind::Identifier;
      t.text = std::string(s_.slice(from, s_.pos()));
      t.end = s_.pos();
      return t;
    }
    if(std::isdigit(static_cast<unsigned char>(c)) ||
       (c == '.' && std::isdigit(static_cast<unsigned char>(s_.peek(1)))))
      return lex_number(s_);
    if(c == '"')
    {
      s_.advance();
      t.kind = TokenKind::String;
      while(!s_.done() && s_.peek() != '"')
      {
        if(s_.peek() == '\n')
          throw ParseError(t.loc, "unterminated string literal");
        if(s_.peek() == '\\')
        {
          s_.advance();
          t.text.push_back(static_cast<char>(decode_escape(s_)));
        }
        else
        {
          t.text.push_back(s_.peek());
          s_.advance();
        }
      }
      if(s_.done())
        throw ParseError(t.loc, "unterminated string literal");
      s_.advance();
      t.end = s_.pos();
      return t;
    }
    if(c == '\'')
    {
      s_.advance();
      t.kind = TokenKind::Char;
      if(s_.peek() == '\\')
      {
        s_.advance();
        t.value = decode_escape(s_);
      }
      else
      {
        t.value = static_cast<signed char>(s_.peek());
        s_.advance();
      }
      if(s_.peek() != '\'')
        throw ParseError(t.loc, "malformed character literal");
      s_.advance();
      t.end = s_.pos();
      t.text = std::string(s_.slice(t.loc.offset, t.end));
      return t;
    }
    t.kind = TokenKind::Punct;
    for(auto p : multi_char_puncts)
    {
      bool match = true;
      for(std::size_t i = 0; i < p.size(); ++i)
        if(s_.peek(i) != p[i])
        {
          match = false;
          break;
        }
      if(match)
      {
        for(std::size_t i = 0; i < p.size(); ++i)
          s_.advance();
        t.text = std::string(p);
        t.end = s_.pos();
        return t;
      }
    }
    static const std::string singles = "{}[]();,<>=+-*/%!~&|^?:.#";
    if(singles.find(c) == std::string::npos)
      throw ParseError(t.loc, std::string("unexpected character '") + c + "'");
    s_.advance();
    t.text = std::string(1, c);
    t.end = s_.pos();
    return t;
  }

  Scanner s_;
  LexResult &out_;
  std::map<std::string, std::vector<Token>> macros_;
};

} // namespace

LexResult lex(std::string_view text, const std::map<std::string, std::string> &extra_defines)
{
  LexResult out;
  Lexer lexer(text, out);
  for(const auto &[name, body] : extra_defines)
  {
    LexResult body_tokens = lex(body);
    body_tokens.tokens.pop_back();
    lexer.define(name, std::move(body_tokens.tokens));
  }
  lexer.run();
  return out;
}

} // namespace nf::source
