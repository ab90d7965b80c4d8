#include <needlefinder/source/parser.hpp>
#include <needlefinder/source/types.hpp>

#include <algorithm>
#include <set>

namespace nf::source {

GroundType GroundType::scalar(Kind kind)
{
  GroundType t;
  t.kind_ = kind;
  return t;
}

GroundType GroundType::pointer_to(GroundType element)
{
  GroundType t;
  t.kind_ = Kind::Pointer;
  t.element_ = std::make_shared<const GroundType>(std::move(element));
  return t;
}

GroundType GroundType::array_of(GroundType element, std::int64_t length)
{
  GroundType t;
  t.kind_ = Kind::Array;
  t.element_ = std::make_shared<const GroundType>(std::move(element));
  t.length_ = length;
  return t;
}

GroundType GroundType::unresolved(std::string name)
{
  GroundType t;
  t.kind_ = Kind::Unresolved;
  t.name_ = std::move(name);
  return t;
}

const GroundType &GroundType::base() const
{
  const GroundType *t = this;
  while(!t->is_scalar())
    t = t->element_.get();
  return *t;
}

int GroundType::indirection_depth() const
{
  int depth = 0;
  for(const GroundType *t = this; !t->is_scalar(); t = t->element_.get())
    ++depth;
  return depth;
}

bool GroundType::operator==(const GroundType &other) const
{
  if(kind_ != other.kind_)
    return false;
  switch(kind_)
  {
  case Kind::Pointer: return *element_ == *other.element_;
  case Kind::Array: return length_ == other.length_ && *element_ == *other.element_;
  case Kind::Unresolved: return name_ == other.name_;
  default: return true;
  }
}

std::string_view kind_name(GroundType::Kind kind)
{
  switch(kind)
  {
  case GroundType::Kind::Int: return "int";
  case GroundType::Kind::Short: return "short";
  case GroundType::Kind::Long: return "long";
  case GroundType::Kind::Char: return "char";
  case GroundType::Kind::Void: return "void";
  case GroundType::Kind::Pointer: return "pointer";
  case GroundType::Kind::Array: return "array";
  case GroundType::Kind::Unresolved: return "unresolved";
  }
  return "?";
}

namespace {

// Declarator text for `type` around `inner`, e.g. "*[3]" or "(*)[3]".
std::string render(const GroundType &type, const std::string &inner)
{
  switch(type.kind())
  {
  case GroundType::Kind::Pointer:
  {
    std::string p = "*" + inner;
    if(type.element().kind() == GroundType::Kind::Array)
      p = "(" + p + ")";
    return render(type.element(), p);
  }
  case GroundType::Kind::Array:
    return render(type.element(),
                  inner + "[" + (type.length() < 0 ? "" : std::to_string(type.length())) + "]");
  default:
  {
    std::string base = type.kind() == GroundType::Kind::Unresolved
                         ? type.name()
                         : std::string(kind_name(type.kind()));
    return inner.empty() ? base : base + " " + inner;
  }
  }
}

struct BaseInfo
{
  bool is_void = false;
  bool unresolved = false;
  std::string unresolved_name;
  GroundType::Kind kind = GroundType::Kind::Int;
  ScalarLayout layout;
  std::vector<Derivation> derived; // from typedef expansion, base outward
};

BaseInfo resolve_base(const std::vector<std::string> &words, const SourceUnit &unit,
                      std::set<std::string> &visiting)
{
  BaseInfo info;
  std::vector<std::string> w;
  for(const auto &word : words)
    if(word != "const" && word != "volatile")
      w.push_back(word);
  if(w.empty())
    return info; // implicit int
  if(w.front() == "struct" || w.front() == "union")
  {
    info.unresolved = true;
    info.unresolved_name = w.front() + " " + (w.size() > 1 ? w[1] : std::string("<anonymous>"));
    return info;
  }
  if(w.front() == "enum")
    return info;

  bool is_unsigned = false;
  int longs = 0;
  bool have_char = false, have_short = false, have_void = false, have_int = false;
  std::string other;
  for(const auto &word : w)
  {
    if(word == "unsigned")
      is_unsigned = true;
    else if(word == "signed")
      ;
    else if(word == "long")
      ++longs;
    else if(word == "char")
      have_char = true;
    else if(word == "short")
      have_short = true;
    else if(word == "void")
      have_void = true;
    else if(word == "int")
      have_int = true;
    else
      other = word;
  }
  if(!other.empty())
  {
    auto it = unit.typedefs.find(other);
    if(it == unit.typedefs.end())
    {
      info.unresolved = true;
      info.unresolved_name = other;
      return info;
    }
    if(!visiting.insert(other).second)
      throw TypedefCycle(other);
    BaseInfo inner = resolve_base(it->second.specifiers, unit, visiting);
    visiting.erase(other);
    inner.derived.insert(inner.derived.end(), it->second.derived.begin(), it->second.derived.end());
    return inner;
  }
  (void)have_int;
  if(have_void)
  {
    info.is_void = true;
    info.kind = GroundType::Kind::Void;
  }
  else if(have_char)
  {
    info.kind = GroundType::Kind::Char;
    info.layout = {8, is_unsigned};
  }
  else if(have_short)
  {
    info.kind = GroundType::Kind::Short;
    info.layout = {16, is_unsigned};
  }
  else if(longs > 0)
  {
    info.kind = GroundType::Kind::Long;
    info.layout = {64, is_unsigned};
  }
  else
  {
    info.kind = GroundType::Kind::Int;
    info.layout = {32, is_unsigned};
  }
  return info;
}

} // namespace

std::string to_string(const GroundType &type)
{
  return render(type, "");
}

GroundType resolve_type(const TypeExpr &type, const SourceUnit &unit)
{
  std::set<std::string> visiting;
  BaseInfo base = resolve_base(type.specifiers, unit, visiting);
  std::vector<Derivation> derived = base.derived;
  derived.insert(derived.end(), type.derived.begin(), type.derived.end());

  GroundType t = base.unresolved ? GroundType::unresolved(base.unresolved_name)
                                 : GroundType::scalar(base.kind);
  for(std::size_t i = 0; i < derived.size(); ++i)
  {
    const Derivation &d = derived[i];
    switch(d.kind)
    {
    case Derivation::Kind::Pointer: t = GroundType::pointer_to(std::move(t)); break;
    case Derivation::Kind::Array: t = GroundType::array_of(std::move(t), d.length); break;
    case Derivation::Kind::Function: t = GroundType::unresolved("function"); break;
    }
  }
  return t;
}

GroundType resolve_type(std::string_view text, const SourceUnit &unit)
{
  return resolve_type(parse_type_name(text, unit), unit);
}

ExecType resolve_exec_type(const TypeExpr &type, const SourceUnit &unit)
{
  std::set<std::string> visiting;
  BaseInfo base = resolve_base(type.specifiers, unit, visiting);
  ExecType t;
  t.is_void = base.is_void;
  t.unresolved = base.unresolved;
  t.unresolved_name = base.unresolved_name;
  t.scalar = base.layout;
  t.derived = base.derived;
  t.derived.insert(t.derived.end(), type.derived.begin(), type.derived.end());
  for(const auto &d : t.derived)
    if(d.kind == Derivation::Kind::Function)
      t.is_function = true;
  return t;
}

} // namespace nf::source
