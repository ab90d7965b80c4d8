#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nf {

struct Location {
  int line = 1;
  int column = 1;
  std::size_t offset = 0;

  std::string str() const
  {
    return std::to_string(line) + ":" + std::to_string(column);
  }
  bool operator==(const Location &) const = default;
};

class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error
{
public:
  ParseError(Location where, const std::string &message)
    : Error(where.str() + ": " + message), location(where), detail(message)
  {
  }
  Location location;
  std::string detail;
};

class TypedefCycle : public Error
{
public:
  explicit TypedefCycle(const std::string &type_name)
    : Error("typedef cycle through '" + type_name + "'"), name(type_name)
  {
  }
  std::string name;
};

class UnsupportedConstruct : public Error
{
public:
  UnsupportedConstruct(Location where, const std::string &what)
    : Error(where.str() + ": unsupported construct: " + what), location(where)
  {
  }
  Location location;
};

class IoError : public Error
{
public:
  explicit IoError(const std::string &file)
    : Error("cannot access '" + file + "'"), path(file)
  {
  }
  std::string path;
};

class FormatError : public Error
{
public:
  using Error::Error;
};

class InsufficientSupport : public Error
{
public:
  explicit InsufficientSupport(const std::string &program_point)
    : Error("insufficient support at " + program_point), pp(program_point)
  {
  }
  std::string pp;
};

class UnrenderableInvariant : public Error
{
public:
  UnrenderableInvariant(const std::string &program_point, const std::string &why)
    : Error("invariant at " + program_point + " cannot be rendered: " + why),
      pp(program_point)
  {
  }
  std::string pp;
};

class StageFailure : public Error
{
public:
  StageFailure(const std::string &stage_name, const std::string &cause)
    : Error("stage '" + stage_name + "' failed: " + cause), stage(stage_name)
  {
  }
  std::string stage;
};

} // namespace nf
