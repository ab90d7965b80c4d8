#pragma once

#include <needlefinder/source/parser.hpp>

#include <fstream>
#include <sstream>
#include <string>

inline std::string corpus_path(const std::string &rel)
{
  return std::string(NF_CORPUS_DIR) + "/" + rel;
}

inline std::string read_corpus(const std::string &rel)
{
  std::ifstream in(corpus_path(rel));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline nf::source::SourceUnit parse_corpus(const std::string &rel)
{
  return nf::source::parse_unit(read_corpus(rel), rel);
}

template <class... Units>
std::vector<nf::source::SourceUnit> units_of(Units &&...units)
{
  std::vector<nf::source::SourceUnit> out;
  (out.push_back(std::forward<Units>(units)), ...);
  return out;
}
