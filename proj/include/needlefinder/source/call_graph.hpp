#pragma once

#include <needlefinder/source/facts.hpp>

#include <map>
#include <set>
#include <string>
#include <vector>

namespace nf::source {

struct CallSite
{
  std::string caller;
  std::string callee; // empty for calls through an expression
  std::string path;
  Location loc;
  std::string why; // "function pointer", "extern", ...
};

class CallGraph
{
public:
  std::set<std::string> nodes;
  std::map<std::string, std::set<std::string>> edges;
  std::vector<CallSite> unresolved_calls;

  bool has_edge(const std::string &from, const std::string &to) const;
  /// Functions reachable from `from` by one or more edges.
  std::set<std::string> reachable(const std::string &from) const;
  /// True iff `name` calls itself or lies on a cycle.
  bool is_recursive(const std::string &name) const;
  const std::set<std::string> &recursive() const { return recursive_; }
  /// Unresolved call sites inside `caller`.
  std::vector<CallSite> unresolved_in(const std::string &caller) const;

  void finalize(); // computes strongly connected components

private:
  std::set<std::string> recursive_;
};

CallGraph build_call_graph(const std::vector<SourceUnit> &units,
                           const FactsOptions &options = {});

/// Sets `is_recursive` on each entry from the graph.
void mark_recursion(std::vector<FunctionFacts> &facts, const CallGraph &graph);

} // namespace nf::source
