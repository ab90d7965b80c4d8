#include <needlefinder/source/call_graph.hpp>

#include <algorithm>
#include <functional>

namespace nf::source {

bool CallGraph::has_edge(const std::string &from, const std::string &to) const
{
  auto it = edges.find(from);
  return it != edges.end() && it->second.count(to) > 0;
}

std::set<std::string> CallGraph::reachable(const std::string &from) const
{
  std::set<std::string> seen;
  std::vector<std::string> work{from};
  while(!work.empty())
  {
    std::string n = work.back();
    work.pop_back();
    auto it = edges.find(n);
    if(it == edges.end())
      continue;
    for(const auto &m : it->second)
      if(seen.insert(m).second)
        work.push_back(m);
  }
  return seen;
}

bool CallGraph::is_recursive(const std::string &name) const
{
  return recursive_.count(name) > 0;
}

std::vector<CallSite> CallGraph::unresolved_in(const std::string &caller) const
{
  std::vector<CallSite> out;
  for(const auto &c : unresolved_calls)
    if(c.caller == caller)
      out.push_back(c);
  return out;
}

// Tarjan's algorithm; members of a component of size > 1, or with a
// self-edge, are recursive.
void CallGraph::finalize()
{
  recursive_.clear();
  std::map<std::string, int> index, low;
  std::set<std::string> on_stack;
  std::vector<std::string> stack;
  int counter = 0;

  std::function<void(const std::string &)> connect = [&](const std::string &v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack.insert(v);
    auto it = edges.find(v);
    if(it != edges.end())
      for(const auto &w : it->second)
      {
        if(!index.count(w))
        {
          connect(w);
          low[v] = std::min(low[v], low[w]);
        }
        else if(on_stack.count(w))
          low[v] = std::min(low[v], index[w]);
      }
    if(low[v] == index[v])
    {
      std::vector<std::string> component;
      std::string w;
      do
      {
        w = stack.back();
        stack.pop_back();
        on_stack.erase(w);
        component.push_back(w);
      } while(w != v);
      if(component.size() > 1 || has_edge(v, v))
        recursive_.insert(component.begin(), component.end());
    }
  };
  for(const auto &n : nodes)
    if(!index.count(n))
      connect(n);
}

CallGraph build_call_graph(const std::vector<SourceUnit> &units, const FactsOptions &options)
{
  CallGraph g;
  std::set<std::string> declared;
  for(const auto &u : units)
  {
    for(const auto &f : u.functions)
      g.nodes.insert(f.name);
    for(const auto &p : u.prototypes)
      declared.insert(p.name);
  }
  for(const auto &u : units)
    for(const auto &facts : extract_facts(u, options))
    {
      g.edges[facts.name];
      for(const auto &call : facts.call_sites)
      {
        if(call.callee.empty())
          g.unresolved_calls.push_back({facts.name, "", u.path, call.loc, "function pointer"});
        else if(g.nodes.count(call.callee))
          g.edges[facts.name].insert(call.callee);
        else
          g.unresolved_calls.push_back({facts.name, call.callee, u.path, call.loc,
                                        declared.count(call.callee) ? "extern" : "undeclared"});
      }
    }
  g.finalize();
  return g;
}

void mark_recursion(std::vector<FunctionFacts> &facts, const CallGraph &graph)
{
  for(auto &f : facts)
    f.is_recursive = graph.is_recursive(f.name);
}

} // namespace nf::source
