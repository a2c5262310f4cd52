#include "loopsum/graph.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace loopsum {

JumpResult jump_feasible(const Expr& guard, const SPath& sp1, const SPath* sp2, Solver& solver) {
  ConstraintSet c{guard};
  for (const auto& e : sp1.cond) c.add(e);
  SymMap step = sp1.op_on_pre();
  if (sp2 == nullptr) {
    c.add(lnot(substitute(guard, step)));
  } else {
    c.add(substitute(guard, step));
    for (const auto& e : sp2->cond) c.add(substitute(e, step));
  }
  auto r = solver.check(c);
  return {r.status != SolveStatus::Unsat, r.status == SolveStatus::Unknown};
}

SPathGraph build_spath_graph(const LoopPaths& lp, Solver& solver) {
  SPathGraph g;
  for (const auto& sp : lp.paths) {
    if (sp.valid) g.nodes.push_back(sp.index);
  }
  auto record = [&](int a, int b, JumpResult r) {
    if (!r.feasible) return;
    g.edges.insert({a, b});
    if (r.unknown) g.unknown_edges.insert({a, b});
  };
  {
    auto r = solver.check(ConstraintSet{lnot(lp.guard)});
    record(kStart, kEnd, {r.status != SolveStatus::Unsat, r.status == SolveStatus::Unknown});
  }
  for (int i : g.nodes) {
    // validity already established the start jump
    g.edges.insert({kStart, i});
    const SPath& a = lp.paths[static_cast<std::size_t>(i)];
    for (int j : g.nodes) record(i, j, jump_feasible(lp.guard, a, &lp.paths[static_cast<std::size_t>(j)], solver));
    record(i, kEnd, jump_feasible(lp.guard, a, nullptr, solver));
  }
  return g;
}

std::vector<std::vector<int>> strongly_connected(const std::vector<std::vector<int>>& adj) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0);
  std::vector<char> on_stack(static_cast<std::size_t>(n), 0);
  std::vector<int> stack;
  std::vector<std::vector<int>> out;
  int counter = 0;
  std::function<void(int)> strong = [&](int v) {
    auto vi = static_cast<std::size_t>(v);
    index[vi] = low[vi] = counter++;
    stack.push_back(v);
    on_stack[vi] = 1;
    for (int w : adj[vi]) {
      auto wi = static_cast<std::size_t>(w);
      if (index[wi] < 0) {
        strong(w);
        low[vi] = std::min(low[vi], low[wi]);
      } else if (on_stack[wi]) {
        low[vi] = std::min(low[vi], index[wi]);
      }
    }
    if (low[vi] == index[vi]) {
      std::vector<int> comp;
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[static_cast<std::size_t>(w)] = 0;
        comp.push_back(w);
      } while (w != v);
      std::sort(comp.begin(), comp.end());
      out.push_back(std::move(comp));
    }
  };
  for (int v = 0; v < n; ++v) {
    if (index[static_cast<std::size_t>(v)] < 0) strong(v);
  }
  return out;
}

std::vector<int> Csg::successors(int scc) const {
  std::vector<int> out;
  for (const auto& [a, b] : edges) {
    if (a == scc) out.push_back(b);
  }
  return out;
}

std::vector<int> Csg::topological_order() const {
  std::vector<int> indeg(sccs.size(), 0);
  for (const auto& e : edges) ++indeg[static_cast<std::size_t>(e.second)];
  std::vector<int> ready, out;
  for (std::size_t i = 0; i < sccs.size(); ++i) {
    if (indeg[i] == 0) ready.push_back(static_cast<int>(i));
  }
  while (!ready.empty()) {
    std::sort(ready.begin(), ready.end(), std::greater<>());
    int v = ready.back();
    ready.pop_back();
    out.push_back(v);
    for (int w : successors(v)) {
      if (--indeg[static_cast<std::size_t>(w)] == 0) ready.push_back(w);
    }
  }
  if (out.size() != sccs.size()) throw std::logic_error("contracted graph has a cycle");
  return out;
}

Csg contract(const SPathGraph& g) {
  // vertex 0 = start, 1..n = paths, n+1 = end
  const int n = static_cast<int>(g.nodes.size());
  std::map<int, int> vid{{kStart, 0}, {kEnd, n + 1}};
  for (int k = 0; k < n; ++k) vid[g.nodes[static_cast<std::size_t>(k)]] = k + 1;
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n + 2));
  for (const auto& [a, b] : g.edges) {
    auto ia = vid.find(a), ib = vid.find(b);
    if (ia == vid.end() || ib == vid.end()) continue;
    adj[static_cast<std::size_t>(ia->second)].push_back(ib->second);
  }
  auto comps = strongly_connected(adj);
  std::vector<int> comp_of(static_cast<std::size_t>(n + 2), -1);
  for (std::size_t c = 0; c < comps.size(); ++c) {
    for (int v : comps[c]) comp_of[static_cast<std::size_t>(v)] = static_cast<int>(c);
  }
  const int nc = static_cast<int>(comps.size());
  std::vector<std::set<int>> cadj(static_cast<std::size_t>(nc)), cradj(static_cast<std::size_t>(nc));
  for (int v = 0; v < n + 2; ++v) {
    for (int w : adj[static_cast<std::size_t>(v)]) {
      int a = comp_of[static_cast<std::size_t>(v)], b = comp_of[static_cast<std::size_t>(w)];
      if (a != b) {
        cadj[static_cast<std::size_t>(a)].insert(b);
        cradj[static_cast<std::size_t>(b)].insert(a);
      }
    }
  }
  auto reach = [&](int from, const std::vector<std::set<int>>& e) {
    std::vector<char> seen(static_cast<std::size_t>(nc), 0);
    std::vector<int> work{from};
    seen[static_cast<std::size_t>(from)] = 1;
    while (!work.empty()) {
      int v = work.back();
      work.pop_back();
      for (int w : e[static_cast<std::size_t>(v)]) {
        if (!seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = 1;
          work.push_back(w);
        }
      }
    }
    return seen;
  };
  const int cs = comp_of[0], ce = comp_of[static_cast<std::size_t>(n + 1)];
  auto fwd = reach(cs, cadj);
  auto bwd = reach(ce, cradj);

  // order kept path components by smallest member vertex (= smallest path index)
  std::vector<int> kept;
  for (int c = 0; c < nc; ++c) {
    if (c == cs || c == ce) continue;
    if (fwd[static_cast<std::size_t>(c)] && bwd[static_cast<std::size_t>(c)]) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end(),
            [&](int a, int b) { return comps[static_cast<std::size_t>(a)].front() < comps[static_cast<std::size_t>(b)].front(); });

  Csg csg;
  std::map<int, int> new_id;
  auto add = [&](int comp) {
    Scc s;
    s.id = static_cast<int>(csg.sccs.size());
    new_id[comp] = s.id;
    for (int v : comps[static_cast<std::size_t>(comp)]) {
      if (v == 0 || v == n + 1) continue;
      int p = g.nodes[static_cast<std::size_t>(v - 1)];
      s.members.push_back(p);
      csg.scc_of[p] = s.id;
    }
    std::sort(s.members.begin(), s.members.end());
    if (s.members.size() == 1) s.self_loop = g.has_edge(s.members[0], s.members[0]);
    csg.sccs.push_back(std::move(s));
  };
  add(cs);
  for (int c : kept) add(c);
  add(ce);
  csg.start = 0;
  csg.end = static_cast<int>(csg.sccs.size()) - 1;
  for (int c = 0; c < nc; ++c) {
    auto ia = new_id.find(c);
    if (ia == new_id.end()) continue;
    for (int d : cadj[static_cast<std::size_t>(c)]) {
      auto ib = new_id.find(d);
      if (ib != new_id.end()) csg.edges.insert({ia->second, ib->second});
    }
  }
  return csg;
}

namespace {

std::string path_node_name(const LoopPaths& lp, int p) {
  if (p == kStart) return "sp_s";
  if (p == kEnd) return "sp_e";
  return lp.paths[static_cast<std::size_t>(p)].name();
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string spath_graph_dot(const LoopPaths& lp, const SPathGraph& g) {
  std::ostringstream os;
  os << "digraph spaths_loop" << lp.loop_id << " {\n";
  os << "  sp_s [shape=point];\n  sp_e [shape=doublecircle,label=\"\"];\n";
  for (int p : g.nodes) {
    const auto& sp = lp.paths[static_cast<std::size_t>(p)];
    os << "  " << sp.name() << " [shape=box,label=\"" << sp.name() << "\\n" << escape(to_string(sp.cond_conj()))
       << "\"];\n";
  }
  for (const auto& [a, b] : g.edges) {
    os << "  " << path_node_name(lp, a) << " -> " << path_node_name(lp, b);
    if (g.unknown_edges.count({a, b})) os << " [style=dashed]";
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

std::string csg_dot(const LoopPaths& lp, const Csg& csg) {
  std::ostringstream os;
  os << "digraph csg_loop" << lp.loop_id << " {\n";
  for (const auto& s : csg.sccs) {
    os << "  scc" << s.id << " [";
    if (s.id == csg.start) {
      os << "shape=point,label=\"start\"";
    } else if (s.id == csg.end) {
      os << "shape=doublecircle,label=\"end\"";
    } else {
      os << "shape=box,label=\"scc" << s.id << " order " << s.order() << "\\n";
      for (std::size_t i = 0; i < s.members.size(); ++i) {
        os << (i ? " " : "") << lp.paths[static_cast<std::size_t>(s.members[i])].name();
      }
      os << "\"";
    }
    os << "];\n";
  }
  for (const auto& [a, b] : csg.edges) os << "  scc" << a << " -> scc" << b << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace loopsum
