#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "loopsum/solver.hpp"
#include "loopsum/spath.hpp"

namespace loopsum {

/// Pseudo path indices for the empty start and end SPaths.
inline constexpr int kStart = -1;
inline constexpr int kEnd = -2;

struct JumpResult {
  bool feasible = false;
  bool unknown = false;  // solver gave up; the edge is kept as an over-approximation
};

/// sp1 runs one iteration from a state satisfying the guard, then sp2's Cond
/// (and the guard) hold on the result. Pass nullptr as sp2 for the jump to the
/// end path (the guard fails after sp1).
JumpResult jump_feasible(const Expr& guard, const SPath& sp1, const SPath* sp2, Solver& solver);

struct SPathGraph {
  std::vector<int> nodes;               // indices of the valid SPaths
  std::set<std::pair<int, int>> edges;  // path indices, plus kStart / kEnd
  std::set<std::pair<int, int>> unknown_edges;
  bool has_edge(int a, int b) const { return edges.count({a, b}) != 0; }
};

SPathGraph build_spath_graph(const LoopPaths& lp, Solver& solver);

struct Scc {
  int id = -1;
  std::vector<int> members;  // path indices, sorted; empty for start / end
  bool self_loop = false;
  /// 0 for a single path without a self jump, 1 with one, otherwise the member count.
  int order() const { return members.size() == 1 ? (self_loop ? 1 : 0) : static_cast<int>(members.size()); }
};

struct Csg {
  std::vector<Scc> sccs;  // start first, end last, others by smallest member index
  int start = -1;
  int end = -1;
  std::set<std::pair<int, int>> edges;  // scc ids, off-path edges removed
  std::map<int, int> scc_of;            // path index -> scc id

  std::vector<int> successors(int scc) const;
  std::vector<int> topological_order() const;
};

/// Tarjan SCCs over the path graph with start/end, contraction, then removal
/// of nodes and edges not on any start -> end path.
Csg contract(const SPathGraph& g);

/// Plain SCC partition of an adjacency list (Tarjan); components in the
/// order Tarjan completes them.
std::vector<std::vector<int>> strongly_connected(const std::vector<std::vector<int>>& adj);

std::string spath_graph_dot(const LoopPaths& lp, const SPathGraph& g);
std::string csg_dot(const LoopPaths& lp, const Csg& csg);

}  // namespace loopsum
