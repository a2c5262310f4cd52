#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "loopsum/ast.hpp"

namespace loopsum {

struct CfgNode {
  enum class Kind { Entry, Exit, Block, Cond };

  int id = -1;
  Kind kind = Kind::Block;
  std::vector<ast::StmtPtr> stmts;  // Block: Decl / Assign / ParallelAssign / Assert, in order
  ast::ExprPtr cond;                // Cond
  int stmt_id = -1;                 // Cond: id of the originating If / While
  bool is_loop_header = false;      // Cond created for a While
  int next = -1;                    // Entry, Block: the successor; Cond: the true successor
  int next_false = -1;              // Cond only

  std::vector<int> successors() const;
};

/// Raised by canonicalize(); `code` is the failure tag.
class CfgError : public std::runtime_error {
 public:
  CfgError(std::string code, const std::string& what) : std::runtime_error(what), code(std::move(code)) {}
  std::string code;
};

struct Cfg {
  std::vector<CfgNode> nodes;  // nodes[i].id == i, numbered in reverse post-order
  int entry = 0;
  int exit = -1;
  std::vector<std::string> variables;  // inputs, locals, then synthesized flags

  std::vector<std::vector<int>> predecessors() const;
};

/// Nodes are numbered in reverse post-order, true successors visited first.
Cfg build_cfg(const ast::Program& program);

/// Immediate dominator per node; the entry maps to itself, unreachable nodes to -1.
std::vector<int> dominators(const Cfg& cfg);
bool dominates(const std::vector<int>& idom, int a, int b);

struct CanonicalLoop {
  int id = -1;
  int header = -1;                 // Cond node holding the loop guard
  int stmt_id = -1;                // the While statement
  std::vector<int> body;           // sorted; includes the header
  std::vector<int> latches;        // sources of back edges
  int preheader = -1;              // unique node outside the loop entering the header
  int exit = -1;                   // header's false successor
  std::optional<int> parent;       // enclosing loop id
  int depth = 0;
  std::optional<std::string> break_flag;
};

/// Rewrites early exits through a fresh flag and inserts preheaders, then
/// returns the loops ordered by header statement id. Throws CfgError with
/// code IRREDUCIBLE_FLOW when a cycle has no dominating header.
std::vector<CanonicalLoop> canonicalize(Cfg& cfg);

std::string to_dot(const Cfg& cfg, const std::vector<CanonicalLoop>& loops = {});
std::string node_label(const CfgNode& node);

}  // namespace loopsum
