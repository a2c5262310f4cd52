#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "loopsum/cfg.hpp"
#include "loopsum/expr.hpp"
#include "loopsum/solver.hpp"

namespace loopsum {

class AnalysisError : public std::runtime_error {
 public:
  AnalysisError(std::string code, const std::string& what) : std::runtime_error(what), code(std::move(code)) {}
  std::string code;
};

struct Decision {
  int stmt_id;
  bool taken;
  bool operator==(const Decision&) const = default;
  auto operator<=>(const Decision&) const = default;
};

struct SPath {
  int index = -1;
  std::vector<int> nodes;           // header's true successor .. latch
  std::vector<Decision> decisions;  // branch outcomes in path order
  std::vector<Expr> cond;           // one guard per condition node, over pre symbols
  SymMap op;                        // Var(name) -> expression over pre symbols, total
  bool valid = true;

  std::string name() const { return "sp" + std::to_string(index); }
  Expr cond_conj() const { return land(cond); }
  /// Op as a substitution from pre symbols (`x_0 -> Op(x)`), for composing steps.
  SymMap op_on_pre() const;
};

/// Loop-level context shared by its SPaths.
struct LoopPaths {
  int loop_id = -1;
  int stmt_id = -1;
  std::vector<std::string> variables;
  Expr guard;  // header condition over pre symbols
  std::vector<SPath> paths;
};

/// Acyclic header -> latch paths in deterministic DFS order (true branch first).
std::vector<SPath> enumerate_spaths(const Cfg& cfg, const CanonicalLoop& loop, std::size_t max_paths = 4096);

/// Forward symbolic execution of the path's nodes.
void compute_cond_op(const Cfg& cfg, const std::vector<std::string>& variables, SPath& sp);

/// Keeps SPaths whose Cond together with the loop guard may hold. UNKNOWN
/// answers keep the path.
std::vector<SPath> prune_invalid(const std::vector<SPath>& paths, const Expr& guard, Solver& solver);

/// Convenience: enumerate, compute and mark validity (invalid paths stay in
/// the list with valid = false).
LoopPaths analyze_loop(const Cfg& cfg, const CanonicalLoop& loop, Solver& solver, std::size_t max_paths = 4096);

/// Variable -> expression over pre symbols of the same names.
Expr lift_to_pre(const Expr& e);
SymMap identity_op(const std::vector<std::string>& variables);

std::string dump_spaths(const LoopPaths& lp);

}  // namespace loopsum
