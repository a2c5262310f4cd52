#pragma once

#include <optional>
#include <string>
#include <vector>

#include "loopsum/ast.hpp"
#include "loopsum/oracle.hpp"
#include "loopsum/solver.hpp"
#include "loopsum/summarize.hpp"

namespace loopsum {

enum class Verdict { Holds, Violated, Unknown };
std::string to_string(Verdict v);

struct AssertionResult {
  int stmt_id = -1;
  ast::Loc loc;
  std::string text;
  bool in_loop = false;
  Verdict verdict = Verdict::Unknown;
  std::optional<State> witness;  // inputs, VIOLATED only
  std::string reason;            // UNKNOWN only
  std::string method;            // "symbolic" or "enumeration"
  int queries = 0;
};

struct VerifyOptions {
  SummarizeOptions summarize;
  Int fuel = 2000000;
  /// Concrete fallback when the solver cannot decide: all inputs are run if
  /// the input space has at most this many points.
  Int enumerate_limit = 20000;
  std::size_t max_paths = 4096;
};

struct VerifyReport {
  std::vector<AssertionResult> results;  // program order
  std::optional<Failure> summary_failure;
};

/// Every assertion of the program.
VerifyReport verify(const ast::Program& program, Solver& solver, const VerifyOptions& options = {});

/// The assertion with statement id `stmt_id`, which must sit inside a loop
/// body. Throws std::invalid_argument otherwise.
AssertionResult verify_in_loop(const ast::Program& program, int stmt_id, Solver& solver,
                               const VerifyOptions& options = {});

/// The assertion with statement id `stmt_id`, which must sit outside every
/// loop. Throws std::invalid_argument otherwise.
AssertionResult verify_after_loop(const ast::Program& program, int stmt_id, Solver& solver,
                                  const VerifyOptions& options = {});

struct AssertionSite {
  ast::StmtPtr stmt;
  bool in_loop = false;
};
std::vector<AssertionSite> assertions(const ast::Program& program);

}  // namespace loopsum
