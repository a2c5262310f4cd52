#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "loopsum/ast.hpp"
#include "loopsum/cfg.hpp"
#include "loopsum/graph.hpp"
#include "loopsum/interval_set.hpp"
#include "loopsum/solver.hpp"
#include "loopsum/spath.hpp"

namespace loopsum {

enum class Provenance { ZeroOrder, OneOrder, HighOrderPeriodic, HighOrderPrephase, Composed };
std::string to_string(Provenance p);

/// Failure reasons reported in summaries.
namespace reason {
inline constexpr const char* kInfiniteOscillation = "INFINITE_OSCILLATION";
inline constexpr const char* kCoupledRecurrence = "COUPLED_RECURRENCE";
inline constexpr const char* kInductivenessTrap = "INDUCTIVENESS_TRAP_NESTED";
inline constexpr const char* kCaseExplosion = "CASE_EXPLOSION";
inline constexpr const char* kSolverUnknown = "SOLVER_UNKNOWN";
inline constexpr const char* kClosedFormUnavailable = "CLOSED_FORM_UNAVAILABLE";
inline constexpr const char* kNotSummarizable = "NOT_SUMMARIZABLE";
}  // namespace reason

class SummaryFailure : public std::runtime_error {
 public:
  SummaryFailure(std::string code, const std::string& what) : std::runtime_error(what), code(std::move(code)) {}
  std::string code;
};

/// Raised while evaluating implicit iteration counts or tables.
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SummarizeOptions {
  std::size_t max_paths = 4096;
  std::size_t max_cases = 512;
  Int max_interval_values = 1000000;
  int max_rounds = 64;
  Int eval_fuel = 2000000;  // step cap for implicit iteration-count searches
};

/// One SCC's contribution to a case: from a state satisfying `guard`, run
/// `iterations` loop iterations inside the SCC and land in `post`.
struct Stage {
  int scc = -1;
  Provenance tag = Provenance::ZeroOrder;
  std::vector<int> paths;
  Expr guard;       // over pre symbols of the stage's entry state
  Expr iterations;  // over pre symbols
  SymMap post;      // Var -> expression over pre symbols and N
};

struct SummaryCase {
  Provenance tag = Provenance::ZeroOrder;
  std::vector<Stage> stages;  // empty when the loop body never runs
  Expr guard;                 // over the loop's pre symbols, includes exit
  Expr iterations;
  SymMap post;  // Var -> expression over pre symbols
};

struct PeriodicClass {
  IntervalSet values;
  bool modular = false;
  Int offset = 0;  // modular form (x_0 - offset + step*N) mod period + offset
  Int period = 0;
  Int step = 0;
};

struct Oscillation {
  int scc = -1;
  std::string variable;
  IntervalSet jump;       // union of J-Intervals
  IntervalSet interval;   // O
  IntervalSet recurrent;  // values lying on a determinate cycle
  int rounds = 0;
  Int values = 0;
  Int max_steps_to_repeat = 0;
  bool pigeonhole_ok = true;
  std::vector<PeriodicClass> classes;
};

struct Failure {
  std::string reason;
  std::string detail;
};

struct LoopAnalysis {
  LoopPaths paths;
  SPathGraph graph;
  Csg csg;
};

struct Summary {
  int loop_id = -1;
  int stmt_id = -1;
  std::vector<std::string> variables;
  Expr guard;
  std::vector<SummaryCase> cases;
  std::optional<Failure> failure;
  std::vector<Oscillation> oscillations;
  std::vector<std::string> notes;
  bool ok() const { return !failure.has_value(); }
};

// ---- per-SCC summarization ---------------------------------------------------

/// Closed forms of a path's per-iteration update, valid for N >= 1.
/// Throws SummaryFailure (COUPLED_RECURRENCE / CLOSED_FORM_UNAVAILABLE).
SymMap solve_recurrences(const SymMap& op, const std::vector<std::string>& variables);

Stage summarize_scc_0(const LoopPaths& lp, const SPath& sp, int scc);

/// One maximal run of `sp`, stopping when `G && sp.Cond && extra` fails.
/// nullopt when the run never stops.
std::optional<Stage> summarize_scc_1(const LoopPaths& lp, const SPath& sp, int scc, const SummarizeOptions& opt,
                                     const Expr& extra = truth(true));

struct OscillatoryResult {
  std::string variable;
  std::map<int, IntervalSet> member_sets;  // path index -> values taking that path
  IntervalSet region;                      // union of member sets
  IntervalSet jump;
  IntervalSet interval;
  int rounds = 0;
};

/// Oscillatory interval of a high-order SCC; throws SummaryFailure.
OscillatoryResult find_oscillatory_interval(const LoopPaths& lp, const Scc& scc, const SummarizeOptions& opt);

/// High-order SCC alternatives: each inner vector is a stage sequence.
std::vector<std::vector<Stage>> summarize_scc_high(const LoopPaths& lp, const Scc& scc, const SummarizeOptions& opt,
                                                   Oscillation* info = nullptr);

/// Chains SCC alternatives along every start -> end path of the CSG.
std::vector<SummaryCase> compose_csg(const LoopPaths& lp, const Csg& csg,
                                     const std::map<int, std::vector<std::vector<Stage>>>& alternatives,
                                     const SummarizeOptions& opt);

/// Builds the composite guard / iterations / post of a stage chain.
SummaryCase make_case(const LoopPaths& lp, std::vector<Stage> stages);

LoopAnalysis analyze(const Cfg& cfg, const CanonicalLoop& loop, Solver& solver, const SummarizeOptions& opt);

/// Summary of a loop whose body has no inner loops.
Summary summarize_loop(const Cfg& cfg, const CanonicalLoop& loop, Solver& solver, const SummarizeOptions& opt,
                       LoopAnalysis* analysis = nullptr);

// ---- evaluation ----------------------------------------------------------------

struct CaseRun {
  bool matched = false;
  Valuation post;  // Pre symbols
  Int iterations = 0;
};

/// Runs the case stage by stage from `pre` (Pre symbols).
CaseRun run_case(const Summary& s, const SummaryCase& c, const Valuation& pre);

// ---- programs ----------------------------------------------------------------

struct LoopReport {
  int stmt_id = -1;
  Summary summary;
  std::vector<Summary> inner;  // summaries spliced in by nesting elimination
};

struct ProgramSummary {
  std::vector<LoopReport> loops;  // top-level loops in program order
  std::optional<Failure> failure;
  bool ok() const { return !failure.has_value(); }
};

struct Elimination {
  ast::Program program;
  std::vector<Summary> summaries;  // one per eliminated loop, inner first
  std::map<int, int> outer;        // eliminated loop stmt id -> enclosing outermost loop stmt id
  std::set<int> rewritten;         // outermost loops that received generated code
  std::optional<Failure> failure;
};

/// Replaces every loop nested inside another loop by straight-line code
/// realizing its summary, innermost first.
Elimination eliminate_nested(const ast::Program& program, Solver& solver, const SummarizeOptions& opt);

/// Straight-line code realizing `s` (an if / else-if chain of parallel assignments).
ast::StmtPtr summary_code(const Summary& s, int& next_id);

ProgramSummary summarize_program(const ast::Program& program, Solver& solver, const SummarizeOptions& opt);

}  // namespace loopsum
