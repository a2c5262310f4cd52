#pragma once

#include <chrono>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "loopsum/expr.hpp"

namespace loopsum {

struct ConstraintSet {
  std::vector<Expr> constraints;  // boolean expressions, implicitly conjoined

  ConstraintSet() = default;
  ConstraintSet(std::initializer_list<Expr> cs) : constraints(cs) {}
  explicit ConstraintSet(std::vector<Expr> cs) : constraints(std::move(cs)) {}

  void add(Expr e) { constraints.push_back(std::move(e)); }
  std::set<SymKey> symbols() const;
  Tier tier() const;
};

enum class SolveStatus { Sat, Unsat, Unknown };
std::string to_string(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::Unknown;
  Valuation model;  // SAT only; every free symbol of the query is bound
  double seconds = 0;
  std::string note;  // which backend answered, or why the answer is UNKNOWN
};

enum class Backend { Auto, Builtin, Smt };

struct SolverConfig {
  Backend backend = Backend::Auto;
  std::string smt_cmd;            // e.g. "z3 -in"; empty disables the external backend
  int timeout_ms = 5000;
  long search_budget = 200000;    // search nodes per query for the built-in backend
  std::ostream* smt_log = nullptr;
};

/// Integer satisfiability over symbolic constraints.
///
/// The built-in backend relaxes every constraint to linear inequalities
/// (floor and mod get an auxiliary quotient, other non-linear atoms are
/// dropped), uses Fourier-Motzkin projection to bound each variable, and then
/// searches integer assignments in bounded order, checking the original
/// constraints exactly. UNSAT is only reported when the relaxation is
/// infeasible or every candidate in finite ranges was tried.
class Solver {
 public:
  explicit Solver(SolverConfig config = {});

  SolveResult check(const ConstraintSet& c, const std::map<SymKey, std::pair<Int, Int>>& domains = {});

  const SolverConfig& config() const { return config_; }
  std::size_t queries() const { return queries_; }
  std::size_t cache_hits() const { return cache_hits_; }

 private:
  SolveResult check_uncached(const ConstraintSet& c, const std::map<SymKey, std::pair<Int, Int>>& domains);
  SolveResult check_smt(const ConstraintSet& c, const std::map<SymKey, std::pair<Int, Int>>& domains);

  SolverConfig config_;
  std::mutex mutex_;
  std::unordered_map<std::string, SolveResult> cache_;
  std::size_t queries_ = 0;
  std::size_t cache_hits_ = 0;
};

/// SMT-LIB2 text of a satisfiability query; nullopt when the constraints use
/// an operator SMT-LIB integer arithmetic cannot express (opaque calls,
/// symbolic exponents).
std::optional<std::string> to_smtlib(const ConstraintSet& c, const std::map<SymKey, std::pair<Int, Int>>& domains);

struct MinIterations {
  enum class Status { Found, NoSolution, Unknown } status = Status::Unknown;
  Int value = 0;
  int rounds = 0;  // refinement rounds taken
};

/// Starting from a model of `c`, keep adding `n < n_val` until the
/// set becomes UNSAT; the last model value is the least n.
MinIterations min_iterations(Solver& solver, ConstraintSet c, const SymKey& n,
                             const std::map<SymKey, std::pair<Int, Int>>& domains = {}, int max_rounds = 1000000);

/// Value after n steps of x' = a*x + b with b constant across steps.
Expr closed_form(const Expr& x0, Int a, const Expr& b, const Expr& n);

}  // namespace loopsum
