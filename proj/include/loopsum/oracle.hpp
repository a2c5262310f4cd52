#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "loopsum/ast.hpp"
#include "loopsum/summarize.hpp"

namespace loopsum {

using State = std::map<std::string, Int>;

struct ConcreteState {
  enum class Status { Running, Done, FuelExhausted, AssertFailed, RuntimeError };
  State vars;
  Int steps = 0;  // loop-guard evaluations
  Status status = Status::Running;
  ast::Loc loc;         // failing assertion or runtime error
  int stmt_id = -1;     // ditto
  std::string message;
};
std::string to_string(ConcreteState::Status s);

struct BranchEvent {
  int stmt_id;
  bool taken;
};

struct InterpretOptions {
  Int fuel = 2000000;
  /// Loops (by While statement id) to run through their summary instead.
  const std::map<int, const Summary*>* summaries = nullptr;
  std::vector<BranchEvent>* trace = nullptr;
};

/// Big-step interpreter. Every program variable starts at 0; `inputs`
/// overrides the declared inputs.
ConcreteState interpret(const ast::Program& program, const State& inputs, const InterpretOptions& options = {});

struct SummaryEval {
  enum class Status { Ok, NoCase, Error } status = Status::Error;
  State vars;
  Int iterations = 0;
  int case_index = -1;
  std::string message;
};

/// First matching case of `summary` applied to `state`; variables the summary
/// does not know are copied through.
SummaryEval eval_summary(const Summary& summary, const State& state);

/// Drops synthesized bookkeeping variables (break flags).
State visible(const State& s);

State random_inputs(const ast::Program& program, std::mt19937_64& rng);

struct Mismatch {
  State inputs;
  State expected;
  State actual;
  std::string message;
};

struct DiffReport {
  std::uint64_t seed = 0;
  int inputs = 0;
  int compared = 0;   // oracle terminated normally
  int matched = 0;
  int skipped = 0;    // oracle ran out of fuel or overflowed
  std::vector<Mismatch> mismatches;  // first few only
  int mismatch_count = 0;
  double match_rate() const { return compared == 0 ? 1.0 : static_cast<double>(matched) / compared; }
};

/// Runs the program with and without its loop summaries on seeded random inputs.
DiffReport oracle_diff(const ast::Program& program, const ProgramSummary& summary, int inputs, std::uint64_t seed,
                       Int fuel = 2000000);

}  // namespace loopsum
