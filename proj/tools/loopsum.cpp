#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "loopsum/cfg.hpp"
#include "loopsum/frontend.hpp"
#include "loopsum/graph.hpp"
#include "loopsum/oracle.hpp"
#include "loopsum/report.hpp"
#include "loopsum/summarize.hpp"
#include "loopsum/verify.hpp"

using namespace loopsum;

namespace {

struct RunConfig {
  std::string input;
  std::uint64_t seed = 7;
  int inputs = 1000;
  Int max_interval_values = 1000000;
  std::size_t max_cases = 512;
  std::size_t max_paths = 4096;
  std::string smt_cmd;
  int solver_timeout_ms = 5000;
  Int fuel = 2000000;
  std::string json_out;
  std::string log_smt;
  std::string backend = "auto";
};

void add_common(CLI::App* sub, RunConfig& c) {
  sub->add_option("file", c.input, "input .wl file")->required()->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "random seed")->capture_default_str();
  sub->add_option("--inputs", c.inputs, "random inputs for oracle-diff")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--max-interval-values", c.max_interval_values, "cap on oscillatory interval size")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--max-cases", c.max_cases, "cap on summary cases")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--max-paths", c.max_paths, "cap on SPaths per loop")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--smt-cmd", c.smt_cmd, "external SMT-LIB solver command, e.g. \"z3 -in\"");
  sub->add_option("--solver-timeout-ms", c.solver_timeout_ms, "per-query solver timeout")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--fuel", c.fuel, "interpreter step cap")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--json-out", c.json_out, "also write the JSON report here");
  sub->add_option("--log-smt", c.log_smt, "append every SMT-LIB query to this file");
  sub->add_option("--backend", c.backend, "solver backend")
      ->capture_default_str()
      ->check(CLI::IsMember({"auto", "builtin", "smt"}));
}

SummarizeOptions summarize_options(const RunConfig& c) {
  SummarizeOptions o;
  o.max_paths = c.max_paths;
  o.max_cases = c.max_cases;
  o.max_interval_values = c.max_interval_values;
  o.eval_fuel = c.fuel;
  return o;
}

void write_json(const RunConfig& c, const Json& j) {
  if (c.json_out.empty()) return;
  std::ofstream out(c.json_out);
  out << dump(j);
}

/// Per-loop analyses of the program with nested loops already eliminated.
int dump_loops(const ast::Program& program, Solver& solver, const SummarizeOptions& opt, const std::string& what) {
  Elimination el = eliminate_nested(program, solver, opt);
  const ast::Program& p = el.failure ? program : el.program;
  Cfg cfg = build_cfg(p);
  auto loops = canonicalize(cfg);
  int status = 0;
  for (const auto& loop : loops) {
    if (loop.parent) continue;
    std::cout << "// loop " << loop.id << " (statement " << loop.stmt_id << ")\n";
    try {
      LoopAnalysis a = analyze(cfg, loop, solver, opt);
      if (what == "spaths") {
        std::cout << dump_spaths(a.paths);
      } else {
        std::cout << spath_graph_dot(a.paths, a.graph) << csg_dot(a.paths, a.csg);
      }
    } catch (const std::exception& e) {
      std::cout << "// analysis failed: " << e.what() << "\n";
      status = 1;
    }
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Loop summarization for a small imperative language"};
  app.require_subcommand(1);
  RunConfig cfg;
  auto* summarize = app.add_subcommand("summarize", "summarize every loop");
  auto* verify_cmd = app.add_subcommand("verify", "check assertions");
  auto* diff = app.add_subcommand("oracle-diff", "compare summaries against the interpreter");
  auto* dump_cfg = app.add_subcommand("dump-cfg", "print the control-flow graph (dot)");
  auto* dump_spaths_cmd = app.add_subcommand("dump-spaths", "print each loop's SPaths");
  auto* dump_csg = app.add_subcommand("dump-csg", "print SPath graph and contracted graph (dot)");
  for (auto* s : {summarize, verify_cmd, diff, dump_cfg, dump_spaths_cmd, dump_csg}) add_common(s, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::ifstream in(cfg.input);
  std::stringstream ss;
  ss << in.rdbuf();
  ParseResult pr = parse(ss.str());
  for (const auto& d : pr.diagnostics) std::cerr << cfg.input << ":" << d.to_string() << "\n";
  if (!pr.ok()) return 2;
  const ast::Program& program = *pr.program;

  SolverConfig sc;
  sc.smt_cmd = cfg.smt_cmd;
  sc.timeout_ms = cfg.solver_timeout_ms;
  sc.backend = cfg.backend == "builtin" ? Backend::Builtin : cfg.backend == "smt" ? Backend::Smt : Backend::Auto;
  if (sc.backend == Backend::Smt && sc.smt_cmd.empty()) {
    std::cerr << "--backend smt needs --smt-cmd\n";
    return 2;
  }
  std::ofstream smt_log;
  if (!cfg.log_smt.empty()) {
    smt_log.open(cfg.log_smt, std::ios::app);
    sc.smt_log = &smt_log;
  }
  Solver solver(sc);
  SummarizeOptions opt = summarize_options(cfg);

  try {
    if (*summarize) {
      ProgramSummary ps = summarize_program(program, solver, opt);
      Json j = to_json(ps);
      std::cout << dump(j);
      write_json(cfg, j);
      return ps.ok() ? 0 : 1;
    }
    if (*verify_cmd) {
      VerifyOptions vo;
      vo.summarize = opt;
      vo.fuel = cfg.fuel;
      VerifyReport rep = verify(program, solver, vo);
      bool bad = false;
      for (const auto& r : rep.results) {
        std::cout << cfg.input << ":" << r.loc.line << ": assert(" << r.text << "): " << to_string(r.verdict);
        if (r.witness) std::cout << " " << to_json(*r.witness).dump();
        if (!r.reason.empty()) std::cout << " (" << r.reason << ")";
        std::cout << "\n";
        if (r.verdict != Verdict::Holds) bad = true;
      }
      write_json(cfg, to_json(rep));
      return bad ? 1 : 0;
    }
    if (*diff) {
      ProgramSummary ps = summarize_program(program, solver, opt);
      Json j;
      j["file"] = cfg.input;
      j["summary"] = ps.ok() ? "SUCCESS" : ps.failure->reason;
      if (ps.ok()) {
        DiffReport r = oracle_diff(program, ps, cfg.inputs, cfg.seed, cfg.fuel);
        j["diff"] = to_json(r);
        std::cout << dump(j);
        write_json(cfg, j);
        return r.matched == r.compared ? 0 : 1;
      }
      j["detail"] = ps.failure->detail;
      std::cout << dump(j);
      write_json(cfg, j);
      return 1;
    }
    if (*dump_cfg) {
      Cfg g = build_cfg(program);
      auto loops = canonicalize(g);
      std::cout << to_dot(g, loops);
      return 0;
    }
    if (*dump_spaths_cmd) return dump_loops(program, solver, opt, "spaths");
    if (*dump_csg) return dump_loops(program, solver, opt, "csg");
  } catch (const CfgError& e) {
    std::cerr << cfg.input << ": " << e.code << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << cfg.input << ": error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
