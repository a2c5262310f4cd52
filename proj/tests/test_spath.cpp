#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "common.hpp"
#include "loopsum/oracle.hpp"
#include "loopsum/spath.hpp"

using namespace loopsum;

namespace {

LoopPaths paths_of(const ast::Program& p, Solver& solver) {
  auto b = testutil::build(p);
  return analyze_loop(b.cfg, b.loops.at(0), solver);
}

bool same_on_grid(const Expr& a, const Expr& b, const std::vector<std::string>& vars, Int lo, Int hi) {
  Valuation env;
  std::function<bool(std::size_t)> rec = [&](std::size_t k) {
    if (k == vars.size()) return eval_bool(a, env) == eval_bool(b, env);
    for (Int v = lo; v <= hi; ++v) {
      env[{SymKind::Pre, vars[k]}] = v;
      if (!rec(k + 1)) return false;
    }
    return true;
  };
  return rec(0);
}

const ast::Stmt* find_stmt(const ast::Block& b, int id) {
  for (const auto& s : b) {
    if (s->id == id) return s.get();
    if (auto* r = find_stmt(s->then_body, id)) return r;
    if (auto* r = find_stmt(s->else_body, id)) return r;
  }
  return nullptr;
}

}  // namespace

TEST(EnumerateSpaths, Fig3HasThree) {
  auto b = testutil::build(testutil::corpus("fig3.wl"));
  auto sps = enumerate_spaths(b.cfg, b.loops[0]);
  ASSERT_EQ(sps.size(), 3u);
  EXPECT_EQ(sps[0].decisions.size(), 1u);  // A
  EXPECT_EQ(sps[1].decisions.size(), 2u);  // B
  EXPECT_EQ(sps[2].decisions.size(), 2u);  // C
}

TEST(EnumerateSpaths, EmptyBodyGivesIdentity) {
  Solver solver;
  auto lp = paths_of(testutil::program("// input x in [0, 3]\nwhile (x < 3) {\n}\n"), solver);
  ASSERT_EQ(lp.paths.size(), 1u);
  EXPECT_TRUE(lp.paths[0].cond.empty());
  EXPECT_TRUE(equal(lp.paths[0].op.at({SymKind::Var, "x"}), pre("x")));
}

TEST(EnumerateSpaths, Fig1dHasThree) {
  auto b = testutil::build(testutil::corpus("fig1d.wl"));
  EXPECT_EQ(enumerate_spaths(b.cfg, b.loops[0]).size(), 3u);
}

TEST(ComputeCondOp, Fig3BranchB) {
  Solver solver;
  auto lp = paths_of(testutil::corpus("fig3.wl"), solver);
  const SPath& b = lp.paths[1];
  ASSERT_EQ(b.cond.size(), 2u);
  EXPECT_TRUE(equal(b.cond[0], ge(pre("x"), constant(0))));
  EXPECT_TRUE(equal(b.cond[1], lt(pre("x") + 7, constant(5))));
  EXPECT_TRUE(equal(b.op.at({SymKind::Var, "x"}), pre("x") + 10));
  EXPECT_TRUE(equal(b.op.at({SymKind::Var, "i"}), pre("i") + 1));
  EXPECT_FALSE(b.valid);
}

TEST(ComputeCondOp, Fig3BranchC) {
  Solver solver;
  auto lp = paths_of(testutil::corpus("fig3.wl"), solver);
  const SPath& c = lp.paths[2];
  EXPECT_TRUE(equal(c.op.at({SymKind::Var, "x"}), pre("x") - 5));
  EXPECT_TRUE(equal(c.op.at({SymKind::Var, "i"}), pre("i") + 2));
  EXPECT_TRUE(same_on_grid(c.cond_conj(), ge(pre("x"), constant(0)), {"x"}, -50, 50));
  EXPECT_TRUE(c.valid);
}

TEST(ComputeCondOp, NoAssignmentsKeepsRawGuards) {
  Solver solver;
  auto lp = paths_of(testutil::program("// input x in [0, 9]\n// input y in [0, 9]\nwhile (x < 3) {\n  if (y > 4) {\n  }\n}\n"),
                     solver);
  ASSERT_EQ(lp.paths.size(), 2u);
  EXPECT_TRUE(equal(lp.paths[0].cond_conj(), gt(pre("y"), constant(4))));
  EXPECT_TRUE(equal(lp.paths[1].cond_conj(), le(pre("y"), constant(4))));
  for (const auto& sp : lp.paths) {
    EXPECT_TRUE(equal(sp.op.at({SymKind::Var, "x"}), pre("x")));
    EXPECT_TRUE(equal(sp.op.at({SymKind::Var, "y"}), pre("y")));
  }
}

TEST(PruneInvalid, Fig3DropsB) {
  Solver solver;
  auto b = testutil::build(testutil::corpus("fig3.wl"));
  auto lp = analyze_loop(b.cfg, b.loops[0], solver);
  auto kept = prune_invalid(lp.paths, lp.guard, solver);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].index, 0);
  EXPECT_EQ(kept[1].index, 2);
}

TEST(PruneInvalid, TrueGuardsUnchanged) {
  Solver solver;
  auto b = testutil::build(testutil::corpus("fig1a.wl"));
  auto sps = enumerate_spaths(b.cfg, b.loops[0]);
  for (auto& sp : sps) compute_cond_op(b.cfg, b.cfg.variables, sp);
  for (auto& sp : sps) sp.cond.clear();
  EXPECT_EQ(prune_invalid(sps, truth(true), solver).size(), sps.size());
}

TEST(PruneInvalid, SelfContradictionRemoved) {
  Solver solver;
  SPath sp;
  sp.index = 0;
  sp.cond = {lt(pre("x"), pre("x"))};
  EXPECT_TRUE(prune_invalid({sp}, truth(true), solver).empty());
}

TEST(SpathProperty, OpSoundAndPathsComplete) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<Int> d(-100, 100);
  for (const auto& entry : std::filesystem::directory_iterator(LOOPSUM_CORPUS_DIR)) {
    if (entry.path().extension() != ".wl") continue;
    auto p = testutil::program(testutil::read_file(entry.path().string()));
    auto b = testutil::build(p);
    if (b.loops.size() != 1 || b.loops[0].break_flag) continue;
    Solver solver;
    auto lp = analyze_loop(b.cfg, b.loops[0], solver);
    const ast::Stmt* loop = find_stmt(p.body, lp.stmt_id);
    ASSERT_NE(loop, nullptr);
    // One iteration of the body as a program of its own.
    ast::Program one;
    for (const auto& v : lp.variables) one.inputs.push_back({v, -100, 100});
    one.body = ast::clone(loop->then_body);
    for (int k = 0; k < 300; ++k) {
      State s;
      Valuation pre_env;
      for (const auto& v : lp.variables) {
        s[v] = d(rng);
        pre_env[{SymKind::Pre, v}] = s[v];
      }
      if (!eval_bool(lp.guard, pre_env)) continue;
      std::vector<BranchEvent> trace;
      InterpretOptions io;
      io.trace = &trace;
      auto r = interpret(one, s, io);
      ASSERT_EQ(r.status, ConcreteState::Status::Done);
      int matching = 0;
      for (const auto& sp : lp.paths) {
        if (!sp.valid) continue;
        std::vector<Decision> taken;
        for (const auto& e : trace) taken.push_back({e.stmt_id, e.taken});
        bool follows = taken == sp.decisions;
        bool cond = eval_bool(sp.cond_conj(), pre_env);
        ASSERT_EQ(follows, cond) << entry.path() << " " << sp.name();
        if (!cond) continue;
        ++matching;
        for (const auto& v : lp.variables) {
          ASSERT_EQ(eval_int(sp.op.at({SymKind::Var, v}), pre_env), r.vars.at(v)) << entry.path() << " " << v;
        }
      }
      ASSERT_EQ(matching, 1) << entry.path();
    }
  }
}
