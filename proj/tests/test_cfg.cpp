#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <functional>
#include <random>
#include <set>

#include "common.hpp"
#include "loopsum/cfg.hpp"
#include "loopsum/oracle.hpp"

using namespace loopsum;

namespace {

/// Executes the canonicalized CFG directly.
State run_cfg(const Cfg& cfg, const ast::Program& p, const State& inputs, bool& finished) {
  Valuation env;
  for (const auto& v : cfg.variables) env[{SymKind::Var, v}] = 0;
  for (const auto& [k, v] : inputs) env[{SymKind::Var, k}] = v;
  int node = cfg.entry;
  finished = false;
  for (long steps = 0; steps < 2000000; ++steps) {
    const CfgNode& n = cfg.nodes[static_cast<std::size_t>(node)];
    switch (n.kind) {
      case CfgNode::Kind::Exit: {
        finished = true;
        State out;
        for (const auto& v : p.variables()) out[v] = env[{SymKind::Var, v}];
        return out;
      }
      case CfgNode::Kind::Entry:
        node = n.next;
        break;
      case CfgNode::Kind::Cond:
        node = eval_bool(ast::to_sym(n.cond), env) ? n.next : n.next_false;
        break;
      case CfgNode::Kind::Block:
        for (const auto& s : n.stmts) {
          if (s->kind == ast::Stmt::Kind::Assert) {
            if (!eval_bool(ast::to_sym(s->cond), env)) return {};
            continue;
          }
          if (s->kind == ast::Stmt::Kind::ParallelAssign) {
            std::vector<Int> vals;
            for (const auto& [t, e] : s->parallel) vals.push_back(eval_int(ast::to_sym(e), env));
            for (std::size_t i = 0; i < vals.size(); ++i) env[{SymKind::Var, s->parallel[i].first}] = vals[i];
            continue;
          }
          env[{SymKind::Var, s->target}] = s->value ? eval_int(ast::to_sym(s->value), env) : 0;
        }
        node = n.next;
        break;
    }
  }
  return {};
}

bool reachable_without(const Cfg& cfg, int target, int removed) {
  if (target == removed) return false;
  std::vector<bool> seen(cfg.nodes.size(), false);
  std::vector<int> stack;
  if (cfg.entry != removed) stack.push_back(cfg.entry);
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    if (n == removed || seen[static_cast<std::size_t>(n)]) continue;
    seen[static_cast<std::size_t>(n)] = true;
    if (n == target) return true;
    for (int s : cfg.nodes[static_cast<std::size_t>(n)].successors()) stack.push_back(s);
  }
  return false;
}

std::vector<std::string> corpus_files() {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(LOOPSUM_CORPUS_DIR)) {
    if (e.path().extension() == ".wl") out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(BuildCfg, Fig3BodyHasThreeLeafPaths) {
  auto b = testutil::build(testutil::corpus("fig3.wl"));
  ASSERT_EQ(b.loops.size(), 1u);
  EXPECT_EQ(enumerate_spaths(b.cfg, b.loops[0]).size(), 3u);
}

TEST(BuildCfg, StraightLineHasNoLoops) {
  auto b = testutil::build(testutil::program("// input x in [0, 3]\nint y = x + 1;\nif (y > 2) { y = 0; }\n"));
  EXPECT_TRUE(b.loops.empty());
}

TEST(BuildCfg, T27HasNestedLoops) {
  auto b = testutil::build(testutil::corpus("t27.wl"));
  ASSERT_EQ(b.loops.size(), 2u);
  const auto& outer = b.loops[0];
  const auto& inner = b.loops[1];
  EXPECT_FALSE(outer.parent.has_value());
  ASSERT_TRUE(inner.parent.has_value());
  EXPECT_EQ(*inner.parent, outer.id);
  EXPECT_EQ(inner.depth, outer.depth + 1);
}

TEST(Canonicalize, SingleLoopUnchanged) {
  auto b = testutil::build(testutil::corpus("count_up.wl"));
  ASSERT_EQ(b.loops.size(), 1u);
  EXPECT_FALSE(b.loops[0].break_flag.has_value());
  EXPECT_EQ(b.loops[0].latches.size(), 1u);
}

TEST(Canonicalize, Fig3KeepsSourceStructure) {
  auto p = testutil::corpus("fig3.wl");
  auto b = testutil::build(p);
  ASSERT_EQ(b.loops.size(), 1u);
  EXPECT_FALSE(b.loops[0].break_flag.has_value());
  EXPECT_EQ(b.loops[0].stmt_id, p.body[0]->id);
  EXPECT_EQ(b.cfg.variables, p.variables());
}

TEST(Canonicalize, EarlyExitUsesFlagAndPreservesSemantics) {
  auto p = testutil::corpus("break_early.wl");
  auto b = testutil::build(p);
  ASSERT_EQ(b.loops.size(), 1u);
  ASSERT_TRUE(b.loops[0].break_flag.has_value());
  std::mt19937_64 rng(5);
  for (int k = 0; k < 1000; ++k) {
    State in = random_inputs(p, rng);
    bool done = false;
    State got = run_cfg(b.cfg, p, in, done);
    auto want = interpret(p, in);
    ASSERT_TRUE(done);
    ASSERT_EQ(got, visible(want.vars));
  }
}

TEST(Dominators, EntryDominatesOnlyItself) {
  auto b = testutil::build(testutil::corpus("fig3.wl"));
  auto idom = dominators(b.cfg);
  EXPECT_EQ(idom[static_cast<std::size_t>(b.cfg.entry)], b.cfg.entry);
}

TEST(Dominators, DiamondJoin) {
  auto p = testutil::program("// input x in [0, 3]\nint y = 0;\nif (x > 1) { y = 1; } else { y = 2; }\ny = y + 1;\n");
  Cfg cfg = build_cfg(p);
  auto idom = dominators(cfg);
  int cond = -1;
  for (const auto& n : cfg.nodes) {
    if (n.kind == CfgNode::Kind::Cond) cond = n.id;
  }
  ASSERT_GE(cond, 0);
  // the join is the node both arms lead to
  int t = cfg.nodes[static_cast<std::size_t>(cond)].next;
  int f = cfg.nodes[static_cast<std::size_t>(cond)].next_false;
  int join = cfg.nodes[static_cast<std::size_t>(t)].next;
  EXPECT_EQ(join, cfg.nodes[static_cast<std::size_t>(f)].next);
  EXPECT_EQ(idom[static_cast<std::size_t>(join)], cond);
}

TEST(Dominators, HeaderDominatesFig3Body) {
  auto b = testutil::build(testutil::corpus("fig3.wl"));
  auto idom = dominators(b.cfg);
  for (int n : b.loops[0].body) EXPECT_TRUE(dominates(idom, b.loops[0].header, n));
}

TEST(DominatorsProperty, MatchBruteForceOnCorpus) {
  for (const auto& f : corpus_files()) {
    auto p = testutil::program(testutil::read_file(f));
    Cfg cfg = build_cfg(p);
    canonicalize(cfg);
    auto idom = dominators(cfg);
    for (const auto& n : cfg.nodes) {
      if (!reachable_without(cfg, n.id, -1)) continue;
      for (const auto& d : cfg.nodes) {
        bool brute = d.id == n.id || !reachable_without(cfg, n.id, d.id);
        ASSERT_EQ(dominates(idom, d.id, n.id), brute) << f << " d=" << d.id << " n=" << n.id;
      }
    }
  }
}

TEST(CanonicalizeProperty, BodiesAcyclicWithSingleEntryAndExit) {
  for (const auto& f : corpus_files()) {
    auto p = testutil::program(testutil::read_file(f));
    auto b = testutil::build(p);
    for (const auto& loop : b.loops) {
      std::set<int> body(loop.body.begin(), loop.body.end());
      int entries = 0;
      int exits = 0;
      for (const auto& n : b.cfg.nodes) {
        for (int s : n.successors()) {
          if (!body.count(n.id) && body.count(s)) ++entries;
          if (body.count(n.id) && !body.count(s)) ++exits;
        }
      }
      EXPECT_EQ(entries, 1) << f;
      EXPECT_EQ(exits, 1) << f;
      // Kahn's algorithm on the body without back edges (nested headers included).
      std::set<int> headers;
      for (const auto& l : b.loops) headers.insert(l.header);
      auto back = [&](int from, int to) {
        if (!headers.count(to)) return false;
        for (const auto& l : b.loops) {
          if (l.header == to && std::count(l.latches.begin(), l.latches.end(), from)) return true;
        }
        return false;
      };
      std::map<int, int> indeg;
      for (int n : body) indeg[n] = 0;
      for (int n : body) {
        for (int s : b.cfg.nodes[static_cast<std::size_t>(n)].successors()) {
          if (body.count(s) && !back(n, s)) ++indeg[s];
        }
      }
      std::vector<int> ready;
      for (auto [n, d] : indeg) {
        if (d == 0) ready.push_back(n);
      }
      std::size_t seen = 0;
      while (!ready.empty()) {
        int n = ready.back();
        ready.pop_back();
        ++seen;
        for (int s : b.cfg.nodes[static_cast<std::size_t>(n)].successors()) {
          if (body.count(s) && !back(n, s) && --indeg[s] == 0) ready.push_back(s);
        }
      }
      EXPECT_EQ(seen, body.size()) << f;
    }
  }
}

TEST(CanonicalizeProperty, CorpusSemanticsPreserved) {
  for (const auto& f : corpus_files()) {
    auto p = testutil::program(testutil::read_file(f));
    auto b = testutil::build(p);
    std::mt19937_64 rng(99);
    for (int k = 0; k < 1000; ++k) {
      State in = random_inputs(p, rng);
      auto want = interpret(p, in, {});
      if (want.status != ConcreteState::Status::Done) continue;
      bool done = false;
      State got = run_cfg(b.cfg, p, in, done);
      ASSERT_TRUE(done) << f;
      ASSERT_EQ(got, visible(want.vars)) << f;
    }
  }
}
