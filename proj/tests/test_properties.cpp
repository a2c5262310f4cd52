#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "common.hpp"
#include "loopsum/oracle.hpp"
#include "loopsum/summarize.hpp"

using namespace loopsum;

namespace {

struct Analyzed {
  std::string file;
  LoopAnalysis analysis;
  Summary summary;
};

std::vector<Analyzed> single_loops() {
  std::vector<Analyzed> out;
  std::vector<std::string> files;
  for (const auto& e : std::filesystem::directory_iterator(LOOPSUM_CORPUS_DIR)) {
    if (e.path().extension() == ".wl") files.push_back(e.path().string());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    auto p = testutil::program(testutil::read_file(f));
    auto b = testutil::build(p);
    if (b.loops.size() != 1) continue;
    Solver s;
    Analyzed a;
    a.file = f;
    a.summary = summarize_loop(b.cfg, b.loops[0], s, {}, &a.analysis);
    if (a.summary.ok()) out.push_back(std::move(a));
  }
  return out;
}

Valuation random_pre(const LoopPaths& lp, std::mt19937_64& rng) {
  std::uniform_int_distribution<Int> d(-100, 100);
  Valuation env;
  for (const auto& v : lp.variables) env[{SymKind::Pre, v}] = d(rng);
  return env;
}

}  // namespace

TEST(ClosedFormProperty, MatchesIteration) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<Int> coef(-3, 3), add(-5, 5), start(-20, 20), steps(0, 12);
  for (int k = 0; k < 2000; ++k) {
    Int a = coef(rng), b = add(rng), x0 = start(rng), n = steps(rng);
    Expr e = closed_form(pre("x"), a, constant(b), iter());
    Int x = x0;
    for (Int i = 0; i < n; ++i) x = a * x + b;
    Valuation env{{{SymKind::Pre, "x"}, x0}, {{SymKind::Iter, "N"}, n}};
    ASSERT_EQ(eval_int(e, env), x) << "a=" << a << " b=" << b << " x0=" << x0 << " n=" << n;
  }
}

// A one-order stage runs its path exactly `iterations` times: the path stays
// enabled for every earlier step and is disabled afterwards.
TEST(StageProperty, OneOrderIterationsAreLeast) {
  int checked = 0;
  for (const auto& a : single_loops()) {
    const LoopPaths& lp = a.analysis.paths;
    std::mt19937_64 rng(13);
    for (const auto& c : a.summary.cases) {
      if (c.stages.empty() || c.stages[0].tag != Provenance::OneOrder) continue;
      const Stage& st = c.stages[0];
      ASSERT_EQ(st.paths.size(), 1u) << a.file;
      const SPath& sp = lp.paths[static_cast<std::size_t>(st.paths[0])];
      Expr enabled = land({lp.guard, sp.cond_conj()});
      for (int k = 0; k < 300; ++k) {
        Valuation env = random_pre(lp, rng);
        if (!eval_bool(st.guard, env)) continue;
        Valuation cur = env;
        try {
          Int n = eval_int(st.iterations, env);
          for (Int i = 0; i < n; ++i) {
            ASSERT_TRUE(eval_bool(enabled, cur)) << a.file << " step " << i << " of " << n;
            Valuation next;
            for (const auto& v : lp.variables) next[{SymKind::Pre, v}] = eval_int(sp.op.at({SymKind::Var, v}), cur);
            cur = std::move(next);
          }
          EXPECT_FALSE(eval_bool(enabled, cur)) << a.file;
          Valuation at_n = env;
          at_n[{SymKind::Iter, "N"}] = n;
          for (const auto& v : lp.variables) {
            auto it = st.post.find({SymKind::Var, v});
            if (it != st.post.end()) EXPECT_EQ(eval_int(it->second, at_n), cur.at({SymKind::Pre, v})) << a.file << " " << v;
          }
        } catch (const OverflowError&) {
          continue;
        }
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(StageProperty, EnteredStagesRunAtLeastOnce) {
  for (const auto& a : single_loops()) {
    std::mt19937_64 rng(2);
    for (const auto& c : a.summary.cases) {
      for (const auto& st : c.stages) {
        if (st.tag != Provenance::OneOrder) continue;
        for (int k = 0; k < 50; ++k) {
          Valuation env = random_pre(a.analysis.paths, rng);
          if (eval_bool(st.guard, env)) EXPECT_GE(eval_int(st.iterations, env), 1) << a.file;
        }
      }
    }
  }
}

// First-match evaluation never disagrees with any other matching case.
TEST(CaseProperty, OverlappingCasesAgree) {
  for (const auto& a : single_loops()) {
    std::mt19937_64 rng(31);
    for (int k = 0; k < 300; ++k) {
      Valuation env = random_pre(a.analysis.paths, rng);
      std::optional<CaseRun> first;
      for (const auto& c : a.summary.cases) {
        CaseRun r;
        try {
          r = run_case(a.summary, c, env);
        } catch (const std::runtime_error&) {
          continue;
        }
        if (!r.matched) continue;
        if (!first) {
          first = r;
          continue;
        }
        EXPECT_EQ(r.iterations, first->iterations) << a.file;
        EXPECT_EQ(r.post, first->post) << a.file;
      }
    }
  }
}
