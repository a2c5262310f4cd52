#include <gtest/gtest.h>

#include <filesystem>

#include "common.hpp"
#include "loopsum/verify.hpp"

using namespace loopsum;

namespace {

ast::Program vcase(const std::string& name) { return testutil::corpus("verify/" + name); }

VerifyReport run(const ast::Program& p) {
  Solver s;
  return verify(p, s);
}

Verdict only_verdict(const std::string& name) {
  auto rep = run(vcase(name));
  EXPECT_EQ(rep.results.size(), 1u) << name;
  return rep.results.empty() ? Verdict::Unknown : rep.results[0].verdict;
}

std::vector<std::string> verify_files() {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(std::string(LOOPSUM_CORPUS_DIR) + "/verify")) {
    if (e.path().extension() == ".wl") out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Inputs of `p` visited by a lattice walk; every point when the space is small.
std::vector<State> sample_inputs(const ast::Program& p, std::size_t limit) {
  std::vector<State> out{State{}};
  for (const auto& d : p.inputs) {
    std::vector<State> next;
    Int span = d.hi - d.lo + 1;
    Int stride = std::max<Int>(1, span / 60);
    for (const auto& s : out) {
      for (Int v = d.lo; v <= d.hi; v += stride) {
        State t = s;
        t[d.name] = v;
        next.push_back(std::move(t));
      }
      State t = s;
      t[d.name] = d.hi;
      next.push_back(std::move(t));
    }
    out = std::move(next);
    if (out.size() > limit) out.resize(limit);
  }
  return out;
}

}  // namespace

TEST(Verify, IncrementBoundHolds) { EXPECT_EQ(only_verdict("inc_bound.wl"), Verdict::Holds); }

TEST(Verify, AssertTrueHoldsEverywhere) {
  auto rep = run(vcase("true_anywhere.wl"));
  ASSERT_EQ(rep.results.size(), 2u);
  EXPECT_FALSE(rep.results[0].in_loop);
  EXPECT_TRUE(rep.results[1].in_loop);
  for (const auto& r : rep.results) EXPECT_EQ(r.verdict, Verdict::Holds);
}

TEST(Verify, StepOfThreeHitsNine) {
  auto p = vcase("step3_skip.wl");
  auto rep = run(p);
  ASSERT_EQ(rep.results.size(), 1u);
  const auto& r = rep.results[0];
  EXPECT_TRUE(r.in_loop);
  ASSERT_EQ(r.verdict, Verdict::Violated);
  ASSERT_TRUE(r.witness.has_value());
  auto replay = interpret(p, *r.witness);
  EXPECT_EQ(replay.status, ConcreteState::Status::AssertFailed);
  EXPECT_EQ(replay.stmt_id, r.stmt_id);
  EXPECT_EQ(replay.vars.at("i"), 9);
}

TEST(Verify, Fig3ExitHolds) {
  auto rep = run(vcase("fig3_exit.wl"));
  ASSERT_EQ(rep.results.size(), 1u);
  EXPECT_EQ(rep.results[0].verdict, Verdict::Holds);
  EXPECT_EQ(rep.results[0].method, "symbolic");
}

TEST(Verify, FalseAfterLoopIsViolated) { EXPECT_EQ(only_verdict("false_after.wl"), Verdict::Violated); }

TEST(Verify, NondetTripCountHolds) { EXPECT_EQ(only_verdict("nondet_bound.wl"), Verdict::Holds); }

TEST(Verify, SumWithWrongBoundFindsInput) {
  auto p = vcase("sum_wrong.wl");
  auto rep = run(p);
  ASSERT_EQ(rep.results.size(), 1u);
  ASSERT_EQ(rep.results[0].verdict, Verdict::Violated);
  EXPECT_EQ(interpret(p, *rep.results[0].witness).status, ConcreteState::Status::AssertFailed);
}

TEST(Verify, SummaryFailureGivesUnknownWithReason) {
  auto rep = run(vcase("coupled_unknown.wl"));
  ASSERT_EQ(rep.results.size(), 1u);
  EXPECT_EQ(rep.results[0].verdict, Verdict::Unknown);
  EXPECT_EQ(rep.results[0].reason, reason::kCoupledRecurrence);
  ASSERT_TRUE(rep.summary_failure.has_value());
}

TEST(Verify, PlacementIsChecked) {
  Solver s;
  auto p = vcase("true_anywhere.wl");
  auto sites = assertions(p);
  ASSERT_EQ(sites.size(), 2u);
  EXPECT_THROW(verify_in_loop(p, sites[0].stmt->id, s), std::invalid_argument);
  EXPECT_THROW(verify_after_loop(p, sites[1].stmt->id, s), std::invalid_argument);
  EXPECT_EQ(verify_after_loop(p, sites[0].stmt->id, s).verdict, Verdict::Holds);
  EXPECT_EQ(verify_in_loop(p, sites[1].stmt->id, s).verdict, Verdict::Holds);
  EXPECT_THROW(verify_in_loop(p, 9999, s), std::invalid_argument);
}

TEST(Verify, NoAssertionsNoResults) { EXPECT_TRUE(run(testutil::corpus("fig3.wl")).results.empty()); }

TEST(Verify, ExpectedVerdictsOverTheCorpus) {
  const std::map<std::string, Verdict> want{
      {"branch_pre.wl", Verdict::Holds},       {"countdown_inloop.wl", Verdict::Holds},
      {"coupled_unknown.wl", Verdict::Unknown}, {"custom4_flag.wl", Verdict::Holds},
      {"false_after.wl", Verdict::Violated},   {"fig1c_band.wl", Verdict::Holds},
      {"fig1c_low.wl", Verdict::Violated},     {"fig3_exit.wl", Verdict::Holds},
      {"fig5a_inloop.wl", Verdict::Violated},  {"fig5a_range.wl", Verdict::Holds},
      {"inc_bound.wl", Verdict::Holds},        {"nested_sum.wl", Verdict::Holds},
      {"nondet_bound.wl", Verdict::Holds},     {"step3_skip.wl", Verdict::Violated},
      {"sum_exact.wl", Verdict::Holds},        {"sum_wrong.wl", Verdict::Violated},
      {"true_anywhere.wl", Verdict::Holds},    {"two_loops.wl", Verdict::Holds},
      {"two_loops_bad.wl", Verdict::Violated}, {"zero_order_post.wl", Verdict::Violated},
  };
  for (const auto& [name, v] : want) {
    auto rep = run(vcase(name));
    ASSERT_FALSE(rep.results.empty()) << name;
    Verdict worst = Verdict::Holds;
    for (const auto& r : rep.results) {
      if (r.verdict == Verdict::Violated) worst = Verdict::Violated;
      if (r.verdict == Verdict::Unknown && worst == Verdict::Holds) worst = Verdict::Unknown;
    }
    EXPECT_EQ(worst, v) << name;
  }
}

// Witnesses replay; HOLDS is never contradicted by running the program.
TEST(VerifyProperty, VerdictsAgreeWithExecution) {
  for (const auto& f : verify_files()) {
    auto p = testutil::program(testutil::read_file(f));
    auto rep = run(p);
    for (const auto& r : rep.results) {
      if (r.verdict == Verdict::Violated) {
        ASSERT_TRUE(r.witness.has_value()) << f;
        auto replay = interpret(p, *r.witness);
        EXPECT_EQ(replay.status, ConcreteState::Status::AssertFailed) << f;
        EXPECT_EQ(replay.stmt_id, r.stmt_id) << f;
      }
      if (r.verdict == Verdict::Unknown) EXPECT_TRUE(rep.summary_failure.has_value()) << f;
    }
    for (const auto& in : sample_inputs(p, 4000)) {
      auto c = interpret(p, in);
      if (c.status != ConcreteState::Status::AssertFailed) continue;
      for (const auto& r : rep.results) {
        if (r.stmt_id == c.stmt_id) EXPECT_NE(r.verdict, Verdict::Holds) << f << " line " << r.loc.line;
      }
    }
  }
}
