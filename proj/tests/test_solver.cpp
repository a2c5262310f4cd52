#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "loopsum/solver.hpp"
#include "loopsum/summarize.hpp"

using namespace loopsum;

namespace {
const SymKey kN{SymKind::Iter, "N"};
const SymKey kX0{SymKind::Pre, "x"};
}  // namespace

TEST(Check, Fig3BranchBUnsat) {
  Solver s;
  auto r = s.check({ge(pre("x"), constant(0)), lt(pre("x") + 7, constant(5))});
  EXPECT_EQ(r.status, SolveStatus::Unsat);
}

TEST(Check, EmptySetSat) {
  Solver s;
  auto r = s.check({});
  EXPECT_EQ(r.status, SolveStatus::Sat);
  EXPECT_TRUE(r.model.empty());
}

TEST(Check, ExitIterationOfBranchA) {
  Solver s;
  Expr x = pre("x");
  Expr n = iter();
  auto r = s.check({ge(x + 2 * n, constant(0)), lt(x + 2 * (n - 1), constant(0)), gt(n, constant(0)),
                    eq(x, constant(-5))});
  ASSERT_EQ(r.status, SolveStatus::Sat);
  EXPECT_EQ(r.model.at(kN), 3);
  EXPECT_EQ(r.model.at(kX0), -5);
}

TEST(MinIterations, BranchAMatchesClosedForm) {
  Solver s;
  for (Int x0 = -40; x0 <= -1; ++x0) {
    ConstraintSet c{ge(pre("x") + 2 * iter(), constant(0)), ge(iter(), constant(0)), eq(pre("x"), constant(x0))};
    auto m = min_iterations(s, c, kN);
    ASSERT_EQ(m.status, MinIterations::Status::Found);
    EXPECT_EQ(m.value, arith::floor_div(1 - x0, 2)) << x0;
  }
}

TEST(MinIterations, AlreadyFalseIsZero) {
  Solver s;
  ConstraintSet c{ge(pre("i") + 3 * iter(), constant(100)), ge(iter(), constant(0)), eq(pre("i"), constant(150))};
  auto m = min_iterations(s, c, kN);
  ASSERT_EQ(m.status, MinIterations::Status::Found);
  EXPECT_EQ(m.value, 0);
}

TEST(MinIterations, ImplicitExpression) {
  // while x^7 < x^3 + 2: x += 2, from x = 0
  Solver s;
  Expr x = constant(0) + 2 * iter();
  ConstraintSet c{lnot(lt(pow(x, constant(7)), pow(x, constant(3)) + 2)), ge(iter(), constant(0))};
  auto m = min_iterations(s, c, kN, {{kN, {0, 1000}}});
  ASSERT_EQ(m.status, MinIterations::Status::Found);
  EXPECT_EQ(m.value, 1);
}

TEST(ClosedForm, AffineUpdates) {
  EXPECT_TRUE(equal(closed_form(pre("x"), 1, constant(2), iter()), pre("x") + 2 * iter()));
  EXPECT_TRUE(equal(closed_form(pre("x"), 1, constant(0), iter()), pre("x")));
  // geometric: x' = 2x + 1 after 3 steps from 1 is 15
  Valuation env{{kX0, 1}, {kN, 3}};
  EXPECT_EQ(eval_int(closed_form(pre("x"), 2, constant(1), iter()), env), 15);
}

TEST(ClosedForm, SwapIsCoupled) {
  SymMap op{{{SymKind::Var, "x"}, pre("y")}, {{SymKind::Var, "y"}, pre("x") - 1}};
  try {
    solve_recurrences(op, {"x", "y"});
    FAIL() << "expected a coupled recurrence";
  } catch (const SummaryFailure& f) {
    EXPECT_EQ(f.code, reason::kCoupledRecurrence);
  }
}

TEST(SolverProperty, AgreesWithBruteForce) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<Int> c(-6, 6);
  Solver s;
  const std::map<SymKey, std::pair<Int, Int>> dom{{{SymKind::Var, "a"}, {-10, 10}}, {{SymKind::Var, "b"}, {-10, 10}}};
  int sat = 0;
  for (int round = 0; round < 400; ++round) {
    ConstraintSet cs;
    int k = 1 + static_cast<int>(rng() % 3);
    for (int j = 0; j < k; ++j) {
      Expr lhs = c(rng) * var("a") + c(rng) * var("b") + c(rng);
      switch (rng() % 4) {
        case 0:
          cs.add(ge(lhs, constant(0)));
          break;
        case 1:
          cs.add(eq(mod(lhs, 3), constant(c(rng) % 3 < 0 ? 0 : c(rng) % 3)));
          break;
        case 2:
          cs.add(ne(lhs, constant(0)));
          break;
        default:
          cs.add(lt(var("a") * var("b"), lhs));
      }
    }
    bool brute = false;
    for (Int a = -10; a <= 10 && !brute; ++a) {
      for (Int b = -10; b <= 10 && !brute; ++b) {
        Valuation env{{{SymKind::Var, "a"}, a}, {{SymKind::Var, "b"}, b}};
        bool all = true;
        for (const auto& e : cs.constraints) all = all && eval_bool(e, env);
        brute = all;
      }
    }
    auto r = s.check(cs, dom);
    ASSERT_NE(r.status, SolveStatus::Unknown);
    ASSERT_EQ(r.status == SolveStatus::Sat, brute) << round;
    if (r.status == SolveStatus::Sat) {
      ++sat;
      for (const auto& e : cs.constraints) ASSERT_TRUE(eval_bool(e, r.model));
    }
  }
  EXPECT_GT(sat, 50);
}

TEST(Smtlib, RendersLinearQueries) {
  auto text = to_smtlib({ge(pre("x"), constant(0)), lt(pre("x") + 7, constant(5))}, {});
  ASSERT_TRUE(text.has_value());
  EXPECT_NE(text->find("(check-sat)"), std::string::npos);
  EXPECT_NE(text->find("declare-const"), std::string::npos);
}

TEST(Smtlib, ExternalBackendAgrees) {
  if (!std::filesystem::exists("/usr/local/bin/z3") && !std::filesystem::exists("/usr/bin/z3")) {
    GTEST_SKIP() << "z3 not installed";
  }
  SolverConfig cfg;
  cfg.backend = Backend::Smt;
  cfg.smt_cmd = "z3 -in";
  Solver s(cfg);
  auto unsat = s.check({ge(pre("x"), constant(0)), lt(pre("x") + 7, constant(5))});
  EXPECT_EQ(unsat.status, SolveStatus::Unsat);
  auto sat = s.check({ge(pre("x") + 2 * iter(), constant(0)), lt(pre("x") + 2 * (iter() - 1), constant(0)),
                      gt(iter(), constant(0)), eq(pre("x"), constant(-5))});
  ASSERT_EQ(sat.status, SolveStatus::Sat);
  EXPECT_EQ(sat.model.at(kN), 3);
}
