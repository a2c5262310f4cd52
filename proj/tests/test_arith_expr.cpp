#include <gtest/gtest.h>

#include "loopsum/expr.hpp"

using namespace loopsum;

TEST(Arith, FloorDivisionRoundsDown) {
  EXPECT_EQ(arith::floor_div(7, 2), 3);
  EXPECT_EQ(arith::floor_div(-7, 2), -4);
  EXPECT_EQ(arith::floor_div(7, -2), -4);
  EXPECT_EQ(arith::floor_mod(-7, 3), 2);
  EXPECT_EQ(arith::ceil_div(7, 2), 4);
  EXPECT_EQ(arith::ceil_div(-7, 2), -3);
}

TEST(Arith, OverflowIsReported) {
  EXPECT_THROW(arith::add(std::numeric_limits<Int>::max(), 1), OverflowError);
  EXPECT_THROW(arith::mul(std::numeric_limits<Int>::max() / 2 + 1, 2), OverflowError);
  EXPECT_THROW(arith::floor_div(1, 0), DivisionByZero);
}

TEST(Expr, CanonicalFormMergesLikeTerms) {
  Expr x = var("x");
  Expr y = var("y");
  EXPECT_TRUE(equal(x + y + x, 2 * x + y));
  EXPECT_TRUE(equal((x + 1) * (x - 1), x * x - 1));
  EXPECT_TRUE(equal(x - x, constant(0)));
  EXPECT_EQ(to_string(constant(3) + constant(4)), "7");
}

TEST(Expr, ComparisonsNormalize) {
  Expr x = var("x");
  EXPECT_TRUE(equal(lt(x, constant(5)), le(x, constant(4))));
  EXPECT_TRUE(lt(constant(1), constant(2))->is_true());
  EXPECT_TRUE(lt(x, x)->is_false());
  EXPECT_TRUE(equal(lnot(ge(x, constant(0))), lt(x, constant(0))));
}

TEST(Expr, EvaluationUsesFloorSemantics) {
  Expr x = var("x");
  Valuation env{{{SymKind::Var, "x"}, -7}};
  EXPECT_EQ(eval_int(floor_div(x, 2), env), -4);
  EXPECT_EQ(eval_int(mod(x, 3), env), 2);
  EXPECT_EQ(eval_int(min({x, constant(3)}), env), -7);
  EXPECT_EQ(eval_int(ite(lt(x, constant(0)), constant(1), constant(2)), env), 1);
  EXPECT_TRUE(eval_bool(land(lt(x, constant(0)), ne(x, constant(1))), env));
  EXPECT_THROW(eval_int(var("y"), env), UnboundSymbol);
}

TEST(Expr, SubstituteReplacesSymbols) {
  Expr e = pre("x") + 2 * iter();
  SymMap m{{{SymKind::Iter, "N"}, constant(3)}};
  EXPECT_TRUE(equal(substitute(e, m), pre("x") + 6));
}

TEST(Expr, TierClassification) {
  Expr x = var("x");
  EXPECT_EQ(tier_of(2 * x + 1), Tier::Linear);
  EXPECT_EQ(tier_of(x * x), Tier::Polynomial);
  EXPECT_EQ(tier_of(floor_div(x, 2)), Tier::Opaque);
}

TEST(Expr, SplitLinear) {
  Expr x = pre("x");
  auto s = split_linear(3 * x + pre("y") + 4, {SymKind::Pre, "x"});
  ASSERT_TRUE(s.has_value());
  EXPECT_TRUE(equal(s->coef, constant(3)));
  EXPECT_TRUE(equal(s->rest, pre("y") + 4));
}
