#include <gtest/gtest.h>

#include <random>
#include <set>

#include "loopsum/interval_set.hpp"

using namespace loopsum;

TEST(IntervalSet, HalfOpenAndCoalescing) {
  auto a = IntervalSet::half_open(3, 5).unite(IntervalSet::half_open(5, 10));
  EXPECT_EQ(a, IntervalSet::half_open(3, 10));
  EXPECT_EQ(a.count(), 7);
  EXPECT_EQ(a.to_string(), "[3,10)");
  EXPECT_FALSE(a.contains(10));
}

TEST(IntervalSet, SetAlgebra) {
  auto a = IntervalSet::closed(0, 9);
  auto b = IntervalSet::closed(5, 20);
  EXPECT_EQ(a.intersect(b), IntervalSet::closed(5, 9));
  EXPECT_EQ(a.minus(b), IntervalSet::closed(0, 4));
  EXPECT_TRUE(IntervalSet::closed(6, 7).subset_of(a));
  EXPECT_FALSE(b.subset_of(a));
  EXPECT_EQ(IntervalSet::all().complement(), IntervalSet::empty());
  EXPECT_FALSE(IntervalSet::at_least(0).is_bounded());
  EXPECT_EQ(IntervalSet::at_least(0).count(), std::nullopt);
}

TEST(IntervalSet, AffineImageAndPreimage) {
  // Fig. 5(a) member steps: [3,5) + 2 and [5,10) - 5
  auto img = IntervalSet::half_open(3, 5).affine_image(1, 2).unite(IntervalSet::half_open(5, 10).affine_image(1, -5));
  EXPECT_EQ(img, IntervalSet::half_open(0, 7));
  EXPECT_EQ(IntervalSet::closed(0, 3).affine_image(2, 1), IntervalSet::from_values({1, 3, 5, 7}));
  EXPECT_EQ(IntervalSet::closed(0, 10).affine_preimage(2, 0), IntervalSet::closed(0, 5));
  EXPECT_EQ(IntervalSet::closed(0, 4).affine_image(-1, 0), IntervalSet::closed(-4, 0));
}

TEST(IntervalSetProperty, AgreesWithBruteForce) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<Int> d(-20, 20);
  auto random_set = [&](std::set<Int>& members) {
    std::vector<IntervalSet::Range> rs;
    for (int k = 0; k < 3; ++k) {
      Int lo = d(rng);
      Int hi = lo + d(rng) % 6;
      if (hi < lo) std::swap(lo, hi);
      rs.push_back({lo, hi});
      for (Int v = lo; v <= hi; ++v) members.insert(v);
    }
    return IntervalSet::from_ranges(rs);
  };
  for (int round = 0; round < 300; ++round) {
    std::set<Int> ma, mb;
    auto a = random_set(ma);
    auto b = random_set(mb);
    Int m = d(rng) % 4;
    Int c = d(rng);
    for (Int v = -60; v <= 60; ++v) {
      ASSERT_EQ(a.unite(b).contains(v), ma.count(v) || mb.count(v));
      ASSERT_EQ(a.intersect(b).contains(v), ma.count(v) && mb.count(v));
      ASSERT_EQ(a.complement().contains(v), !ma.count(v));
      ASSERT_EQ(a.affine_preimage(m, c).contains(v), ma.count(m * v + c) != 0);
      if (ma.count(v)) ASSERT_TRUE(a.affine_image(m, c).contains(m * v + c));
    }
  }
}
