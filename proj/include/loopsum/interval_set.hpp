#pragma once

#include <optional>
#include <string>
#include <vector>

#include "loopsum/arith.hpp"

namespace loopsum {

/// Finite union of disjoint integer intervals, kept sorted and coalesced
/// (no two intervals overlap or touch). Bounds may be infinite.
class IntervalSet {
 public:
  static constexpr Int kNegInf = std::numeric_limits<Int>::min();
  static constexpr Int kPosInf = std::numeric_limits<Int>::max();

  /// Closed integer interval [lo, hi]; kNegInf / kPosInf mark open ends.
  struct Range {
    Int lo;
    Int hi;
    bool operator==(const Range&) const = default;
  };

  IntervalSet() = default;

  static IntervalSet empty() { return {}; }
  static IntervalSet all() { return closed(kNegInf, kPosInf); }
  static IntervalSet closed(Int lo, Int hi);
  /// [lo, hi) as written in the usual half-open notation.
  static IntervalSet half_open(Int lo, Int hi);
  static IntervalSet point(Int v) { return closed(v, v); }
  static IntervalSet at_least(Int lo) { return closed(lo, kPosInf); }
  static IntervalSet at_most(Int hi) { return closed(kNegInf, hi); }
  /// Union of arbitrary (possibly overlapping, unsorted) ranges.
  static IntervalSet from_ranges(std::vector<Range> ranges);
  static IntervalSet from_values(std::vector<Int> values);

  const std::vector<Range>& ranges() const { return ranges_; }
  bool is_empty() const { return ranges_.empty(); }
  bool is_bounded() const;
  bool contains(Int v) const;
  bool subset_of(const IntervalSet& other) const;
  /// Number of integers, nullopt when unbounded; saturates at kPosInf.
  std::optional<Int> count() const;
  Int min() const;
  Int max() const;

  IntervalSet unite(const IntervalSet& other) const;
  IntervalSet intersect(const IntervalSet& other) const;
  IntervalSet complement() const;
  IntervalSet minus(const IntervalSet& other) const { return intersect(other.complement()); }

  /// Image under v -> a*v + b. Exact for |a| <= 1 and for small finite sets;
  /// otherwise the per-range hull.
  IntervalSet affine_image(Int a, Int b) const;
  /// { v : a*v + b in this }.
  IntervalSet affine_preimage(Int a, Int b) const;

  /// Calls fn for every member in increasing order; the set must be bounded.
  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (const auto& r : ranges_) {
      for (Int v = r.lo;; ++v) {
        fn(v);
        if (v == r.hi) break;
      }
    }
  }

  bool operator==(const IntervalSet&) const = default;
  std::string to_string() const;

 private:
  void normalize();
  std::vector<Range> ranges_;
};

}  // namespace loopsum
