#include "loopsum/interval_set.hpp"

#include <algorithm>

namespace loopsum {

namespace {

constexpr Int kSmallImage = 4096;

// Saturating helpers so that infinite endpoints survive affine maps.
Int sat_affine(Int a, Int v, Int b) {
  if (v == IntervalSet::kNegInf || v == IntervalSet::kPosInf) {
    bool positive = (v == IntervalSet::kPosInf) == (a > 0);
    return positive ? IntervalSet::kPosInf : IntervalSet::kNegInf;
  }
  __int128 r = static_cast<__int128>(a) * v + b;
  if (r >= IntervalSet::kPosInf) return IntervalSet::kPosInf;
  if (r <= IntervalSet::kNegInf) return IntervalSet::kNegInf;
  return static_cast<Int>(r);
}

Int floor_div128(__int128 a, __int128 b) {
  __int128 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  if (q >= IntervalSet::kPosInf) return IntervalSet::kPosInf - 1;
  if (q <= IntervalSet::kNegInf) return IntervalSet::kNegInf + 1;
  return static_cast<Int>(q);
}

Int ceil_div128(__int128 a, __int128 b) { return -floor_div128(-a, b); }

}  // namespace

IntervalSet IntervalSet::closed(Int lo, Int hi) {
  IntervalSet s;
  if (lo <= hi) s.ranges_.push_back({lo, hi});
  return s;
}

IntervalSet IntervalSet::half_open(Int lo, Int hi) {
  if (hi == kNegInf) return {};
  return closed(lo, hi == kPosInf ? kPosInf : hi - 1);
}

IntervalSet IntervalSet::from_ranges(std::vector<Range> ranges) {
  IntervalSet s;
  s.ranges_ = std::move(ranges);
  s.normalize();
  return s;
}

IntervalSet IntervalSet::from_values(std::vector<Int> values) {
  std::vector<Range> ranges;
  ranges.reserve(values.size());
  for (Int v : values) ranges.push_back({v, v});
  return from_ranges(std::move(ranges));
}

void IntervalSet::normalize() {
  std::sort(ranges_.begin(), ranges_.end(), [](const Range& a, const Range& b) { return a.lo < b.lo; });
  std::vector<Range> out;
  for (const auto& r : ranges_) {
    if (r.lo > r.hi) continue;
    if (!out.empty() && (out.back().hi == kPosInf || r.lo <= out.back().hi + 1)) {
      out.back().hi = std::max(out.back().hi, r.hi);
    } else {
      out.push_back(r);
    }
  }
  ranges_ = std::move(out);
}

bool IntervalSet::is_bounded() const {
  return ranges_.empty() || (ranges_.front().lo != kNegInf && ranges_.back().hi != kPosInf);
}

bool IntervalSet::contains(Int v) const {
  auto it = std::upper_bound(ranges_.begin(), ranges_.end(), v,
                             [](Int x, const Range& r) { return x < r.lo; });
  if (it == ranges_.begin()) return false;
  --it;
  return v <= it->hi;
}

bool IntervalSet::subset_of(const IntervalSet& other) const { return minus(other).is_empty(); }

std::optional<Int> IntervalSet::count() const {
  if (!is_bounded()) return std::nullopt;
  __int128 total = 0;
  for (const auto& r : ranges_) total += static_cast<__int128>(r.hi) - r.lo + 1;
  if (total >= kPosInf) return kPosInf;
  return static_cast<Int>(total);
}

Int IntervalSet::min() const {
  if (ranges_.empty()) throw std::logic_error("min of empty interval set");
  return ranges_.front().lo;
}

Int IntervalSet::max() const {
  if (ranges_.empty()) throw std::logic_error("max of empty interval set");
  return ranges_.back().hi;
}

IntervalSet IntervalSet::unite(const IntervalSet& other) const {
  IntervalSet s;
  s.ranges_ = ranges_;
  s.ranges_.insert(s.ranges_.end(), other.ranges_.begin(), other.ranges_.end());
  s.normalize();
  return s;
}

IntervalSet IntervalSet::intersect(const IntervalSet& other) const {
  IntervalSet s;
  std::size_t i = 0, j = 0;
  while (i < ranges_.size() && j < other.ranges_.size()) {
    Int lo = std::max(ranges_[i].lo, other.ranges_[j].lo);
    Int hi = std::min(ranges_[i].hi, other.ranges_[j].hi);
    if (lo <= hi) s.ranges_.push_back({lo, hi});
    if (ranges_[i].hi < other.ranges_[j].hi) {
      ++i;
    } else {
      ++j;
    }
  }
  return s;
}

IntervalSet IntervalSet::complement() const {
  IntervalSet s;
  Int cursor = kNegInf;
  bool open = true;
  for (const auto& r : ranges_) {
    if (r.lo != kNegInf && open) s.ranges_.push_back({cursor, r.lo - 1});
    if (r.hi == kPosInf) {
      open = false;
      break;
    }
    cursor = r.hi + 1;
  }
  if (open) s.ranges_.push_back({cursor, kPosInf});
  s.normalize();
  return s;
}

IntervalSet IntervalSet::affine_image(Int a, Int b) const {
  IntervalSet s;
  if (ranges_.empty()) return s;
  if (a == 0) return point(b);
  auto n = count();
  if (arith::abs(a) > 1 && n && *n <= kSmallImage) {
    for_each([&](Int v) { s.ranges_.push_back({arith::add(arith::mul(a, v), b), arith::add(arith::mul(a, v), b)}); });
    s.normalize();
    return s;
  }
  for (const auto& r : ranges_) {
    Int x = sat_affine(a, r.lo, b);
    Int y = sat_affine(a, r.hi, b);
    s.ranges_.push_back({std::min(x, y), std::max(x, y)});
  }
  s.normalize();
  return s;
}

IntervalSet IntervalSet::affine_preimage(Int a, Int b) const {
  if (a == 0) return contains(b) ? all() : empty();
  IntervalSet s;
  for (const auto& r : ranges_) {
    // lo <= a*v + b <= hi
    Int lo = kNegInf;
    Int hi = kPosInf;
    auto lower = static_cast<__int128>(r.lo) - b;
    auto upper = static_cast<__int128>(r.hi) - b;
    bool has_lo = r.lo != kNegInf;
    bool has_hi = r.hi != kPosInf;
    if (a > 0) {
      if (has_lo) lo = ceil_div128(lower, a);
      if (has_hi) hi = floor_div128(upper, a);
    } else {
      if (has_hi) lo = ceil_div128(upper, a);
      if (has_lo) hi = floor_div128(lower, a);
    }
    if (lo <= hi) s.ranges_.push_back({lo, hi});
  }
  s.normalize();
  return s;
}

std::string IntervalSet::to_string() const {
  if (ranges_.empty()) return "{}";
  std::string out;
  for (std::size_t i = 0; i < ranges_.size(); ++i) {
    if (i) out += " U ";
    const auto& r = ranges_[i];
    out += r.lo == kNegInf ? "(-inf" : "[" + std::to_string(r.lo);
    out += ",";
    out += r.hi == kPosInf ? "+inf)" : std::to_string(r.hi + 1) + ")";
  }
  return out;
}

}  // namespace loopsum
