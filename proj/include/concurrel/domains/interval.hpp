#pragma once

#include <algorithm>
#include <limits>
#include <string>

#include "../ast.hpp"

namespace concurrel {

// Extended integers with saturating arithmetic. Anything at or beyond the sentinels is infinite.
constexpr i64 kPosInf = std::numeric_limits<i64>::max() / 4;
constexpr i64 kNegInf = -kPosInf;

inline i64 clamp_bound(i64 v) { return v >= kPosInf ? kPosInf : (v <= kNegInf ? kNegInf : v); }

inline i64 sat_add(i64 a, i64 b) {
  if (a >= kPosInf || b >= kPosInf) {
    if (a <= kNegInf || b <= kNegInf) return 0;  // inf - inf only happens on empty ranges
    return kPosInf;
  }
  if (a <= kNegInf || b <= kNegInf) return kNegInf;
  return clamp_bound(a + b);
}

inline i64 sat_mul(i64 a, i64 k) {
  if (k == 0 || a == 0) return 0;
  if (a >= kPosInf) return k > 0 ? kPosInf : kNegInf;
  if (a <= kNegInf) return k > 0 ? kNegInf : kPosInf;
  __int128 r = static_cast<__int128>(a) * k;
  if (r >= kPosInf) return kPosInf;
  if (r <= kNegInf) return kNegInf;
  return static_cast<i64>(r);
}

inline i64 floor_div(i64 a, i64 b) {
  i64 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}
inline i64 ceil_div(i64 a, i64 b) { return -floor_div(-a, b); }

inline std::string bound_str(i64 v) {
  if (v >= kPosInf) return "+oo";
  if (v <= kNegInf) return "-oo";
  return std::to_string(v);
}

struct Interval {
  i64 lo = kNegInf;
  i64 hi = kPosInf;

  static Interval top() { return {}; }
  static Interval bot() { return {1, 0}; }
  static Interval point(i64 c) { return {c, c}; }
  static Interval range(i64 l, i64 h) { return {clamp_bound(l), clamp_bound(h)}; }

  bool is_bot() const { return lo > hi; }
  bool is_top() const { return lo <= kNegInf && hi >= kPosInf; }
  bool is_const() const { return !is_bot() && lo == hi; }
  bool contains(i64 v) const { return lo <= v && v <= hi; }

  Interval join(const Interval& o) const {
    if (is_bot()) return o;
    if (o.is_bot()) return *this;
    return {std::min(lo, o.lo), std::max(hi, o.hi)};
  }
  Interval meet(const Interval& o) const {
    Interval r{std::max(lo, o.lo), std::min(hi, o.hi)};
    return r.is_bot() ? bot() : r;
  }
  bool leq(const Interval& o) const { return is_bot() || (o.lo <= lo && hi <= o.hi); }
  Interval widen(const Interval& o) const {
    if (is_bot()) return o;
    if (o.is_bot()) return *this;
    return {o.lo < lo ? kNegInf : lo, o.hi > hi ? kPosInf : hi};
  }
  Interval operator+(const Interval& o) const {
    if (is_bot() || o.is_bot()) return bot();
    return {sat_add(lo, o.lo), sat_add(hi, o.hi)};
  }
  Interval scale(i64 k) const {
    if (is_bot()) return bot();
    i64 a = sat_mul(lo, k), b = sat_mul(hi, k);
    return {std::min(a, b), std::max(a, b)};
  }
  bool operator==(const Interval& o) const {
    return (is_bot() && o.is_bot()) || (lo == o.lo && hi == o.hi);
  }
  std::string str() const {
    if (is_bot()) return "bot";
    if (is_const()) return std::to_string(lo);
    return "[" + bound_str(lo) + ", " + bound_str(hi) + "]";
  }
};

}  // namespace concurrel
