#pragma once

#include <sstream>
#include <vector>

#include "../cfg.hpp"
#include "interval.hpp"

namespace concurrel {

/* Integer octagons as a DBM over V_{2k} = x_k and V_{2k+1} = -x_k, where m(i,j) bounds V_j - V_i.
   With Unary set every result is cut back to per-variable bounds, which gives the interval domain. */
template <bool Unary>
class OctagonT {
 public:
  static constexpr const char* kName = Unary ? "interval" : "octagon";

  OctagonT() = default;
  static OctagonT top(int n) {
    OctagonT r;
    r.n_ = n;
    r.m_.assign(static_cast<size_t>(4) * n * n, kPosInf);
    for (int i = 0; i < 2 * n; ++i) r.at(i, i) = 0;
    return r;
  }
  static OctagonT bot(int n) {
    OctagonT r = top(n);
    r.bot_ = true;
    return r;
  }
  static OctagonT lift(const std::vector<Interval>& env) {
    int n = static_cast<int>(env.size());
    OctagonT r = top(n);
    for (int v = 0; v < n; ++v) {
      if (env[v].is_bot()) return bot(n);
      r.add_upper(v, env[v].hi);
      r.add_lower(v, env[v].lo);
    }
    return r.finish();
  }

  int size() const { return n_; }
  bool is_bot() const { return bot_; }
  bool is_top() const {
    if (bot_) return false;
    OctagonT c = closure();
    for (int i = 0; i < 2 * n_; ++i)
      for (int j = 0; j < 2 * n_; ++j)
        if (i != j && c.at(i, j) < kPosInf) return false;
    return true;
  }

  OctagonT closure() const {
    if (bot_ || closed_) return *this;
    OctagonT r = *this;
    r.close();
    return r;
  }
  bool closed() const { return closed_; }
  i64 entry(int i, int j) const { return at(i, j); }

  OctagonT join(const OctagonT& o) const {
    if (bot_) return o.closure();
    if (o.bot_) return closure();
    OctagonT a = closure(), b = o.closure();
    if (a.bot_) return b;
    if (b.bot_) return a;
    for (size_t k = 0; k < a.m_.size(); ++k) a.m_[k] = std::max(a.m_[k], b.m_[k]);
    return a;
  }

  OctagonT meet(const OctagonT& o) const {
    if (bot_ || o.bot_) return bot(n_);
    OctagonT a = *this;
    for (size_t k = 0; k < a.m_.size(); ++k) a.m_[k] = std::min(a.m_[k], o.m_[k]);
    a.closed_ = false;
    return a.finish();
  }

  // Keeps a bound of this only if the new value does not exceed it. The result is left unclosed
  // so that the raw entries only grow and ascending chains stabilise.
  OctagonT widen(const OctagonT& o) const {
    if (bot_) return o.closure();
    if (o.bot_) return *this;
    OctagonT b = o.closure();
    if (b.bot_) return *this;
    OctagonT r = *this;
    for (size_t k = 0; k < r.m_.size(); ++k) r.m_[k] = b.m_[k] <= m_[k] ? m_[k] : kPosInf;
    r.closed_ = false;
    return r;
  }

  bool leq(const OctagonT& o) const {
    OctagonT a = closure();
    if (a.bot_) return true;
    if (o.bot_) return o.closure().bot_ ? false : leq(o.closure());
    for (size_t k = 0; k < a.m_.size(); ++k)
      if (a.m_[k] > o.m_[k]) return false;
    return true;
  }

  bool equals(const OctagonT& o) const {
    OctagonT a = closure(), b = o.closure();
    if (a.bot_ || b.bot_) return a.bot_ == b.bot_;
    return a.m_ == b.m_;
  }

  OctagonT restrict(const std::vector<int>& keep) const {
    OctagonT r = closure();
    if (r.bot_) return r;
    std::vector<bool> k(n_, false);
    for (int v : keep) k[v] = true;
    for (int v = 0; v < n_; ++v)
      if (!k[v]) r.forget(v);
    return r;
  }

  OctagonT havoc(int x) const {
    OctagonT r = closure();
    if (r.bot_) return r;
    r.forget(x);
    return r;
  }

  OctagonT assign(int x, const Lin& e) const {
    OctagonT r = closure();
    if (r.bot_) return r;
    if (e.co.empty()) {
      r.forget(x);
      r.add_upper(x, e.c);
      r.add_lower(x, e.c);
      return r.finish();
    }
    if (e.co.size() == 1) {
      auto [y, a] = *e.co.begin();
      if ((a == 1 || a == -1) && y == x) {
        if (a == -1) r.negate(x);
        r.shift(x, e.c);
        return r.finish();
      }
      if (a == 1 || a == -1) {
        r.forget(x);
        // x - a*y <= c and a*y - x <= -c
        r.add_pair(1, x, -a, y, e.c);
        r.add_pair(-1, x, a, y, -e.c);
        return r.finish();
      }
    }
    Interval v = r.eval(e);
    r.forget(x);
    r.add_upper(x, v.hi);
    r.add_lower(x, v.lo);
    return r.finish();
  }

  OctagonT assign_interval(int x, const Interval& v) const {
    if (v.is_bot()) return bot(n_);
    OctagonT r = havoc(x);
    if (r.bot_) return r;
    r.add_upper(x, v.hi);
    r.add_lower(x, v.lo);
    return r.finish();
  }

  OctagonT guard(const Formula& f) const {
    if (bot_) return *this;
    switch (f.kind) {
      case Formula::Kind::True: return *this;
      case Formula::Kind::False: return bot(n_);
      case Formula::Kind::And: {
        OctagonT r = *this;
        for (auto& k : f.kids) r = r.guard(k);
        return r;
      }
      case Formula::Kind::Or: {
        OctagonT r = bot(n_);
        for (auto& k : f.kids) r = r.join(guard(k));
        return r;
      }
      case Formula::Kind::Atom: {
        const Atom& at = f.atom;
        if (at.rel == Atom::Rel::Le) return guard_le(at.e);
        if (at.rel == Atom::Rel::Eq) return guard_le(at.e).guard_le(at.e.scaled(-1));
        return guard_ne(at.e);
      }
    }
    return *this;
  }

  Interval bounds(int x) const {
    OctagonT r = closure();
    if (r.bot_) return Interval::bot();
    i64 up = r.at(2 * x + 1, 2 * x), dn = r.at(2 * x, 2 * x + 1);
    return {dn >= kPosInf ? kNegInf : -floor_div(dn, 2), up >= kPosInf ? kPosInf : floor_div(up, 2)};
  }

  Interval eval(const Lin& e) const {
    if (e.co.size() == 2) {
      auto [x, a] = *e.co.begin();
      auto [y, b] = *e.co.rbegin();
      if ((a == 1 || a == -1) && (b == 1 || b == -1)) {
        OctagonT r = closure();
        if (r.bot_) return Interval::bot();
        i64 up = r.at(idx(-b, y), idx(a, x)), dn = r.at(idx(b, y), idx(-a, x));
        Interval pair{dn >= kPosInf ? kNegInf : sat_add(-dn, e.c), up >= kPosInf ? kPosInf : sat_add(up, e.c)};
        Interval s = Interval::point(e.c);
        for (auto& [v, k] : e.co) s = s + r.bounds(v).scale(k);
        return s.meet(pair);
      }
    }
    Interval s = Interval::point(e.c);
    for (auto& [v, a] : e.co) s = s + bounds(v).scale(a);
    return s;
  }

  bool contains(const std::vector<i64>& vals) const {
    if (bot_) return false;
    auto V = [&](int i) { return (i & 1) ? -vals[i / 2] : vals[i / 2]; };
    for (int i = 0; i < 2 * n_; ++i)
      for (int j = 0; j < 2 * n_; ++j)
        if (at(i, j) < kPosInf && V(j) - V(i) > at(i, j)) return false;
    return true;
  }

  std::string dump(const std::function<std::string(int)>& name) const {
    OctagonT r = closure();
    if (r.bot_) return "bot";
    std::vector<std::string> parts;
    std::vector<Interval> b(n_);
    for (int v = 0; v < n_; ++v) b[v] = r.bounds(v);
    for (int v = 0; v < n_; ++v) {
      if (b[v].is_top()) continue;
      if (b[v].is_const()) parts.push_back(name(v) + " = " + std::to_string(b[v].lo));
      else if (b[v].lo <= kNegInf) parts.push_back(name(v) + " <= " + bound_str(b[v].hi));
      else if (b[v].hi >= kPosInf) parts.push_back(name(v) + " >= " + bound_str(b[v].lo));
      else parts.push_back(bound_str(b[v].lo) + " <= " + name(v) + " <= " + bound_str(b[v].hi));
    }
    for (int x = 0; x < n_; ++x)
      for (int y = x + 1; y < n_; ++y)
        for (int s : {-1, 1}) {
          // x + s*y in [lo, hi]
          i64 hi = r.at(idx(-s, y), idx(1, x));
          i64 nlo = r.at(idx(s, y), idx(-1, x));
          Interval implied = b[x] + b[y].scale(s);
          bool show_hi = hi < kPosInf && hi < implied.hi;
          bool show_lo = nlo < kPosInf && -nlo > implied.lo;
          if (!show_hi && !show_lo) continue;
          std::string t = name(x) + (s > 0 ? " + " : " - ") + name(y);
          if (show_hi && show_lo && hi == -nlo) parts.push_back(t + " = " + std::to_string(hi));
          else if (show_hi && show_lo)
            parts.push_back(std::to_string(-nlo) + " <= " + t + " <= " + std::to_string(hi));
          else if (show_hi) parts.push_back(t + " <= " + std::to_string(hi));
          else parts.push_back(t + " >= " + std::to_string(-nlo));
        }
    if (parts.empty()) return "top";
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) out += (i ? "; " : "") + parts[i];
    return out;
  }

  // Strong integer closure; exposed for tests.
  void close() {
    if (bot_ || closed_) return;
    int N = 2 * n_;
    for (int k = 0; k < N; ++k)
      for (int i = 0; i < N; ++i) {
        i64 ik = at(i, k);
        if (ik >= kPosInf) continue;
        for (int j = 0; j < N; ++j) {
          i64 kj = at(k, j);
          if (kj >= kPosInf) continue;
          i64 s = ik + kj;
          if (s < at(i, j)) at(i, j) = clamp_bound(s);
        }
      }
    for (int i = 0; i < N; ++i)
      if (at(i, i) < 0) return set_bot();
    for (int i = 0; i < N; ++i) {
      i64& b = at(i, i ^ 1);
      if (b < kPosInf) b = 2 * floor_div(b, 2);
    }
    for (int i = 0; i < N; i += 2)
      if (at(i, i + 1) < kPosInf && at(i + 1, i) < kPosInf && at(i, i + 1) + at(i + 1, i) < 0) return set_bot();
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        i64 a = at(i, i ^ 1), b = at(j ^ 1, j);
        if (a < kPosInf && b < kPosInf) at(i, j) = std::min(at(i, j), (a + b) / 2);
      }
    for (int i = 0; i < N; ++i) {
      if (at(i, i) < 0) return set_bot();
      at(i, i) = 0;
    }
    closed_ = true;
  }

 private:
  static int idx(int sign, int v) { return sign > 0 ? 2 * v : 2 * v + 1; }
  i64& at(int i, int j) { return m_[static_cast<size_t>(i) * 2 * n_ + j]; }
  i64 at(int i, int j) const { return m_[static_cast<size_t>(i) * 2 * n_ + j]; }

  void set_bot() {
    bot_ = true;
    closed_ = true;
  }
  // V_j - V_i <= c together with its coherent twin.
  void tighten(int i, int j, i64 c) {
    c = clamp_bound(c);
    if (c >= kPosInf) return;
    if (c < at(i, j)) at(i, j) = c;
    if (c < at(j ^ 1, i ^ 1)) at(j ^ 1, i ^ 1) = c;
    closed_ = false;
  }
  void add_upper(int x, i64 c) {
    if (c < kPosInf) tighten(2 * x + 1, 2 * x, sat_mul(c, 2));
  }
  void add_lower(int x, i64 c) {
    if (c > kNegInf) tighten(2 * x, 2 * x + 1, sat_mul(-c, 2));
  }
  // s1*x + s2*y <= c
  void add_pair(int s1, int x, int s2, int y, i64 c) { tighten(idx(-s2, y), idx(s1, x), c); }

  void forget(int x) {
    int N = 2 * n_;
    for (int k = 0; k < N; ++k)
      for (int i : {2 * x, 2 * x + 1}) {
        at(i, k) = kPosInf;
        at(k, i) = kPosInf;
      }
    at(2 * x, 2 * x) = 0;
    at(2 * x + 1, 2 * x + 1) = 0;
  }
  // x := x + c on a closed matrix.
  void shift(int x, i64 c) {
    if (c == 0) return;
    int N = 2 * n_;
    auto delta = [&](int i) -> i64 { return i == 2 * x ? c : (i == 2 * x + 1 ? -c : 0); };
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        i64 d = delta(j) - delta(i);
        if (d != 0 && at(i, j) < kPosInf) at(i, j) = clamp_bound(at(i, j) + d);
      }
  }
  // x := -x, swapping the roles of V_{2x} and V_{2x+1}.
  void negate(int x) {
    int N = 2 * n_;
    int a = 2 * x, b = 2 * x + 1;
    for (int k = 0; k < N; ++k) std::swap(at(a, k), at(b, k));
    for (int k = 0; k < N; ++k) std::swap(at(k, a), at(k, b));
  }

  OctagonT finish() {
    close();
    if (Unary && !bot_) {
      for (int i = 0; i < 2 * n_; ++i)
        for (int j = 0; j < 2 * n_; ++j)
          if (i / 2 != j / 2) at(i, j) = kPosInf;
    }
    return *this;
  }

  OctagonT guard_le(const Lin& e) const {
    OctagonT r = closure();
    if (r.bot_) return r;
    if (e.co.empty()) return e.c <= 0 ? r : bot(n_);
    i64 rhs = -e.c;
    if (e.co.size() == 1) {
      auto [v, a] = *e.co.begin();
      if (a > 0) r.add_upper(v, floor_div(rhs, a));
      else r.add_lower(v, ceil_div(rhs, a));
      return r.finish();
    }
    if (e.co.size() == 2) {
      auto it = e.co.begin();
      auto [x, a] = *it++;
      auto [y, b] = *it;
      if ((a == 1 || a == -1) && (b == 1 || b == -1)) {
        r.add_pair(static_cast<int>(a), x, static_cast<int>(b), y, rhs);
        return r.finish();
      }
    }
    for (auto& [v, a] : e.co) {
      Lin rest = e;
      rest.co.erase(v);
      i64 lo_rest = r.eval(rest).lo;  // includes e.c
      if (lo_rest <= kNegInf) continue;
      i64 bound = -lo_rest;  // a*v <= bound
      if (a > 0) r.add_upper(v, floor_div(bound, a));
      else r.add_lower(v, ceil_div(bound, a));
    }
    return r.finish();
  }

  OctagonT guard_ne(const Lin& e) const {
    OctagonT r = closure();
    if (r.bot_) return r;
    Interval v = r.eval(e);
    if (v.is_const() && v.lo == 0) return bot(n_);
    if (e.co.empty()) return r;
    auto single_unit = e.co.size() == 1 && (e.co.begin()->second == 1 || e.co.begin()->second == -1);
    auto pair_unit = e.co.size() == 2;
    if (pair_unit)
      for (auto& [w, a] : e.co)
        if (a != 1 && a != -1) pair_unit = false;
    if (!single_unit && !pair_unit) return r;
    // The form t = e - c is octagonal; trim a bound of t that sits exactly at -c.
    Lin t = e;
    t.c = 0;
    i64 hi, lo;
    if (single_unit) {
      auto [x, a] = *t.co.begin();
      Interval b = r.bounds(x).scale(a);
      hi = b.hi;
      lo = b.lo;
    } else {
      auto it = t.co.begin();
      auto [x, a] = *it++;
      auto [y, b] = *it;
      hi = r.at(idx(-static_cast<int>(b), y), idx(static_cast<int>(a), x));
      i64 nhi = r.at(idx(static_cast<int>(b), y), idx(-static_cast<int>(a), x));
      lo = nhi >= kPosInf ? kNegInf : -nhi;
    }
    i64 k = -e.c;  // t != k
    if (hi == k) return r.guard_le(t.add(Lin::constant(-(k - 1))));
    if (lo == k) return r.guard_le(t.scaled(-1).add(Lin::constant(k + 1)));
    return r;
  }

  int n_ = 0;
  bool bot_ = false;
  bool closed_ = true;
  std::vector<i64> m_;
};

using Octagon = OctagonT<false>;
using IntervalDomain = OctagonT<true>;

}  // namespace concurrel
