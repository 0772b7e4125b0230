#pragma once

#include <vector>

#include "eqconst.hpp"

namespace concurrel {

/* Conjunctions of x = y, x = c and x < y, kept closed under equality substitution,
   constant comparison and transitivity. A strict cycle is Bot. */
class EqLt {
 public:
  static constexpr const char* kName = "eqlt";

  EqLt() = default;
  static EqLt top(int n) {
    EqLt r;
    r.eq_ = EqConst::top(n);
    r.lt_.assign(static_cast<size_t>(n) * n, 0);
    return r;
  }
  static EqLt bot(int n) {
    EqLt r = top(n);
    r.eq_ = EqConst::bot(n);
    return r;
  }
  static EqLt lift(const std::vector<Interval>& env) {
    EqLt r = top(static_cast<int>(env.size()));
    r.eq_ = EqConst::lift(env);
    return r.closed();
  }

  int size() const { return eq_.size(); }
  bool is_bot() const { return eq_.is_bot(); }
  bool less(int x, int y) const { return !is_bot() && lt(x, y); }
  const EqConst& equalities() const { return eq_; }

  EqLt meet(const EqLt& o) const {
    if (is_bot() || o.is_bot()) return bot(size());
    EqLt r = *this;
    r.eq_ = eq_.meet(o.eq_);
    for (size_t k = 0; k < lt_.size(); ++k) r.lt_[k] |= o.lt_[k];
    return r.closed();
  }
  EqLt join(const EqLt& o) const {
    if (is_bot()) return o;
    if (o.is_bot()) return *this;
    EqLt r = *this;
    r.eq_ = eq_.join(o.eq_);
    for (size_t k = 0; k < lt_.size(); ++k) r.lt_[k] &= o.lt_[k];
    return r.closed();
  }
  EqLt widen(const EqLt& o) const { return join(o); }
  bool leq(const EqLt& o) const {
    if (is_bot()) return true;
    if (o.is_bot()) return false;
    if (!eq_.leq(o.eq_)) return false;
    for (size_t k = 0; k < lt_.size(); ++k)
      if (o.lt_[k] && !lt_[k]) return false;
    return true;
  }
  bool equals(const EqLt& o) const {
    if (is_bot() || o.is_bot()) return is_bot() == o.is_bot();
    return eq_.equals(o.eq_) && lt_ == o.lt_;
  }

  EqLt restrict(const std::vector<int>& keep) const {
    if (is_bot()) return *this;
    int n = size();
    std::vector<bool> k(n, false);
    for (int v : keep) k[v] = true;
    EqLt r = *this;
    r.eq_ = eq_.restrict(keep);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        if (!k[x] || !k[y]) r.lt(x, y) = 0;
    return r;
  }
  EqLt havoc(int x) const {
    std::vector<int> keep;
    for (int v = 0; v < size(); ++v)
      if (v != x) keep.push_back(v);
    return restrict(keep);
  }

  EqLt assign(int x, const Lin& e) const {
    if (is_bot()) return *this;
    int n = size();
    if (e.co.size() == 1 && e.co.begin()->second == 1 && e.co.begin()->first == x) {
      i64 c = e.c;
      if (c == 0) return *this;
      EqLt r = havoc(x);
      for (int z = 0; z < n; ++z) {
        if (z == x) continue;
        bool below = lt(z, x) || eq_.rep(z) == eq_.rep(x);
        bool above = lt(x, z) || eq_.rep(z) == eq_.rep(x);
        if (c > 0 && below) r.lt(z, x) = 1;
        if (c < 0 && above) r.lt(x, z) = 1;
      }
      if (auto k = eq_.constant(x)) r.eq_ = r.eq_.meet(EqConst::from_atoms(n, {}, {{x, *k + c}}));
      return r.closed();
    }
    EqLt r = *this;
    r.eq_ = eq_.assign(x, e);
    for (int z = 0; z < n; ++z) r.lt(x, z) = r.lt(z, x) = 0;
    if (e.co.size() == 1 && e.co.begin()->second == 1) {
      int y = e.co.begin()->first;
      if (e.c > 0) r.lt(y, x) = 1;
      if (e.c < 0) r.lt(x, y) = 1;
    }
    return r.closed();
  }

  EqLt assign_interval(int x, const Interval& v) const {
    if (v.is_bot()) return bot(size());
    EqLt r = havoc(x);
    r.eq_ = r.eq_.assign_interval(x, v);
    return r.closed();
  }

  EqLt guard(const Formula& f) const {
    if (is_bot()) return *this;
    switch (f.kind) {
      case Formula::Kind::True: return *this;
      case Formula::Kind::False: return bot(size());
      case Formula::Kind::And: {
        EqLt r = *this;
        for (auto& k : f.kids) r = r.guard(k);
        return r;
      }
      case Formula::Kind::Or: {
        EqLt r = bot(size());
        for (auto& k : f.kids) r = r.join(guard(k));
        return r;
      }
      case Formula::Kind::Atom: break;
    }
    const Atom& at = f.atom;
    EqLt r = *this;
    r.eq_ = eq_.guard(f);
    if (r.eq_.is_bot()) return r;
    // Strict order atoms from x - y + c <= 0 with c >= 1, or x - y + c == 0 with c != 0.
    if (at.e.co.size() == 2) {
      auto it = at.e.co.begin();
      auto [p, a] = *it++;
      auto [q, b] = *it;
      if (a == -b && (a == 1 || a == -1)) {
        int x = a == 1 ? p : q, y = a == 1 ? q : p;  // form x - y + c
        i64 c = at.e.c;
        if (at.rel == Atom::Rel::Le && c >= 1) r.lt(x, y) = 1;
        if (at.rel == Atom::Rel::Eq && c > 0) r.lt(x, y) = 1;
        if (at.rel == Atom::Rel::Eq && c < 0) r.lt(y, x) = 1;
        if (at.rel == Atom::Rel::Le && c == 0 && lt(y, x)) return bot(size());
      }
    }
    return r.closed();
  }

  Interval bounds(int x) const { return eq_.bounds(x); }

  bool contains(const std::vector<i64>& vals) const {
    if (!eq_.contains(vals)) return false;
    int n = size();
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        if (lt(x, y) && !(vals[x] < vals[y])) return false;
    return true;
  }

  std::string dump(const std::function<std::string(int)>& name) const {
    if (is_bot()) return "bot";
    std::string s = eq_.dump(name);
    std::vector<std::string> parts;
    if (s != "top") parts.push_back(s);
    int n = size();
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) {
        if (!lt(x, y) || eq_.rep(x) != x || eq_.rep(y) != y) continue;
        if (eq_.constant(x) && eq_.constant(y)) continue;
        parts.push_back(name(x) + " < " + name(y));
      }
    if (parts.empty()) return "top";
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) out += (i ? "; " : "") + parts[i];
    return out;
  }

 private:
  char& lt(int x, int y) { return lt_[static_cast<size_t>(x) * size() + y]; }
  char lt(int x, int y) const { return lt_[static_cast<size_t>(x) * size() + y]; }

  EqLt closed() const {
    if (is_bot()) return bot(size());
    EqLt r = *this;
    int n = size();
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) {
        auto cx = eq_.constant(x), cy = eq_.constant(y);
        if (cx && cy && *cx < *cy) r.lt(x, y) = 1;
      }
    // Lift every atom to the whole equality classes.
    std::vector<char> cls(static_cast<size_t>(n) * n, 0);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        if (r.lt(x, y)) cls[static_cast<size_t>(eq_.rep(x)) * n + eq_.rep(y)] = 1;
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        if (cls[static_cast<size_t>(i) * n + k])
          for (int j = 0; j < n; ++j)
            if (cls[static_cast<size_t>(k) * n + j]) cls[static_cast<size_t>(i) * n + j] = 1;
    for (int x = 0; x < n; ++x) {
      if (cls[static_cast<size_t>(x) * n + x]) return bot(n);
      for (int y = 0; y < n; ++y) {
        r.lt(x, y) = cls[static_cast<size_t>(eq_.rep(x)) * n + eq_.rep(y)];
        auto cx = eq_.constant(x), cy = eq_.constant(y);
        if (r.lt(x, y) && cx && cy && *cx >= *cy) return bot(n);
      }
    }
    return r;
  }

  EqConst eq_;
  std::vector<char> lt_;
};

}  // namespace concurrel
