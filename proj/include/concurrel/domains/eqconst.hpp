#pragma once

#include <numeric>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "../cfg.hpp"
#include "interval.hpp"

namespace concurrel {

/* Conjunctions of x = y and x = c. Canonical form: each class is represented by its
   smallest member, constants are stored on every member, and classes sharing a constant are merged. */
class EqConst {
 public:
  static constexpr const char* kName = "eqconst";

  EqConst() = default;
  static EqConst top(int n) {
    EqConst r;
    r.n_ = n;
    r.rep_.resize(n);
    std::iota(r.rep_.begin(), r.rep_.end(), 0);
    r.cst_.assign(n, std::nullopt);
    return r;
  }
  static EqConst bot(int n) {
    EqConst r = top(n);
    r.bot_ = true;
    return r;
  }
  static EqConst lift(const std::vector<Interval>& env) {
    std::vector<std::pair<int, i64>> cs;
    for (int v = 0; v < static_cast<int>(env.size()); ++v) {
      if (env[v].is_bot()) return bot(static_cast<int>(env.size()));
      if (env[v].is_const()) cs.push_back({v, env[v].lo});
    }
    return from_atoms(static_cast<int>(env.size()), {}, cs);
  }

  int size() const { return n_; }
  bool is_bot() const { return bot_; }
  bool is_top() const {
    if (bot_) return false;
    for (int v = 0; v < n_; ++v)
      if (rep_[v] != v || cst_[v]) return false;
    return true;
  }
  int rep(int v) const { return rep_[v]; }
  std::optional<i64> constant(int v) const { return cst_[v]; }

  EqConst meet(const EqConst& o) const {
    if (bot_ || o.bot_) return bot(n_);
    auto [e1, c1] = atoms();
    auto [e2, c2] = o.atoms();
    e1.insert(e1.end(), e2.begin(), e2.end());
    c1.insert(c1.end(), c2.begin(), c2.end());
    return from_atoms(n_, e1, c1);
  }

  EqConst join(const EqConst& o) const {
    if (bot_) return o;
    if (o.bot_) return *this;
    std::map<std::pair<int, int>, int> first;
    std::vector<std::pair<int, int>> eqs;
    std::vector<std::pair<int, i64>> cs;
    for (int v = 0; v < n_; ++v) {
      auto key = std::make_pair(rep_[v], o.rep_[v]);
      auto [it, fresh] = first.emplace(key, v);
      if (!fresh) eqs.push_back({it->second, v});
      if (cst_[v] && o.cst_[v] && *cst_[v] == *o.cst_[v]) cs.push_back({v, *cst_[v]});
    }
    return from_atoms(n_, eqs, cs);
  }

  EqConst widen(const EqConst& o) const { return join(o); }

  bool leq(const EqConst& o) const {
    if (bot_) return true;
    if (o.bot_) return false;
    for (int v = 0; v < n_; ++v) {
      if (rep_[v] != rep_[o.rep_[v]]) return false;
      if (o.cst_[v] && (!cst_[v] || *cst_[v] != *o.cst_[v])) return false;
    }
    return true;
  }

  bool equals(const EqConst& o) const {
    if (bot_ || o.bot_) return bot_ == o.bot_;
    return rep_ == o.rep_ && cst_ == o.cst_;
  }

  EqConst restrict(const std::vector<int>& keep) const {
    if (bot_) return *this;
    std::vector<bool> k(n_, false);
    for (int v : keep) k[v] = true;
    std::map<int, int> first_kept;
    std::vector<std::pair<int, int>> eqs;
    std::vector<std::pair<int, i64>> cs;
    for (int v = 0; v < n_; ++v) {
      if (!k[v]) continue;
      auto [it, fresh] = first_kept.emplace(rep_[v], v);
      if (!fresh) eqs.push_back({it->second, v});
      if (cst_[v]) cs.push_back({v, *cst_[v]});
    }
    return from_atoms(n_, eqs, cs);
  }

  EqConst havoc(int x) const {
    std::vector<int> keep;
    for (int v = 0; v < n_; ++v)
      if (v != x) keep.push_back(v);
    return restrict(keep);
  }

  EqConst assign(int x, const Lin& e) const {
    if (bot_) return *this;
    if (e.c == 0 && e.co.size() == 1 && e.co.begin()->second == 1) {
      int y = e.co.begin()->first;
      if (y == x) return *this;
      return havoc(x).meet(from_atoms(n_, {{x, y}}, {}));
    }
    auto [k, rest] = substitute(e);
    if (rest.empty()) return havoc(x).meet(from_atoms(n_, {}, {{x, k}}));
    return havoc(x);
  }

  EqConst assign_interval(int x, const Interval& v) const {
    if (v.is_bot()) return bot(n_);
    EqConst r = havoc(x);
    if (v.is_const()) r = r.meet(from_atoms(n_, {}, {{x, v.lo}}));
    return r;
  }

  EqConst guard(const Formula& f) const {
    if (bot_) return *this;
    switch (f.kind) {
      case Formula::Kind::True: return *this;
      case Formula::Kind::False: return bot(n_);
      case Formula::Kind::And: {
        EqConst r = *this;
        for (auto& k : f.kids) r = r.guard(k);
        return r;
      }
      case Formula::Kind::Or: {
        EqConst r = bot(n_);
        for (auto& k : f.kids) r = r.join(guard(k));
        return r;
      }
      case Formula::Kind::Atom: return guard_atom(f.atom);
    }
    return *this;
  }

  Interval bounds(int x) const {
    if (bot_) return Interval::bot();
    return cst_[x] ? Interval::point(*cst_[x]) : Interval::top();
  }

  bool contains(const std::vector<i64>& vals) const {
    if (bot_) return false;
    for (int v = 0; v < n_; ++v) {
      if (vals[v] != vals[rep_[v]]) return false;
      if (cst_[v] && *cst_[v] != vals[v]) return false;
    }
    return true;
  }

  std::string dump(const std::function<std::string(int)>& name) const {
    if (bot_) return "bot";
    std::vector<std::string> parts;
    for (int v = 0; v < n_; ++v) {
      if (rep_[v] != v) continue;
      std::string s = name(v);
      int members = 1;
      for (int w = v + 1; w < n_; ++w)
        if (rep_[w] == v) {
          s += " = " + name(w);
          ++members;
        }
      if (cst_[v]) s += " = " + std::to_string(*cst_[v]);
      else if (members == 1) continue;
      parts.push_back(s);
    }
    if (parts.empty()) return "top";
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) out += (i ? "; " : "") + parts[i];
    return out;
  }

  static EqConst from_atoms(int n, const std::vector<std::pair<int, int>>& eqs,
                            const std::vector<std::pair<int, i64>>& cs) {
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int v) { return parent[v] == v ? v : parent[v] = find(parent[v]); };
    auto unite = [&](int a, int b) {
      a = find(a);
      b = find(b);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    };
    for (auto& [a, b] : eqs) unite(a, b);
    std::map<int, i64> class_const;
    for (auto& [v, c] : cs) {
      int r = find(v);
      auto it = class_const.find(r);
      if (it != class_const.end() && it->second != c) return bot(n);
      class_const[r] = c;
    }
    std::map<i64, int> by_const;
    for (auto& [r, c] : std::map<int, i64>(class_const)) {
      auto it = by_const.find(c);
      if (it == by_const.end()) by_const[c] = r;
      else unite(it->second, r);
    }
    EqConst out = top(n);
    for (int v = 0; v < n; ++v) out.rep_[v] = find(v);
    // find() roots are class minima because unite always keeps the smaller root
    for (auto& [c, r] : by_const) {
      int root = find(r);
      for (int v = 0; v < n; ++v)
        if (out.rep_[v] == root) out.cst_[v] = c;
    }
    return out;
  }

 private:
  std::pair<std::vector<std::pair<int, int>>, std::vector<std::pair<int, i64>>> atoms() const {
    std::vector<std::pair<int, int>> eqs;
    std::vector<std::pair<int, i64>> cs;
    for (int v = 0; v < n_; ++v) {
      if (rep_[v] != v) eqs.push_back({rep_[v], v});
      if (cst_[v]) cs.push_back({v, *cst_[v]});
    }
    return {eqs, cs};
  }

  // Rewrites e over class representatives with known constants folded in.
  std::pair<i64, std::map<int, i64>> substitute(const Lin& e) const {
    i64 k = e.c;
    std::map<int, i64> rest;
    for (auto& [v, a] : e.co) {
      if (cst_[v]) {
        k += a * *cst_[v];
        continue;
      }
      i64 n = rest[rep_[v]] + a;
      if (n == 0) rest.erase(rep_[v]);
      else rest[rep_[v]] = n;
    }
    return {k, rest};
  }

  EqConst guard_atom(const Atom& at) const {
    auto [k, rest] = substitute(at.e);
    if (rest.empty()) {
      bool ok = at.rel == Atom::Rel::Le ? k <= 0 : at.rel == Atom::Rel::Eq ? k == 0 : k != 0;
      return ok ? *this : bot(n_);
    }
    if (at.rel != Atom::Rel::Eq) return *this;
    if (rest.size() == 1) {
      auto [v, a] = *rest.begin();
      if (k % a != 0) return bot(n_);
      return meet(from_atoms(n_, {}, {{v, -k / a}}));
    }
    if (rest.size() == 2 && k == 0) {
      auto it = rest.begin();
      auto [v1, a1] = *it++;
      auto [v2, a2] = *it;
      if (a1 == -a2) return meet(from_atoms(n_, {{v1, v2}}, {}));
    }
    return *this;
  }

  int n_ = 0;
  bool bot_ = false;
  std::vector<int> rep_;
  std::vector<std::optional<i64>> cst_;
};

}  // namespace concurrel
