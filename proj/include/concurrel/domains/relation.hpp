#pragma once

#include <map>
#include <optional>
#include <vector>

#include "eqconst.hpp"
#include "eqlt.hpp"
#include "octagon.hpp"
#include "tid.hpp"

namespace concurrel {

/* Numeric relation over all variables paired with a non-relational thread id value per variable.
   Int-typed variables keep Top in the id component. Bot if either part is Bot. */
template <class Num>
class Relation {
 public:
  using NumDomain = Num;

  Relation() = default;
  static Relation top(int n) {
    Relation r;
    r.num_ = Num::top(n);
    r.tids_.assign(n, TidAbs::any());
    return r;
  }
  static Relation bot(int n) {
    Relation r = top(n);
    r.num_ = Num::bot(n);
    return r;
  }
  // Env entries for ids are taken from tid_env when present.
  static Relation lift(const std::vector<Interval>& env, const std::map<int, TidAbs>& tid_env = {}) {
    Relation r = top(static_cast<int>(env.size()));
    r.num_ = Num::lift(env);
    for (auto& [v, t] : tid_env) r.tids_[v] = t;
    return r.norm();
  }
  // All variables in vars are 0; others unconstrained.
  static Relation zeros(int n, const std::vector<int>& vars) {
    std::vector<Interval> env(n, Interval::top());
    for (int v : vars) env[v] = Interval::point(0);
    return lift(env);
  }

  int size() const { return num_.size(); }
  bool is_bot() const { return num_.is_bot(); }
  const Num& num() const { return num_; }
  const TidAbs& tid(int x) const { return tids_[x]; }
  Interval bounds(int x) const { return num_.bounds(x); }

  Relation join(const Relation& o) const {
    if (is_bot()) return o;
    if (o.is_bot()) return *this;
    Relation r;
    r.num_ = num_.join(o.num_);
    r.tids_.resize(tids_.size());
    for (size_t v = 0; v < tids_.size(); ++v) r.tids_[v] = tids_[v].join(o.tids_[v]);
    return r;
  }
  Relation widen(const Relation& o) const {
    if (is_bot()) return o;
    if (o.is_bot()) return *this;
    Relation r;
    r.num_ = num_.widen(o.num_);
    r.tids_.resize(tids_.size());
    for (size_t v = 0; v < tids_.size(); ++v) r.tids_[v] = tids_[v].join(o.tids_[v]);
    return r;
  }
  Relation meet(const Relation& o) const {
    if (is_bot() || o.is_bot()) return bot(size());
    Relation r;
    r.num_ = num_.meet(o.num_);
    r.tids_.resize(tids_.size());
    for (size_t v = 0; v < tids_.size(); ++v) r.tids_[v] = tids_[v].meet(o.tids_[v]);
    return r.norm();
  }
  bool leq(const Relation& o) const {
    if (is_bot()) return true;
    if (o.is_bot()) return false;
    for (size_t v = 0; v < tids_.size(); ++v)
      if (!tids_[v].leq(o.tids_[v])) return false;
    return num_.leq(o.num_);
  }
  bool equals(const Relation& o) const {
    if (is_bot() || o.is_bot()) return is_bot() == o.is_bot();
    return tids_ == o.tids_ && num_.equals(o.num_);
  }

  Relation restrict(const std::vector<int>& keep) const {
    if (is_bot()) return *this;
    Relation r;
    r.num_ = num_.restrict(keep);
    r.tids_.assign(tids_.size(), TidAbs::any());
    for (int v : keep) r.tids_[v] = tids_[v];
    return r;
  }
  Relation havoc(int x) const {
    if (is_bot()) return *this;
    Relation r = *this;
    r.num_ = num_.havoc(x);
    r.tids_[x] = TidAbs::any();
    return r;
  }
  Relation assign(int x, const Lin& e) const {
    if (is_bot()) return *this;
    Relation r = *this;
    r.num_ = num_.assign(x, e);
    return r;
  }
  Relation assign_interval(int x, const Interval& v) const {
    if (is_bot()) return *this;
    Relation r = *this;
    r.num_ = num_.assign_interval(x, v);
    return r;
  }
  Relation assign_tid(int x, const TidAbs& t) const {
    if (is_bot()) return *this;
    Relation r = *this;
    r.num_ = num_.havoc(x);
    r.tids_[x] = t;
    return r.norm();
  }
  Relation guard(const Formula& f) const {
    if (is_bot()) return *this;
    Relation r = *this;
    r.num_ = num_.guard(f);
    return r;
  }

  // Point membership; tid_vals supplies abstract ids for id-typed variables that are checked.
  bool contains(const std::vector<i64>& vals, const std::map<int, AbstractTid>& tid_vals = {}) const {
    if (is_bot()) return false;
    for (auto& [v, t] : tid_vals)
      if (!tids_[v].has(t)) return false;
    return num_.contains(vals);
  }

  std::string dump(const std::function<std::string(int)>& name, const PointNamer& pn) const {
    if (is_bot()) return "bot";
    std::string s = num_.dump(name);
    std::string t;
    for (size_t v = 0; v < tids_.size(); ++v)
      if (!tids_[v].is_top()) t += (t.empty() ? "" : "; ") + name(static_cast<int>(v)) + " in " + tids_[v].str(pn);
    if (t.empty()) return s;
    if (s == "top") return t;
    return s + "; " + t;
  }

 private:
  Relation norm() const {
    for (auto& t : tids_)
      if (t.is_bot()) return bot(size());
    return *this;
  }

  Num num_;
  std::vector<TidAbs> tids_;
};

// All non-empty subsets of vars with at most k elements, in lexicographic order of positions.
inline std::vector<std::vector<int>> subsets_upto(const std::vector<int>& vars, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(size_t)> rec = [&](size_t from) {
    if (!cur.empty()) out.push_back(cur);
    if (static_cast<int>(cur.size()) == k) return;
    for (size_t i = from; i < vars.size(); ++i) {
      cur.push_back(vars[i]);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

template <class R>
using Decomposed = std::map<std::vector<int>, R>;

template <class R>
Decomposed<R> decompose(const R& r, const std::vector<int>& vars, int k) {
  Decomposed<R> d;
  for (auto& q : subsets_upto(vars, k)) d.emplace(q, r.restrict(q));
  return d;
}

template <class R>
R recompose(const Decomposed<R>& d, int n) {
  R r = R::top(n);
  for (auto& [q, v] : d) r = r.meet(v);
  return r;
}

}  // namespace concurrel
