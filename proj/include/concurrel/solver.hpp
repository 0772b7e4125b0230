#pragma once

#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace concurrel {

struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverOptions {
  long step_budget = 1000000;
  int widen_delay = 3;
  bool narrowing = false;

  // CONCURREL_STEP_BUDGET overrides the default budget.
  static SolverOptions from_env() {
    SolverOptions o;
    if (const char* s = std::getenv("CONCURREL_STEP_BUDGET")) {
      try {
        o.step_budget = std::stol(s);
      } catch (...) {
      }
    }
    return o;
  }
};

struct SolverStats {
  long evaluations = 0;
  long unknowns = 0;
};

/* Read view handed to right-hand sides. Reads are recorded as dependencies; emissions are
   joined into their targets after the evaluation finishes. */
template <class K, class V, class F>
class SolverCtx {
 public:
  SolverCtx(const std::map<K, V>& vals, const std::map<F, std::set<K>>& members)
      : vals_(vals), members_(members) {}

  const V* get(const K& k) {
    reads.insert(k);
    auto it = vals_.find(k);
    return it == vals_.end() ? nullptr : &it->second;
  }
  std::vector<K> family(const F& f) {
    families.insert(f);
    auto it = members_.find(f);
    if (it == members_.end()) return {};
    return {it->second.begin(), it->second.end()};
  }
  void emit(const K& k, V v) { emitted.emplace_back(k, std::move(v)); }

  std::set<K> reads;
  std::set<F> families;
  std::vector<std::pair<K, V>> emitted;

 private:
  const std::map<K, V>& vals_;
  const std::map<F, std::set<K>>& members_;
};

/* Push-style worklist solver for side-effecting systems. Evaluating an unknown pushes
   contributions to successors and side effects alike; all are accumulated by join, or by
   widening at widening points after widen_delay updates. The worklist is ordered by key. */
template <class Sys>
class Solver {
 public:
  using K = typename Sys::Key;
  using V = typename Sys::Value;
  using F = typename Sys::Family;
  using Ctx = SolverCtx<K, V, F>;

  Solver(Sys& sys, SolverOptions opts) : sys_(sys), opts_(opts) {}

  void seed(const K& k, const V& v) { update(k, v); }

  void solve() {
    while (!work_.empty()) {
      K k = *work_.begin();
      work_.erase(work_.begin());
      evaluate(k);
    }
    if (opts_.narrowing) narrow();
  }

  const std::map<K, V>& values() const { return values_; }
  SolverStats stats() const { return {evaluations_, static_cast<long>(values_.size())}; }

  std::set<K> dependencies(const K& k) const {
    auto it = deps_.find(k);
    return it == deps_.end() ? std::set<K>{} : it->second;
  }

  // Re-evaluates every unknown and reports contributions not covered by the stored values.
  std::vector<std::string> verify() const {
    std::vector<std::string> bad;
    for (auto& [k, v] : values_) {
      Ctx ctx(values_, members_);
      sys_.evaluate(k, v, ctx);
      for (auto& [t, c] : ctx.emitted) {
        auto it = values_.find(t);
        if (c.is_bot()) continue;
        if (it == values_.end() || !c.leq(it->second))
          bad.push_back(sys_.key_str(k) + " -> " + sys_.key_str(t) + " not covered");
      }
    }
    return bad;
  }

  std::string dump() const {
    std::string out;
    for (auto& [k, v] : values_) out += sys_.key_str(k) + " := " + sys_.value_str(v) + "\n";
    return out;
  }

 private:
  void evaluate(const K& k) {
    if (++evaluations_ > opts_.step_budget)
      throw BudgetExceeded("solver step budget of " + std::to_string(opts_.step_budget) + " evaluations exceeded");
    Ctx ctx(values_, members_);
    sys_.evaluate(k, values_.at(k), ctx);
    for (auto& d : deps_[k]) readers_[d].erase(k);
    deps_[k] = ctx.reads;
    for (auto& d : ctx.reads) readers_[d].insert(k);
    for (auto& f : ctx.families) family_readers_[f].insert(k);
    for (auto& [t, v] : ctx.emitted) update(t, v);
  }

  void update(const K& k, const V& v) {
    auto it = values_.find(k);
    if (it == values_.end()) {
      values_.emplace(k, v);
      if (auto f = sys_.family(k)) {
        members_[*f].insert(k);
        for (auto& r : family_readers_[*f]) work_.insert(r);
      }
      changed(k);
      return;
    }
    if (v.leq(it->second)) return;
    int n = ++updates_[k];
    if (sys_.widening_point(k) && n > opts_.widen_delay) it->second = it->second.widen(v);
    else it->second = it->second.join(v);
    changed(k);
  }

  void changed(const K& k) {
    work_.insert(k);
    auto it = readers_.find(k);
    if (it != readers_.end()) work_.insert(it->second.begin(), it->second.end());
  }

  // One Jacobi pass: every unknown takes the join of its current contributions when that is smaller.
  void narrow() {
    std::map<K, V> fresh;
    for (auto& [k, v] : values_) {
      Ctx ctx(values_, members_);
      sys_.evaluate(k, v, ctx);
      for (auto& [t, c] : ctx.emitted) {
        auto it = fresh.find(t);
        if (it == fresh.end()) fresh.emplace(t, c);
        else it->second = it->second.join(c);
      }
    }
    for (auto& [k, v] : values_) {
      auto it = fresh.find(k);
      if (it != fresh.end() && it->second.leq(v)) v = it->second;
    }
  }

  Sys& sys_;
  SolverOptions opts_;
  std::map<K, V> values_;
  std::map<K, int> updates_;
  std::map<K, std::set<K>> deps_;
  std::map<K, std::set<K>> readers_;
  std::map<F, std::set<K>> members_;
  std::map<F, std::set<K>> family_readers_;
  std::set<K> work_;
  long evaluations_ = 0;
};

}  // namespace concurrel
