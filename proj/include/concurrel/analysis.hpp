#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cfg.hpp"
#include "digests.hpp"
#include "domains/relation.hpp"
#include "solver.hpp"

namespace concurrel {

enum class Mode { Base, Tids, Clusters };
enum class ClusterMode { Monolithic, LeK, All };
enum class DomainKind { EqConst, Octagon, Interval, EqLt };

// Deliberate right-hand-side defects, used only to check that the oracle notices them.
enum class Mutation { None, DropUnlockPublish, KeepGlobalsAfterUnlock, AssignDropsConstant, AccAlwaysTrue, JoinIgnoresReturn };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AnalysisConfig {
  DomainKind domain = DomainKind::Octagon;
  Mode mode = Mode::Base;
  ClusterMode clusters = ClusterMode::LeK;
  int cluster_size = 2;
  std::map<std::string, std::vector<std::vector<std::string>>> explicit_clusters;  // mutex -> clusters
  DigestSpec digest;
  ProtectionSource protections = ProtectionSource::Declared;
  bool exclude_ancestor_writes = false;
  bool collapse_keys = true;
  SolverOptions solver = SolverOptions::from_env();
  Mutation mutation = Mutation::None;

  bool improved() const { return mode != Mode::Base; }
  bool collapse() const { return collapse_keys && !exclude_ancestor_writes; }

  static AnalysisConfig preset(const std::string& name) {
    AnalysisConfig c;
    if (name == "interval") {
      c.domain = DomainKind::Interval;
      c.clusters = ClusterMode::LeK;
      c.cluster_size = 1;
    } else if (name == "octagon") {
      c.domain = DomainKind::Octagon;
    } else if (name == "tids") {
      c.mode = Mode::Tids;
      c.clusters = ClusterMode::Monolithic;
      c.digest.tid = true;
    } else if (name == "clusters") {
      c.mode = Mode::Clusters;
      c.digest.tid = true;
    } else {
      throw ConfigError("unknown preset '" + name + "'");
    }
    return c;
  }
};

inline std::string to_string(DomainKind d) {
  switch (d) {
    case DomainKind::EqConst: return "eqconst";
    case DomainKind::Octagon: return "octagon";
    case DomainKind::Interval: return "interval";
    case DomainKind::EqLt: return "eqlt";
  }
  return "?";
}

/* Protecting mutexes per global, globals per mutex, and the clusters published per mutex. */
struct Protection {
  std::map<int, std::set<int>> M;              // global var -> mutexes
  std::vector<std::vector<int>> G;             // mutex -> sorted globals
  std::vector<std::vector<std::vector<int>>> Q;  // mutex -> clusters
  std::vector<Diagnostic> warnings;
};

inline Protection compute_protections(const Program& p, const Cfg& g, const AnalysisConfig& cfg) {
  Protection pr;
  const VarTable& vt = g.vars;
  if (cfg.protections == ProtectionSource::Declared) {
    for (int gv : vt.globals()) {
      std::set<int> ms{g.mutexes.atomic_of_global.at(gv)};
      auto it = p.protections.find(vt.name(gv));
      if (it != p.protections.end())
        for (auto& m : it->second) ms.insert(g.mutexes.find(m));
      pr.M[gv] = ms;
    }
  } else {
    LocksetInfo li = compute_locksets(g);
    std::map<int, std::optional<std::set<int>>> acc;
    for (auto& e : g.edges) {
      if (e.act.kind != Action::Kind::Write) continue;
      for (auto& s : li.at[e.src]) {
        std::set<int> cur(s.begin(), s.end());
        auto& a = acc[e.act.global];
        if (!a) {
          a = cur;
        } else {
          std::set<int> meet;
          std::set_intersection(a->begin(), a->end(), cur.begin(), cur.end(), std::inserter(meet, meet.begin()));
          a = meet;
        }
      }
    }
    for (int gv : vt.globals()) {
      std::set<int> ms{g.mutexes.atomic_of_global.at(gv)};
      if (acc[gv]) ms.insert(acc[gv]->begin(), acc[gv]->end());
      pr.M[gv] = ms;
      if (ms.size() == 1) pr.warnings.push_back({{1, 1}, "warning", "no protecting mutex for " + vt.name(gv)});
    }
  }
  int nm = g.mutexes.size();
  pr.G.assign(nm, {});
  for (auto& [gv, ms] : pr.M)
    for (int m : ms) pr.G[m].push_back(gv);
  for (auto& gs : pr.G) std::sort(gs.begin(), gs.end());
  pr.Q.assign(nm, {});
  for (int m = 0; m < nm; ++m) {
    const auto& G = pr.G[m];
    auto ex = cfg.explicit_clusters.find(g.mutex_name(m));
    if (ex != cfg.explicit_clusters.end()) {
      for (auto& names : ex->second) {
        std::vector<int> q;
        for (auto& n : names) {
          int v = vt.find(n);
          if (v < 0 || !std::binary_search(G.begin(), G.end(), v))
            throw ConfigError("cluster for '" + g.mutex_name(m) + "' mentions '" + n + "', which it does not protect");
          q.push_back(v);
        }
        std::sort(q.begin(), q.end());
        q.erase(std::unique(q.begin(), q.end()), q.end());
        pr.Q[m].push_back(q);
      }
    } else if (G.empty()) {
      pr.Q[m].push_back({});
    } else if (g.mutexes.is_atomic(m)) {
      pr.Q[m].push_back(G);
    } else if (cfg.clusters == ClusterMode::Monolithic) {
      pr.Q[m].push_back(G);
    } else {
      int k = cfg.clusters == ClusterMode::All ? static_cast<int>(G.size()) : cfg.cluster_size;
      if (k < 1) throw ConfigError("cluster size must be at least 1");
      pr.Q[m] = subsets_upto(G, k);
    }
  }
  return pr;
}

/* Unknowns. Ordering puts Start first, then program points by id, then mutex and return keys. */
struct Key {
  enum Kind { Start = 0, Point = 1, Mutex = 2, Ret = 3 };
  int kind = Start;
  int id = 0;                // point or mutex
  Lockset S;                 // Point
  std::vector<int> cluster;  // Mutex
  AbstractTid tid;           // Ret
  Digest d;

  auto operator<=>(const Key&) const = default;
  bool operator==(const Key&) const = default;

  static Key start() { return {}; }
  static Key point(int u, Lockset s, Digest d) { return {Point, u, std::move(s), {}, {}, std::move(d)}; }
  static Key mutex(int a, std::vector<int> q, Digest d) { return {Mutex, a, {}, std::move(q), {}, std::move(d)}; }
  static Key ret(AbstractTid i, Digest d) { return {Ret, 0, {}, {}, std::move(i), std::move(d)}; }
};

using ClusterId = std::pair<int, std::vector<int>>;

/* Analysis value. Only r is used by the base analysis and by mutex keys; the improved
   analyses also carry J (definitely joined ids), L (join-local cluster values) and W (written globals). */
template <class R>
struct AbsState {
  R r;
  std::set<AbstractTid> J;
  std::map<ClusterId, R> L;
  std::set<int> W;

  bool is_bot() const { return r.is_bot(); }

  AbsState combine(const AbsState& o, bool widen) const {
    if (is_bot()) return o;
    if (o.is_bot()) return *this;
    AbsState s;
    s.r = widen ? r.widen(o.r) : r.join(o.r);
    std::set_intersection(J.begin(), J.end(), o.J.begin(), o.J.end(), std::inserter(s.J, s.J.begin()));
    s.L = L;
    for (auto& [k, v] : o.L) {
      auto it = s.L.find(k);
      if (it == s.L.end()) s.L.emplace(k, v);
      else it->second = widen ? it->second.widen(v) : it->second.join(v);
    }
    s.W = W;
    s.W.insert(o.W.begin(), o.W.end());
    return s;
  }
  AbsState join(const AbsState& o) const { return combine(o, false); }
  AbsState widen(const AbsState& o) const { return combine(o, true); }
  bool leq(const AbsState& o) const {
    if (is_bot()) return true;
    if (o.is_bot()) return false;
    if (!std::includes(J.begin(), J.end(), o.J.begin(), o.J.end())) return false;
    if (!std::includes(o.W.begin(), o.W.end(), W.begin(), W.end())) return false;
    for (auto& [k, v] : L) {
      auto it = o.L.find(k);
      if (it == o.L.end()) {
        if (!v.is_bot()) return false;
      } else if (!v.leq(it->second)) {
        return false;
      }
    }
    return r.leq(o.r);
  }
};

template <class Num>
class AnalysisSystem {
 public:
  using R = Relation<Num>;
  using Value = AbsState<R>;
  using Key = concurrel::Key;
  using Family = std::pair<int, int>;
  using Ctx = SolverCtx<Key, Value, Family>;

  AnalysisSystem(const Cfg& g, const AnalysisConfig& c, const Protection& p)
      : g_(g), c_(c), p_(p), n_(g.vars.size()), locals_(g.vars.locals()) {
    spec_ = c.digest;
    if (c.improved()) spec_.tid = true;
  }

  const DigestSpec& spec() const { return spec_; }
  const Cfg& cfg() const { return g_; }
  const Protection& protection() const { return p_; }
  const AnalysisConfig& config() const { return c_; }
  int nvars() const { return n_; }

  std::optional<Family> family(const Key& k) const {
    if (k.kind == Key::Mutex) return Family{Key::Mutex, k.id};
    if (k.kind == Key::Ret) return Family{Key::Ret, 0};
    return std::nullopt;
  }

  bool widening_point(const Key& k) const {
    if (k.kind == Key::Mutex || k.kind == Key::Ret) return true;
    if (k.kind != Key::Point) return false;
    if (g_.loop_head[k.id]) return true;
    for (auto& t : g_.templates)
      if (t.start == k.id) return true;
    return false;
  }

  AbstractTid main_tid() const { return AbstractTid::main(); }

  Value initial_main() const {
    Value v;
    v.r = R::top(n_).assign_tid(g_.vars.self, TidAbs::single(main_tid()));
    if (c_.improved())
      for (int a = 0; a < g_.mutexes.size(); ++a)
        for (auto& q : p_.Q[a]) v.L[{a, q}] = R::zeros(n_, q).restrict(q);
    return v;
  }

  void evaluate(const Key& k, const Value& val, Ctx& ctx) const {
    if (k.kind == Key::Start) {
      Digest d0 = digest::init(spec_);
      if (!c_.improved())
        for (int a = 0; a < g_.mutexes.size(); ++a)
          for (auto& q : p_.Q[a]) ctx.emit(Key::mutex(a, q, digest::key(d0, c_.collapse())), only(R::zeros(n_, q).restrict(q)));
      ctx.emit(Key::point(g_.main().start, {}, d0), initial_main());
      return;
    }
    if (k.kind != Key::Point || val.is_bot()) return;
    const auto& outs = g_.out[k.id];
    if (outs.empty()) {
      do_return(k, val, Lin::constant(0), ctx);
      return;
    }
    for (int eid : outs) transfer(g_.edges[eid], k, val, ctx);
  }

  std::string key_str(const Key& k) const {
    switch (k.kind) {
      case Key::Start: return "[start]";
      case Key::Point: return "[" + g_.point_name(k.id) + ", " + mutex_set_str(k.S) + ", " + k.d.str(spec_, g_) + "]";
      case Key::Mutex: return "[" + g_.mutex_name(k.id) + ", " + var_set_str(k.cluster) + ", " + k.d.str(spec_, g_) + "]";
      case Key::Ret: return "[ret " + k.tid.str(namer()) + ", " + k.d.str(spec_, g_) + "]";
    }
    return "?";
  }

  std::string value_str(const Value& v) const {
    std::string s = rel_str(v.r);
    if (!c_.improved() || v.is_bot()) return s;
    s += " | J={";
    bool first = true;
    for (auto& i : v.J) {
      s += (first ? "" : ",") + i.str(namer());
      first = false;
    }
    s += "} W=" + var_set_str({v.W.begin(), v.W.end()});
    for (auto& [id, r] : v.L) s += " L[" + g_.mutex_name(id.first) + "," + var_set_str(id.second) + "]=(" + rel_str(r) + ")";
    return s;
  }

  std::string rel_str(const R& r) const {
    return r.dump([&](int v) { return g_.vars.name(v); }, namer());
  }
  PointNamer namer() const {
    return [this](int p) { return g_.point_name(p); };
  }
  std::string var_set_str(const std::vector<int>& vs) const {
    std::string s = "{";
    for (size_t i = 0; i < vs.size(); ++i) s += (i ? "," : "") + g_.vars.name(vs[i]);
    return s + "}";
  }
  std::string mutex_set_str(const Lockset& ms) const {
    std::string s = "{";
    for (size_t i = 0; i < ms.size(); ++i) s += (i ? "," : "") + g_.mutex_name(ms[i]);
    return s + "}";
  }

  // Variables kept in the local state while holding the mutexes in S.
  std::vector<int> visible(const Lockset& S) const {
    std::set<int> keep(locals_.begin(), locals_.end());
    for (int a : S) keep.insert(p_.G[a].begin(), p_.G[a].end());
    return {keep.begin(), keep.end()};
  }

  // The join-local accounting predicate.
  bool accounted(const Digest& ego, const Value& val, const Digest& other) const {
    if (c_.mutation == Mutation::AccAlwaysTrue) return true;
    const AbstractTid& i = ego.tid;
    const AbstractTid& j = other.tid;
    if (j.unique() && (i == j || val.J.count(j))) return true;
    if (c_.exclude_ancestor_writes && lcu_anc(j, i) == j) {
      for (auto& e : other.C) {
        AbstractTid c = compose(j, e);
        if (c == i || may_create(c, i)) return false;
      }
      return true;
    }
    return false;
  }

 private:
  Value only(R r) const {
    Value v;
    v.r = std::move(r);
    return v;
  }
  Value with(const Value& base, R r) const {
    Value v = base;
    v.r = std::move(r);
    return v;
  }
  void emit_point(Ctx& ctx, int u, const Lockset& S, const Digest& d, Value v) const {
    if (v.is_bot()) return;
    ctx.emit(Key::point(u, S, d), std::move(v));
  }
  R meet_all(const R& r, const std::vector<R>& rs) const {
    R out = r;
    for (auto& x : rs) out = out.meet(x);
    return out;
  }
  R L_of(const Value& v, int a, const std::vector<int>& q) const {
    auto it = v.L.find({a, q});
    return it == v.L.end() ? R::top(n_) : it->second;
  }

  void transfer(const Edge& e, const Key& k, const Value& val, Ctx& ctx) const {
    const Action& a = e.act;
    const R& r = val.r;
    auto local = [&](R nr) {
      auto d2 = digest::unary(spec_, g_, e, k.d);
      if (d2) emit_point(ctx, e.dst, k.S, *d2, with(val, std::move(nr)));
    };
    switch (a.kind) {
      case Action::Kind::Guard: return local(r.guard(a.cond));
      case Action::Kind::Assert: return local(r);
      case Action::Kind::Havoc: return local(r.havoc(a.var));
      case Action::Kind::Assign: return local(r.assign(a.var, lin(a.expr)));
      case Action::Kind::Read: return local(r.assign(a.var, Lin::var(a.global)));
      case Action::Kind::Write: {
        auto d2 = digest::unary(spec_, g_, e, k.d);
        if (!d2) return;
        Value v = with(val, r.assign(a.global, lin(a.expr)));
        if (c_.improved()) v.W.insert(a.global);
        return emit_point(ctx, e.dst, k.S, *d2, std::move(v));
      }
      case Action::Kind::Lock: return do_lock(e, k, val, ctx);
      case Action::Kind::Unlock: return do_unlock(e, k, val, ctx);
      case Action::Kind::Create: return do_create(e, k, val, ctx);
      case Action::Kind::Return: return do_return(k, val, a.expr, ctx);
      case Action::Kind::Join: return do_join(e, k, val, ctx);
    }
  }

  Lin lin(const Lin& e) const {
    if (c_.mutation != Mutation::AssignDropsConstant || e.co.empty()) return e;
    Lin x = e;
    x.c = 0;
    return x;
  }

  std::vector<Digest> lock_candidates(int m, const Digest& d, Ctx& ctx) const {
    std::set<Digest> ds{digest::key(d, c_.collapse())};
    for (auto& key : ctx.family({Key::Mutex, m})) ds.insert(key.d);
    return {ds.begin(), ds.end()};
  }

  void do_lock(const Edge& e, const Key& k, const Value& val, Ctx& ctx) const {
    int m = e.act.mutex;
    if (std::binary_search(k.S.begin(), k.S.end(), m)) return;
    Lockset S2 = k.S;
    S2.insert(std::lower_bound(S2.begin(), S2.end(), m), m);
    const auto& Qs = p_.Q[m];
    auto cands = lock_candidates(m, k.d, ctx);
    auto stored = [&](const std::vector<int>& q, const Digest& d1) -> std::optional<R> {
      const Value* pv = ctx.get(Key::mutex(m, q, d1));
      if (!pv || pv->is_bot()) return std::nullopt;
      return pv->r;
    };
    if (c_.mode == Mode::Base) {
      for (auto& d1 : cands) {
        auto d2 = digest::binary(spec_, e.act, k.d, d1);
        if (!d2) continue;
        R eta = R::top(n_);
        bool all = true;
        for (auto& q : Qs) {
          auto s = stored(q, d1);
          if (!s) {
            all = false;
            break;
          }
          eta = eta.meet(*s);
        }
        if (all) emit_point(ctx, e.dst, S2, *d2, with(val, val.r.meet(eta)));
      }
      return;
    }
    // The digest after the lock depends on the last unlocker, which need not have published
    // anything, so every admitted digest receives the same value.
    std::set<Digest> outs;
    for (auto& d1 : cands)
      if (auto d2 = digest::binary(spec_, e.act, k.d, d1)) outs.insert(*d2);
    R total = R::top(n_);
    if (c_.mode == Mode::Clusters) {
      for (auto& q : Qs) {
        R jq = R::bot(n_);
        for (auto& d1 : cands) {
          if (!digest::binary(spec_, e.act, k.d, d1) || accounted(k.d, val, d1)) continue;
          if (auto s = stored(q, d1)) jq = jq.join(*s);
        }
        total = total.meet(jq.join(L_of(val, m, q)));
      }
    } else {
      R lm = R::top(n_);
      for (auto& q : Qs) lm = lm.meet(L_of(val, m, q));
      total = lm;
      for (auto& d1 : cands) {
        if (!digest::binary(spec_, e.act, k.d, d1) || accounted(k.d, val, d1)) continue;
        R eta = R::top(n_);
        bool all = true;
        for (auto& q : Qs) {
          auto s = stored(q, d1);
          if (!s) {
            all = false;
            break;
          }
          eta = eta.meet(*s);
        }
        if (all) total = total.join(eta);
      }
    }
    R r2 = val.r.meet(total);
    for (auto& d2 : outs) emit_point(ctx, e.dst, S2, d2, with(val, r2));
  }

  void do_unlock(const Edge& e, const Key& k, const Value& val, Ctx& ctx) const {
    int m = e.act.mutex;
    if (!std::binary_search(k.S.begin(), k.S.end(), m)) return;
    Lockset S2 = k.S;
    S2.erase(std::lower_bound(S2.begin(), S2.end(), m));
    auto d2 = digest::unary(spec_, g_, e, k.d);
    if (!d2) return;
    Digest kd = digest::key(*d2, c_.collapse());
    Value v = val;
    const auto& G = p_.G[m];
    auto written = [&](const std::vector<int>& q) {
      for (int x : q)
        if (val.W.count(x)) return true;
      return false;
    };
    bool any_written = written(G);
    for (auto& q : p_.Q[m]) {
      bool publish = c_.mode == Mode::Base || (c_.mode == Mode::Tids ? any_written : written(q));
      if (!publish) {
        // Registers the digest of this unlock for later lock candidates.
        ctx.emit(Key::mutex(m, q, kd), only(R::bot(n_)));
        continue;
      }
      R part = val.r.restrict(q);
      if (c_.mutation != Mutation::DropUnlockPublish) ctx.emit(Key::mutex(m, q, kd), only(part));
      if (c_.improved()) v.L[{m, q}] = part;
    }
    if (c_.mutation != Mutation::KeepGlobalsAfterUnlock) v.r = val.r.restrict(visible(S2));
    if (c_.improved()) {
      std::set<int> W2;
      for (int x : val.W)
        for (int b : S2)
          if (p_.M.at(x).count(b)) {
            W2.insert(x);
            break;
          }
      v.W = W2;
    }
    emit_point(ctx, e.dst, S2, *d2, std::move(v));
  }

  void do_create(const Edge& e, const Key& k, const Value& val, Ctx& ctx) const {
    int u1 = g_.templates[e.act.tmpl].start;
    auto dc = digest::new_thread(spec_, e.src, u1, k.d);
    auto d2 = digest::unary(spec_, g_, e, k.d);
    if (!dc || !d2) return;
    TidAbs i;
    if (spec_.tid) {
      i = TidAbs::single(dc->tid);
    } else {
      const TidAbs& self = val.r.tid(g_.vars.self);
      if (self.is_top()) {
        i = TidAbs::any();
      } else {
        i = TidAbs::none();
        for (auto& t : self.ids) i.ids.insert(compose(t, {e.src, u1}));
      }
    }
    Value child;
    child.r = val.r.assign_tid(g_.vars.self, i).restrict(locals_);
    if (c_.improved()) child.L = val.L;
    emit_point(ctx, u1, {}, *dc, std::move(child));
    emit_point(ctx, e.dst, k.S, *d2, with(val, val.r.assign_tid(e.act.var, i)));
  }

  void do_return(const Key& k, const Value& val, const Lin& ex, Ctx& ctx) const {
    Value v;
    v.r = val.r.assign(g_.vars.ret, lin(ex)).restrict({g_.vars.ret});
    if (v.is_bot()) return;
    if (c_.improved()) {
      v.J = val.J;
      v.L = val.L;
    }
    Digest kd = digest::key(k.d, c_.collapse());
    if (spec_.tid) {
      ctx.emit(Key::ret(k.d.tid, kd), v);
      return;
    }
    const TidAbs& self = val.r.tid(g_.vars.self);
    for (auto& i : self.ids) ctx.emit(Key::ret(i, kd), v);
  }

  void do_join(const Edge& e, const Key& k, const Value& val, Ctx& ctx) const {
    const TidAbs& target = val.r.tid(e.act.arg);
    for (auto& rk : ctx.family({Key::Ret, 0})) {
      if (!target.has(rk.tid)) continue;
      Digest other = rk.d;
      other.tid = rk.tid;
      auto d2 = digest::binary(spec_, e.act, k.d, other);
      if (!d2) continue;
      if (c_.improved() && accounted(k.d, val, other)) continue;
      const Value* pv = ctx.get(rk);
      if (!pv || pv->is_bot()) continue;
      Interval rv = pv->r.bounds(g_.vars.ret);
      if (c_.mutation == Mutation::JoinIgnoresReturn) rv = Interval::point(0);
      Value v = with(val, val.r.assign_interval(e.act.var, rv));
      if (c_.improved()) {
        v.J.insert(pv->J.begin(), pv->J.end());
        v.J.insert(rk.tid);
        for (auto& [id, lr] : pv->L) {
          auto it = v.L.find(id);
          if (it == v.L.end()) v.L.emplace(id, lr);
          else it->second = it->second.join(lr);
        }
      }
      emit_point(ctx, e.dst, k.S, *d2, std::move(v));
    }
  }

  const Cfg& g_;
  AnalysisConfig c_;
  Protection p_;
  DigestSpec spec_;
  int n_;
  std::vector<int> locals_;
};

struct AssertVerdict {
  int edge = -1;
  SourceLoc loc;
  std::string text;
  bool proven = false;
};

struct LockInvariant {
  int edge = -1;
  SourceLoc loc;
  std::string point;
  std::string mutex;
  std::string text;
};

/* A finished run: the solved assignment plus everything needed to interpret it. */
template <class Num>
struct Analysis {
  using R = Relation<Num>;
  using Sys = AnalysisSystem<Num>;
  using Value = typename Sys::Value;

  Program program;
  Cfg cfg;
  AnalysisConfig config;
  Protection protection;
  std::map<Key, Value> values;
  SolverStats stats;
  double wall_ms = 0;
  std::string dump;
  std::vector<std::string> verify_failures;

  Sys system() const { return Sys(cfg, config, protection); }

  R joined_at(int point) const {
    R r = R::bot(cfg.vars.size());
    for (auto it = values.lower_bound(Key::point(point, {}, {})); it != values.end(); ++it) {
      if (it->first.kind != Key::Point || it->first.id != point) break;
      r = r.join(it->second.r);
    }
    return r;
  }

  std::vector<AssertVerdict> asserts() const {
    std::vector<AssertVerdict> out;
    for (size_t eid = 0; eid < cfg.edges.size(); ++eid) {
      const Edge& e = cfg.edges[eid];
      if (e.act.kind != Action::Kind::Assert) continue;
      AssertVerdict v{static_cast<int>(eid), e.loc, e.act.text, true};
      Formula bad = negate(e.act.cond);
      for (auto it = values.lower_bound(Key::point(e.src, {}, {})); it != values.end(); ++it) {
        if (it->first.kind != Key::Point || it->first.id != e.src) break;
        if (!it->second.r.guard(bad).is_bot()) v.proven = false;
      }
      out.push_back(v);
    }
    std::stable_sort(out.begin(), out.end(), [](const AssertVerdict& a, const AssertVerdict& b) {
      return std::tie(a.loc.line, a.loc.col) < std::tie(b.loc.line, b.loc.col);
    });
    return out;
  }

  std::vector<LockInvariant> lock_invariants() const {
    std::vector<LockInvariant> out;
    Sys sys = system();
    for (size_t eid = 0; eid < cfg.edges.size(); ++eid) {
      const Edge& e = cfg.edges[eid];
      if (e.act.kind != Action::Kind::Lock || cfg.mutexes.is_atomic(e.act.mutex)) continue;
      std::set<int> keep;
      for (int v : cfg.vars.locals())
        if (!cfg.vars.is_tid(v) && v != cfg.vars.ret) keep.insert(v);
      keep.insert(protection.G[e.act.mutex].begin(), protection.G[e.act.mutex].end());
      R r = joined_at(e.dst);
      std::string text = r.is_bot() ? "unreachable" : sys.rel_str(r.restrict({keep.begin(), keep.end()}));
      out.push_back({static_cast<int>(eid), e.loc, cfg.point_name(e.dst), cfg.mutex_name(e.act.mutex), text});
    }
    return out;
  }
};

template <class Num>
Analysis<Num> analyze(const Program& p, const AnalysisConfig& config, bool verify = false) {
  auto t0 = std::chrono::steady_clock::now();
  Analysis<Num> a;
  a.program = p;
  a.cfg = build_cfg(p);
  a.config = config;
  a.protection = compute_protections(p, a.cfg, config);
  AnalysisSystem<Num> sys(a.cfg, a.config, a.protection);
  Solver<AnalysisSystem<Num>> solver(sys, config.solver);
  solver.seed(Key::start(), typename AnalysisSystem<Num>::Value{Relation<Num>::top(a.cfg.vars.size())});
  solver.solve();
  a.values = solver.values();
  a.stats = solver.stats();
  a.dump = solver.dump();
  if (verify) a.verify_failures = solver.verify();
  a.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return a;
}

// Calls f.template operator()<Num>() with the numeric domain selected by d.
template <class F>
decltype(auto) with_domain(DomainKind d, F&& f) {
  switch (d) {
    case DomainKind::EqConst: return f.template operator()<EqConst>();
    case DomainKind::Interval: return f.template operator()<IntervalDomain>();
    case DomainKind::EqLt: return f.template operator()<EqLt>();
    case DomainKind::Octagon: break;
  }
  return f.template operator()<Octagon>();
}

}  // namespace concurrel
