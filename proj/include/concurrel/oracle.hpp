#pragma once

#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "analysis.hpp"

namespace concurrel {

struct OracleBounds {
  int max_steps_per_thread = 12;
  std::vector<i64> havoc_values{0, 1, 2};
  int max_threads = 6;
  long max_states = 300000;
  bool dedup = true;
};

struct ConcreteThread {
  enum class Status { Running, Returned, Joined };
  std::string name;  // creation sequence: main, main.0, main.0.1, ...
  int point = 0;
  Status status = Status::Running;
  std::vector<i64> ints;                // all variable slots; only locals are meaningful
  std::map<int, std::string> tid_vals;  // id-typed locals that hold a thread
  i64 ret = 0;
  int steps = 0;
  int children = 0;
  Lockset held;
  Digest d;
  AbstractTid atid;
};

struct ConcreteState {
  std::vector<ConcreteThread> threads;
  std::vector<i64> globals;  // indexed by variable id
  std::vector<int> holder;   // mutex -> thread index, -1 if free
  std::vector<std::optional<Digest>> last_unlock;
  std::vector<std::string> trace;

  int find(const std::string& name) const {
    for (size_t i = 0; i < threads.size(); ++i)
      if (threads[i].name == name) return static_cast<int>(i);
    return -1;
  }
};

struct Witness {
  std::string reason;
  std::vector<std::string> trace;

  std::string render() const {
    std::string s = reason + "\n";
    for (auto& t : trace) s += "  " + t + "\n";
    return s;
  }
};

struct AssertFailure {
  int edge = -1;
  SourceLoc loc;
  Witness witness;
};

struct ExploreResult {
  long states = 0;
  long schedules = 0;  // maximal schedules (states without successors)
  bool partial = false;
  std::vector<AssertFailure> assert_failures;
  std::set<std::string> reachable;
};

/* Depth-first enumeration of interleavings within the bounds. Each thread replays its digest with
   the given spec; abstract ids follow the tid digest when it is on and plain composition otherwise. */
class Explorer {
 public:
  Explorer(const Cfg& g, DigestSpec spec, OracleBounds b) : g_(g), spec_(spec), b_(std::move(b)) {}

  ExploreResult run(const std::function<void(const ConcreteState&)>& visit = {}) {
    ExploreResult res;
    std::unordered_set<std::string> seen;
    std::set<int> failed_asserts;
    std::vector<ConcreteState> stack{initial()};
    while (!stack.empty()) {
      ConcreteState s = std::move(stack.back());
      stack.pop_back();
      if (b_.dedup && !seen.insert(serialize(s)).second) continue;
      if (++res.states > b_.max_states) {
        res.partial = true;
        break;
      }
      for (auto& r : reach_entries(s)) res.reachable.insert(r);
      if (visit) visit(s);
      auto succ = successors(s, res, failed_asserts);
      if (succ.empty()) ++res.schedules;
      for (auto it = succ.rbegin(); it != succ.rend(); ++it) stack.push_back(std::move(*it));
    }
    return res;
  }

  const DigestSpec& spec() const { return spec_; }

 private:
  ConcreteState initial() const {
    ConcreteState s;
    ConcreteThread t;
    t.name = "main";
    t.point = g_.main().start;
    t.ints.assign(g_.vars.size(), 0);
    t.d = digest::init(spec_);
    s.threads.push_back(t);
    s.globals.assign(g_.vars.size(), 0);
    s.holder.assign(g_.mutexes.size(), -1);
    s.last_unlock.assign(g_.mutexes.size(), std::nullopt);
    return s;
  }

  bool at_end(const ConcreteThread& t) const { return g_.out[t.point].empty(); }

  i64 value(const ConcreteState& s, const ConcreteThread& t, int v) const {
    return g_.vars.is_global(v) ? s.globals[v] : t.ints[v];
  }

  std::string step_str(const ConcreteThread& t, const Edge& e, const std::string& extra = "") const {
    return t.name + ": " + action_to_string(e.act, g_) + extra + " @ " + g_.point_name(e.src);
  }

  std::vector<ConcreteState> successors(const ConcreteState& s, ExploreResult& res, std::set<int>& failed) const {
    std::vector<ConcreteState> out;
    for (size_t ti = 0; ti < s.threads.size(); ++ti) {
      const ConcreteThread& t = s.threads[ti];
      if (t.status != ConcreteThread::Status::Running || at_end(t)) continue;
      if (t.steps >= b_.max_steps_per_thread) {
        res.partial = true;
        continue;
      }
      for (int eid : g_.out[t.point]) {
        const Edge& e = g_.edges[eid];
        auto val = [&](int v) { return value(s, t, v); };
        auto advance = [&](ConcreteState n, std::optional<Digest> d2, const std::string& extra = "") {
          ConcreteThread& nt = n.threads[ti];
          nt.point = e.dst;
          nt.steps += 1;
          if (d2) nt.d = *d2;
          n.trace.push_back(step_str(s.threads[ti], e, extra));
          out.push_back(std::move(n));
        };
        auto unary = [&] { return digest::unary(spec_, g_, e, t.d); };
        switch (e.act.kind) {
          case Action::Kind::Guard:
            if (eval_formula(e.act.cond, val)) advance(s, unary());
            break;
          case Action::Kind::Assert: {
            if (!eval_formula(e.act.cond, val) && failed.insert(eid).second) {
              ConcreteState n = s;
              n.trace.push_back(step_str(t, e, " fails"));
              res.assert_failures.push_back({eid, e.loc, {"assert(" + e.act.text + ") violated", n.trace}});
            }
            advance(s, unary());
            break;
          }
          case Action::Kind::Assign: {
            ConcreteState n = s;
            n.threads[ti].ints[e.act.var] = eval_lin(e.act.expr, val);
            advance(std::move(n), unary());
            break;
          }
          case Action::Kind::Havoc:
            for (i64 h : b_.havoc_values) {
              ConcreteState n = s;
              n.threads[ti].ints[e.act.var] = h;
              advance(std::move(n), unary(), " <- " + std::to_string(h));
            }
            break;
          case Action::Kind::Read: {
            ConcreteState n = s;
            n.threads[ti].ints[e.act.var] = s.globals[e.act.global];
            advance(std::move(n), unary());
            break;
          }
          case Action::Kind::Write: {
            ConcreteState n = s;
            n.globals[e.act.global] = eval_lin(e.act.expr, val);
            advance(std::move(n), unary());
            break;
          }
          case Action::Kind::Lock: {
            int m = e.act.mutex;
            if (s.holder[m] != -1) break;
            Digest incoming = s.last_unlock[m] ? *s.last_unlock[m] : digest::init(spec_);
            auto d2 = digest::binary(spec_, e.act, t.d, incoming);
            ConcreteState n = s;
            n.holder[m] = static_cast<int>(ti);
            auto& h = n.threads[ti].held;
            h.insert(std::lower_bound(h.begin(), h.end(), m), m);
            if (!d2) {
              // The digest claims this combination impossible; keep exploring with a marker.
              n.threads[ti].d.S = {-1};
              advance(std::move(n), std::nullopt);
            } else {
              advance(std::move(n), d2);
            }
            break;
          }
          case Action::Kind::Unlock: {
            int m = e.act.mutex;
            if (s.holder[m] != static_cast<int>(ti)) break;
            auto d2 = unary();
            ConcreteState n = s;
            n.holder[m] = -1;
            auto& h = n.threads[ti].held;
            h.erase(std::lower_bound(h.begin(), h.end(), m));
            n.last_unlock[m] = d2;
            advance(std::move(n), d2);
            break;
          }
          case Action::Kind::Create: {
            int live = static_cast<int>(s.threads.size());
            if (live >= b_.max_threads) {
              res.partial = true;
              break;
            }
            int u1 = g_.templates[e.act.tmpl].start;
            ConcreteState n = s;
            ConcreteThread c = t;
            c.name = t.name + "." + std::to_string(t.children);
            c.point = u1;
            c.status = ConcreteThread::Status::Running;
            c.steps = 0;
            c.children = 0;
            c.held.clear();
            c.ret = 0;
            auto dc = digest::new_thread(spec_, e.src, u1, t.d);
            c.d = *dc;
            c.atid = spec_.tid ? dc->tid : compose(t.atid, {e.src, u1});
            n.threads[ti].children += 1;
            n.threads[ti].tid_vals[e.act.var] = c.name;
            n.threads[ti].ints[e.act.var] = 0;
            n.threads.push_back(c);
            advance(std::move(n), unary(), " -> " + c.name);
            break;
          }
          case Action::Kind::Join: {
            auto it = t.tid_vals.find(e.act.arg);
            if (it == t.tid_vals.end()) break;
            int j = s.find(it->second);
            if (j < 0) break;
            const ConcreteThread& o = s.threads[j];
            bool done = o.status == ConcreteThread::Status::Returned ||
                        (o.status == ConcreteThread::Status::Running && at_end(o));
            if (!done) break;
            auto d2 = digest::binary(spec_, e.act, t.d, o.d);
            ConcreteState n = s;
            n.threads[j].status = ConcreteThread::Status::Joined;
            n.threads[ti].ints[e.act.var] = o.ret;
            n.threads[ti].tid_vals.erase(e.act.var);
            if (!d2) {
              n.threads[ti].d.S = {-1};
              advance(std::move(n), std::nullopt);
            } else {
              advance(std::move(n), d2);
            }
            break;
          }
          case Action::Kind::Return: {
            ConcreteState n = s;
            n.threads[ti].ret = eval_lin(e.act.expr, val);
            n.threads[ti].status = ConcreteThread::Status::Returned;
            advance(std::move(n), unary());
            break;
          }
        }
      }
    }
    return out;
  }

  static void put_digest(std::ostringstream& os, const Digest& d) {
    os << "S";
    for (int m : d.S) os << m << ",";
    os << "L";
    for (int m : d.L) os << m << ",";
    os << "T";
    for (auto& e : d.tid.prefix) os << e.first << ":" << e.second << ",";
    os << "|";
    for (auto& e : d.tid.spill) os << e.first << ":" << e.second << ",";
    os << "C";
    for (auto& e : d.C) os << e.first << ":" << e.second << ",";
  }

  std::string serialize(const ConcreteState& s) const {
    std::ostringstream os;
    for (auto& t : s.threads) {
      os << t.name << "@" << t.point << "/" << static_cast<int>(t.status) << "/" << t.steps << "/" << t.ret << "/"
         << t.children << "[";
      for (int v : g_.vars.locals()) os << t.ints[v] << ",";
      os << "]";
      for (auto& [v, n] : t.tid_vals) os << v << "=" << n << ",";
      put_digest(os, t.d);
      os << ";";
    }
    os << "G";
    for (int v : g_.vars.globals()) os << s.globals[v] << ",";
    os << "H";
    for (int h : s.holder) os << h << ",";
    os << "U";
    for (auto& d : s.last_unlock) {
      if (d) put_digest(os, *d);
      os << "/";
    }
    return os.str();
  }

  std::vector<std::string> reach_entries(const ConcreteState& s) const {
    std::vector<std::string> out;
    for (auto& t : s.threads) {
      if (t.status != ConcreteThread::Status::Running) continue;
      std::ostringstream os;
      os << t.name << " " << g_.point_name(t.point) << " {";
      for (int m : t.held) os << g_.mutex_name(m) << ",";
      os << "} ";
      for (int v : g_.vars.locals()) {
        if (g_.vars.is_tid(v)) {
          auto it = t.tid_vals.find(v);
          if (it != t.tid_vals.end()) os << g_.vars.name(v) << "=" << it->second << " ";
        } else if (v != g_.vars.self && v != g_.vars.ret) {
          os << g_.vars.name(v) << "=" << t.ints[v] << " ";
        }
      }
      os << "|";
      for (int v : g_.vars.globals()) os << " " << g_.vars.name(v) << "=" << s.globals[v];
      out.push_back(os.str());
    }
    return out;
  }

  const Cfg& g_;
  DigestSpec spec_;
  OracleBounds b_;
};

struct SoundnessReport {
  ExploreResult explore;
  std::vector<Witness> witnesses;  // containment failures and violated PROVEN asserts
  bool ok() const { return witnesses.empty(); }
};

/* Checks every explored state against the solved assignment: each running thread's locals, id and
   held globals must lie in the value at its (point, lockset, digest) unknown, and in the base analysis
   the globals of every free mutex must lie in what was published for it. */
template <class Num>
SoundnessReport check_soundness(const Analysis<Num>& an, const OracleBounds& bounds, size_t max_witnesses = 3) {
  using R = Relation<Num>;
  SoundnessReport rep;
  auto sys = an.system();
  const Cfg& g = an.cfg;
  const int n = g.vars.size();
  Explorer ex(g, sys.spec(), bounds);

  std::map<std::pair<int, std::vector<int>>, R> published;
  if (!an.config.improved()) {
    for (auto& [k, v] : an.values) {
      if (k.kind != Key::Mutex) continue;
      auto id = std::make_pair(k.id, k.cluster);
      auto it = published.find(id);
      if (it == published.end()) published.emplace(id, v.r);
      else it->second = it->second.join(v.r);
    }
  }

  auto fail = [&](const std::string& why, const ConcreteState& s) {
    if (rep.witnesses.size() < max_witnesses) rep.witnesses.push_back({why, s.trace});
  };

  rep.explore = ex.run([&](const ConcreteState& s) {
    if (rep.witnesses.size() >= max_witnesses) return;
    std::map<std::string, AbstractTid> ids;
    for (auto& t : s.threads) ids[t.name] = t.atid;
    for (auto& t : s.threads) {
      if (t.status != ConcreteThread::Status::Running) continue;
      if (!t.d.S.empty() && t.d.S[0] == -1) {
        fail(t.name + " reached " + g.point_name(t.point) + " through a combination its digest rules out", s);
        continue;
      }
      auto it = an.values.find(Key::point(t.point, t.held, t.d));
      std::string where = t.name + " at " + sys.key_str(Key::point(t.point, t.held, t.d));
      if (it == an.values.end() || it->second.is_bot()) {
        fail(where + " is reachable but has no abstract value", s);
        continue;
      }
      std::vector<int> known;
      std::vector<i64> vals(n, 0);
      std::map<int, AbstractTid> tv;
      for (int v : g.vars.locals()) {
        if (v == g.vars.ret) continue;
        if (v == g.vars.self) {
          known.push_back(v);
          tv[v] = t.atid;
          continue;
        }
        if (g.vars.is_tid(v)) {
          auto tt = t.tid_vals.find(v);
          if (tt == t.tid_vals.end()) continue;
          known.push_back(v);
          tv[v] = ids.at(tt->second);
          continue;
        }
        known.push_back(v);
        vals[v] = t.ints[v];
      }
      for (int a : t.held)
        for (int gv : an.protection.G[a]) {
          known.push_back(gv);
          vals[gv] = s.globals[gv];
        }
      std::sort(known.begin(), known.end());
      known.erase(std::unique(known.begin(), known.end()), known.end());
      if (!it->second.r.restrict(known).contains(vals, tv)) {
        std::ostringstream os;
        os << where << ": concrete state not contained in " << sys.rel_str(it->second.r) << " (";
        for (int v : known) {
          auto tt = tv.find(v);
          os << " " << g.vars.name(v) << "=" << (tt != tv.end() ? tt->second.str(sys.namer()) : std::to_string(vals[v]));
        }
        os << " )";
        fail(os.str(), s);
      }
    }
    if (!an.config.improved()) {
      for (int a = 0; a < g.mutexes.size(); ++a) {
        if (s.holder[a] != -1) continue;
        for (auto& q : an.protection.Q[a]) {
          auto it = published.find({a, q});
          std::vector<i64> vals(n, 0);
          for (int gv : q) vals[gv] = s.globals[gv];
          if (it == published.end() || !it->second.restrict(q).contains(vals)) {
            fail("globals of free mutex " + g.mutex_name(a) + " not contained in its published value", s);
            return;
          }
        }
      }
    }
  });
  auto verdicts = an.asserts();
  for (auto& f : rep.explore.assert_failures)
    for (auto& v : verdicts)
      if (v.edge == f.edge && v.proven) rep.witnesses.push_back({"PROVEN " + f.witness.reason, f.witness.trace});
  return rep;
}

}  // namespace concurrel
