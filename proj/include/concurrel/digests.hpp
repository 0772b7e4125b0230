#pragma once

#include <optional>
#include <set>
#include <string>

#include "cfg.hpp"
#include "domains/tid.hpp"

namespace concurrel {

/* Which local-trace abstractions are tracked. Inactive components stay at their defaults,
   so a digest with several components active is the product of the single ones. */
struct DigestSpec {
  bool lockset = false;
  bool lock_once = false;
  bool tid = false;

  bool any() const { return lockset || lock_once || tid; }
  bool operator==(const DigestSpec&) const = default;
  std::string str() const {
    std::string s;
    if (lockset) s += "lockset";
    if (lock_once) s += std::string(s.empty() ? "" : "+") + "lock-once";
    if (tid) s += std::string(s.empty() ? "" : "+") + "tid";
    return s.empty() ? "none" : s;
  }
};

struct Digest {
  Lockset S;                  // lockset
  std::set<int> L;            // mutexes locked at least once
  AbstractTid tid;            // abstract id of the ego thread
  std::set<CreateEdge> C;     // create edges encountered by the ego thread

  auto operator<=>(const Digest&) const = default;
  bool operator==(const Digest&) const = default;

  std::string str(const DigestSpec& spec, const Cfg& g) const {
    PointNamer pn = [&](int p) { return g.point_name(p); };
    std::string s;
    auto sep = [&] { if (!s.empty()) s += ", "; };
    if (spec.lockset) {
      sep();
      s += "S={";
      for (size_t i = 0; i < S.size(); ++i) s += (i ? "," : "") + g.mutex_name(S[i]);
      s += "}";
    }
    if (spec.lock_once) {
      sep();
      s += "L={";
      bool first = true;
      for (int m : L) {
        s += (first ? "" : ",") + g.mutex_name(m);
        first = false;
      }
      s += "}";
    }
    if (spec.tid) {
      sep();
      s += "tid=" + tid.str(pn) + ", C={";
      bool first = true;
      for (auto& e : C) {
        s += (first ? "" : ",") + edge_str(e, pn);
        first = false;
      }
      s += "}";
    }
    return s.empty() ? "-" : s;
  }
};

inline bool may_run(const Digest& ego, const Digest& other) {
  const AbstractTid& i = ego.tid;
  if (!(lcu_anc(i, other.tid) == i)) return true;
  for (auto& e : ego.C) {
    AbstractTid c = compose(i, e);
    if (c == other.tid || may_create(c, other.tid)) return true;
  }
  return false;
}

// Whether a value published under digest other may be combined with the ego's local trace.
inline bool tid_admitted(const Digest& ego, const Digest& other) {
  return ego.tid == other.tid || may_run(ego, other);
}

namespace digest {

inline Digest init(const DigestSpec&) { return Digest{}; }

// Non-observing and observable actions.
inline std::optional<Digest> unary(const DigestSpec& spec, const Cfg& g, const Edge& e, const Digest& d) {
  Digest r = d;
  if (e.act.kind == Action::Kind::Unlock && spec.lockset) {
    auto it = std::lower_bound(r.S.begin(), r.S.end(), e.act.mutex);
    if (it != r.S.end() && *it == e.act.mutex) r.S.erase(it);
  }
  if (e.act.kind == Action::Kind::Create && spec.tid) r.C.insert({e.src, g.templates[e.act.tmpl].start});
  return r;
}

// Observing actions (lock, join): ego digest d0 combined with the incoming digest d1.
inline std::optional<Digest> binary(const DigestSpec& spec, const Action& a, const Digest& d0, const Digest& d1) {
  Digest r = d0;
  if (a.kind == Action::Kind::Lock) {
    if (spec.lockset) {
      auto it = std::lower_bound(r.S.begin(), r.S.end(), a.mutex);
      if (it == r.S.end() || *it != a.mutex) r.S.insert(it, a.mutex);
    }
    if (spec.lock_once) {
      if (d0.L.count(a.mutex) && !d1.L.count(a.mutex)) return std::nullopt;
      r.L.insert(d1.L.begin(), d1.L.end());
      r.L.insert(a.mutex);
    }
  } else if (spec.lock_once) {
    r.L.insert(d1.L.begin(), d1.L.end());
  }
  if (spec.tid && !tid_admitted(d0, d1)) return std::nullopt;
  return r;
}

inline std::optional<Digest> new_thread(const DigestSpec& spec, int u, int u1, const Digest& d) {
  Digest r;
  if (spec.lock_once) r.L = d.L;
  if (spec.tid) {
    CreateEdge e{u, u1};
    AbstractTid c = compose(d.tid, e);
    if (c.unique() && d.C.count(e)) {
      r.tid.prefix = d.tid.prefix;
      r.tid.spill = {e};
    } else {
      r.tid = c;
    }
  }
  return r;
}

// Digest used in mutex and return keys. Collapsing drops the C component.
inline Digest key(const Digest& d, bool collapse) {
  Digest r = d;
  if (collapse) r.C.clear();
  return r;
}

}  // namespace digest
}  // namespace concurrel
