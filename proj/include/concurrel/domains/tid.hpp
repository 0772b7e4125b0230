#pragma once

#include <algorithm>
#include <compare>
#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace concurrel {

/* A create edge: the creating program point and the start point of the created template. */
using CreateEdge = std::pair<int, int>;
using PointNamer = std::function<std::string(int)>;

inline std::string edge_str(const CreateEdge& e, const PointNamer& pn) {
  return "<" + pn(e.first) + "," + pn(e.second) + ">";
}

/* Abstract thread id: creation history prefix (after the implicit main marker) and spill set. */
struct AbstractTid {
  std::vector<CreateEdge> prefix;
  std::set<CreateEdge> spill;

  static AbstractTid main() { return {}; }
  bool unique() const { return spill.empty(); }
  std::set<CreateEdge> edges() const {
    std::set<CreateEdge> s(prefix.begin(), prefix.end());
    s.insert(spill.begin(), spill.end());
    return s;
  }
  auto operator<=>(const AbstractTid&) const = default;
  bool operator==(const AbstractTid&) const = default;

  std::string str(const PointNamer& pn) const {
    std::string s = "main";
    for (auto& e : prefix) s += "." + edge_str(e, pn);
    if (!spill.empty()) {
      s += " | {";
      bool first = true;
      for (auto& e : spill) {
        if (!first) s += ",";
        first = false;
        s += edge_str(e, pn);
      }
      s += "}";
    }
    return "(" + s + ")";
  }
};

inline AbstractTid compose(const AbstractTid& i, const CreateEdge& e) {
  auto it = std::find(i.prefix.begin(), i.prefix.end(), e);
  if (it != i.prefix.end()) {
    AbstractTid r;
    r.prefix.assign(i.prefix.begin(), it);
    r.spill = i.spill;
    r.spill.insert(it, i.prefix.end());
    return r;
  }
  AbstractTid r = i;
  if (i.spill.empty()) r.prefix.push_back(e);
  else r.spill.insert(e);
  return r;
}

inline AbstractTid lcu_anc(const AbstractTid& a, const AbstractTid& b) {
  AbstractTid r;
  for (size_t k = 0; k < a.prefix.size() && k < b.prefix.size() && a.prefix[k] == b.prefix[k]; ++k)
    r.prefix.push_back(a.prefix[k]);
  return r;
}

inline bool may_create(const AbstractTid& a, const AbstractTid& b) {
  auto ea = a.edges(), eb = b.edges();
  return std::includes(eb.begin(), eb.end(), ea.begin(), ea.end());
}

/* Thread id values: Top, or a finite set of abstract ids (empty set is Bot). */
struct TidAbs {
  bool top = true;
  std::set<AbstractTid> ids;

  static TidAbs any() { return {}; }
  static TidAbs none() { return {false, {}}; }
  static TidAbs single(const AbstractTid& i) { return {false, {i}}; }

  bool is_bot() const { return !top && ids.empty(); }
  bool is_top() const { return top; }
  bool has(const AbstractTid& i) const { return top || ids.count(i); }

  TidAbs join(const TidAbs& o) const {
    if (top || o.top) return any();
    TidAbs r = *this;
    r.ids.insert(o.ids.begin(), o.ids.end());
    return r;
  }
  TidAbs meet(const TidAbs& o) const {
    if (top) return o;
    if (o.top) return *this;
    TidAbs r = none();
    std::set_intersection(ids.begin(), ids.end(), o.ids.begin(), o.ids.end(),
                          std::inserter(r.ids, r.ids.begin()));
    return r;
  }
  bool leq(const TidAbs& o) const {
    if (o.top) return true;
    if (top) return false;
    return std::includes(o.ids.begin(), o.ids.end(), ids.begin(), ids.end());
  }
  bool operator==(const TidAbs& o) const { return top == o.top && (top || ids == o.ids); }

  std::string str(const PointNamer& pn) const {
    if (top) return "T";
    std::string s = "{";
    bool first = true;
    for (auto& i : ids) {
      if (!first) s += ", ";
      first = false;
      s += i.str(pn);
    }
    return s + "}";
  }
};

}  // namespace concurrel
