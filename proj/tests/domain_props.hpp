#pragma once
// Random relations and the lattice, restriction, decomposition and octagon transfer property
// suites. Each suite returns an empty string on success and a description of the first failure.

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "concurrel/domains/relation.hpp"

namespace domprops {

using namespace concurrel;

#define DOMPROPS_CHECK(cond) \
  do {                       \
    if (!(cond)) return "case " + std::to_string(it) + ": " #cond; \
  } while (0)

inline Formula atom(Atom::Rel rel, Lin e) {
  Formula f;
  f.kind = Formula::Kind::Atom;
  f.atom = {rel, std::move(e)};
  return f;
}

inline Lin lin(std::initializer_list<std::pair<int, i64>> co, i64 c = 0) {
  Lin l = Lin::constant(c);
  for (auto& [v, k] : co) l.add(Lin::var(v, k));
  return l;
}

// x - y + c <= 0
inline Formula le(int x, int y, i64 c) { return atom(Atom::Rel::Le, lin({{x, 1}, {y, -1}}, c)); }
inline Formula eq_const(int x, i64 c) { return atom(Atom::Rel::Eq, lin({{x, 1}}, -c)); }
inline Formula eq_var(int x, int y) { return atom(Atom::Rel::Eq, lin({{x, 1}, {y, -1}})); }

inline std::vector<Interval> tops(int n) { return std::vector<Interval>(n, Interval::top()); }

inline std::vector<int> all_vars(int n) {
  std::vector<int> v(n);
  for (int i = 0; i < n; ++i) v[i] = i;
  return v;
}

// Every point of [lo, hi]^n.
inline std::vector<std::vector<i64>> box(int n, i64 lo = 0, i64 hi = 4) {
  std::vector<std::vector<i64>> out;
  std::vector<i64> cur(n, lo);
  while (true) {
    out.push_back(cur);
    int k = 0;
    while (k < n && cur[k] == hi) cur[k++] = lo;
    if (k == n) break;
    ++cur[k];
  }
  return out;
}

template <class Num>
std::vector<std::vector<i64>> gamma(const Num& r, int n) {
  std::vector<std::vector<i64>> out;
  for (auto& p : box(n))
    if (r.contains(p)) out.push_back(p);
  return out;
}

// Random relation built from guards, assignments and joins over small constants.
template <class Num>
Num random_rel(std::mt19937& rng, int n, int depth = 0) {
  auto pick = [&](int k) { return static_cast<int>(rng() % k); };
  Num r = Num::top(n);
  int ops = pick(6);
  for (int k = 0; k < ops; ++k) {
    int x = pick(n), y = pick(n);
    i64 c = pick(5);
    switch (pick(10)) {
      case 0: r = r.guard(le(x, y, c - 2)); break;
      case 1: r = r.guard(eq_const(x, c)); break;
      case 2: if (x != y) r = r.guard(eq_var(x, y)); break;
      case 3: r = r.guard(atom(Atom::Rel::Le, lin({{x, 1}, {y, 1}}, -c - 2))); break;
      case 4: r = r.assign(x, lin({{y, 1}}, c - 2)); break;
      case 5: r = r.assign(x, Lin::constant(c)); break;
      case 6:
        if (depth < 2) r = r.join(random_rel<Num>(rng, n, depth + 1));
        break;
      case 7: r = r.guard(atom(Atom::Rel::Le, lin({{x, pick(2) ? 1 : -1}}, pick(2) ? -c : c))); break;
      case 8: r = r.guard(atom(Atom::Rel::Ne, lin({{x, 1}}, -c))); break;
      case 9: r = r.havoc(x); break;
    }
  }
  return r;
}

template <class Num>
std::string lattice_laws(int trials = 1000, unsigned seed = 7) {
  std::mt19937 rng(seed);
  for (int it = 0; it < trials; ++it) {
    int n = 2 + static_cast<int>(rng() % 3);
    Num a = random_rel<Num>(rng, n), b = random_rel<Num>(rng, n), c = random_rel<Num>(rng, n);
    Num top = Num::top(n), bot = Num::bot(n);
    DOMPROPS_CHECK(a.leq(a));
    DOMPROPS_CHECK(bot.leq(a));
    DOMPROPS_CHECK(a.leq(top));
    Num j = a.join(b), m = a.meet(b);
    DOMPROPS_CHECK(a.leq(j) && b.leq(j));
    DOMPROPS_CHECK(m.leq(a) && m.leq(b));
    DOMPROPS_CHECK(j.equals(b.join(a)));
    DOMPROPS_CHECK(m.equals(b.meet(a)));
    DOMPROPS_CHECK(a.join(b.join(c)).equals(a.join(b).join(c)));
    DOMPROPS_CHECK(a.meet(b.meet(c)).equals(a.meet(b).meet(c)));
    DOMPROPS_CHECK(a.join(a.meet(b)).equals(a));
    DOMPROPS_CHECK(a.meet(a.join(b)).equals(a));
    DOMPROPS_CHECK(a.meet(top).equals(a) && a.join(bot).equals(a));
    if (a.leq(b) && b.leq(a)) DOMPROPS_CHECK(a.equals(b));
    // Upper and lower bounds are least and greatest among the other samples.
    if (a.leq(c) && b.leq(c)) DOMPROPS_CHECK(j.leq(c));
    if (c.leq(a) && c.leq(b)) DOMPROPS_CHECK(c.leq(m));
    DOMPROPS_CHECK(j.leq(a.widen(b)));
    for (auto& p : box(n)) {
      if (a.contains(p) || b.contains(p)) DOMPROPS_CHECK(j.contains(p));
      if (a.contains(p) && b.contains(p)) DOMPROPS_CHECK(m.contains(p));
    }
  }
  return {};
}

template <class Num>
std::string restriction_laws(int trials = 500, unsigned seed = 11) {
  std::mt19937 rng(seed);
  for (int it = 0; it < trials; ++it) {
    int n = 2 + static_cast<int>(rng() % 3);
    Num r = random_rel<Num>(rng, n);
    std::vector<int> y1, y2;
    for (int v = 0; v < n; ++v) {
      if (rng() % 2) y1.push_back(v);
      if (rng() % 2) y2.push_back(v);
    }
    std::vector<int> both;
    std::set_intersection(y1.begin(), y1.end(), y2.begin(), y2.end(), std::back_inserter(both));
    DOMPROPS_CHECK(r.restrict(all_vars(n)).equals(r));
    DOMPROPS_CHECK(r.restrict({}).equals(r.is_bot() ? r : Num::top(n)));
    DOMPROPS_CHECK(r.leq(r.restrict(y1)));
    DOMPROPS_CHECK(r.restrict(y1).restrict(y2).equals(r.restrict(both)));
    DOMPROPS_CHECK(r.restrict(y1).restrict(y1).equals(r.restrict(y1)));
    DOMPROPS_CHECK(r.restrict(y1).leq(r.restrict(both)));
    if (r.is_bot()) continue;
    int x = static_cast<int>(rng() % n);
    Interval got = r.restrict(y1).bounds(x);
    if (std::binary_search(y1.begin(), y1.end(), x)) DOMPROPS_CHECK(got == r.bounds(x));
    else DOMPROPS_CHECK(got.is_top());
  }
  return {};
}

// Reconstruction from clusters of size <= k, and per-cluster joins.
template <class Num>
std::string decomposition_round_trip(int k, int trials = 500, unsigned seed = 19) {
  std::mt19937 rng(seed);
  for (int it = 0; it < trials; ++it) {
    int n = 2 + static_cast<int>(rng() % 4);
    Num a = random_rel<Num>(rng, n), b = random_rel<Num>(rng, n);
    auto vars = all_vars(n);
    auto da = decompose(a, vars, k);
    DOMPROPS_CHECK(recompose(da, n).equals(a));
    for (auto& [q, v] : da) DOMPROPS_CHECK(v.restrict(q).equals(v));
    auto dj = decompose(a.join(b), vars, k);
    auto db = decompose(b, vars, k);
    for (auto& [q, v] : dj) DOMPROPS_CHECK(v.equals(da.at(q).join(db.at(q))));
  }
  return {};
}

// Closure, assignment and guards checked against the points of random relations inside [0,4]^3.
inline std::string octagon_transfer_vs_enumeration(int trials = 200, unsigned seed = 29) {
  std::mt19937 rng(seed);
  const int n = 3;
  for (int it = 0; it < trials; ++it) {
    Octagon r = random_rel<Octagon>(rng, n);
    for (int v = 0; v < n; ++v)
      r = r.guard(atom(Atom::Rel::Le, lin({{v, -1}}))).guard(atom(Atom::Rel::Le, lin({{v, 1}}, -4)));
    Octagon c = r.closure();
    DOMPROPS_CHECK(c.equals(r));
    DOMPROPS_CHECK(c.closure().equals(c));
    for (int i = 0; i < 2 * n; ++i)
      for (int j = 0; j < 2 * n; ++j) DOMPROPS_CHECK(c.closure().entry(i, j) == c.entry(i, j));
    auto pts = gamma(r, n);
    DOMPROPS_CHECK(pts == gamma(c, n));
    if (!r.is_bot()) {
      // The closed bounds are exact on a box: each is attained by some point.
      for (int v = 0; v < n; ++v) {
        Interval b = r.bounds(v);
        bool lo = false, hi = false;
        for (auto& p : pts) {
          lo |= p[v] == b.lo;
          hi |= p[v] == b.hi;
        }
        DOMPROPS_CHECK(lo && hi);
      }
    }
    int x = static_cast<int>(rng() % n), y = static_cast<int>(rng() % n);
    i64 k = static_cast<i64>(rng() % 5) - 2, s = rng() % 2 ? 1 : -1;
    Lin e = lin({{y, s}}, k);
    Octagon a = r.assign(x, e);
    Formula g = atom(Atom::Rel::Le, lin({{x, 1}, {y, s}}, k));
    Octagon gd = r.guard(g);
    std::set<std::vector<i64>> kept;
    for (auto& p : pts) {
      auto val = [&](int v) { return p[v]; };
      auto q = p;
      q[x] = eval_lin(e, val);
      DOMPROPS_CHECK(a.contains(q));
      if (eval_formula(g, val)) {
        kept.insert(p);
        DOMPROPS_CHECK(gd.contains(p));
      }
    }
    // Octagonal guards on a closed box are exact.
    for (auto& p : gamma(gd, n)) DOMPROPS_CHECK(kept.count(p));
  }
  return {};
}

#undef DOMPROPS_CHECK

}  // namespace domprops
