#include <gtest/gtest.h>

#include <random>

#include "concurrel/analysis.hpp"
#include "concurrel/frontend.hpp"

using namespace concurrel;

namespace {

/* A small side-effecting system over intervals, keyed by strings. */
struct IVal {
  Interval v = Interval::bot();
  bool is_bot() const { return v.is_bot(); }
  IVal join(const IVal& o) const { return {v.join(o.v)}; }
  IVal widen(const IVal& o) const { return {v.widen(v.join(o.v))}; }
  bool leq(const IVal& o) const { return v.leq(o.v); }
};

struct ToySys {
  using Key = std::string;
  using Value = IVal;
  using Family = int;
  using Ctx = SolverCtx<Key, Value, Family>;

  std::function<void(const Key&, const Value&, Ctx&)> rhs;
  std::set<Key> widen_at;
  std::map<Key, std::vector<Interval>> seen;

  std::optional<Family> family(const Key& k) const {
    if (k.rfind("fam", 0) == 0) return 0;
    return std::nullopt;
  }
  bool widening_point(const Key& k) const { return widen_at.count(k) > 0; }
  void evaluate(const Key& k, const Value& v, Ctx& ctx) const {
    const_cast<ToySys*>(this)->seen[k].push_back(v.v);
    if (rhs) rhs(k, v, ctx);
  }
  std::string key_str(const Key& k) const { return k; }
  std::string value_str(const Value& v) const { return v.v.str(); }
};

SolverOptions opts() {
  SolverOptions o;
  o.step_budget = 10000;
  return o;
}

}  // namespace

TEST(Solver, SeedOnly) {
  ToySys sys;
  Solver<ToySys> s(sys, opts());
  s.seed("start", {Interval::point(1)});
  s.solve();
  ASSERT_EQ(s.values().size(), 1u);
  EXPECT_EQ(s.values().at("start").v, Interval::point(1));
  EXPECT_TRUE(s.dependencies("start").empty());
  EXPECT_TRUE(s.dependencies("never").empty());
}

TEST(Solver, SelfLoopIsWidened) {
  ToySys sys;
  sys.widen_at = {"x"};
  sys.rhs = [](const std::string& k, const IVal& v, ToySys::Ctx& ctx) {
    if (k == "start") ctx.emit("x", {Interval::point(0)});
    if (k == "x") ctx.emit("x", {v.v + Interval::range(0, 1)});
  };
  Solver<ToySys> s(sys, opts());
  s.seed("start", {Interval::point(0)});
  s.solve();
  Interval x = s.values().at("x").v;
  EXPECT_EQ(x.lo, 0);
  EXPECT_GE(x.hi, kPosInf);
  EXPECT_TRUE(s.verify().empty());
}

TEST(Solver, SideEffectsReachReaders) {
  ToySys sys;
  sys.rhs = [](const std::string& k, const IVal&, ToySys::Ctx& ctx) {
    if (k == "start") {
      ctx.emit("a1", {Interval::point(1)});
      ctx.emit("c", {Interval::point(0)});
    }
    if (k == "a1") {
      ctx.emit("b", {Interval::point(1)});
      ctx.emit("a2", {Interval::point(2)});
    }
    if (k == "a2") ctx.emit("b", {Interval::point(5)});
    if (k == "c") {
      const IVal* b = ctx.get("b");
      if (b) ctx.emit("d", *b);
    }
  };
  Solver<ToySys> s(sys, opts());
  s.seed("start", {Interval::point(0)});
  s.solve();
  EXPECT_EQ(s.values().at("b").v, Interval::range(1, 5));
  EXPECT_EQ(s.values().at("d").v, Interval::range(1, 5));
  EXPECT_EQ(s.dependencies("c"), (std::set<std::string>{"b"}));
  EXPECT_TRUE(s.verify().empty());
  // Values seen by every unknown only grow.
  for (auto& [k, vs] : sys.seen)
    for (size_t i = 1; i < vs.size(); ++i) EXPECT_TRUE(vs[i - 1].leq(vs[i])) << k;
}

TEST(Solver, FamilyMembersTriggerReaders) {
  ToySys sys;
  sys.rhs = [](const std::string& k, const IVal&, ToySys::Ctx& ctx) {
    if (k == "start") {
      ctx.emit("reader", {Interval::point(0)});
      ctx.emit("w", {Interval::point(0)});
    }
    if (k == "w") ctx.emit("fam-late", {Interval::point(9)});
    if (k == "reader") {
      IVal acc;
      for (auto& m : ctx.family(0))
        if (auto* v = ctx.get(m)) acc = acc.join(*v);
      if (!acc.is_bot()) ctx.emit("sum", acc);
    }
  };
  Solver<ToySys> s(sys, opts());
  s.seed("start", {Interval::point(0)});
  s.solve();
  ASSERT_TRUE(s.values().count("sum"));
  EXPECT_EQ(s.values().at("sum").v, Interval::point(9));
}

TEST(Solver, BudgetIsEnforced) {
  ToySys sys;
  int n = 0;
  sys.rhs = [&n](const std::string&, const IVal&, ToySys::Ctx& ctx) {
    ctx.emit("k" + std::to_string(n++), {Interval::point(0)});
  };
  SolverOptions o;
  o.step_budget = 50;
  Solver<ToySys> s(sys, o);
  s.seed("start", {Interval::point(0)});
  EXPECT_THROW(s.solve(), BudgetExceeded);
}

TEST(Solver, BudgetFromEnvironment) {
  setenv("CONCURREL_STEP_BUDGET", "1234", 1);
  EXPECT_EQ(SolverOptions::from_env().step_budget, 1234);
  unsetenv("CONCURREL_STEP_BUDGET");
  EXPECT_EQ(SolverOptions::from_env().step_budget, 1000000);
}

// ---- digests ----

namespace {

Action lock_of(int m) {
  Action a;
  a.kind = Action::Kind::Lock;
  a.mutex = m;
  return a;
}

Action join_act() {
  Action a;
  a.kind = Action::Kind::Join;
  return a;
}

AbstractTid tid(std::vector<CreateEdge> prefix, std::set<CreateEdge> spill = {}) { return {std::move(prefix), std::move(spill)}; }

const CreateEdge u1t1{1, 100}, u2t1{2, 100}, u3t1{3, 100};

}  // namespace

TEST(LocksetDigest, Effects) {
  DigestSpec spec{true, false, false};
  Digest d0, other;
  other.S = {0};
  auto r = digest::binary(spec, lock_of(0), d0, other);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->S, (Lockset{0}));
  Program p = parse_program("mutex a, b; thread main { lock(a); lock(b); unlock(a); x = 1; }");
  Cfg g = build_cfg(p);
  Digest ab;
  ab.S = {0, 1};
  auto u = digest::unary(spec, g, g.edges[2], ab);
  EXPECT_EQ(u->S, (Lockset{1}));
  EXPECT_EQ(digest::unary(spec, g, g.edges[3], *u)->S, (Lockset{1}));
}

TEST(LockOnceDigest, Effects) {
  DigestSpec spec{false, true, false};
  Digest a, none, b;
  a.L = {0};
  b.L = {1};
  EXPECT_FALSE(digest::binary(spec, lock_of(0), a, none));
  auto r = digest::binary(spec, lock_of(0), none, none);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->L, (std::set<int>{0}));
  auto j = digest::binary(spec, join_act(), a, b);
  ASSERT_TRUE(j);
  EXPECT_EQ(j->L, (std::set<int>{0, 1}));
  EXPECT_EQ(digest::new_thread(spec, 1, 100, a)->L, a.L);
}

TEST(ThreadIds, Compose) {
  EXPECT_EQ(compose(AbstractTid::main(), u1t1), tid({u1t1}));
  AbstractTid once = compose(tid({u1t1}), u3t1);
  EXPECT_EQ(once, tid({u1t1, u3t1}));
  EXPECT_EQ(compose(once, u3t1), tid({u1t1}, {u3t1}));
  EXPECT_EQ(compose(tid({}, {u2t1}), u3t1), tid({}, {u2t1, u3t1}));
}

TEST(ThreadIds, ComposeNeverDuplicatesEdges) {
  std::mt19937 rng(3);
  std::vector<CreateEdge> edges{u1t1, u2t1, u3t1, {4, 200}, {5, 200}};
  for (int it = 0; it < 2000; ++it) {
    AbstractTid t = AbstractTid::main();
    int len = static_cast<int>(rng() % 8);
    for (int k = 0; k < len; ++k) {
      t = compose(t, edges[rng() % edges.size()]);
      std::set<CreateEdge> seen;
      for (auto& e : t.prefix) ASSERT_TRUE(seen.insert(e).second);
      for (auto& e : t.spill) ASSERT_TRUE(seen.insert(e).second);
    }
  }
}

TEST(ThreadIds, NewThread) {
  DigestSpec spec{false, false, true};
  Digest m;
  auto first = digest::new_thread(spec, 2, 100, m);
  EXPECT_EQ(first->tid, tid({u2t1}));
  EXPECT_TRUE(first->C.empty());
  m.C = {u2t1};
  EXPECT_EQ(digest::new_thread(spec, 2, 100, m)->tid, tid({}, {u2t1}));
  Digest spilled;
  spilled.tid = tid({}, {u2t1});
  EXPECT_EQ(digest::new_thread(spec, 3, 100, spilled)->tid, tid({}, {u2t1, u3t1}));
}

TEST(ThreadIds, Queries) {
  EXPECT_TRUE(AbstractTid::main().unique());
  EXPECT_FALSE(tid({}, {u1t1}).unique());
  CreateEdge e1{1, 10}, e2{2, 20}, e3{3, 30};
  EXPECT_EQ(lcu_anc(tid({e1, e2}), tid({e1, e3})), tid({e1}));
  EXPECT_TRUE(may_create(tid({e1}), tid({e1, e2})));
  EXPECT_FALSE(may_create(tid({e1, e2}), tid({e1})));
  Digest ego, child;
  child.tid = tid({u1t1});
  EXPECT_FALSE(may_run(ego, child));
  ego.C = {u1t1};
  EXPECT_TRUE(may_run(ego, child));
}

TEST(TidDigest, Effects) {
  DigestSpec spec{false, false, true};
  EXPECT_EQ(digest::init(spec), Digest{});
  Program p = parse_program("thread main { x = create(t1); } thread t1 { }");
  Cfg g = build_cfg(p);
  const Edge& create = g.edges[0];
  Digest d = *digest::unary(spec, g, create, Digest{});
  EXPECT_EQ(d.C, (std::set<CreateEdge>{{create.src, g.templates[1].start}}));
  Digest before, t3;
  t3.tid = tid({{7, 70}});
  EXPECT_FALSE(digest::binary(spec, lock_of(0), before, t3));
  before.C = {{7, 70}};
  EXPECT_TRUE(digest::binary(spec, lock_of(0), before, t3));
}

TEST(ProductDigest, ComponentsAdvanceTogether) {
  DigestSpec spec{true, true, true};
  Digest ego, other;
  other.L = {0};
  auto r = digest::binary(spec, lock_of(0), ego, other);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->S, (Lockset{0}));
  EXPECT_EQ(r->L, (std::set<int>{0}));
  ego.L = {0};
  EXPECT_FALSE(digest::binary(spec, lock_of(0), ego, Digest{}));
  Digest unstarted;
  unstarted.tid = tid({u1t1});
  unstarted.L = {0};
  EXPECT_FALSE(digest::binary(spec, lock_of(0), Digest{}, unstarted));
  Program p = parse_program("thread main { x = 1; }");
  Cfg g = build_cfg(p);
  EXPECT_EQ(*digest::unary(spec, g, g.edges[0], *r), *r);
}

TEST(DigestKeys, CollapseDropsCreateSet) {
  Digest d;
  d.C = {u1t1};
  EXPECT_TRUE(digest::key(d, true).C.empty());
  EXPECT_EQ(digest::key(d, false).C, d.C);
}
