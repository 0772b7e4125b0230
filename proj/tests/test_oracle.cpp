#include <gtest/gtest.h>

#include "properties.hpp"

using namespace concurrel;
using testutil::load;
using testutil::preset;

namespace {

ExploreResult explore(const Program& p, OracleBounds b = {}, std::function<void(const ConcreteState&)> visit = {}) {
  Cfg g = build_cfg(p);
  return Explorer(g, DigestSpec{}, std::move(b)).run(visit);
}

}  // namespace

TEST(Oracle, StraightLineHasOneFinalState) {
  Program p = parse_program("thread main { x = 1; y = x + 2; }");
  Cfg g = build_cfg(p);
  int finals = 0;
  auto res = explore(p, {}, [&](const ConcreteState& s) {
    if (g.out[s.threads[0].point].empty()) ++finals;
  });
  EXPECT_EQ(finals, 1);
  EXPECT_EQ(res.schedules, 1);
  EXPECT_EQ(res.states, 3);
  EXPECT_FALSE(res.partial);
}

TEST(Oracle, BothWritesOfSharedGlobalAreObserved) {
  Program p = load("create_join_chain");
  Cfg g = build_cfg(p);
  int gv = g.vars.find("g");
  std::set<i64> seen;
  explore(p, {}, [&](const ConcreteState& s) { seen.insert(s.globals[gv]); });
  EXPECT_TRUE(seen.count(1));
  EXPECT_TRUE(seen.count(2));
}

TEST(Oracle, InterleavingsAreCountedWithoutDedup) {
  Program p = parse_program("thread main { x = create(t1); } thread t1 { }");
  OracleBounds b;
  b.dedup = false;
  // The child is finished as soon as it exists, so only one order remains.
  EXPECT_EQ(explore(p, b).schedules, 1);
  Program two = parse_program("thread main { x = create(t1); y = 1; } thread t1 { z = 1; }");
  EXPECT_EQ(explore(two, b).schedules, 2);
}

TEST(Oracle, HavocTakesEveryBoundedValue) {
  Program p = parse_program("thread main { x = ?; }");
  Cfg g = build_cfg(p);
  int xv = g.vars.find("x");
  std::set<i64> xs;
  explore(p, {}, [&](const ConcreteState& s) {
    if (g.out[s.threads[0].point].empty()) xs.insert(s.threads[0].ints[xv]);
  });
  EXPECT_EQ(xs, (std::set<i64>{0, 1, 2}));
}

TEST(Oracle, AssertFailuresAreFound) {
  Program p = parse_program("thread main { x = ?; assert(x < 2); }");
  auto res = explore(p);
  ASSERT_EQ(res.assert_failures.size(), 1u);
  EXPECT_FALSE(res.assert_failures[0].witness.trace.empty());
}

TEST(Oracle, MutualExclusionIsRespected) {
  Program p = parse_program(
      "global g; mutex a; protect g with a;"
      "thread main { x = create(t1); lock(a); g = 1; v = g; assert(v == 1); unlock(a); }"
      "thread t1 { lock(a); g = 2; unlock(a); }");
  EXPECT_TRUE(explore(p).assert_failures.empty());
}

TEST(Oracle, ReachableSetIsDeterministic) {
  for (auto& name : testutil::corpus()) {
    Program p = load(name);
    OracleBounds b;
    b.max_steps_per_thread = 8;
    auto a = explore(p, b), c = explore(p, b);
    EXPECT_EQ(a.reachable, c.reachable) << name;
    EXPECT_EQ(a.states, c.states) << name;
  }
}

TEST(Oracle, NoViolationsInSingletonClusterProgram) {
  OracleBounds b;
  b.max_steps_per_thread = 40;
  auto res = explore(load("singleton_cluster"), b);
  EXPECT_TRUE(res.assert_failures.empty());
  EXPECT_FALSE(res.partial);
}

TEST(Oracle, StepBoundMarksPartial) {
  Program p = parse_program("thread main { x = 0; while (x < 100) { x = x + 1; } }");
  OracleBounds b;
  b.max_steps_per_thread = 5;
  auto res = explore(p, b);
  EXPECT_TRUE(res.partial);
  EXPECT_EQ(res.states, 6);
  b.max_steps_per_thread = 1000;
  b.max_states = 3;
  EXPECT_TRUE(explore(p, b).partial);
}

TEST(Soundness, CorpusHasNoWitnesses) {
  for (auto& name : testutil::corpus())
    for (const char* pr : {"interval", "octagon", "tids", "clusters"})
      with_domain(DomainKind::Octagon, [&]<class Num>() {
        auto an = analyze<Num>(load(name), preset(pr));
        auto rep = check_soundness(an, OracleBounds{});
        EXPECT_TRUE(rep.ok()) << name << " " << pr << "\n" << (rep.ok() ? "" : rep.witnesses.front().render());
      });
}

TEST(Soundness, OtherDomainsAndDigestsHaveNoWitnesses) {
  for (auto& name : testutil::corpus())
    for (auto d : {DomainKind::EqConst, DomainKind::EqLt})
      for (const char* pr : {"octagon", "tids", "clusters"}) {
        AnalysisConfig c = preset(pr, d);
        c.digest.lockset = c.digest.lock_once = true;
        auto r = run_analysis(load(name), c, false, OracleBounds{});
        EXPECT_FALSE(r.unsound()) << name << " " << pr << " " << to_string(d) << "\n"
                                  << (r.unsound() ? r.oracle->witnesses.front().render() : "");
      }
}

TEST(Soundness, UnreachablePointsNeedNoValue) {
  Program p = parse_program("thread main { x = 1; if (x > 1) { y = 3; } }");
  auto r = run_analysis(p, preset("octagon"), false, OracleBounds{});
  EXPECT_FALSE(r.unsound());
}

namespace {

struct MutationCase {
  Mutation m;
  std::string program;
  std::string preset;
};

}  // namespace

TEST(Soundness, MutationsAreCaught) {
  std::vector<MutationCase> cases{
      {Mutation::DropUnlockPublish, "clustered_equalities", "octagon"},
      {Mutation::KeepGlobalsAfterUnlock, "monotone_counter", "octagon"},
      {Mutation::AssignDropsConstant, "counter_pair", "octagon"},
      {Mutation::AccAlwaysTrue, "joined_writes", "tids"},
      {Mutation::JoinIgnoresReturn, "join_result", "tids"},
  };
  for (auto& mc : cases) {
    AnalysisConfig c = preset(mc.preset);
    c.mutation = mc.m;
    auto r = run_analysis(load(mc.program), c, false, OracleBounds{});
    ASSERT_TRUE(r.oracle);
    EXPECT_TRUE(r.unsound()) << mc.program << " mutation " << static_cast<int>(mc.m);
  }
}
