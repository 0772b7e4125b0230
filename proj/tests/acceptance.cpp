// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <iostream>

#include "domain_props.hpp"
#include "properties.hpp"

using namespace concurrel;
using testutil::load;
using testutil::preset;

namespace {

int failures = 0;

void report(int n, bool ok, const std::string& what, const std::string& detail = "") {
  std::cout << (ok ? "PASS" : "FAIL") << " " << n << ": " << what;
  if (!detail.empty()) std::cout << " (" << detail << ")";
  std::cout << "\n";
  if (!ok) ++failures;
}

std::string verdicts(const std::string& program, const AnalysisConfig& c) {
  return testutil::verdict_string(run_analysis(load(program), c));
}

// Compares the verdict strings and describes the mismatch.
bool expect(const std::string& program, const AnalysisConfig& c, const std::string& want, std::string& detail) {
  std::string got = verdicts(program, c);
  if (got == want) return true;
  if (!detail.empty()) detail += "; ";
  detail += program + " " + describe(c) + ": got " + got + ", want " + want;
  return false;
}

void criterion1() {
  std::string d;
  bool ok = expect("clustered_equalities", preset("clusters"), "PP", d);
  ok &= expect("clustered_equalities", preset("tids"), "PU", d);
  report(1, ok, "clustered equalities: clusters prove both, one cluster {g,h,i} proves only the first", d);
}

void criterion2() {
  std::string d;
  bool ok = expect("two_mutex_pair", preset("octagon"), "PPPP", d);
  report(2, ok, "two mutexes: base analysis with octagons proves all four asserts", d);
}

void criterion3() {
  std::string d;
  AnalysisConfig c = preset("octagon", DomainKind::EqLt);
  bool ok = expect("lock_once", c, "U", d);
  c.digest.lock_once = true;
  ok &= expect("lock_once", c, "P", d);
  report(3, ok, "lock-once digest proves h <= g; the base analysis alone does not", d);
}

void criterion4() {
  std::string d;
  bool ok = expect("not_yet_created", preset("tids"), "PPP", d);
  std::string oct = verdicts("not_yet_created", preset("octagon"));
  if (oct.size() != 3 || oct[0] != 'U' || oct[2] != 'U') {
    ok = false;
    d += "octagon proves " + oct;
  }
  report(4, ok, "thread ids prove all three asserts about not yet created threads; octagon proves neither (1) nor (3)", d);
}

void criterion5() {
  std::string d;
  bool ok = expect("joined_writes", preset("tids"), "PP", d);
  report(5, ok, "writes of joined threads are accounted: both asserts proven", d);
}

void criterion6() {
  std::string d;
  bool ok = expect("singleton_cluster", testutil::with_clusters(preset("clusters"), {"a:g,h"}), "PUP", d);
  ok &= expect("singleton_cluster", testutil::with_clusters(preset("clusters"), {"a:g,h", "a:h"}), "PPP", d);
  report(6, ok, "cluster {g,h} proves (1),(3) but not (2); adding {h} proves (2)", d);
}

void criterion7() {
  // The second assert in source order is the one in t1.
  std::string d;
  AnalysisConfig c = preset("tids");
  std::string off = verdicts("ancestor_writes", c);
  c.exclude_ancestor_writes = true;
  std::string on = verdicts("ancestor_writes", c);
  bool ok = off.size() == 2 && on.size() == 2 && off[1] == 'U' && on[1] == 'P';
  report(7, ok, "excluding ancestor writes proves the assert in t1; without it, unproven",
         "without " + off + ", with " + on);
}

void criterion8() {
  auto names = testutil::corpus();
  int discrepancies = 0;
  std::string first;
  for (auto& name : names) {
    Program p = load(name);
    for (auto d : {DomainKind::EqConst, DomainKind::Octagon}) {
      auto found = with_domain(d, [&]<class Num>() { return testutil::small_cluster_discrepancies<Num>(p, d); });
      discrepancies += static_cast<int>(found.size());
      if (first.empty() && !found.empty()) first = name + " " + to_string(d) + " " + found.front();
    }
  }
  bool ok = names.size() >= 12 && discrepancies == 0;
  report(8, ok, "clusters of size <= 2 are as precise as all subsets (eqconst, octagon)",
         std::to_string(names.size()) + " programs, " + std::to_string(discrepancies) + " discrepancies" +
             (first.empty() ? "" : ", first: " + first));
}

void criterion9() {
  OracleBounds b;
  b.max_steps_per_thread = 12;
  b.havoc_values = {0, 1, 2};
  int runs = 0, witnesses = 0;
  std::string first;
  for (auto& name : testutil::corpus())
    for (const char* pr : {"octagon", "tids", "clusters"}) {
      auto r = run_analysis(load(name), preset(pr), false, b);
      ++runs;
      witnesses += static_cast<int>(r.oracle->witnesses.size());
      if (first.empty() && !r.oracle->ok()) first = name + " " + pr + ": " + r.oracle->witnesses.front().reason;
    }
  struct Case {
    Mutation m;
    const char* program;
    const char* preset;
  };
  const Case cases[] = {
      {Mutation::DropUnlockPublish, "clustered_equalities", "octagon"},
      {Mutation::KeepGlobalsAfterUnlock, "monotone_counter", "octagon"},
      {Mutation::AssignDropsConstant, "counter_pair", "octagon"},
      {Mutation::AccAlwaysTrue, "joined_writes", "tids"},
      {Mutation::JoinIgnoresReturn, "join_result", "tids"},
  };
  int caught = 0;
  for (auto& c : cases) {
    AnalysisConfig cfg = preset(c.preset);
    cfg.mutation = c.m;
    if (run_analysis(load(c.program), cfg, false, b).unsound()) ++caught;
  }
  bool ok = witnesses == 0 && caught >= 3;
  report(9, ok, "bounded oracle finds no unsound state or violated proven assert; mutations are caught",
         std::to_string(runs) + " runs, " + std::to_string(witnesses) + " witnesses, " + std::to_string(caught) + "/" +
             std::to_string(std::size(cases)) + " mutations caught" + (first.empty() ? "" : ", first: " + first));
}

void criterion10() {
  std::vector<std::pair<std::string, std::string>> results{
      {"lattice eqconst", domprops::lattice_laws<EqConst>()},
      {"lattice octagon", domprops::lattice_laws<Octagon>()},
      {"lattice interval", domprops::lattice_laws<IntervalDomain>()},
      {"lattice eqlt", domprops::lattice_laws<EqLt>()},
      {"restrict eqconst", domprops::restriction_laws<EqConst>()},
      {"restrict octagon", domprops::restriction_laws<Octagon>()},
      {"restrict interval", domprops::restriction_laws<IntervalDomain>()},
      {"restrict eqlt", domprops::restriction_laws<EqLt>()},
      {"pairs eqconst", domprops::decomposition_round_trip<EqConst>(2)},
      {"pairs octagon", domprops::decomposition_round_trip<Octagon>(2)},
      {"pairs eqlt", domprops::decomposition_round_trip<EqLt>(2)},
      {"singletons interval", domprops::decomposition_round_trip<IntervalDomain>(1, 500, 23)},
      {"octagon transfers", domprops::octagon_transfer_vs_enumeration()},
  };
  std::string d;
  for (auto& [name, err] : results)
    if (!err.empty()) d += (d.empty() ? "" : "; ") + name + ": " + err;
  report(10, d.empty(), "domain property suites", d.empty() ? std::to_string(results.size()) + " suites" : d);
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << "\n";
  return failures == 0 ? 0 : 1;
}
