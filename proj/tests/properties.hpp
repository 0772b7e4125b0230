#pragma once
// Corpus expectations and whole-run property checks shared by the unit tests and the acceptance binary.

#include <string>
#include <vector>

#include "concurrel/report.hpp"
#include "test_util.hpp"

namespace testutil {

using namespace concurrel;

struct Expectation {
  std::string program;
  std::string label;
  AnalysisConfig config;
  std::string verdicts;  // one letter per assert in source order: P proven, U unknown
};

inline AnalysisConfig preset(const std::string& name, std::optional<DomainKind> domain = std::nullopt) {
  AnalysisConfig c = AnalysisConfig::preset(name);
  if (domain) c.domain = *domain;
  return c;
}

inline AnalysisConfig with_clusters(AnalysisConfig c, std::vector<std::string> specs) {
  for (auto& s : specs) {
    auto colon = s.find(':');
    std::vector<std::string> q;
    std::string cur;
    for (char ch : s.substr(colon + 1)) {
      if (ch == ',') q.push_back(cur), cur.clear();
      else cur += ch;
    }
    q.push_back(cur);
    c.explicit_clusters[s.substr(0, colon)].push_back(q);
  }
  return c;
}

inline std::vector<Expectation> expectations() {
  std::vector<Expectation> out;
  auto add = [&](std::string prog, std::string label, AnalysisConfig c, std::string v) {
    out.push_back({std::move(prog), std::move(label), std::move(c), std::move(v)});
  };
  add("clustered_equalities", "clusters", preset("clusters"), "PP");
  add("clustered_equalities", "tids monolithic", preset("tids"), "PU");
  add("two_mutex_pair", "octagon", preset("octagon"), "PPPP");
  {
    AnalysisConfig base = preset("octagon", DomainKind::EqLt);
    add("lock_once", "base", base, "U");
    base.digest.lock_once = true;
    add("lock_once", "base + lock-once", base, "P");
  }
  add("not_yet_created", "tids", preset("tids"), "PPP");
  add("not_yet_created", "octagon", preset("octagon"), "UUU");
  {
    AnalysisConfig t = preset("tids");
    add("ancestor_writes", "tids", t, "UU");
    t.exclude_ancestor_writes = true;
    add("ancestor_writes", "tids + exclude-ancestor-writes", t, "UP");
  }
  add("joined_writes", "tids", preset("tids"), "PP");
  add("singleton_cluster", "clusters {g,h}", with_clusters(preset("clusters"), {"a:g,h"}), "PUP");
  add("singleton_cluster", "clusters {g,h} {h}", with_clusters(preset("clusters"), {"a:g,h", "a:h"}), "PPP");
  add("monotone_counter", "octagon", preset("octagon"), "U");
  add("monotone_counter", "tids", preset("tids"), "P");
  add("monotone_counter", "clusters", preset("clusters"), "P");
  return out;
}

inline std::string verdict_string(const RunReport& r) {
  std::string s;
  for (auto& a : r.asserts) s += a.proven ? 'P' : 'U';
  return s;
}

inline AnalysisConfig all_subsets(DomainKind d) {
  AnalysisConfig c = preset("clusters", d);
  c.clusters = ClusterMode::All;
  return c;
}

/* Runs clusters(size <= 2) and clusters(all subsets) and lists every place where the small run is
   not exactly as precise: differing verdicts, differing point or return values, and mutex cluster
   values that differ from the meet of the restrictions of all larger clusters. */
template <class Num>
std::vector<std::string> small_cluster_discrepancies(const Program& p, DomainKind d) {
  using R = Relation<Num>;
  AnalysisConfig small = preset("clusters", d), big = all_subsets(d);
  auto a = analyze<Num>(p, small);
  auto b = analyze<Num>(p, big);
  auto sys = a.system();
  std::vector<std::string> out;
  auto va = a.asserts(), vb = b.asserts();
  for (size_t i = 0; i < va.size(); ++i)
    if (va[i].proven != vb[i].proven) out.push_back("verdict of assert(" + va[i].text + ")");
  auto same = [](const R& x, const R& y) { return x.leq(y) && y.leq(x); };
  for (auto& [k, v] : a.values) {
    if (k.kind == Key::Start) continue;
    if (k.kind == Key::Mutex) {
      R proj = R::top(a.cfg.vars.size()).restrict(k.cluster);
      bool any = false;
      for (auto& [k2, v2] : b.values) {
        if (k2.kind != Key::Mutex || k2.id != k.id || k2.d != k.d) continue;
        if (!std::includes(k2.cluster.begin(), k2.cluster.end(), k.cluster.begin(), k.cluster.end())) continue;
        proj = proj.meet(v2.r.restrict(k.cluster));
        any = true;
      }
      if (!any) proj = R::bot(a.cfg.vars.size());
      if (!same(v.r, proj)) out.push_back(sys.key_str(k));
      continue;
    }
    auto it = b.values.find(k);
    R other = it == b.values.end() ? R::bot(a.cfg.vars.size()) : it->second.r;
    if (!same(v.r, other)) out.push_back(sys.key_str(k));
  }
  for (auto& [k, v] : b.values)
    if ((k.kind == Key::Point || k.kind == Key::Ret) && !v.is_bot() && !a.values.count(k)) out.push_back(sys.key_str(k));
  return out;
}

}  // namespace testutil
