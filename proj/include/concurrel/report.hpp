#pragma once

#include <json.hpp>

#include <sstream>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "oracle.hpp"

namespace concurrel {

struct AssertLine {
  SourceLoc loc;
  std::string text;
  bool proven = false;
};

/* Everything a front end prints about one analysis run, independent of the numeric domain. */
struct RunReport {
  std::string file;
  std::string config;
  std::vector<AssertLine> asserts;
  std::vector<LockInvariant> invariants;
  std::vector<Diagnostic> warnings;
  SolverStats stats;
  double wall_ms = 0;
  std::string solution;
  std::optional<SoundnessReport> oracle;

  bool all_proven() const {
    for (auto& a : asserts)
      if (!a.proven) return false;
    return true;
  }
  bool unsound() const { return oracle && !oracle->ok(); }
};

inline std::string describe(const AnalysisConfig& c) {
  static const char* modes[] = {"base", "tids", "clusters"};
  static const char* cms[] = {"monolithic", "le-", "all"};
  std::string s = std::string("domain=") + to_string(c.domain) + " mode=" + modes[static_cast<int>(c.mode)] + " clusters=" +
                  cms[static_cast<int>(c.clusters)];
  if (c.clusters == ClusterMode::LeK) s += std::to_string(c.cluster_size);
  s += " digest=" + c.digest.str();
  if (c.exclude_ancestor_writes) s += " exclude-ancestor-writes";
  return s;
}

template <class Num>
RunReport make_report(const Analysis<Num>& an, bool with_solution) {
  RunReport r;
  r.file = an.program.file;
  r.config = describe(an.config);
  for (auto& v : an.asserts()) r.asserts.push_back({v.loc, v.text, v.proven});
  r.invariants = an.lock_invariants();
  r.warnings = an.protection.warnings;
  r.stats = an.stats;
  r.wall_ms = an.wall_ms;
  if (with_solution) r.solution = an.dump;
  return r;
}

// Runs the analysis with the domain named in the config.
inline RunReport run_analysis(const Program& p, const AnalysisConfig& c, bool with_solution = false,
                              const std::optional<OracleBounds>& oracle = std::nullopt) {
  return with_domain(c.domain, [&]<class Num>() {
    auto an = analyze<Num>(p, c);
    RunReport r = make_report(an, with_solution);
    if (oracle) r.oracle = check_soundness(an, *oracle);
    return r;
  });
}

inline std::string render_text(const RunReport& r, bool invariants, bool stats = true) {
  std::ostringstream os;
  for (auto& a : r.asserts)
    os << r.file << ":" << a.loc.line << ":" << a.loc.col << ": assert(" << a.text << ") "
       << (a.proven ? "PROVEN" : "UNKNOWN") << "\n";
  if (invariants)
    for (auto& i : r.invariants)
      os << r.file << ":" << i.loc.line << ":" << i.loc.col << ": after lock(" << i.mutex << ") at " << i.point << ": "
         << i.text << "\n";
  if (r.oracle) {
    const auto& ex = r.oracle->explore;
    os << "oracle: " << ex.states << " states" << (ex.partial ? " (bounded)" : "") << ", "
       << r.oracle->witnesses.size() << " witnesses\n";
    for (auto& w : r.oracle->witnesses) os << w.render();
  }
  if (!r.solution.empty()) os << r.solution;
  if (stats)
    os << "stats: unknowns=" << r.stats.unknowns << " evaluations=" << r.stats.evaluations << " wall_ms=" << r.wall_ms
       << "\n";
  return os.str();
}

inline nlohmann::json to_json(const RunReport& r) {
  nlohmann::json j;
  j["file"] = r.file;
  j["config"] = r.config;
  j["asserts"] = nlohmann::json::array();
  for (auto& a : r.asserts)
    j["asserts"].push_back({{"file", r.file},
                            {"line", a.loc.line},
                            {"col", a.loc.col},
                            {"text", a.text},
                            {"verdict", a.proven ? "PROVEN" : "UNKNOWN"}});
  j["invariants"] = nlohmann::json::array();
  for (auto& i : r.invariants)
    j["invariants"].push_back(
        {{"line", i.loc.line}, {"col", i.loc.col}, {"point", i.point}, {"mutex", i.mutex}, {"invariant", i.text}});
  j["warnings"] = nlohmann::json::array();
  for (auto& w : r.warnings) j["warnings"].push_back(render(w, r.file));
  j["stats"] = {{"unknowns", r.stats.unknowns}, {"evaluations", r.stats.evaluations}, {"wall_ms", r.wall_ms}};
  if (r.oracle) {
    nlohmann::json o;
    o["states"] = r.oracle->explore.states;
    o["partial"] = r.oracle->explore.partial;
    o["witnesses"] = nlohmann::json::array();
    for (auto& w : r.oracle->witnesses) o["witnesses"].push_back({{"reason", w.reason}, {"trace", w.trace}});
    j["oracle"] = o;
  }
  if (!r.solution.empty()) j["solution"] = r.solution;
  return j;
}

/* Point-wise precision comparison of several configurations over one program. Values are joined
   over locksets and digests and compared on the integer variables, since the thread id components
   are represented differently with and without the id digest. */
struct Comparison {
  enum class Order { Equal, Less, Greater, Incomparable };
  std::vector<std::string> configs;
  struct Row {
    std::string point;
    std::vector<std::vector<Order>> order;  // order[i][j]: config i relative to config j
  };
  std::vector<Row> points;
  std::vector<std::pair<AssertLine, std::vector<bool>>> verdicts;

  // Points where config a is strictly less precise than config b.
  int worse(size_t a, size_t b) const {
    int n = 0;
    for (auto& r : points)
      if (r.order[a][b] == Order::Greater) ++n;
    return n;
  }
  bool all_equal() const {
    for (auto& r : points)
      for (auto& row : r.order)
        for (auto o : row)
          if (o != Order::Equal) return false;
    for (auto& [a, vs] : verdicts)
      for (bool v : vs)
        if (v != vs.front()) return false;
    return true;
  }
};

inline const char* to_string(Comparison::Order o) {
  switch (o) {
    case Comparison::Order::Equal: return "=";
    case Comparison::Order::Less: return "<";
    case Comparison::Order::Greater: return ">";
    case Comparison::Order::Incomparable: return "<>";
  }
  return "?";
}

inline Comparison compare(const Program& p, const std::vector<AnalysisConfig>& cs) {
  if (cs.size() < 2) throw ConfigError("compare needs at least two configurations");
  for (auto& c : cs)
    if (c.domain != cs.front().domain) throw ConfigError("compared configurations must share a domain");
  return with_domain(cs.front().domain, [&]<class Num>() {
    using R = Relation<Num>;
    Comparison out;
    std::vector<Analysis<Num>> runs;
    for (auto& c : cs) {
      runs.push_back(analyze<Num>(p, c));
      out.configs.push_back(describe(c));
    }
    const Cfg& g = runs.front().cfg;
    std::vector<int> ints;
    for (int v = 0; v < g.vars.size(); ++v)
      if (!g.vars.is_tid(v)) ints.push_back(v);
    for (int u = 0; u < static_cast<int>(g.out.size()); ++u) {
      std::vector<R> vals;
      for (auto& a : runs) vals.push_back(a.joined_at(u).restrict(ints));
      Comparison::Row row{g.point_name(u), {}};
      for (size_t i = 0; i < vals.size(); ++i) {
        row.order.emplace_back();
        for (size_t j = 0; j < vals.size(); ++j) {
          bool le = vals[i].leq(vals[j]), ge = vals[j].leq(vals[i]);
          row.order.back().push_back(le && ge ? Comparison::Order::Equal
                                     : le     ? Comparison::Order::Less
                                     : ge     ? Comparison::Order::Greater
                                              : Comparison::Order::Incomparable);
        }
      }
      out.points.push_back(std::move(row));
    }
    auto first = runs.front().asserts();
    for (size_t k = 0; k < first.size(); ++k) {
      std::vector<bool> vs;
      for (auto& a : runs) vs.push_back(a.asserts()[k].proven);
      out.verdicts.push_back({{first[k].loc, first[k].text, first[k].proven}, vs});
    }
    return out;
  });
}

inline std::string render_comparison(const Comparison& c, const std::string& file) {
  std::ostringstream os;
  for (size_t i = 0; i < c.configs.size(); ++i) os << "[" << i << "] " << c.configs[i] << "\n";
  for (auto& r : c.points) {
    os << r.point << ":";
    for (size_t i = 0; i < r.order.size(); ++i)
      for (size_t j = i + 1; j < r.order.size(); ++j) os << " " << i << to_string(r.order[i][j]) << j;
    os << "\n";
  }
  for (auto& [a, vs] : c.verdicts) {
    os << file << ":" << a.loc.line << ":" << a.loc.col << ": assert(" << a.text << ")";
    for (bool v : vs) os << " " << (v ? "PROVEN" : "UNKNOWN");
    os << "\n";
  }
  return os.str();
}

}  // namespace concurrel
