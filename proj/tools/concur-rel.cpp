// concur-rel: analyze a concurrent program and report assert verdicts.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "concurrel/frontend.hpp"
#include "concurrel/report.hpp"

using namespace concurrel;

namespace {

constexpr int kAllProven = 0;
constexpr int kSomeUnknown = 1;
constexpr int kError = 2;
constexpr int kUnsound = 3;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

DomainKind parse_domain(const std::string& s) {
  if (s == "eqconst") return DomainKind::EqConst;
  if (s == "octagon") return DomainKind::Octagon;
  if (s == "interval") return DomainKind::Interval;
  if (s == "eqlt") return DomainKind::EqLt;
  throw ConfigError("unknown domain '" + s + "'");
}

DigestSpec parse_digest(const std::string& s) {
  DigestSpec d;
  if (s == "none") return d;
  for (auto& part : split(s, ',')) {
    if (part == "lockset") d.lockset = true;
    else if (part == "lock-once") d.lock_once = true;
    else if (part == "tid") d.tid = true;
    else throw ConfigError("unknown digest '" + part + "'");
  }
  return d;
}

Mutation parse_mutation(const std::string& s) {
  static const std::map<std::string, Mutation> names{{"none", Mutation::None},
                                                     {"drop-unlock-publish", Mutation::DropUnlockPublish},
                                                     {"keep-globals-after-unlock", Mutation::KeepGlobalsAfterUnlock},
                                                     {"assign-drops-constant", Mutation::AssignDropsConstant},
                                                     {"acc-always-true", Mutation::AccAlwaysTrue},
                                                     {"join-ignores-return", Mutation::JoinIgnoresReturn}};
  auto it = names.find(s);
  if (it == names.end()) throw ConfigError("unknown mutation '" + s + "'");
  return it->second;
}

struct Options {
  std::string input;
  std::string preset = "clusters";
  std::string domain, digest, clusters, protections = "declared", format = "text", mutation = "none";
  std::vector<std::string> cluster_overrides, compare_with;
  int cluster_size = 0;
  bool oracle = false, dump_invariants = false, dump_solution = false, dump_cfg = false;
  bool exclude_ancestor_writes = false, keep_create_sets = false, narrowing = false;
  int oracle_steps = 12, oracle_threads = 6;
  long oracle_states = 300000;
};

AnalysisConfig make_config(const Options& o, const std::string& preset) {
  AnalysisConfig c = AnalysisConfig::preset(preset);
  if (!o.domain.empty()) c.domain = parse_domain(o.domain);
  if (!o.digest.empty()) {
    bool improved_tid = c.digest.tid && c.improved();
    c.digest = parse_digest(o.digest);
    c.digest.tid = c.digest.tid || improved_tid;
  }
  if (!o.clusters.empty()) {
    if (o.clusters == "monolithic") {
      c.clusters = ClusterMode::Monolithic;
    } else if (o.clusters == "all") {
      c.clusters = ClusterMode::All;
    } else if (o.clusters.rfind("le-", 0) == 0) {
      c.clusters = ClusterMode::LeK;
      c.cluster_size = std::stoi(o.clusters.substr(3));
    } else {
      throw ConfigError("unknown cluster mode '" + o.clusters + "'");
    }
  }
  if (o.cluster_size > 0) {
    c.clusters = ClusterMode::LeK;
    c.cluster_size = o.cluster_size;
  }
  if (c.cluster_size < 1) throw ConfigError("cluster size must be at least 1");
  for (auto& spec : o.cluster_overrides) {
    auto colon = spec.find(':');
    if (colon == std::string::npos) throw ConfigError("--cluster expects mutex:g,h, got '" + spec + "'");
    c.explicit_clusters[spec.substr(0, colon)].push_back(split(spec.substr(colon + 1), ','));
  }
  if (o.protections == "inferred") c.protections = ProtectionSource::Inferred;
  else if (o.protections != "declared") throw ConfigError("unknown protection source '" + o.protections + "'");
  c.exclude_ancestor_writes = o.exclude_ancestor_writes;
  c.collapse_keys = !o.keep_create_sets;
  c.solver.narrowing = o.narrowing;
  c.mutation = parse_mutation(o.mutation);
  return c;
}

int run(const Options& o) {
  std::ifstream in(o.input);
  if (!in) {
    std::cerr << o.input << ": error: cannot read file\n";
    return kError;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  Program p;
  try {
    p = parse_program(ss.str(), o.input);
  } catch (const SyntaxError& e) {
    std::cerr << render({e.loc, "error", e.what()}, o.input) << "\n";
    return kError;
  } catch (const NameError& e) {
    std::cerr << render({e.loc, "error", e.what()}, o.input) << "\n";
    return kError;
  }
  AnalysisConfig c = make_config(o, o.preset);
  auto diags = validate(p, c.protections);
  for (auto& d : diags) std::cerr << render(d, o.input) << "\n";
  if (has_errors(diags)) return kError;

  if (o.dump_cfg) {
    std::cout << dump_cfg(build_cfg(p));
    return kAllProven;
  }

  if (!o.compare_with.empty()) {
    std::vector<AnalysisConfig> cs{c};
    for (auto& pr : o.compare_with) cs.push_back(make_config(o, pr));
    std::cout << render_comparison(compare(p, cs), o.input);
    return kAllProven;
  }

  std::optional<OracleBounds> bounds;
  if (o.oracle) {
    bounds = OracleBounds{};
    bounds->max_steps_per_thread = o.oracle_steps;
    bounds->max_threads = o.oracle_threads;
    bounds->max_states = o.oracle_states;
  }
  RunReport r = run_analysis(p, c, o.dump_solution, bounds);
  for (auto& w : r.warnings) std::cerr << render(w, o.input) << "\n";
  if (o.format == "json") std::cout << to_json(r).dump(2) << "\n";
  else std::cout << render_text(r, o.dump_invariants, !o.dump_solution);
  if (r.unsound()) return kUnsound;
  return r.all_proven() ? kAllProven : kSomeUnknown;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thread-modular relational analysis of concurrent programs"};
  Options o;
  app.add_option("input", o.input, "Program to analyze")->required();
  app.add_option("--preset", o.preset, "interval, octagon, tids or clusters")
      ->check(CLI::IsMember({"interval", "octagon", "tids", "clusters"}));
  app.add_option("--domain", o.domain, "eqconst, octagon, interval or eqlt");
  app.add_option("--digest", o.digest, "comma list of lockset, lock-once, tid; or none");
  app.add_option("--clusters", o.clusters, "monolithic, le-k or all");
  app.add_option("--cluster-size", o.cluster_size, "publish clusters of at most k globals")->check(CLI::PositiveNumber);
  app.add_option("--cluster", o.cluster_overrides, "explicit cluster, e.g. a:g,h (repeatable)");
  app.add_option("--protections", o.protections, "declared or inferred");
  app.add_flag("--exclude-ancestor-writes", o.exclude_ancestor_writes,
               "skip writes a creating thread made before the ego thread existed");
  app.add_flag("--keep-create-sets", o.keep_create_sets, "keep created-thread sets in mutex and return keys");
  app.add_flag("--narrowing", o.narrowing, "run one narrowing pass after solving");
  app.add_option("--format", o.format, "text or json")->check(CLI::IsMember({"text", "json"}));
  app.add_flag("--dump-invariants", o.dump_invariants, "print the relation after every lock");
  app.add_flag("--dump-solution", o.dump_solution, "print the solved assignment");
  app.add_flag("--dump-cfg", o.dump_cfg, "print the control-flow graphs and exit");
  app.add_option("--compare", o.compare_with, "presets to compare against (repeatable)");
  app.add_flag("--oracle", o.oracle, "check the result against bounded interleavings");
  app.add_option("--oracle-steps", o.oracle_steps, "steps per thread explored by the oracle")->check(CLI::PositiveNumber);
  app.add_option("--oracle-threads", o.oracle_threads, "threads explored by the oracle")->check(CLI::PositiveNumber);
  app.add_option("--oracle-states", o.oracle_states, "states explored by the oracle")->check(CLI::PositiveNumber);
  app.add_option("--mutation", o.mutation, "deliberately broken transfer function, for testing the oracle");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kError;
  }
  try {
    return run(o);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  } catch (const BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
}
