#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "frontend.hpp"

namespace concurrel {

enum class VarKind { Global, Local, Self, Ret };
enum class VarType { Int, Tid };

struct VarInfo {
  std::string name;
  VarKind kind = VarKind::Local;
  VarType type = VarType::Int;
};

/* Variable universe shared by every relation of one program: globals, locals, self, ret. */
struct VarTable {
  std::vector<VarInfo> vars;
  std::map<std::string, int> index;
  int self = -1;
  int ret = -1;

  int size() const { return static_cast<int>(vars.size()); }
  int add(const std::string& n, VarKind k, VarType t = VarType::Int) {
    auto it = index.find(n);
    if (it != index.end()) return it->second;
    vars.push_back({n, k, t});
    index[n] = size() - 1;
    return size() - 1;
  }
  int find(const std::string& n) const {
    auto it = index.find(n);
    return it == index.end() ? -1 : it->second;
  }
  const std::string& name(int v) const { return vars[v].name; }
  bool is_global(int v) const { return vars[v].kind == VarKind::Global; }
  bool is_tid(int v) const { return vars[v].type == VarType::Tid; }
  std::vector<int> globals() const {
    std::vector<int> out;
    for (int v = 0; v < size(); ++v)
      if (is_global(v)) out.push_back(v);
    return out;
  }
  // The local part of the universe: locals plus self and ret.
  std::vector<int> locals() const {
    std::vector<int> out;
    for (int v = 0; v < size(); ++v)
      if (!is_global(v)) out.push_back(v);
    return out;
  }
};

/* Linear form sum(co[v] * v) + c. */
struct Lin {
  std::map<int, i64> co;
  i64 c = 0;

  static Lin constant(i64 k) { Lin l; l.c = k; return l; }
  static Lin var(int v, i64 k = 1) { Lin l; l.co[v] = k; return l; }
  Lin& add(const Lin& o, i64 k = 1) {
    for (auto& [v, a] : o.co) {
      i64 n = co[v] + k * a;
      if (n == 0) co.erase(v); else co[v] = n;
    }
    c += k * o.c;
    return *this;
  }
  Lin scaled(i64 k) const {
    Lin l;
    if (k == 0) return l;
    for (auto& [v, a] : co) l.co[v] = a * k;
    l.c = c * k;
    return l;
  }
  bool is_const() const { return co.empty(); }
  bool mentions(int v) const { return co.count(v) > 0; }
  bool operator==(const Lin&) const = default;
};

/* A normalised atom: e <= 0, e == 0 or e != 0. */
struct Atom {
  enum class Rel { Le, Eq, Ne };
  Rel rel = Rel::Le;
  Lin e;
  bool operator==(const Atom&) const = default;
};

struct Formula {
  enum class Kind { True, False, Atom, And, Or };
  Kind kind = Kind::True;
  Atom atom;
  std::vector<Formula> kids;
  bool operator==(const Formula&) const = default;
};

inline Lin linearize(const Expr& e, const VarTable& vt) {
  switch (e.kind) {
    case Expr::Kind::Const: return Lin::constant(e.value);
    case Expr::Kind::Var: {
      int v = vt.find(e.name);
      if (v < 0) throw std::logic_error("unknown variable " + e.name);
      return Lin::var(v);
    }
    case Expr::Kind::Add: return linearize(e.kids[0], vt).add(linearize(e.kids[1], vt));
    case Expr::Kind::Sub: return linearize(e.kids[0], vt).add(linearize(e.kids[1], vt), -1);
    case Expr::Kind::Neg: return linearize(e.kids[0], vt).scaled(-1);
    case Expr::Kind::Mul: return linearize(e.kids[0], vt).scaled(e.value);
  }
  return {};
}

inline Formula normalize(const Cond& c, const VarTable& vt, bool neg = false) {
  Formula f;
  switch (c.kind) {
    case Cond::Kind::True: f.kind = neg ? Formula::Kind::False : Formula::Kind::True; return f;
    case Cond::Kind::False: f.kind = neg ? Formula::Kind::True : Formula::Kind::False; return f;
    case Cond::Kind::Not: return normalize(c.kids[0], vt, !neg);
    case Cond::Kind::And:
    case Cond::Kind::Or: {
      bool conj = (c.kind == Cond::Kind::And) != neg;
      f.kind = conj ? Formula::Kind::And : Formula::Kind::Or;
      for (auto& k : c.kids) f.kids.push_back(normalize(k, vt, neg));
      return f;
    }
    case Cond::Kind::Cmp: {
      CmpOp op = neg ? negate(c.op) : c.op;
      Lin d = linearize(c.sides[0], vt).add(linearize(c.sides[1], vt), -1);
      f.kind = Formula::Kind::Atom;
      switch (op) {
        case CmpOp::Le: f.atom = {Atom::Rel::Le, d}; break;
        case CmpOp::Lt: f.atom = {Atom::Rel::Le, d.add(Lin::constant(1))}; break;
        case CmpOp::Ge: f.atom = {Atom::Rel::Le, d.scaled(-1)}; break;
        case CmpOp::Gt: f.atom = {Atom::Rel::Le, d.scaled(-1).add(Lin::constant(1))}; break;
        case CmpOp::Eq: f.atom = {Atom::Rel::Eq, d}; break;
        case CmpOp::Ne: f.atom = {Atom::Rel::Ne, d}; break;
      }
      return f;
    }
  }
  return f;
}

inline Formula negate(const Formula& f) {
  Formula g;
  switch (f.kind) {
    case Formula::Kind::True: g.kind = Formula::Kind::False; return g;
    case Formula::Kind::False: g.kind = Formula::Kind::True; return g;
    case Formula::Kind::And:
    case Formula::Kind::Or:
      g.kind = f.kind == Formula::Kind::And ? Formula::Kind::Or : Formula::Kind::And;
      for (auto& k : f.kids) g.kids.push_back(negate(k));
      return g;
    case Formula::Kind::Atom:
      g.kind = Formula::Kind::Atom;
      switch (f.atom.rel) {
        case Atom::Rel::Le: g.atom = {Atom::Rel::Le, f.atom.e.scaled(-1).add(Lin::constant(1))}; break;
        case Atom::Rel::Eq: g.atom = {Atom::Rel::Ne, f.atom.e}; break;
        case Atom::Rel::Ne: g.atom = {Atom::Rel::Eq, f.atom.e}; break;
      }
      return g;
  }
  return g;
}

inline i64 eval_lin(const Lin& l, const std::function<i64(int)>& val) {
  i64 s = l.c;
  for (auto& [v, a] : l.co) s += a * val(v);
  return s;
}

inline bool eval_formula(const Formula& f, const std::function<i64(int)>& val) {
  switch (f.kind) {
    case Formula::Kind::True: return true;
    case Formula::Kind::False: return false;
    case Formula::Kind::And:
      for (auto& k : f.kids)
        if (!eval_formula(k, val)) return false;
      return true;
    case Formula::Kind::Or:
      for (auto& k : f.kids)
        if (eval_formula(k, val)) return true;
      return false;
    case Formula::Kind::Atom: {
      i64 x = eval_lin(f.atom.e, val);
      switch (f.atom.rel) {
        case Atom::Rel::Le: return x <= 0;
        case Atom::Rel::Eq: return x == 0;
        case Atom::Rel::Ne: return x != 0;
      }
    }
  }
  return false;
}

/* Declared mutexes followed by one atomicity mutex m_g per global. */
struct MutexTable {
  std::vector<std::string> names;
  int user_count = 0;
  std::map<std::string, int> index;
  std::map<int, int> atomic_of_global;  // global var -> mutex id

  int size() const { return static_cast<int>(names.size()); }
  int find(const std::string& n) const {
    auto it = index.find(n);
    return it == index.end() ? -1 : it->second;
  }
  bool is_atomic(int m) const { return m >= user_count; }
};

struct Action {
  enum class Kind { Lock, Unlock, Read, Write, Assign, Guard, Havoc, Create, Join, Return, Assert };
  Kind kind = Kind::Guard;
  int mutex = -1;   // Lock, Unlock
  int var = -1;     // lhs of Read, Assign, Havoc, Create, Join
  int global = -1;  // Read, Write
  int arg = -1;     // Join: variable holding the thread id
  int tmpl = -1;    // Create: template index
  Lin expr;         // Write, Assign, Return
  Formula cond;     // Guard, Assert
  std::string text; // rendering of the source condition/expression

  bool observing() const { return kind == Kind::Lock || kind == Kind::Join; }
  bool observable() const { return kind == Kind::Unlock || kind == Kind::Return; }
};

struct Edge {
  int src = -1;
  int dst = -1;
  Action act;
  SourceLoc loc;
};

struct TemplateCfg {
  std::string name;
  int start = -1;
  std::vector<int> points;
  std::vector<int> edges;
};

/* All thread templates lowered to action-labelled edges over one global point numbering. */
struct Cfg {
  VarTable vars;
  MutexTable mutexes;
  std::vector<TemplateCfg> templates;
  std::vector<Edge> edges;
  std::vector<std::vector<int>> out;  // point -> outgoing edge ids
  std::vector<int> point_template;
  std::vector<bool> loop_head;
  int entry = 0;  // index of the main template

  int num_points() const { return static_cast<int>(out.size()); }
  std::string point_name(int p) const {
    for (auto& t : templates)
      if (t.start == p) return t.name;
    return "u" + std::to_string(p);
  }
  const TemplateCfg& main() const { return templates[entry]; }
  std::string mutex_name(int m) const { return mutexes.names[m]; }
};

inline std::string action_to_string(const Action& a, const Cfg& g) {
  auto vn = [&](int v) { return g.vars.name(v); };
  switch (a.kind) {
    case Action::Kind::Lock: return "lock(" + g.mutex_name(a.mutex) + ")";
    case Action::Kind::Unlock: return "unlock(" + g.mutex_name(a.mutex) + ")";
    case Action::Kind::Read: return vn(a.var) + " = " + vn(a.global);
    case Action::Kind::Write: return vn(a.global) + " = " + a.text;
    case Action::Kind::Assign: return vn(a.var) + " = " + a.text;
    case Action::Kind::Guard: return "guard(" + a.text + ")";
    case Action::Kind::Havoc: return vn(a.var) + " = ?";
    case Action::Kind::Create: return vn(a.var) + " = create(" + g.templates[a.tmpl].name + ")";
    case Action::Kind::Join: return vn(a.var) + " = join(" + vn(a.arg) + ")";
    case Action::Kind::Return: return "return " + a.text;
    case Action::Kind::Assert: return "assert(" + a.text + ")";
  }
  return "?";
}

namespace detail {

inline void collect_vars(const Program& p, VarTable& vt) {
  for (auto& g : p.globals) vt.add(g, VarKind::Global);
  std::set<std::string> tids;
  std::function<void(const std::vector<Stmt>&)> scan_tids = [&](const std::vector<Stmt>& body) {
    for (auto& s : body) {
      if (s.kind == Stmt::Kind::Create) tids.insert(s.target);
      if (s.kind == Stmt::Kind::Join) tids.insert(s.arg);
      scan_tids(s.then_body);
      scan_tids(s.else_body);
    }
  };
  for (auto& t : p.threads) scan_tids(t.body);
  auto local = [&](const std::string& n) {
    if (p.is_global(n)) return;
    vt.add(n, VarKind::Local, tids.count(n) ? VarType::Tid : VarType::Int);
  };
  std::function<void(const Expr&)> ex = [&](const Expr& e) {
    if (e.kind == Expr::Kind::Var) local(e.name);
    for (auto& k : e.kids) ex(k);
  };
  std::function<void(const Cond&)> cx = [&](const Cond& c) {
    for (auto& s : c.sides) ex(s);
    for (auto& k : c.kids) cx(k);
  };
  std::function<void(const std::vector<Stmt>&)> walk = [&](const std::vector<Stmt>& body) {
    for (auto& s : body) {
      switch (s.kind) {
        case Stmt::Kind::Assign:
        case Stmt::Kind::Havoc:
        case Stmt::Kind::Create:
        case Stmt::Kind::Join:
          local(s.target);
          break;
        default:
          break;
      }
      if (s.kind == Stmt::Kind::Join) local(s.arg);
      ex(s.expr);
      cx(s.cond);
      walk(s.then_body);
      walk(s.else_body);
    }
  };
  for (auto& t : p.threads) walk(t.body);
  vt.self = vt.add("self", VarKind::Self, VarType::Tid);
  vt.ret = vt.add("ret", VarKind::Ret, VarType::Int);
}

class Lowering {
 public:
  Lowering(const Program& p, Cfg& g) : p_(p), g_(g) {}

  void run() {
    for (auto& t : p_.threads) {
      TemplateCfg tc;
      tc.name = t.name;
      g_.templates.push_back(tc);
    }
    for (size_t i = 0; i < p_.threads.size(); ++i) {
      cur_ = static_cast<int>(i);
      int s = fresh();
      g_.templates[i].start = s;
      lower(p_.threads[i].body, s, -1);
      if (p_.threads[i].name == p_.entry) g_.entry = cur_;
    }
    mark_loop_heads();
  }

 private:
  int fresh() {
    int id = g_.num_points();
    g_.out.emplace_back();
    g_.point_template.push_back(cur_);
    g_.templates[cur_].points.push_back(id);
    return id;
  }
  int target(int exit, bool last) { return (last && exit >= 0) ? exit : fresh(); }
  void edge(int src, int dst, Action a, SourceLoc loc) {
    int id = static_cast<int>(g_.edges.size());
    g_.edges.push_back({src, dst, std::move(a), loc});
    g_.out[src].push_back(id);
    g_.templates[cur_].edges.push_back(id);
  }
  int var(const std::string& n) const { return g_.vars.find(n); }

  // Lowers body starting at entry; the last edge goes to exit when exit >= 0. Returns the end point.
  int lower(const std::vector<Stmt>& body, int entry, int exit) {
    int at = entry;
    if (body.empty()) return at;
    for (size_t i = 0; i < body.size(); ++i) at = lower(body[i], at, i + 1 == body.size() ? exit : -1);
    return at;
  }

  int lower(const Stmt& s, int at, int exit) {
    const VarTable& vt = g_.vars;
    Action a;
    switch (s.kind) {
      case Stmt::Kind::Lock:
      case Stmt::Kind::Unlock: {
        a.kind = s.kind == Stmt::Kind::Lock ? Action::Kind::Lock : Action::Kind::Unlock;
        a.mutex = g_.mutexes.find(s.target);
        int to = target(exit, true);
        edge(at, to, a, s.loc);
        return to;
      }
      case Stmt::Kind::Skip: {
        a.kind = Action::Kind::Guard;
        a.text = "true";
        int to = target(exit, true);
        edge(at, to, a, s.loc);
        return to;
      }
      case Stmt::Kind::Havoc: {
        a.kind = Action::Kind::Havoc;
        a.var = var(s.target);
        int to = target(exit, true);
        edge(at, to, a, s.loc);
        return to;
      }
      case Stmt::Kind::Assign: {
        int lhs = var(s.target);
        bool read = s.expr.kind == Expr::Kind::Var && p_.is_global(s.expr.name) && !vt.is_global(lhs);
        int g = read ? var(s.expr.name) : (vt.is_global(lhs) ? lhs : -1);
        a.text = expr_to_string(s.expr);
        a.expr = linearize(s.expr, vt);
        if (g < 0) {
          a.kind = Action::Kind::Assign;
          a.var = lhs;
          int to = target(exit, true);
          edge(at, to, a, s.loc);
          return to;
        }
        int m = g_.mutexes.atomic_of_global.at(g);
        Action lk;
        lk.kind = Action::Kind::Lock;
        lk.mutex = m;
        int p1 = fresh();
        edge(at, p1, lk, s.loc);
        if (read) {
          a.kind = Action::Kind::Read;
          a.var = lhs;
          a.global = g;
        } else {
          a.kind = Action::Kind::Write;
          a.global = g;
        }
        int p2 = fresh();
        edge(p1, p2, a, s.loc);
        Action ul;
        ul.kind = Action::Kind::Unlock;
        ul.mutex = m;
        int to = target(exit, true);
        edge(p2, to, ul, s.loc);
        return to;
      }
      case Stmt::Kind::Create: {
        a.kind = Action::Kind::Create;
        a.var = var(s.target);
        for (size_t i = 0; i < p_.threads.size(); ++i)
          if (p_.threads[i].name == s.arg) a.tmpl = static_cast<int>(i);
        int to = target(exit, true);
        edge(at, to, a, s.loc);
        return to;
      }
      case Stmt::Kind::Join: {
        a.kind = Action::Kind::Join;
        a.var = var(s.target);
        a.arg = var(s.arg);
        int to = target(exit, true);
        edge(at, to, a, s.loc);
        return to;
      }
      case Stmt::Kind::Return: {
        a.kind = Action::Kind::Return;
        a.expr = linearize(s.expr, vt);
        a.text = expr_to_string(s.expr);
        int to = target(exit, true);
        edge(at, to, a, s.loc);
        return to;
      }
      case Stmt::Kind::Assert: {
        a.kind = Action::Kind::Assert;
        a.cond = normalize(s.cond, vt);
        a.text = cond_to_string(s.cond);
        int to = target(exit, true);
        edge(at, to, a, s.loc);
        return to;
      }
      case Stmt::Kind::If: {
        int join = exit >= 0 ? exit : fresh();
        branch(s.cond, false, s.then_body, at, join, s.loc);
        branch(s.cond, true, s.else_body, at, join, s.loc);
        return join;
      }
      case Stmt::Kind::While: {
        // at is the loop head; the body returns to it. Start points keep no incoming edges.
        if (at == g_.templates[cur_].start) {
          Action enter;
          enter.kind = Action::Kind::Guard;
          enter.text = "true";
          int head = fresh();
          edge(at, head, enter, s.loc);
          at = head;
        }
        Action in;
        in.kind = Action::Kind::Guard;
        in.cond = normalize(s.cond, vt);
        in.text = cond_to_string(s.cond);
        if (s.then_body.empty()) {
          edge(at, at, in, s.loc);
        } else {
          int b0 = fresh();
          edge(at, b0, in, s.loc);
          lower(s.then_body, b0, at);
        }
        Action outa;
        outa.kind = Action::Kind::Guard;
        outa.cond = normalize(s.cond, vt, true);
        outa.text = "!(" + cond_to_string(s.cond) + ")";
        int to = target(exit, true);
        edge(at, to, outa, s.loc);
        return to;
      }
    }
    return at;
  }

  void branch(const Cond& c, bool neg, const std::vector<Stmt>& body, int at, int join, SourceLoc loc) {
    Action g;
    g.kind = Action::Kind::Guard;
    g.cond = normalize(c, g_.vars, neg);
    g.text = neg ? "!(" + cond_to_string(c) + ")" : cond_to_string(c);
    if (body.empty()) {
      edge(at, join, g, loc);
      return;
    }
    int b0 = fresh();
    edge(at, b0, g, loc);
    lower(body, b0, join);
  }

  // A point is a loop head if it is the target of a DFS back edge.
  void mark_loop_heads() {
    int n = g_.num_points();
    g_.loop_head.assign(n, false);
    std::vector<int> state(n, 0);
    for (auto& t : g_.templates) {
      std::vector<std::pair<int, size_t>> stack;
      if (state[t.start]) continue;
      stack.push_back({t.start, 0});
      state[t.start] = 1;
      while (!stack.empty()) {
        auto& [p, i] = stack.back();
        if (i < g_.out[p].size()) {
          int q = g_.edges[g_.out[p][i++]].dst;
          if (state[q] == 1) {
            g_.loop_head[q] = true;
          } else if (state[q] == 0) {
            state[q] = 1;
            stack.push_back({q, 0});
          }
        } else {
          state[p] = 2;
          stack.pop_back();
        }
      }
    }
  }

  const Program& p_;
  Cfg& g_;
  int cur_ = 0;
};

}  // namespace detail

/* Lowers every template; deterministic numbering in declaration order. */
inline Cfg build_cfg(const Program& p) {
  Cfg g;
  detail::collect_vars(p, g.vars);
  for (auto& m : p.mutexes) {
    g.mutexes.index[m] = g.mutexes.size();
    g.mutexes.names.push_back(m);
  }
  g.mutexes.user_count = g.mutexes.size();
  for (auto& gl : p.globals) {
    int id = g.mutexes.size();
    g.mutexes.index[atomic_mutex(gl)] = id;
    g.mutexes.names.push_back(atomic_mutex(gl));
    g.mutexes.atomic_of_global[g.vars.find(gl)] = id;
  }
  detail::Lowering(p, g).run();
  return g;
}

inline std::string dump_cfg(const Cfg& g) {
  std::ostringstream os;
  for (auto& t : g.templates) {
    os << "template " << t.name << " start " << g.point_name(t.start) << "\n";
    for (int e : t.edges) {
      auto& ed = g.edges[e];
      os << "  " << g.point_name(ed.src) << " -> " << g.point_name(ed.dst) << " : "
         << action_to_string(ed.act, g) << "\n";
    }
  }
  return os.str();
}

using Lockset = std::vector<int>;  // sorted mutex ids

/* Possible locksets per point, per template started with the empty lockset.
   Only templates reachable from main through create edges are explored. */
struct LocksetInfo {
  std::vector<std::set<Lockset>> at;  // indexed by point
  std::vector<bool> template_reachable;
};

inline LocksetInfo compute_locksets(const Cfg& g) {
  LocksetInfo li;
  li.at.assign(g.num_points(), {});
  li.template_reachable.assign(g.templates.size(), false);
  std::vector<int> work;
  auto enter = [&](int t) {
    if (li.template_reachable[t]) return;
    li.template_reachable[t] = true;
    li.at[g.templates[t].start].insert(Lockset{});
    work.push_back(g.templates[t].start);
  };
  enter(g.entry);
  while (!work.empty()) {
    int p = work.back();
    work.pop_back();
    for (int eid : g.out[p]) {
      const Edge& e = g.edges[eid];
      if (e.act.kind == Action::Kind::Create) enter(e.act.tmpl);
      bool grew = false;
      for (const Lockset& s : std::set<Lockset>(li.at[p])) {
        Lockset n = s;
        if (e.act.kind == Action::Kind::Lock) {
          if (std::binary_search(n.begin(), n.end(), e.act.mutex)) continue;  // would block forever
          n.insert(std::lower_bound(n.begin(), n.end(), e.act.mutex), e.act.mutex);
        } else if (e.act.kind == Action::Kind::Unlock) {
          auto it = std::lower_bound(n.begin(), n.end(), e.act.mutex);
          if (it == n.end() || *it != e.act.mutex) continue;
          n.erase(it);
        }
        grew |= li.at[e.dst].insert(n).second;
      }
      if (grew) work.push_back(e.dst);
    }
  }
  return li;
}

struct Diagnostic {
  SourceLoc loc;
  std::string severity;  // "error" or "warning"
  std::string message;
};

inline std::string render(const Diagnostic& d, const std::string& file) {
  return file + ":" + std::to_string(d.loc.line) + ":" + std::to_string(d.loc.col) + ": " + d.severity + ": " +
         d.message;
}

inline bool has_errors(const std::vector<Diagnostic>& ds) {
  for (auto& d : ds)
    if (d.severity == "error") return true;
  return false;
}

enum class ProtectionSource { Declared, Inferred };

/* Well-formedness checks. Never throws on semantic problems; returns diagnostics. */
inline std::vector<Diagnostic> validate(const Program& p, ProtectionSource src = ProtectionSource::Declared) {
  std::vector<Diagnostic> ds;
  auto err = [&](SourceLoc l, std::string m) { ds.push_back({l, "error", std::move(m)}); };
  auto warn = [&](SourceLoc l, std::string m) { ds.push_back({l, "warning", std::move(m)}); };

  std::set<std::string> tids;
  std::function<void(const std::vector<Stmt>&)> scan = [&](const std::vector<Stmt>& b) {
    for (auto& s : b) {
      if (s.kind == Stmt::Kind::Create) tids.insert(s.target);
      if (s.kind == Stmt::Kind::Join) tids.insert(s.arg);
      scan(s.then_body);
      scan(s.else_body);
    }
  };
  for (auto& t : p.threads) scan(t.body);

  auto expr_vars = [&](const Expr& e) {
    std::vector<std::string> out;
    std::function<void(const Expr&)> r = [&](const Expr& x) {
      if (x.kind == Expr::Kind::Var) out.push_back(x.name);
      for (auto& k : x.kids) r(k);
    };
    r(e);
    return out;
  };
  auto cond_vars = [&](const Cond& c) {
    std::vector<std::string> out;
    std::function<void(const Cond&)> r = [&](const Cond& x) {
      for (auto& s : x.sides)
        for (auto& v : expr_vars(s)) out.push_back(v);
      for (auto& k : x.kids) r(k);
    };
    r(c);
    return out;
  };
  auto check_local_only = [&](const std::vector<std::string>& vs, SourceLoc loc, bool allow_globals) {
    for (auto& v : vs) {
      if (p.is_global(v) && !allow_globals)
        err(loc, "global '" + v + "' used in an expression; copy it into a local first");
      if (tids.count(v)) err(loc, "thread id variable '" + v + "' used in an arithmetic expression");
    }
  };

  std::function<void(const std::vector<Stmt>&)> walk = [&](const std::vector<Stmt>& body) {
    for (auto& s : body) {
      switch (s.kind) {
        case Stmt::Kind::Assign: {
          bool lhs_global = p.is_global(s.target);
          bool plain_read = s.expr.kind == Expr::Kind::Var && p.is_global(s.expr.name);
          if (lhs_global && plain_read) {
            err(s.loc, "global-to-global copy '" + s.target + " = " + s.expr.name + "'");
          } else if (!plain_read) {
            check_local_only(expr_vars(s.expr), s.loc, false);
          }
          if (tids.count(s.target)) err(s.loc, "thread id variable '" + s.target + "' assigned an integer");
          break;
        }
        case Stmt::Kind::Havoc:
          if (p.is_global(s.target)) err(s.loc, "'?' is only allowed on local assignments");
          if (tids.count(s.target)) err(s.loc, "thread id variable '" + s.target + "' assigned an integer");
          break;
        case Stmt::Kind::Create:
          if (p.is_global(s.target)) err(s.loc, "create result must be stored in a local");
          break;
        case Stmt::Kind::Join:
          if (p.is_global(s.target) || p.is_global(s.arg)) err(s.loc, "join operands must be locals");
          if (tids.count(s.target)) err(s.loc, "join result '" + s.target + "' is also used as a thread id");
          break;
        case Stmt::Kind::Return:
          check_local_only(expr_vars(s.expr), s.loc, false);
          break;
        case Stmt::Kind::Assert:
          check_local_only(cond_vars(s.cond), s.loc, true);
          break;
        case Stmt::Kind::If:
        case Stmt::Kind::While:
          check_local_only(cond_vars(s.cond), s.loc, false);
          break;
        default:
          break;
      }
      walk(s.then_body);
      walk(s.else_body);
    }
  };
  for (auto& t : p.threads) walk(t.body);
  if (has_errors(ds)) return ds;

  Cfg g = build_cfg(p);
  LocksetInfo li = compute_locksets(g);
  std::set<std::pair<int, int>> seen;
  for (auto& e : g.edges) {
    if (li.at[e.src].empty()) continue;
    if (e.act.kind == Action::Kind::Lock) {
      for (auto& s : li.at[e.src])
        if (std::binary_search(s.begin(), s.end(), e.act.mutex) && seen.insert({e.src, 0}).second)
          err(e.loc, "re-entrant lock of '" + g.mutex_name(e.act.mutex) + "'");
    } else if (e.act.kind == Action::Kind::Unlock) {
      for (auto& s : li.at[e.src])
        if (!std::binary_search(s.begin(), s.end(), e.act.mutex) && seen.insert({e.src, 1}).second)
          warn(e.loc, "unlock of '" + g.mutex_name(e.act.mutex) + "' which may not be held");
    } else if (e.act.kind == Action::Kind::Write && src == ProtectionSource::Declared) {
      const std::string& gn = g.vars.name(e.act.global);
      auto it = p.protections.find(gn);
      if (it == p.protections.end()) continue;
      for (auto& m : it->second) {
        int mid = g.mutexes.find(m);
        for (auto& s : li.at[e.src])
          if (!std::binary_search(s.begin(), s.end(), mid) && seen.insert({e.src, 2 + mid}).second)
            err(e.loc, "write to '" + gn + "' without holding its protecting mutex '" + m + "'");
      }
    }
  }
  if (src == ProtectionSource::Declared) {
    std::set<int> written;
    for (auto& e : g.edges)
      if (e.act.kind == Action::Kind::Write && !li.at[e.src].empty()) written.insert(e.act.global);
    for (int gv : written)
      if (!p.protections.count(g.vars.name(gv)))
        warn({1, 1}, "no protecting mutex for " + g.vars.name(gv));
  }
  std::stable_sort(ds.begin(), ds.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return std::tie(a.loc.line, a.loc.col) < std::tie(b.loc.line, b.loc.col);
  });
  return ds;
}

}  // namespace concurrel
