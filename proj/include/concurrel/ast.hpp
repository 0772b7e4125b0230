#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace concurrel {

using i64 = std::int64_t;

struct SourceLoc {
  int line = 0;
  int col = 0;
};

/* Arithmetic expression tree as written in the source. */
struct Expr {
  enum class Kind { Const, Var, Add, Sub, Neg, Mul };
  Kind kind = Kind::Const;
  i64 value = 0;        // Const, and the constant factor of Mul
  std::string name;     // Var
  std::vector<Expr> kids;

  static Expr constant(i64 v) { Expr e; e.kind = Kind::Const; e.value = v; return e; }
  static Expr var(std::string n) { Expr e; e.kind = Kind::Var; e.name = std::move(n); return e; }
  static Expr binary(Kind k, Expr a, Expr b) {
    Expr e; e.kind = k; e.kids.push_back(std::move(a)); e.kids.push_back(std::move(b)); return e;
  }
  static Expr neg(Expr a) { Expr e; e.kind = Kind::Neg; e.kids.push_back(std::move(a)); return e; }
  static Expr mul(i64 c, Expr a) {
    Expr e; e.kind = Kind::Mul; e.value = c; e.kids.push_back(std::move(a)); return e;
  }

  bool operator==(const Expr&) const = default;
};

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

inline CmpOp negate(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return CmpOp::Ne;
    case CmpOp::Ne: return CmpOp::Eq;
    case CmpOp::Lt: return CmpOp::Ge;
    case CmpOp::Le: return CmpOp::Gt;
    case CmpOp::Gt: return CmpOp::Le;
    case CmpOp::Ge: return CmpOp::Lt;
  }
  return op;
}

inline const char* to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "==";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "?";
}

/* Boolean condition tree. */
struct Cond {
  enum class Kind { True, False, Cmp, And, Or, Not };
  Kind kind = Kind::True;
  CmpOp op = CmpOp::Eq;
  std::vector<Expr> sides;  // Cmp: lhs, rhs
  std::vector<Cond> kids;

  static Cond truth(bool b) { Cond c; c.kind = b ? Kind::True : Kind::False; return c; }
  static Cond cmp(CmpOp op, Expr l, Expr r) {
    Cond c; c.kind = Kind::Cmp; c.op = op; c.sides.push_back(std::move(l)); c.sides.push_back(std::move(r));
    return c;
  }
  static Cond conj(Cond a, Cond b) {
    Cond c; c.kind = Kind::And; c.kids.push_back(std::move(a)); c.kids.push_back(std::move(b)); return c;
  }
  static Cond disj(Cond a, Cond b) {
    Cond c; c.kind = Kind::Or; c.kids.push_back(std::move(a)); c.kids.push_back(std::move(b)); return c;
  }
  static Cond lnot(Cond a) { Cond c; c.kind = Kind::Not; c.kids.push_back(std::move(a)); return c; }

  bool operator==(const Cond&) const = default;
};

struct Stmt {
  enum class Kind { Lock, Unlock, Assign, Havoc, Create, Join, Return, Assert, If, While, Skip };
  Kind kind = Kind::Skip;
  std::string target;  // assigned variable, or mutex for Lock/Unlock
  std::string arg;     // template for Create, thread-id variable for Join
  Expr expr;           // Assign rhs, Return value
  Cond cond;           // Assert/If/While
  std::vector<Stmt> then_body;
  std::vector<Stmt> else_body;
  SourceLoc loc;

  // Source positions do not take part in structural equality.
  bool operator==(const Stmt& o) const {
    return kind == o.kind && target == o.target && arg == o.arg && expr == o.expr && cond == o.cond &&
           then_body == o.then_body && else_body == o.else_body;
  }
};

struct ThreadDecl {
  std::string name;
  std::vector<Stmt> body;
  SourceLoc loc;
  bool operator==(const ThreadDecl& o) const { return name == o.name && body == o.body; }
};

struct Program {
  std::string file = "<input>";
  std::vector<std::string> globals;
  std::vector<std::string> mutexes;
  std::vector<ThreadDecl> threads;
  std::map<std::string, std::set<std::string>> protections;  // declared, user mutexes only
  std::string entry = "main";

  bool operator==(const Program& o) const {
    return globals == o.globals && mutexes == o.mutexes && threads == o.threads &&
           protections == o.protections && entry == o.entry;
  }

  const ThreadDecl* find_thread(const std::string& n) const {
    for (auto& t : threads)
      if (t.name == n) return &t;
    return nullptr;
  }
  bool is_global(const std::string& n) const {
    for (auto& g : globals)
      if (g == n) return true;
    return false;
  }
};

inline std::string atomic_mutex(const std::string& global) { return "m_" + global; }

struct SyntaxError : std::runtime_error {
  SourceLoc loc;
  SyntaxError(SourceLoc l, const std::string& m) : std::runtime_error(m), loc(l) {}
};

struct NameError : std::runtime_error {
  SourceLoc loc;
  NameError(SourceLoc l, const std::string& m) : std::runtime_error(m), loc(l) {}
};

}  // namespace concurrel
