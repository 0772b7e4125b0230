#pragma once

#include <cctype>
#include <functional>
#include <sstream>

#include "ast.hpp"

namespace concurrel {

namespace detail {

struct Token {
  enum class Kind { Ident, Int, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  i64 value = 0;
  SourceLoc loc;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.loc = {line_, col_};
      if (pos_ >= src_.size()) {
        t.kind = Token::Kind::End;
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
          t.text += advance();
        t.kind = Token::Kind::Ident;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) t.text += advance();
        if (t.text.size() > 15) throw SyntaxError(t.loc, "integer literal too large");
        t.kind = Token::Kind::Int;
        t.value = std::stoll(t.text);
      } else {
        static const char* two[] = {"==", "!=", "<=", ">=", "&&", "||"};
        t.kind = Token::Kind::Punct;
        for (auto* p : two) {
          if (src_.compare(pos_, 2, p) == 0) {
            t.text = p;
            advance();
            advance();
            break;
          }
        }
        if (t.text.empty()) {
          if (std::string("(){};,=<>+-*!?").find(c) == std::string::npos)
            throw SyntaxError(t.loc, std::string("unexpected character '") + c + "'");
          t.text = std::string(1, advance());
        }
      }
      out.push_back(t);
    }
  }

 private:
  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }
  void skip_space() {
    for (;;) {
      while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
      if (src_.compare(pos_, 2, "//") == 0) {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
        continue;
      }
      if (src_.compare(pos_, 2, "/*") == 0) {
        SourceLoc start{line_, col_};
        advance();
        advance();
        while (pos_ < src_.size() && src_.compare(pos_, 2, "*/") != 0) advance();
        if (pos_ >= src_.size()) throw SyntaxError(start, "unterminated comment");
        advance();
        advance();
        continue;
      }
      return;
    }
  }

  const std::string& src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  Parser(std::vector<Token> toks, std::string file) : toks_(std::move(toks)) { prog_.file = std::move(file); }

  Program run() {
    while (!at_end()) {
      const Token& t = peek();
      if (is_kw("global")) {
        next();
        for (auto& n : ident_list()) declare_global(n, t.loc);
        expect(";");
      } else if (is_kw("mutex")) {
        next();
        for (auto& n : ident_list()) declare_mutex(n, t.loc);
        expect(";");
      } else if (is_kw("protect")) {
        next();
        auto gs = ident_list();
        expect_kw("with");
        auto ms = ident_list();
        expect(";");
        pending_protect_.push_back({gs, ms, t.loc});
      } else if (is_kw("thread")) {
        next();
        ThreadDecl td;
        td.loc = t.loc;
        td.name = ident();
        if (prog_.find_thread(td.name)) throw NameError(td.loc, "duplicate thread template '" + td.name + "'");
        td.body = block();
        prog_.threads.push_back(std::move(td));
      } else {
        throw SyntaxError(t.loc, "expected declaration, found '" + t.text + "'");
      }
    }
    resolve();
    return std::move(prog_);
  }

 private:
  struct Protect {
    std::vector<std::string> globals, mutexes;
    SourceLoc loc;
  };

  static bool keyword(const std::string& s) {
    static const std::set<std::string> kws = {"global", "mutex", "protect", "with",   "thread", "lock",
                                              "unlock", "create", "join",   "return", "assert", "if",
                                              "else",   "while",  "skip",   "true",   "false"};
    return kws.count(s) > 0;
  }

  const Token& peek(size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool at_end() const { return peek().kind == Token::Kind::End; }
  bool is_punct(const char* p, size_t k = 0) const {
    return peek(k).kind == Token::Kind::Punct && peek(k).text == p;
  }
  bool is_kw(const char* k, size_t off = 0) const {
    return peek(off).kind == Token::Kind::Ident && peek(off).text == k;
  }
  void expect(const char* p) {
    if (!is_punct(p)) throw SyntaxError(peek().loc, std::string("expected '") + p + "', found '" + shown(peek()) + "'");
    next();
  }
  void expect_kw(const char* k) {
    if (!is_kw(k)) throw SyntaxError(peek().loc, std::string("expected '") + k + "', found '" + shown(peek()) + "'");
    next();
  }
  static std::string shown(const Token& t) { return t.kind == Token::Kind::End ? "end of input" : t.text; }

  std::string ident() {
    const Token& t = peek();
    if (t.kind != Token::Kind::Ident || keyword(t.text))
      throw SyntaxError(t.loc, "expected identifier, found '" + shown(t) + "'");
    next();
    return t.text;
  }
  std::vector<std::string> ident_list() {
    std::vector<std::string> out{ident()};
    while (is_punct(",")) {
      next();
      out.push_back(ident());
    }
    return out;
  }

  void declare_global(const std::string& n, SourceLoc loc) {
    if (prog_.is_global(n)) throw NameError(loc, "duplicate global '" + n + "'");
    prog_.globals.push_back(n);
  }
  void declare_mutex(const std::string& n, SourceLoc loc) {
    for (auto& m : prog_.mutexes)
      if (m == n) throw NameError(loc, "duplicate mutex '" + n + "'");
    prog_.mutexes.push_back(n);
  }

  std::vector<Stmt> block() {
    expect("{");
    std::vector<Stmt> out;
    while (!is_punct("}")) {
      if (at_end()) throw SyntaxError(peek().loc, "unterminated block");
      out.push_back(statement());
    }
    next();
    return out;
  }

  Stmt statement() {
    Stmt s;
    s.loc = peek().loc;
    if (is_kw("lock") || is_kw("unlock")) {
      s.kind = peek().text == "lock" ? Stmt::Kind::Lock : Stmt::Kind::Unlock;
      next();
      expect("(");
      s.target = ident();
      expect(")");
      expect(";");
      return s;
    }
    if (is_kw("return")) {
      next();
      s.kind = Stmt::Kind::Return;
      s.expr = expr();
      expect(";");
      return s;
    }
    if (is_kw("assert")) {
      next();
      s.kind = Stmt::Kind::Assert;
      expect("(");
      s.cond = cond();
      expect(")");
      expect(";");
      return s;
    }
    if (is_kw("skip")) {
      next();
      s.kind = Stmt::Kind::Skip;
      expect(";");
      return s;
    }
    if (is_kw("if")) {
      next();
      s.kind = Stmt::Kind::If;
      expect("(");
      s.cond = cond();
      expect(")");
      s.then_body = block();
      if (is_kw("else")) {
        next();
        if (is_kw("if"))
          s.else_body.push_back(statement());
        else
          s.else_body = block();
      }
      return s;
    }
    if (is_kw("while")) {
      next();
      s.kind = Stmt::Kind::While;
      expect("(");
      s.cond = cond();
      expect(")");
      s.then_body = block();
      return s;
    }
    s.target = ident();
    expect("=");
    if (is_punct("?")) {
      next();
      s.kind = Stmt::Kind::Havoc;
    } else if (is_kw("create") && is_punct("(", 1)) {
      next();
      expect("(");
      s.kind = Stmt::Kind::Create;
      s.arg = ident();
      expect(")");
    } else if (is_kw("join") && is_punct("(", 1)) {
      next();
      expect("(");
      s.kind = Stmt::Kind::Join;
      s.arg = ident();
      expect(")");
    } else {
      s.kind = Stmt::Kind::Assign;
      s.expr = expr();
    }
    expect(";");
    return s;
  }

  Cond cond() {
    Cond c = cond_and();
    while (is_punct("||")) {
      next();
      c = Cond::disj(std::move(c), cond_and());
    }
    return c;
  }
  Cond cond_and() {
    Cond c = cond_atom();
    while (is_punct("&&")) {
      next();
      c = Cond::conj(std::move(c), cond_atom());
    }
    return c;
  }
  Cond cond_atom() {
    if (is_punct("!")) {
      next();
      return Cond::lnot(cond_atom());
    }
    if (is_kw("true")) {
      next();
      return Cond::truth(true);
    }
    if (is_kw("false")) {
      next();
      return Cond::truth(false);
    }
    if (is_punct("(")) {
      // Either a parenthesised condition or an arithmetic term starting a comparison.
      size_t save = pos_;
      try {
        next();
        Cond c = cond();
        expect(")");
        if (!is_cmp_op()) return c;
      } catch (const SyntaxError&) {
      }
      pos_ = save;
    }
    Expr l = expr();
    if (!is_cmp_op()) throw SyntaxError(peek().loc, "expected comparison operator, found '" + shown(peek()) + "'");
    CmpOp op = cmp_op();
    Expr r = expr();
    return Cond::cmp(op, std::move(l), std::move(r));
  }
  bool is_cmp_op() const {
    for (auto* p : {"==", "!=", "<", "<=", ">", ">="})
      if (is_punct(p)) return true;
    return false;
  }
  CmpOp cmp_op() {
    std::string t = next().text;
    if (t == "==") return CmpOp::Eq;
    if (t == "!=") return CmpOp::Ne;
    if (t == "<") return CmpOp::Lt;
    if (t == "<=") return CmpOp::Le;
    if (t == ">") return CmpOp::Gt;
    return CmpOp::Ge;
  }

  Expr expr() {
    Expr e = term();
    while (is_punct("+") || is_punct("-")) {
      bool plus = next().text == "+";
      e = Expr::binary(plus ? Expr::Kind::Add : Expr::Kind::Sub, std::move(e), term());
    }
    return e;
  }
  Expr term() {
    SourceLoc loc = peek().loc;
    Expr e = unary();
    while (is_punct("*")) {
      next();
      Expr r = unary();
      if (r.kind == Expr::Kind::Const)
        e = Expr::mul(r.value, std::move(e));
      else if (e.kind == Expr::Kind::Const)
        e = Expr::mul(e.value, std::move(r));
      else
        throw SyntaxError(loc, "non-linear multiplication");
    }
    return e;
  }
  Expr unary() {
    if (is_punct("-")) {
      next();
      if (peek().kind == Token::Kind::Int) return Expr::constant(-next().value);
      return Expr::neg(unary());
    }
    if (peek().kind == Token::Kind::Int) return Expr::constant(next().value);
    if (is_punct("(")) {
      next();
      Expr e = expr();
      expect(")");
      return e;
    }
    if (is_punct("?")) throw SyntaxError(peek().loc, "'?' is only allowed as the whole right-hand side of a local assignment");
    return Expr::var(ident());
  }

  void resolve() {
    if (!prog_.find_thread(prog_.entry)) throw NameError({1, 1}, "missing thread template 'main'");
    auto is_mutex = [&](const std::string& m) {
      for (auto& d : prog_.mutexes)
        if (d == m) return true;
      return m.rfind("m_", 0) == 0 && prog_.is_global(m.substr(2));
    };
    for (auto& p : pending_protect_) {
      for (auto& g : p.globals) {
        if (!prog_.is_global(g)) throw NameError(p.loc, "protect: '" + g + "' is not a declared global");
        for (auto& m : p.mutexes) {
          if (!is_mutex(m)) throw NameError(p.loc, "protect: undeclared mutex '" + m + "'");
          if (m != atomic_mutex(g)) prog_.protections[g].insert(m);
        }
        prog_.protections[g];
      }
    }
    std::set<std::string> names(prog_.globals.begin(), prog_.globals.end());
    for (auto& m : prog_.mutexes)
      if (names.count(m)) throw NameError({1, 1}, "'" + m + "' declared as both global and mutex");
    std::function<void(const std::vector<Stmt>&)> walk = [&](const std::vector<Stmt>& body) {
      for (auto& s : body) {
        switch (s.kind) {
          case Stmt::Kind::Lock:
          case Stmt::Kind::Unlock:
            if (!is_mutex(s.target)) throw NameError(s.loc, "undeclared mutex '" + s.target + "'");
            break;
          case Stmt::Kind::Create:
            if (!prog_.find_thread(s.arg)) throw NameError(s.loc, "undeclared thread template '" + s.arg + "'");
            if (s.arg == prog_.entry) throw NameError(s.loc, "the main template cannot be created");
            break;
          default:
            break;
        }
        walk(s.then_body);
        walk(s.else_body);
      }
    };
    for (auto& t : prog_.threads) walk(t.body);
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
  Program prog_;
  std::vector<Protect> pending_protect_;
};

inline void print_expr(std::ostream& os, const Expr& e, bool nested) {
  switch (e.kind) {
    case Expr::Kind::Const:
      os << e.value;
      return;
    case Expr::Kind::Var:
      os << e.name;
      return;
    case Expr::Kind::Neg:
      os << "-";
      print_expr(os, e.kids[0], true);
      return;
    case Expr::Kind::Mul:
      if (nested) os << "(";
      os << e.value << " * ";
      print_expr(os, e.kids[0], true);
      if (nested) os << ")";
      return;
    case Expr::Kind::Add:
    case Expr::Kind::Sub:
      if (nested) os << "(";
      print_expr(os, e.kids[0], true);
      os << (e.kind == Expr::Kind::Add ? " + " : " - ");
      print_expr(os, e.kids[1], true);
      if (nested) os << ")";
      return;
  }
}

inline void print_cond(std::ostream& os, const Cond& c, bool nested) {
  switch (c.kind) {
    case Cond::Kind::True:
      os << "true";
      return;
    case Cond::Kind::False:
      os << "false";
      return;
    case Cond::Kind::Cmp:
      if (nested) os << "(";
      print_expr(os, c.sides[0], false);
      os << " " << to_string(c.op) << " ";
      print_expr(os, c.sides[1], false);
      if (nested) os << ")";
      return;
    case Cond::Kind::Not:
      os << "!";
      print_cond(os, c.kids[0], true);
      return;
    case Cond::Kind::And:
    case Cond::Kind::Or:
      if (nested) os << "(";
      print_cond(os, c.kids[0], true);
      os << (c.kind == Cond::Kind::And ? " && " : " || ");
      print_cond(os, c.kids[1], true);
      if (nested) os << ")";
      return;
  }
}

inline void print_body(std::ostream& os, const std::vector<Stmt>& body, int depth) {
  std::string ind(depth * 2, ' ');
  for (auto& s : body) {
    os << ind;
    switch (s.kind) {
      case Stmt::Kind::Lock: os << "lock(" << s.target << ");\n"; break;
      case Stmt::Kind::Unlock: os << "unlock(" << s.target << ");\n"; break;
      case Stmt::Kind::Assign:
        os << s.target << " = ";
        print_expr(os, s.expr, false);
        os << ";\n";
        break;
      case Stmt::Kind::Havoc: os << s.target << " = ?;\n"; break;
      case Stmt::Kind::Create: os << s.target << " = create(" << s.arg << ");\n"; break;
      case Stmt::Kind::Join: os << s.target << " = join(" << s.arg << ");\n"; break;
      case Stmt::Kind::Return:
        os << "return ";
        print_expr(os, s.expr, false);
        os << ";\n";
        break;
      case Stmt::Kind::Assert:
        os << "assert(";
        print_cond(os, s.cond, false);
        os << ");\n";
        break;
      case Stmt::Kind::Skip: os << "skip;\n"; break;
      case Stmt::Kind::If:
        os << "if (";
        print_cond(os, s.cond, false);
        os << ") {\n";
        print_body(os, s.then_body, depth + 1);
        os << ind << "}";
        if (!s.else_body.empty()) {
          os << " else {\n";
          print_body(os, s.else_body, depth + 1);
          os << ind << "}";
        }
        os << "\n";
        break;
      case Stmt::Kind::While:
        os << "while (";
        print_cond(os, s.cond, false);
        os << ") {\n";
        print_body(os, s.then_body, depth + 1);
        os << ind << "}\n";
        break;
    }
  }
}

}  // namespace detail

/* Parses a whole source file. Throws SyntaxError or NameError. */
inline Program parse_program(const std::string& text, const std::string& file = "<input>") {
  detail::Lexer lx(text);
  detail::Parser p(lx.run(), file);
  return p.run();
}

inline std::string print_program(const Program& p) {
  std::ostringstream os;
  if (!p.globals.empty()) {
    os << "global ";
    for (size_t i = 0; i < p.globals.size(); ++i) os << (i ? ", " : "") << p.globals[i];
    os << ";\n";
  }
  if (!p.mutexes.empty()) {
    os << "mutex ";
    for (size_t i = 0; i < p.mutexes.size(); ++i) os << (i ? ", " : "") << p.mutexes[i];
    os << ";\n";
  }
  for (auto& [g, ms] : p.protections) {
    os << "protect " << g << " with ";
    if (ms.empty()) os << atomic_mutex(g);
    size_t i = 0;
    for (auto& m : ms) os << (i++ ? ", " : "") << m;
    os << ";\n";
  }
  for (auto& t : p.threads) {
    os << "\nthread " << t.name << " {\n";
    detail::print_body(os, t.body, 1);
    os << "}\n";
  }
  return os.str();
}

inline std::string expr_to_string(const Expr& e) {
  std::ostringstream os;
  detail::print_expr(os, e, false);
  return os.str();
}

inline std::string cond_to_string(const Cond& c) {
  std::ostringstream os;
  detail::print_cond(os, c, false);
  return os.str();
}

}  // namespace concurrel
