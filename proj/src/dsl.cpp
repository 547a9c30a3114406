#include "spsim/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>

#include "spsim/errors.hpp"

namespace spsim::dsl {

// ---------------------------------------------------------------- expressions

ExprPtr make_number(long long value) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Number;
  e->value = value;
  return e;
}

ExprPtr make_var(std::string name) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Var;
  e->name = std::move(name);
  return e;
}

ExprPtr make_binary(Expr::Kind kind, ExprPtr lhs, ExprPtr rhs) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->lhs = std::move(lhs);
  e->rhs = std::move(rhs);
  return e;
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Expr::Kind::Number: return a->value == b->value;
    case Expr::Kind::Var: return a->name == b->name;
    default: return expr_equal(a->lhs, b->lhs) && expr_equal(a->rhs, b->rhs);
  }
}

long long eval_expr(const ExprPtr& expr, const Env& env) {
  switch (expr->kind) {
    case Expr::Kind::Number: return expr->value;
    case Expr::Kind::Var: {
      auto it = env.find(expr->name);
      if (it == env.end())
        throw SpError(ErrorKind::UnboundParameter, "unbound parameter: " + expr->name);
      return it->second;
    }
    case Expr::Kind::Add: return eval_expr(expr->lhs, env) + eval_expr(expr->rhs, env);
    case Expr::Kind::Sub: return eval_expr(expr->lhs, env) - eval_expr(expr->rhs, env);
    case Expr::Kind::Mul: return eval_expr(expr->lhs, env) * eval_expr(expr->rhs, env);
  }
  throw SpError(ErrorKind::InvalidState, "malformed expression node");
}

// ---------------------------------------------------------------- equality

bool operator==(const SymbolRef& a, const SymbolRef& b) {
  return a.base == b.base && expr_equal(a.index, b.index);
}
bool operator==(const TermExpr& a, const TermExpr& b) {
  return a.sym == b.sym && expr_equal(a.count, b.count);
}
bool operator==(const TargetExpr& a, const TargetExpr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case TargetExpr::Kind::Delta: return a.dx == b.dx && a.dy == b.dy;
    case TargetExpr::Kind::In: return a.in_label == b.in_label;
    default: return true;
  }
}
bool operator==(const MessageExpr& a, const MessageExpr& b) {
  return a.payload == b.payload && a.target == b.target;
}
bool operator==(const RuleExpr& a, const RuleExpr& b) {
  return a.pair == b.pair && a.lhs1 == b.lhs1 && a.lhs2 == b.lhs2 && a.rhs1 == b.rhs1 &&
         a.rhs2 == b.rhs2 && a.orientations == b.orientations;
}
bool operator==(const VarRange& a, const VarRange& b) {
  return a.var == b.var && expr_equal(a.lo, b.lo) && expr_equal(a.hi, b.hi);
}
bool operator==(const Constraint& a, const Constraint& b) {
  return a.op == b.op && expr_equal(a.lhs, b.lhs) && expr_equal(a.rhs, b.rhs);
}
bool operator==(const RuleItem& a, const RuleItem& b) {
  return a.ranges == b.ranges && a.where == b.where && a.rule == b.rule;
}
bool operator==(const MembraneDecl& a, const MembraneDecl& b) {
  return a.label == b.label && a.parent == b.parent && a.ox == b.ox && a.oy == b.oy &&
         a.width == b.width && a.height == b.height && a.items == b.items;
}
bool operator==(const PlacementDecl& a, const PlacementDecl& b) {
  return a.what == b.what && a.label == b.label && a.x == b.x && a.y == b.y;
}
bool operator==(const Program& a, const Program& b) {
  return a.objects == b.objects && a.me_objects == b.me_objects && a.params == b.params &&
         a.membranes == b.membranes && a.placements == b.placements;
}

// ---------------------------------------------------------------- lexer

namespace {

enum class Tok {
  Ident, IdxStart, Number, Dim,
  KwObjects, KwMeObjects, KwParam, KwMembrane, KwIn, KwAt, KwSize,
  KwRule, KwPair, KwForall, KwWhere, KwPlace, KwHere, KwOut,
  Semi, LBrace, RBrace, LParen, RParen, Comma, Caret, At, Colon, Assign,
  Arrow, Pipe, Dot, DotDot, Plus, Minus, Star,
  Lt, Le, EqEq, Ne, Ge, Gt, AndAnd,
  Eof,
};

struct Token {
  Tok kind;
  std::string text;
  long long num = 0;
  int w = 0, h = 0;  // Dim
  int line = 0, col = 0;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)); }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

Tok keyword_of(const std::string& s) {
  if (s == "objects") return Tok::KwObjects;
  if (s == "param") return Tok::KwParam;
  if (s == "membrane") return Tok::KwMembrane;
  if (s == "in") return Tok::KwIn;
  if (s == "at") return Tok::KwAt;
  if (s == "size") return Tok::KwSize;
  if (s == "rule") return Tok::KwRule;
  if (s == "pair") return Tok::KwPair;
  if (s == "forall") return Tok::KwForall;
  if (s == "where") return Tok::KwWhere;
  if (s == "place") return Tok::KwPlace;
  if (s == "here") return Tok::KwHere;
  if (s == "out") return Tok::KwOut;
  return Tok::Ident;
}

[[noreturn]] void lex_fail(int line, int col, const std::string& msg) {
  throw SpError(ErrorKind::SyntaxError, line, col, msg);
}

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  size_t i = 0;
  int line = 1, col = 1;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  auto push = [&](Tok t, int l, int c) {
    out.push_back({t, {}, 0, 0, 0, l, c});
    return &out.back();
  };

  while (i < src.size()) {
    char c = src[i];
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    int l = line, cl = col;
    if (ident_start(c)) {
      size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      std::string text(src.substr(i, j - i));
      advance(j - i);
      if (text == "me" && src.substr(i).rfind("-objects", 0) == 0 &&
          (i + 8 >= src.size() || !ident_char(src[i + 8]))) {
        advance(8);
        push(Tok::KwMeObjects, l, cl);
        continue;
      }
      if (text.size() > 1 && text.back() == '_' && i < src.size() && src[i] == '{') {
        advance(1);  // the '{'
        Token* t = push(Tok::IdxStart, l, cl);
        t->text = text.substr(0, text.size() - 1);
        continue;
      }
      Token* t = push(keyword_of(text), l, cl);
      t->text = std::move(text);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j - i > 15) lex_fail(l, cl, "number too large");
      long long v = std::stoll(std::string(src.substr(i, j - i)));
      if (j < src.size() && src[j] == 'x' && j + 1 < src.size() &&
          std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        size_t k = j + 1;
        while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
        if (k - j - 1 > 9) lex_fail(l, cl, "dimension too large");
        long long h = std::stoll(std::string(src.substr(j + 1, k - j - 1)));
        advance(k - i);
        Token* t = push(Tok::Dim, l, cl);
        t->w = static_cast<int>(v);
        t->h = static_cast<int>(h);
        continue;
      }
      advance(j - i);
      Token* t = push(Tok::Number, l, cl);
      t->num = v;
      continue;
    }
    auto two = [&](char second, Tok both, Tok single) {
      if (i + 1 < src.size() && src[i + 1] == second) {
        advance(2);
        push(both, l, cl);
      } else {
        advance(1);
        push(single, l, cl);
      }
    };
    switch (c) {
      case ';': advance(1); push(Tok::Semi, l, cl); break;
      case '{': advance(1); push(Tok::LBrace, l, cl); break;
      case '}': advance(1); push(Tok::RBrace, l, cl); break;
      case '(': advance(1); push(Tok::LParen, l, cl); break;
      case ')': advance(1); push(Tok::RParen, l, cl); break;
      case ',': advance(1); push(Tok::Comma, l, cl); break;
      case '^': advance(1); push(Tok::Caret, l, cl); break;
      case '@': advance(1); push(Tok::At, l, cl); break;
      case ':': advance(1); push(Tok::Colon, l, cl); break;
      case '|': advance(1); push(Tok::Pipe, l, cl); break;
      case '+': advance(1); push(Tok::Plus, l, cl); break;
      case '*': advance(1); push(Tok::Star, l, cl); break;
      case '-': two('>', Tok::Arrow, Tok::Minus); break;
      case '.': two('.', Tok::DotDot, Tok::Dot); break;
      case '=': two('=', Tok::EqEq, Tok::Assign); break;
      case '<': two('=', Tok::Le, Tok::Lt); break;
      case '>': two('=', Tok::Ge, Tok::Gt); break;
      case '!':
        if (i + 1 < src.size() && src[i + 1] == '=') {
          advance(2);
          push(Tok::Ne, l, cl);
        } else {
          lex_fail(l, cl, "expected '!='");
        }
        break;
      case '&':
        if (i + 1 < src.size() && src[i + 1] == '&') {
          advance(2);
          push(Tok::AndAnd, l, cl);
        } else {
          lex_fail(l, cl, "expected '&&'");
        }
        break;
      default:
        lex_fail(l, cl, std::string("unexpected character '") + c + "'");
    }
  }
  push(Tok::Eof, line, col);
  return out;
}

// ---------------------------------------------------------------- parser

struct Parser {
  std::vector<Token> ts;
  size_t i = 0;
  std::map<std::string, bool> declared;  // symbol name -> is_me
  std::set<std::string> param_names;
  Program prog;

  const Token& cur() const { return ts[i]; }
  bool check(Tok k) const { return ts[i].kind == k; }
  bool accept(Tok k) {
    if (!check(k)) return false;
    ++i;
    return true;
  }
  const Token& expect(Tok k, const char* what) {
    if (!check(k)) fail(cur(), std::string("expected ") + what);
    return ts[i++];
  }
  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw SpError(ErrorKind::SyntaxError, t.line, t.col, msg);
  }

  int parse_nat(const char* what) {
    const Token& t = expect(Tok::Number, what);
    if (t.num > 1000000000) fail(t, "number out of range");
    return static_cast<int>(t.num);
  }

  int parse_sint() {
    bool neg = accept(Tok::Minus);
    int v = parse_nat("integer");
    return neg ? -v : v;
  }

  ExprPtr parse_expr() {
    ExprPtr lhs = parse_mul();
    for (;;) {
      if (accept(Tok::Plus)) {
        lhs = make_binary(Expr::Kind::Add, std::move(lhs), parse_mul());
      } else if (accept(Tok::Minus)) {
        lhs = make_binary(Expr::Kind::Sub, std::move(lhs), parse_mul());
      } else {
        return lhs;
      }
    }
  }

  ExprPtr parse_mul() {
    ExprPtr lhs = parse_atom();
    while (accept(Tok::Star)) lhs = make_binary(Expr::Kind::Mul, std::move(lhs), parse_atom());
    return lhs;
  }

  ExprPtr parse_atom() {
    if (check(Tok::Number)) return make_number(ts[i++].num);
    if (check(Tok::Ident)) return make_var(ts[i++].text);
    if (accept(Tok::LParen)) {
      ExprPtr e = parse_expr();
      expect(Tok::RParen, "')'");
      return e;
    }
    if (accept(Tok::Minus)) {
      ExprPtr a = parse_atom();
      if (a->kind == Expr::Kind::Number) return make_number(-a->value);
      return make_binary(Expr::Kind::Sub, make_number(0), std::move(a));
    }
    fail(cur(), "expected expression");
  }

  SymbolRef parse_symbolref() {
    if (check(Tok::IdxStart)) {
      const Token& t = ts[i++];
      if (!declared.count(t.text))
        throw SpError(ErrorKind::UndeclaredSymbol, t.line, t.col,
                      "undeclared symbol: " + t.text);
      ExprPtr idx = parse_expr();
      expect(Tok::RBrace, "'}'");
      return {t.text, std::move(idx)};
    }
    const Token& t = expect(Tok::Ident, "symbol name");
    if (declared.count(t.text)) return {t.text, nullptr};
    size_t us = t.text.rfind('_');
    if (us != std::string::npos && us + 1 < t.text.size()) {
      std::string suffix = t.text.substr(us + 1);
      if (std::all_of(suffix.begin(), suffix.end(),
                      [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) &&
          suffix.size() <= 9) {
        std::string base = t.text.substr(0, us);
        if (declared.count(base)) return {base, make_number(std::stoll(suffix))};
      }
    }
    throw SpError(ErrorKind::UndeclaredSymbol, t.line, t.col, "undeclared symbol: " + t.text);
  }

  ExprPtr parse_count() {
    if (check(Tok::Number)) {
      long long v = ts[i++].num;
      return v == 1 ? nullptr : make_number(v);
    }
    if (check(Tok::Ident)) return make_var(ts[i++].text);
    if (accept(Tok::LBrace)) {
      ExprPtr e = parse_expr();
      expect(Tok::RBrace, "'}'");
      if (e->kind == Expr::Kind::Number && e->value == 1) return nullptr;
      return e;
    }
    fail(cur(), "expected multiplicity");
  }

  MultisetExpr parse_multiset() {
    MultisetExpr ms;
    while (check(Tok::Ident) || check(Tok::IdxStart)) {
      TermExpr term;
      term.sym = parse_symbolref();
      if (accept(Tok::Caret)) term.count = parse_count();
      ms.push_back(std::move(term));
    }
    if (ms.empty()) fail(cur(), "expected multiset");
    return ms;
  }

  TargetExpr parse_target() {
    TargetExpr t;
    if (accept(Tok::KwHere)) {
      t.kind = TargetExpr::Kind::Here;
      return t;
    }
    if (accept(Tok::KwOut)) {
      t.kind = TargetExpr::Kind::Out;
      return t;
    }
    if (accept(Tok::KwIn)) {
      t.kind = TargetExpr::Kind::In;
      t.in_label = parse_nat("membrane label");
      return t;
    }
    if (accept(Tok::LParen)) {
      t.dx = parse_sint();
      expect(Tok::Comma, "','");
      t.dy = parse_sint();
      expect(Tok::RParen, "')'");
      t.kind = (t.dx == 0 && t.dy == 0) ? TargetExpr::Kind::Here : TargetExpr::Kind::Delta;
      return t;
    }
    if (check(Tok::Ident) && ts[i].text.size() == 1) {
      char c = ts[i].text[0];
      int dx = 0, dy = 0;
      if (c == 'N') dy = 1;
      else if (c == 'S') dy = -1;
      else if (c == 'E') dx = 1;
      else if (c == 'W') dx = -1;
      if (dx != 0 || dy != 0) {
        ++i;
        t.kind = TargetExpr::Kind::Delta;
        t.dx = dx;
        t.dy = dy;
        return t;
      }
    }
    fail(cur(), "expected target (here, (dx,dy), N/S/E/W, out, in <label>)");
  }

  std::vector<MessageExpr> parse_messages() {
    std::vector<MessageExpr> msgs;
    if (accept(Tok::Dot)) return msgs;
    for (;;) {
      if (accept(Tok::LParen)) {
        MessageExpr m;
        m.payload = parse_multiset();
        expect(Tok::RParen, "')'");
        expect(Tok::At, "'@'");
        m.target = parse_target();
        msgs.push_back(std::move(m));
      } else if (check(Tok::Ident) || check(Tok::IdxStart)) {
        MessageExpr m;
        m.payload = parse_multiset();
        msgs.push_back(std::move(m));  // bare run: implicit @here
      } else {
        break;
      }
    }
    if (msgs.empty()) fail(cur(), "expected products or '.'");
    // Merge runs of here-targeted messages so the bare rendering is canonical.
    std::vector<MessageExpr> merged;
    for (auto& m : msgs) {
      if (!merged.empty() && merged.back().target.kind == TargetExpr::Kind::Here &&
          m.target.kind == TargetExpr::Kind::Here) {
        for (auto& term : m.payload) merged.back().payload.push_back(std::move(term));
      } else {
        merged.push_back(std::move(m));
      }
    }
    return merged;
  }

  RuleExpr parse_single_rule() {
    RuleExpr r;
    r.lhs1 = parse_multiset();
    expect(Tok::Arrow, "'->'");
    r.rhs1 = parse_messages();
    return r;
  }

  RuleExpr parse_pair_rule() {
    RuleExpr r;
    r.pair = true;
    r.lhs1 = parse_multiset();
    expect(Tok::Pipe, "'|'");
    r.lhs2 = parse_multiset();
    expect(Tok::Arrow, "'->'");
    r.rhs1 = parse_messages();
    expect(Tok::Pipe, "'|'");
    r.rhs2 = parse_messages();
    r.orientations = kOrientAll;
    if (accept(Tok::At)) {
      uint8_t mask = 0;
      while (check(Tok::Ident)) {
        const Token& t = ts[i++];
        uint8_t bit = 0;
        if (t.text == "N") bit = kOrientN;
        else if (t.text == "S") bit = kOrientS;
        else if (t.text == "E") bit = kOrientE;
        else if (t.text == "W") bit = kOrientW;
        else fail(t, "expected orientation letter N/S/E/W");
        if (mask & bit) fail(t, "duplicate orientation letter");
        mask |= bit;
      }
      if (mask == 0) fail(cur(), "expected orientation letters after '@'");
      r.orientations = mask;
    }
    return r;
  }

  RuleItem parse_rule_item() {
    RuleItem item;
    if (accept(Tok::KwRule)) {
      item.rule = parse_single_rule();
    } else if (accept(Tok::KwPair)) {
      item.rule = parse_pair_rule();
    } else if (accept(Tok::KwForall)) {
      std::set<std::string> vars;
      do {
        VarRange r;
        const Token& v = expect(Tok::Ident, "quantifier variable");
        if (!vars.insert(v.text).second) fail(v, "duplicate quantifier variable: " + v.text);
        r.var = v.text;
        expect(Tok::KwIn, "'in'");
        r.lo = parse_expr();
        expect(Tok::DotDot, "'..'");
        r.hi = parse_expr();
        item.ranges.push_back(std::move(r));
      } while (accept(Tok::Comma));
      if (accept(Tok::KwWhere)) {
        do {
          Constraint c;
          c.lhs = parse_expr();
          if (accept(Tok::Lt)) c.op = CmpOp::Lt;
          else if (accept(Tok::Le)) c.op = CmpOp::Le;
          else if (accept(Tok::EqEq)) c.op = CmpOp::Eq;
          else if (accept(Tok::Ne)) c.op = CmpOp::Ne;
          else if (accept(Tok::Ge)) c.op = CmpOp::Ge;
          else if (accept(Tok::Gt)) c.op = CmpOp::Gt;
          else fail(cur(), "expected comparison operator");
          c.rhs = parse_expr();
          item.where.push_back(std::move(c));
        } while (accept(Tok::AndAnd));
      }
      expect(Tok::Colon, "':'");
      if (accept(Tok::KwRule)) item.rule = parse_single_rule();
      else if (accept(Tok::KwPair)) item.rule = parse_pair_rule();
      else fail(cur(), "expected 'rule' or 'pair' after ':'");
    } else {
      fail(cur(), "expected 'rule', 'pair', or 'forall'");
    }
    expect(Tok::Semi, "';'");
    return item;
  }

  MembraneDecl parse_membrane() {
    expect(Tok::KwMembrane, "'membrane'");
    MembraneDecl m;
    m.label = parse_nat("membrane label");
    if (accept(Tok::KwIn)) {
      m.parent = parse_nat("parent label");
      expect(Tok::KwAt, "'at'");
      expect(Tok::LParen, "'('");
      m.ox = parse_nat("origin x");
      expect(Tok::Comma, "','");
      m.oy = parse_nat("origin y");
      expect(Tok::RParen, "')'");
    }
    expect(Tok::KwSize, "'size'");
    const Token& d = expect(Tok::Dim, "size WxH");
    m.width = d.w;
    m.height = d.h;
    expect(Tok::LBrace, "'{'");
    while (!check(Tok::RBrace)) m.items.push_back(parse_rule_item());
    expect(Tok::RBrace, "'}'");
    return m;
  }

  PlacementDecl parse_placement() {
    expect(Tok::KwPlace, "'place'");
    PlacementDecl p;
    p.what = parse_multiset();
    expect(Tok::KwAt, "'at'");
    p.label = parse_nat("membrane label");
    expect(Tok::Colon, "':'");
    expect(Tok::LParen, "'('");
    p.x = parse_nat("x coordinate");
    expect(Tok::Comma, "','");
    p.y = parse_nat("y coordinate");
    expect(Tok::RParen, "')'");
    expect(Tok::Semi, "';'");
    return p;
  }

  void declare_name(const Token& t, bool is_me) {
    if (declared.count(t.text) || param_names.count(t.text))
      throw SpError(ErrorKind::DuplicateDeclaration, t.line, t.col,
                    "name declared twice: " + t.text);
    declared[t.text] = is_me;
    (is_me ? prog.me_objects : prog.objects).push_back(t.text);
  }

  Program run() {
    for (;;) {
      if (check(Tok::KwObjects) || check(Tok::KwMeObjects)) {
        bool is_me = cur().kind == Tok::KwMeObjects;
        ++i;
        if (!check(Tok::Ident)) fail(cur(), "expected symbol name");
        while (check(Tok::Ident)) declare_name(ts[i++], is_me);
        expect(Tok::Semi, "';'");
      } else if (accept(Tok::KwParam)) {
        const Token& name = expect(Tok::Ident, "parameter name");
        if (declared.count(name.text) || param_names.count(name.text))
          throw SpError(ErrorKind::DuplicateDeclaration, name.line, name.col,
                        "name declared twice: " + name.text);
        expect(Tok::Assign, "'='");
        bool neg = accept(Tok::Minus);
        const Token& v = expect(Tok::Number, "parameter value");
        expect(Tok::Semi, "';'");
        param_names.insert(name.text);
        prog.params.push_back({name.text, neg ? -v.num : v.num});
      } else {
        break;
      }
    }
    while (check(Tok::KwMembrane)) prog.membranes.push_back(parse_membrane());
    while (check(Tok::KwPlace)) prog.placements.push_back(parse_placement());
    if (!check(Tok::Eof)) fail(cur(), "expected 'membrane', 'place', or end of input");
    return std::move(prog);
  }
};

}  // namespace

Program parse_program(std::string_view text) {
  Parser parser;
  parser.ts = lex(text);
  return parser.run();
}

// ---------------------------------------------------------------- render

namespace {

int prec_of(Expr::Kind k) {
  switch (k) {
    case Expr::Kind::Add:
    case Expr::Kind::Sub: return 1;
    case Expr::Kind::Mul: return 2;
    default: return 3;
  }
}

void render_expr(std::string& out, const ExprPtr& e, int ctx) {
  int p = prec_of(e->kind);
  bool paren = p < ctx;
  if (paren) out += '(';
  switch (e->kind) {
    case Expr::Kind::Number: out += std::to_string(e->value); break;
    case Expr::Kind::Var: out += e->name; break;
    case Expr::Kind::Add:
      render_expr(out, e->lhs, 1);
      out += '+';
      render_expr(out, e->rhs, 2);
      break;
    case Expr::Kind::Sub:
      render_expr(out, e->lhs, 1);
      out += '-';
      render_expr(out, e->rhs, 2);
      break;
    case Expr::Kind::Mul:
      render_expr(out, e->lhs, 2);
      out += '*';
      render_expr(out, e->rhs, 3);
      break;
  }
  if (paren) out += ')';
}

std::string expr_text(const ExprPtr& e) {
  std::string s;
  render_expr(s, e, 1);
  return s;
}

void render_symbolref(std::string& out, const SymbolRef& s) {
  out += s.base;
  if (!s.index) return;
  if (s.index->kind == Expr::Kind::Number && s.index->value >= 0) {
    out += '_';
    out += std::to_string(s.index->value);
  } else {
    out += "_{";
    out += expr_text(s.index);
    out += '}';
  }
}

void render_multiset(std::string& out, const MultisetExpr& ms) {
  for (size_t i = 0; i < ms.size(); ++i) {
    if (i) out += ' ';
    render_symbolref(out, ms[i].sym);
    const ExprPtr& c = ms[i].count;
    if (!c) continue;
    if (c->kind == Expr::Kind::Number && c->value >= 0) {
      out += '^';
      out += std::to_string(c->value);
    } else if (c->kind == Expr::Kind::Var) {
      out += '^';
      out += c->name;
    } else {
      out += "^{";
      out += expr_text(c);
      out += '}';
    }
  }
}

void render_target(std::string& out, const TargetExpr& t) {
  switch (t.kind) {
    case TargetExpr::Kind::Here: out += "@here"; break;  // never reached from render_messages
    case TargetExpr::Kind::Out: out += "@out"; break;
    case TargetExpr::Kind::In:
      out += "@in ";
      out += std::to_string(t.in_label);
      break;
    case TargetExpr::Kind::Delta:
      if (t.dx == 0 && t.dy == 1) out += "@N";
      else if (t.dx == 0 && t.dy == -1) out += "@S";
      else if (t.dx == 1 && t.dy == 0) out += "@E";
      else if (t.dx == -1 && t.dy == 0) out += "@W";
      else {
        out += "@(";
        out += std::to_string(t.dx);
        out += ',';
        out += std::to_string(t.dy);
        out += ')';
      }
      break;
  }
}

void render_messages(std::string& out, const std::vector<MessageExpr>& msgs) {
  if (msgs.empty()) {
    out += '.';
    return;
  }
  for (size_t i = 0; i < msgs.size(); ++i) {
    if (i) out += ' ';
    if (msgs[i].target.kind == TargetExpr::Kind::Here) {
      render_multiset(out, msgs[i].payload);
    } else {
      out += '(';
      render_multiset(out, msgs[i].payload);
      out += ')';
      render_target(out, msgs[i].target);
    }
  }
}

const char* cmp_text(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Eq: return "==";
    case CmpOp::Ne: return "!=";
    case CmpOp::Ge: return ">=";
    default: return ">";
  }
}

void render_rule(std::string& out, const RuleExpr& r) {
  if (!r.pair) {
    out += "rule ";
    render_multiset(out, r.lhs1);
    out += " -> ";
    render_messages(out, r.rhs1);
    out += ';';
    return;
  }
  out += "pair ";
  render_multiset(out, r.lhs1);
  out += " | ";
  render_multiset(out, r.lhs2);
  out += " -> ";
  render_messages(out, r.rhs1);
  out += " | ";
  render_messages(out, r.rhs2);
  out += " @";
  if (r.orientations & kOrientN) out += " N";
  if (r.orientations & kOrientS) out += " S";
  if (r.orientations & kOrientE) out += " E";
  if (r.orientations & kOrientW) out += " W";
  out += ';';
}

void render_item(std::string& out, const RuleItem& item) {
  if (!item.ranges.empty()) {
    out += "forall ";
    for (size_t i = 0; i < item.ranges.size(); ++i) {
      if (i) out += ", ";
      out += item.ranges[i].var;
      out += " in ";
      out += expr_text(item.ranges[i].lo);
      out += "..";
      out += expr_text(item.ranges[i].hi);
    }
    if (!item.where.empty()) {
      out += " where ";
      for (size_t i = 0; i < item.where.size(); ++i) {
        if (i) out += " && ";
        out += expr_text(item.where[i].lhs);
        out += ' ';
        out += cmp_text(item.where[i].op);
        out += ' ';
        out += expr_text(item.where[i].rhs);
      }
    }
    out += ": ";
  }
  render_rule(out, item.rule);
}

}  // namespace

std::string render_program(const Program& program) {
  std::string out;
  if (!program.objects.empty()) {
    out += "objects";
    for (const auto& n : program.objects) {
      out += ' ';
      out += n;
    }
    out += ";\n";
  }
  if (!program.me_objects.empty()) {
    out += "me-objects";
    for (const auto& n : program.me_objects) {
      out += ' ';
      out += n;
    }
    out += ";\n";
  }
  for (const auto& [name, value] : program.params) {
    out += "param ";
    out += name;
    out += " = ";
    out += std::to_string(value);
    out += ";\n";
  }
  for (const auto& m : program.membranes) {
    out += "membrane ";
    out += std::to_string(m.label);
    if (m.parent) {
      out += " in ";
      out += std::to_string(*m.parent);
      out += " at (";
      out += std::to_string(m.ox);
      out += ',';
      out += std::to_string(m.oy);
      out += ')';
    }
    out += " size ";
    out += std::to_string(m.width);
    out += 'x';
    out += std::to_string(m.height);
    out += " {\n";
    for (const auto& item : m.items) {
      out += "  ";
      render_item(out, item);
      out += '\n';
    }
    out += "}\n";
  }
  for (const auto& p : program.placements) {
    out += "place ";
    render_multiset(out, p.what);
    out += " at ";
    out += std::to_string(p.label);
    out += ":(";
    out += std::to_string(p.x);
    out += ',';
    out += std::to_string(p.y);
    out += ");\n";
  }
  return out;
}

// ---------------------------------------------------------------- expansion

namespace {

bool cmp_holds(const Constraint& c, const Env& env) {
  long long a = eval_expr(c.lhs, env);
  long long b = eval_expr(c.rhs, env);
  switch (c.op) {
    case CmpOp::Lt: return a < b;
    case CmpOp::Le: return a <= b;
    case CmpOp::Eq: return a == b;
    case CmpOp::Ne: return a != b;
    case CmpOp::Ge: return a >= b;
    default: return a > b;
  }
}

struct Expander {
  Program out;
  Env params;
  std::map<std::string, bool> ground_kind;  // every ground name -> is_me
  std::map<std::string, bool> base_kind;    // literally declared names

  Expander(const Program& src, const Env& overrides) {
    for (const auto& [n, v] : src.params) params[n] = v;
    for (const auto& [n, v] : overrides) {
      if (!params.count(n))
        throw SpError(ErrorKind::InvalidParams, "override names undeclared parameter: " + n);
      params[n] = v;
    }
    out.objects = src.objects;
    out.me_objects = src.me_objects;
    for (const auto& n : src.objects) base_kind[n] = ground_kind[n] = false;
    for (const auto& n : src.me_objects) base_kind[n] = ground_kind[n] = true;
  }

  SymbolRef ground_sym(const SymbolRef& s, const Env& env) {
    if (!s.index) return s;
    long long k = eval_expr(s.index, env);
    if (k < 0)
      throw SpError(ErrorKind::UndeclaredSymbol,
                    "negative index " + std::to_string(k) + " for symbol family " + s.base);
    std::string name = s.base + "_" + std::to_string(k);
    bool me = base_kind.at(s.base);
    auto it = ground_kind.find(name);
    if (it == ground_kind.end()) {
      ground_kind[name] = me;
      (me ? out.me_objects : out.objects).push_back(name);
    } else if (it->second != me) {
      throw SpError(ErrorKind::DuplicateDeclaration,
                    "materialized symbol conflicts with a declaration: " + name);
    }
    return {std::move(name), nullptr};
  }

  ExprPtr ground_count(const ExprPtr& c, const Env& env) {
    if (!c) return nullptr;
    long long k = eval_expr(c, env);
    if (k < 1)
      throw SpError(ErrorKind::InvalidParams, "non-positive multiplicity: " + std::to_string(k));
    return k == 1 ? nullptr : make_number(k);
  }

  MultisetExpr ground_ms(const MultisetExpr& ms, const Env& env) {
    MultisetExpr g;
    g.reserve(ms.size());
    for (const TermExpr& t : ms) g.push_back({ground_sym(t.sym, env), ground_count(t.count, env)});
    return g;
  }

  std::vector<MessageExpr> ground_msgs(const std::vector<MessageExpr>& msgs, const Env& env) {
    std::vector<MessageExpr> g;
    g.reserve(msgs.size());
    for (const MessageExpr& m : msgs) g.push_back({ground_ms(m.payload, env), m.target});
    return g;
  }

  RuleExpr ground_rule(const RuleExpr& r, const Env& env) {
    RuleExpr g;
    g.pair = r.pair;
    g.lhs1 = ground_ms(r.lhs1, env);
    if (r.pair) g.lhs2 = ground_ms(r.lhs2, env);
    g.rhs1 = ground_msgs(r.rhs1, env);
    if (r.pair) g.rhs2 = ground_msgs(r.rhs2, env);
    g.orientations = r.orientations;
    return g;
  }

  void expand_item(const RuleItem& item, size_t range_index, Env env,
                   std::vector<RuleItem>& dst) {
    if (range_index == item.ranges.size()) {
      for (const Constraint& c : item.where)
        if (!cmp_holds(c, env)) return;
      dst.push_back({{}, {}, ground_rule(item.rule, env)});
      return;
    }
    const VarRange& r = item.ranges[range_index];
    long long lo = eval_expr(r.lo, env);
    long long hi = eval_expr(r.hi, env);
    if (lo > hi)
      throw SpError(ErrorKind::EmptyRange, "range " + std::to_string(lo) + ".." +
                                               std::to_string(hi) + " for " + r.var +
                                               " is empty");
    for (long long v = lo; v <= hi; ++v) {
      env[r.var] = v;
      expand_item(item, range_index + 1, env, dst);
    }
  }
};

}  // namespace

Program expand_families(const Program& program, const Env& overrides) {
  Expander ex(program, overrides);
  for (const MembraneDecl& m : program.membranes) {
    MembraneDecl g;
    g.label = m.label;
    g.parent = m.parent;
    g.ox = m.ox;
    g.oy = m.oy;
    g.width = m.width;
    g.height = m.height;
    for (const RuleItem& item : m.items) ex.expand_item(item, 0, ex.params, g.items);
    ex.out.membranes.push_back(std::move(g));
  }
  for (const PlacementDecl& p : program.placements)
    ex.out.placements.push_back({ex.ground_ms(p.what, ex.params), p.label, p.x, p.y});
  return std::move(ex.out);
}

// ---------------------------------------------------------------- compile

namespace {

Multiset ms_value(const SymbolTable& symbols, const MultisetExpr& ms) {
  Multiset out;
  for (const TermExpr& t : ms) {
    if (t.sym.index)
      throw SpError(ErrorKind::InvalidState, "model not ground: indexed symbol remains");
    long long k = 1;
    if (t.count) {
      if (t.count->kind != Expr::Kind::Number)
        throw SpError(ErrorKind::InvalidState, "model not ground: symbolic multiplicity remains");
      k = t.count->value;
      if (k < 1)
        throw SpError(ErrorKind::InvalidParams,
                      "non-positive multiplicity: " + std::to_string(k));
    }
    out.add(symbols.require(t.sym.base), Count(k));
  }
  return out;
}

std::string hex16(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

Model compile_model(const Program& ground) {
  if (!ground.params.empty())
    throw SpError(ErrorKind::InvalidState, "model not ground: parameters remain");

  Model model;
  for (const auto& n : ground.objects) model.symbols.declare(n, SymbolKind::Ordinary);
  for (const auto& n : ground.me_objects) model.symbols.declare(n, SymbolKind::MutuallyExclusive);

  std::set<int> labels;
  for (const MembraneDecl& m : ground.membranes) labels.insert(m.label);

  const MembraneDecl* skin = nullptr;
  for (const MembraneDecl& m : ground.membranes)
    if (m.label == 1) skin = &m;
  if (!skin) throw SpError(ErrorKind::MissingSkin, "no membrane labeled 1");

  std::vector<MembraneSpec> specs;
  specs.reserve(ground.membranes.size());
  for (const MembraneDecl& m : ground.membranes) {
    MembraneSpec spec;
    spec.label = m.label;
    spec.parent = m.parent;
    spec.origin = {m.ox, m.oy};
    spec.width = m.width;
    spec.height = m.height;
    for (const RuleItem& item : m.items) {
      if (!item.ranges.empty())
        throw SpError(ErrorKind::InvalidState, "model not ground: quantifier remains");
      const RuleExpr& re = item.rule;
      Rule rule;
      rule.reactants1 = ms_value(model.symbols, re.lhs1);
      if (re.pair) rule.reactants2 = ms_value(model.symbols, re.lhs2);
      auto convert = [&](const std::vector<MessageExpr>& src, std::vector<Message>& dst) {
        for (const MessageExpr& me : src) {
          Message msg;
          msg.payload = ms_value(model.symbols, me.payload);
          switch (me.target.kind) {
            case TargetExpr::Kind::Here: msg.target = Target::here(); break;
            case TargetExpr::Kind::Delta: msg.target = Target::at({me.target.dx, me.target.dy}); break;
            case TargetExpr::Kind::Out: msg.target = Target::out(); break;
            case TargetExpr::Kind::In:
              if (!labels.count(me.target.in_label))
                throw SpError(ErrorKind::UnknownLabel,
                              "in-target names unknown membrane " +
                                  std::to_string(me.target.in_label));
              msg.target = Target::in(me.target.in_label);
              break;
          }
          dst.push_back(std::move(msg));
        }
      };
      convert(re.rhs1, rule.products1);
      if (re.pair) {
        convert(re.rhs2, rule.products2);
        rule.orientations = re.orientations ? re.orientations : uint8_t{kOrientAll};
      }
      spec.rules.push_back(std::move(rule));
    }
    specs.push_back(std::move(spec));
  }

  auto tree = std::make_shared<MembraneTree>(
      validate_tree(std::move(specs), skin->width, skin->height));
  model.tree = tree;
  model.initial = Configuration(tree);

  for (const PlacementDecl& p : ground.placements) {
    if (!tree->has_label(p.label))
      throw SpError(ErrorKind::UnknownLabel,
                    "placement names unknown membrane " + std::to_string(p.label));
    Rect fp = tree->footprint(p.label);
    Position cell{fp.x0 + p.x, fp.y0 + p.y};
    auto where = [&] {
      return " at " + std::to_string(p.label) + ":(" + std::to_string(p.x) + "," +
             std::to_string(p.y) + ")";
    };
    if (!fp.contains(cell))
      throw SpError(ErrorKind::PlacementViolation, "placement outside membrane" + where());
    if (tree->owner(cell) != p.label)
      throw SpError(ErrorKind::PlacementViolation,
                    "placement lands inside a child membrane" + where());
    Multiset ms = ms_value(model.symbols, p.what);
    CellContents& cc = model.initial.at(cell);
    for (const auto& [id, n] : ms) {
      if (model.symbols.is_me(id)) {
        if (n > 1 || cc.me.has_value())
          throw SpError(ErrorKind::MeConflict,
                        "more than one exclusive object placed" + where());
        cc.me = id;
      } else {
        cc.ordinary.add(id, n);
      }
    }
  }

  model.digest = hex16(fnv1a64(render_program(ground)));
  return model;
}

Model load_model(std::string_view text, const Env& overrides) {
  return compile_model(expand_families(parse_program(text), overrides));
}

}  // namespace spsim::dsl
