#include "lom/parser.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

namespace lom {

namespace {

constexpr std::array<std::string_view, 18> kKeywords = {
    "class", "aspect", "var",  "def",   "static", "init",   "if",     "else",   "while",
    "return", "new",   "spawn", "this", "true",   "false",  "null",   "before", "after"};

constexpr std::array<std::string_view, 16> kBuiltins = {
    "print",          "len",          "push_back",     "pop_back",
    "make_list",      "make_monitor", "monitor_acquire", "monitor_release",
    "monitor_wait",   "monitor_notify_all", "format",  "format_list",
    "emit_audit",     "str",          "class_name",    "thread_id"};

bool is_keyword(std::string_view s) {
  return std::find(kKeywords.begin(), kKeywords.end(), s) != kKeywords.end();
}

int binary_precedence(const Token& t) {
  if (t.kind != TokenKind::Punct) return -1;
  const std::string& s = t.text;
  if (s == "||") return 1;
  if (s == "&&") return 2;
  if (s == "==" || s == "!=") return 3;
  if (s == "<" || s == "<=" || s == ">" || s == ">=") return 4;
  if (s == "+" || s == "-") return 5;
  if (s == "*" || s == "/" || s == "%") return 6;
  return -1;
}

enum class DeclCategory { Class, Field, Method, Advice, Aspect };

const char* category_name(DeclCategory c) {
  switch (c) {
    case DeclCategory::Class: return "class";
    case DeclCategory::Field: return "field";
    case DeclCategory::Method: return "method";
    case DeclCategory::Advice: return "advice";
    case DeclCategory::Aspect: return "aspect";
  }
  return "declaration";
}

// Which annotations a declaration category accepts.
void check_annotations(const std::vector<Annotation>& anns, DeclCategory cat) {
  for (const auto& a : anns) {
    bool ok = false;
    if (a.name == "hideType") ok = cat == DeclCategory::Class || cat == DeclCategory::Aspect;
    else if (a.name == "hideField") ok = cat == DeclCategory::Field;
    else if (a.name == "hideMethod") ok = cat == DeclCategory::Method || cat == DeclCategory::Advice;
    else if (a.name == "order" || a.name == "loc") ok = cat == DeclCategory::Advice;
    else throw ParseError(a.loc, "unknown annotation '@" + a.name + "'");
    if (!ok) {
      throw ParseError(a.loc, "annotation '@" + a.name + "' is not allowed on a " +
                                  category_name(cat));
    }
  }
  std::set<std::string> seen;
  for (const auto& a : anns) {
    if (!seen.insert(a.name).second) {
      throw ParseError(a.loc, "duplicate annotation '@" + a.name + "'");
    }
  }
}

bool is_lvalue(const Expr& e) {
  return e.kind == ExprKind::Name || e.kind == ExprKind::Member || e.kind == ExprKind::Index;
}

// True when every top-level disjunct contains a kinded (static) primitive.
bool is_matchable(const Pointcut& pc) {
  switch (pc.kind) {
    case PointcutKind::Execution:
    case PointcutKind::Call:
    case PointcutKind::Get:
    case PointcutKind::Set:
    case PointcutKind::PreInitialization:
    case PointcutKind::Initialization:
    case PointcutKind::StaticInitialization:
      return true;
    case PointcutKind::And: return is_matchable(*pc.left) || is_matchable(*pc.right);
    case PointcutKind::Or: return is_matchable(*pc.left) && is_matchable(*pc.right);
    default: return false;
  }
}

}  // namespace

bool is_builtin(std::string_view name) {
  return std::find(kBuiltins.begin(), kBuiltins.end(), name) != kBuiltins.end();
}

Parser::Parser(std::string_view text, std::string path)
    : tokens_(tokenize(text, path)), path_(std::move(path)) {}

const Token& Parser::peek(std::size_t ahead) const {
  std::size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
  return tokens_[i];
}

const Token& Parser::next() {
  const Token& t = tokens_[pos_];
  if (pos_ + 1 < tokens_.size()) ++pos_;
  return t;
}

bool Parser::accept_punct(std::string_view p) {
  if (peek().is_punct(p)) {
    next();
    return true;
  }
  return false;
}

bool Parser::accept_ident(std::string_view word) {
  if (peek().is_ident(word)) {
    next();
    return true;
  }
  return false;
}

const Token& Parser::expect_punct(std::string_view p) {
  if (!peek().is_punct(p)) fail(peek(), "expected '" + std::string(p) + "'");
  return next();
}

const Token& Parser::expect_ident(std::string_view word) {
  if (!peek().is_ident(word)) fail(peek(), "expected '" + std::string(word) + "'");
  return next();
}

std::string Parser::expect_name(std::string_view what) {
  const Token& t = peek();
  if (t.kind != TokenKind::Ident || is_keyword(t.text)) {
    fail(t, "expected " + std::string(what));
  }
  return next().text;
}

void Parser::fail(const Token& at, const std::string& message) const {
  std::string found;
  switch (at.kind) {
    case TokenKind::End: found = "end of input"; break;
    case TokenKind::String: found = "string literal"; break;
    default: found = "'" + at.text + "'"; break;
  }
  throw ParseError(loc_of(at), message + ", found " + found);
}

// ---------------------------------------------------------------------------
// Annotations

std::vector<Annotation> Parser::parse_annotations() {
  std::vector<Annotation> out;
  while (peek().is_punct("@")) {
    Annotation ann;
    ann.loc = loc_of(next());
    ann.name = expect_name("annotation name");
    if (accept_punct("(")) {
      ann.has_parens = true;
      if (!peek().is_punct(")")) {
        do {
          AnnotationArg arg;
          arg.loc = loc_of(peek());
          if (peek().kind == TokenKind::Ident && peek(1).is_punct("=")) {
            arg.key = next().text;
            next();
          }
          bool negative = accept_punct("-");
          const Token& v = next();
          if (v.kind == TokenKind::Int || v.kind == TokenKind::Float) {
            arg.kind = AnnotationArg::Kind::Number;
            arg.text = (negative ? "-" : "") + v.text;
            arg.number = std::stod(arg.text);
          } else if (negative) {
            fail(v, "expected a number after '-'");
          } else if (v.kind == TokenKind::String) {
            arg.kind = AnnotationArg::Kind::String;
            arg.text = v.text;
          } else if (v.kind == TokenKind::Ident) {
            arg.kind = AnnotationArg::Kind::Ident;
            arg.text = v.text;
          } else {
            fail(v, "expected an annotation argument");
          }
          ann.args.push_back(std::move(arg));
        } while (accept_punct(","));
      }
      expect_punct(")");
    }
    out.push_back(std::move(ann));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Declarations

Program Parser::parse_program() {
  Program prog;
  std::set<std::string> names;
  while (!at_end()) {
    auto anns = parse_annotations();
    if (peek().is_ident("aspect")) fail(peek(), "aspects must be declared in .ma0 files");
    if (!peek().is_ident("class")) fail(peek(), "expected 'class'");
    ClassDecl cls = parse_class(std::move(anns));
    if (!names.insert(cls.name).second) {
      throw ParseError(cls.loc, "duplicate class '" + cls.name + "'");
    }
    prog.classes.push_back(std::move(cls));
  }
  return prog;
}

ClassDecl Parser::parse_class(std::vector<Annotation> anns) {
  check_annotations(anns, DeclCategory::Class);
  ClassDecl cls;
  cls.loc = loc_of(expect_ident("class"));
  cls.annotations = std::move(anns);
  cls.name = expect_name("class name");
  expect_punct("{");
  std::set<std::string> members;
  auto claim = [&](const std::string& name, const SourceLoc& loc, const char* what) {
    if (!members.insert(name).second) {
      throw ParseError(loc, std::string("duplicate ") + what + " '" + name + "' in class '" +
                                cls.name + "'");
    }
  };
  while (!accept_punct("}")) {
    if (at_end()) fail(peek(), "expected '}' to close class '" + cls.name + "'");
    auto member_anns = parse_annotations();
    const Token& t = peek();
    if (t.is_ident("var")) {
      FieldDecl f = parse_field(std::move(member_anns), false);
      claim(f.name, f.loc, "field");
      cls.fields.push_back(std::move(f));
    } else if (t.is_ident("static") && peek(1).is_ident("var")) {
      next();
      FieldDecl f = parse_field(std::move(member_anns), true);
      claim(f.name, f.loc, "field");
      cls.fields.push_back(std::move(f));
    } else if (t.is_ident("static")) {
      if (!member_anns.empty()) throw ParseError(member_anns.front().loc, "annotations are not allowed on static blocks");
      if (cls.static_init) fail(t, "duplicate static block in class '" + cls.name + "'");
      cls.static_loc = loc_of(next());
      cls.static_init = parse_block();
    } else if (t.is_ident("init")) {
      if (!member_anns.empty()) throw ParseError(member_anns.front().loc, "annotations are not allowed on constructors");
      if (cls.ctor) fail(t, "duplicate constructor in class '" + cls.name + "'");
      SourceLoc loc = loc_of(next());
      cls.ctor = parse_method_rest("<init>", loc, {});
    } else if (t.is_ident("def")) {
      next();
      SourceLoc loc = loc_of(peek());
      std::string name = expect_name("method name");
      check_annotations(member_anns, DeclCategory::Method);
      MethodDecl m = parse_method_rest(name, loc, std::move(member_anns));
      claim(m.name, m.loc, "method");
      cls.methods.push_back(std::move(m));
    } else {
      fail(t, "expected a class member ('var', 'static', 'init' or 'def')");
    }
  }
  return cls;
}

FieldDecl Parser::parse_field(std::vector<Annotation> anns, bool is_static) {
  check_annotations(anns, DeclCategory::Field);
  expect_ident("var");
  FieldDecl f;
  f.loc = loc_of(peek());
  f.name = expect_name("field name");
  f.is_static = is_static;
  f.annotations = std::move(anns);
  if (accept_punct("=")) f.init = parse_expr();
  expect_punct(";");
  return f;
}

MethodDecl Parser::parse_method_rest(std::string name, SourceLoc loc, std::vector<Annotation> anns) {
  MethodDecl m;
  m.name = std::move(name);
  m.loc = std::move(loc);
  m.annotations = std::move(anns);
  expect_punct("(");
  if (!peek().is_punct(")")) {
    do {
      const Token& pt = peek();
      std::string p = expect_name("parameter name");
      if (std::find(m.params.begin(), m.params.end(), p) != m.params.end()) {
        fail(pt, "duplicate parameter '" + p + "'");
      }
      m.params.push_back(std::move(p));
    } while (accept_punct(","));
  }
  expect_punct(")");
  m.body = parse_block();
  return m;
}

std::vector<std::string> Parser::parse_name_list_until(std::string_view terminator) {
  std::vector<std::string> names;
  do {
    names.push_back(expect_name("name"));
  } while (accept_punct(","));
  expect_punct(terminator);
  return names;
}

AspectDecl Parser::parse_aspect_file() {
  AspectDecl decl;
  bool have_aspect = false;
  std::vector<std::string> top_precedence;
  while (!at_end()) {
    if (accept_ident("precedence")) {
      auto names = parse_name_list_until(";");
      top_precedence.insert(top_precedence.end(), names.begin(), names.end());
      continue;
    }
    auto anns = parse_annotations();
    if (peek().is_ident("class")) fail(peek(), "classes must be declared in .ml0 files");
    const Token& kw = expect_ident("aspect");
    if (have_aspect) fail(kw, "a .ma0 file declares exactly one aspect");
    have_aspect = true;
    check_annotations(anns, DeclCategory::Aspect);
    decl.loc = loc_of(kw);
    decl.annotations = std::move(anns);
    decl.name = expect_name("aspect name");
    decl.path = path_;
    expect_punct("{");
    std::set<std::string> members;
    int advice_index = 0;
    while (!accept_punct("}")) {
      if (at_end()) fail(peek(), "expected '}' to close aspect '" + decl.name + "'");
      if (accept_ident("precedence")) {
        auto names = parse_name_list_until(";");
        decl.precedence.insert(decl.precedence.end(), names.begin(), names.end());
        continue;
      }
      auto member_anns = parse_annotations();
      const Token& t = peek();
      if (t.is_ident("var")) {
        FieldDecl f = parse_field(std::move(member_anns), false);
        if (!members.insert(f.name).second) throw ParseError(f.loc, "duplicate field '" + f.name + "'");
        decl.fields.push_back(std::move(f));
      } else if (t.is_ident("def")) {
        next();
        SourceLoc loc = loc_of(peek());
        std::string name = expect_name("method name");
        check_annotations(member_anns, DeclCategory::Method);
        MethodDecl m = parse_method_rest(name, loc, std::move(member_anns));
        if (!members.insert(m.name).second) throw ParseError(m.loc, "duplicate method '" + m.name + "'");
        decl.methods.push_back(std::move(m));
      } else if (t.is_ident("before") || t.is_ident("after")) {
        decl.advice.push_back(parse_advice(std::move(member_anns), advice_index++));
      } else {
        fail(t, "expected an aspect member ('var', 'def', 'before', 'after' or 'precedence')");
      }
    }
  }
  if (!have_aspect) throw ParseError(SourceLoc{path_, 1, 1}, "expected an aspect declaration");
  decl.precedence.insert(decl.precedence.end(), top_precedence.begin(), top_precedence.end());
  return decl;
}

AdviceDecl Parser::parse_advice(std::vector<Annotation> anns, int index) {
  check_annotations(anns, DeclCategory::Advice);
  AdviceDecl adv;
  adv.index = index;
  const Token& kw = next();
  adv.loc = loc_of(kw);
  adv.kind = kw.text == "before" ? AdviceKind::Before : AdviceKind::After;
  for (const auto& a : anns) {
    if (a.name == "order") {
      if (a.args.size() != 1 || a.args[0].kind != AnnotationArg::Kind::Number || !a.args[0].key.empty()) {
        throw ParseError(a.loc, "@order takes exactly one numeric value");
      }
      if (!std::isfinite(a.args[0].number)) throw ParseError(a.loc, "@order value must be finite");
      adv.order = a.args[0].number;
    } else if (a.name == "loc") {
      SourceBridge b;
      bool has_file = false, has_line = false, has_module = false;
      for (const auto& arg : a.args) {
        if (arg.key == "file" && arg.kind == AnnotationArg::Kind::String) {
          b.file = arg.text;
          has_file = true;
        } else if (arg.key == "module" && arg.kind == AnnotationArg::Kind::String) {
          b.module = arg.text;
          has_module = true;
        } else if (arg.key == "line" && arg.kind == AnnotationArg::Kind::Number &&
                   arg.number == std::floor(arg.number) && arg.number >= 1) {
          b.line = static_cast<int>(arg.number);
          has_line = true;
        } else {
          throw ParseError(arg.loc, "invalid @loc argument '" + (arg.key.empty() ? arg.text : arg.key) + "'");
        }
      }
      if (!has_file || !has_line || !has_module) {
        throw ParseError(a.loc, "@loc requires file=, line= and module=");
      }
      adv.bridge = std::move(b);
    }
  }
  adv.annotations = std::move(anns);
  expect_punct("(");
  expect_punct(")");
  expect_punct(":");
  adv.pointcut = parse_pointcut();
  if (!is_matchable(*adv.pointcut)) {
    throw ParseError(adv.pointcut->loc,
                     "pointcut needs a kinded primitive (execution/call/get/set/initialization) "
                     "in every top-level branch");
  }
  adv.body = parse_block();
  return adv;
}

// ---------------------------------------------------------------------------
// Statements

Block Parser::parse_block() {
  expect_punct("{");
  Block out;
  while (!accept_punct("}")) {
    if (at_end()) fail(peek(), "expected '}'");
    out.push_back(parse_statement());
  }
  return out;
}

Block Parser::parse_block_or_statement() {
  if (peek().is_punct("{")) return parse_block();
  Block out;
  out.push_back(parse_statement());
  return out;
}

StmtPtr Parser::parse_statement() {
  const Token& t = peek();
  SourceLoc loc = loc_of(t);
  if (t.is_ident("var")) {
    next();
    auto s = std::make_unique<Stmt>(StmtKind::VarDecl, loc);
    s->name = expect_name("variable name");
    if (accept_punct("=")) s->value = parse_expr();
    expect_punct(";");
    return s;
  }
  if (t.is_ident("if")) {
    next();
    auto s = std::make_unique<Stmt>(StmtKind::If, loc);
    expect_punct("(");
    s->value = parse_expr();
    expect_punct(")");
    s->body = parse_block_or_statement();
    if (accept_ident("else")) s->else_body = parse_block_or_statement();
    return s;
  }
  if (t.is_ident("while")) {
    next();
    auto s = std::make_unique<Stmt>(StmtKind::While, loc);
    expect_punct("(");
    s->value = parse_expr();
    expect_punct(")");
    s->body = parse_block_or_statement();
    return s;
  }
  if (t.is_ident("return")) {
    next();
    auto s = std::make_unique<Stmt>(StmtKind::Return, loc);
    if (!peek().is_punct(";")) s->value = parse_expr();
    expect_punct(";");
    return s;
  }
  ExprPtr e = parse_expr();
  if (peek().is_punct("=")) {
    const Token& eq = next();
    if (!is_lvalue(*e)) fail(eq, "left side of '=' is not assignable");
    auto s = std::make_unique<Stmt>(StmtKind::Assign, loc);
    s->target = std::move(e);
    s->value = parse_expr();
    expect_punct(";");
    return s;
  }
  auto s = std::make_unique<Stmt>(StmtKind::ExprStmt, loc);
  s->value = std::move(e);
  expect_punct(";");
  return s;
}

// ---------------------------------------------------------------------------
// Expressions

ExprPtr Parser::parse_expr() { return parse_binary(1); }

ExprPtr Parser::parse_binary(int min_prec) {
  ExprPtr lhs = parse_unary();
  while (true) {
    int prec = binary_precedence(peek());
    if (prec < min_prec) break;
    const Token& op = next();
    ExprPtr rhs = parse_binary(prec + 1);
    auto e = std::make_unique<Expr>(ExprKind::Binary, loc_of(op));
    e->text = op.text;
    e->args.push_back(std::move(lhs));
    e->args.push_back(std::move(rhs));
    lhs = std::move(e);
  }
  return lhs;
}

ExprPtr Parser::parse_unary() {
  if (peek().is_punct("!") || peek().is_punct("-")) {
    const Token& op = next();
    auto e = std::make_unique<Expr>(ExprKind::Unary, loc_of(op));
    e->text = op.text;
    e->args.push_back(parse_unary());
    return e;
  }
  return parse_postfix();
}

std::vector<ExprPtr> Parser::parse_args() {
  std::vector<ExprPtr> args;
  expect_punct("(");
  if (!peek().is_punct(")")) {
    do {
      args.push_back(parse_expr());
    } while (accept_punct(","));
  }
  expect_punct(")");
  return args;
}

ExprPtr Parser::parse_postfix() {
  ExprPtr e = parse_primary();
  while (true) {
    if (peek().is_punct(".")) {
      next();
      SourceLoc loc = loc_of(peek());
      std::string name = expect_name("member name");
      if (peek().is_punct("(")) {
        auto call = std::make_unique<Expr>(ExprKind::MethodCall, loc);
        call->text = std::move(name);
        call->receiver = std::move(e);
        call->args = parse_args();
        e = std::move(call);
      } else {
        auto m = std::make_unique<Expr>(ExprKind::Member, loc);
        m->text = std::move(name);
        m->receiver = std::move(e);
        e = std::move(m);
      }
    } else if (peek().is_punct("[")) {
      SourceLoc loc = loc_of(next());
      auto idx = std::make_unique<Expr>(ExprKind::Index, loc);
      idx->receiver = std::move(e);
      idx->args.push_back(parse_expr());
      expect_punct("]");
      e = std::move(idx);
    } else {
      return e;
    }
  }
}

ExprPtr Parser::parse_primary() {
  const Token& t = peek();
  SourceLoc loc = loc_of(t);
  switch (t.kind) {
    case TokenKind::Int: {
      next();
      auto e = std::make_unique<Expr>(ExprKind::IntLit, loc);
      try {
        e->int_value = std::stoll(t.text);
      } catch (const std::out_of_range&) {
        throw ParseError(loc, "integer literal out of range");
      }
      return e;
    }
    case TokenKind::Float:
      fail(t, "floating-point values are only allowed in annotations");
    case TokenKind::String: {
      auto e = std::make_unique<Expr>(ExprKind::StringLit, loc);
      e->text = next().text;
      return e;
    }
    case TokenKind::Punct:
      if (t.is_punct("(")) {
        next();
        ExprPtr e = parse_expr();
        expect_punct(")");
        return e;
      }
      if (t.is_punct("[")) {
        next();
        auto e = std::make_unique<Expr>(ExprKind::ListLit, loc);
        if (!peek().is_punct("]")) {
          do {
            e->args.push_back(parse_expr());
          } while (accept_punct(","));
        }
        expect_punct("]");
        return e;
      }
      fail(t, "expected an expression");
    case TokenKind::End:
      fail(t, "expected an expression");
    case TokenKind::Ident:
      break;
  }

  if (t.text == "true" || t.text == "false") {
    auto e = std::make_unique<Expr>(ExprKind::BoolLit, loc);
    e->bool_value = next().text == "true";
    return e;
  }
  if (t.text == "null") {
    next();
    return std::make_unique<Expr>(ExprKind::NullLit, loc);
  }
  if (t.text == "this") {
    next();
    return std::make_unique<Expr>(ExprKind::This, loc);
  }
  if (t.text == "new") {
    next();
    auto e = std::make_unique<Expr>(ExprKind::New, loc);
    e->text = expect_name("class name");
    e->args = parse_args();
    return e;
  }
  if (t.text == "spawn") {
    next();
    const Token& at = peek();
    ExprPtr call = parse_postfix();
    if (call->kind != ExprKind::MethodCall) fail(at, "spawn expects a method call");
    auto e = std::make_unique<Expr>(ExprKind::Spawn, loc);
    e->receiver = std::move(call);
    return e;
  }
  std::string name = expect_name("an expression");
  if (peek().is_punct("(")) {
    auto e = std::make_unique<Expr>(
        is_builtin(name) ? ExprKind::BuiltinCall : ExprKind::MethodCall, loc);
    e->text = std::move(name);
    e->args = parse_args();
    return e;
  }
  auto e = std::make_unique<Expr>(ExprKind::Name, loc);
  e->text = std::move(name);
  return e;
}

// ---------------------------------------------------------------------------
// Pointcuts

PointcutPtr Parser::parse_pointcut() { return parse_pc_or(); }

PointcutPtr Parser::parse_pc_or() {
  PointcutPtr lhs = parse_pc_and();
  while (accept_punct("||")) lhs = make_or(lhs, parse_pc_and());
  return lhs;
}

PointcutPtr Parser::parse_pc_and() {
  PointcutPtr lhs = parse_pc_unary();
  while (accept_punct("&&")) lhs = make_and(lhs, parse_pc_unary());
  return lhs;
}

PointcutPtr Parser::parse_pc_unary() {
  if (peek().is_punct("!")) {
    SourceLoc loc = loc_of(next());
    auto inner = parse_pc_unary();
    auto p = std::make_shared<Pointcut>();
    p->kind = PointcutKind::Not;
    p->loc = loc;
    p->left = std::move(inner);
    return p;
  }
  if (accept_punct("(")) {
    auto p = parse_pc_or();
    expect_punct(")");
    return p;
  }
  return parse_pc_primitive();
}

std::string Parser::parse_glob() {
  const Token& first = peek();
  if (!(first.kind == TokenKind::Ident || first.is_punct("*"))) fail(first, "expected a name pattern");
  std::string out = next().text;
  int line = first.line;
  int end = first.end_column;
  while ((peek().kind == TokenKind::Ident || peek().is_punct("*")) && peek().line == line &&
         peek().column == end) {
    end = peek().end_column;
    out += next().text;
  }
  return out;
}

PointcutPtr Parser::parse_pc_primitive() {
  const Token& kw = peek();
  if (kw.kind != TokenKind::Ident) fail(kw, "expected a pointcut primitive");
  auto p = std::make_shared<Pointcut>();
  p->loc = loc_of(kw);
  const std::string word = next().text;
  expect_punct("(");
  if (word == "execution" || word == "call" || word == "get" || word == "set") {
    p->kind = word == "execution" ? PointcutKind::Execution
              : word == "call"    ? PointcutKind::Call
              : word == "get"     ? PointcutKind::Get
                                  : PointcutKind::Set;
    std::string first = parse_glob();
    if (accept_punct(".")) {
      p->pattern.type = first;
      p->pattern.member = parse_glob();
    } else {
      p->pattern.type = "*";
      p->pattern.member = first;
    }
  } else if (word == "within" || word == "this" || word == "target" ||
             word == "initialization" || word == "preinitialization" ||
             word == "staticinitialization") {
    p->kind = word == "within"           ? PointcutKind::Within
              : word == "this"           ? PointcutKind::This
              : word == "target"         ? PointcutKind::Target
              : word == "initialization" ? PointcutKind::Initialization
              : word == "preinitialization" ? PointcutKind::PreInitialization
                                            : PointcutKind::StaticInitialization;
    p->type_name = parse_glob();
  } else if (word == "args") {
    p->kind = PointcutKind::Args;
    const Token& idx = peek();
    if (idx.kind != TokenKind::Int) fail(idx, "expected an argument position");
    p->arg_index = std::stoi(next().text);
    expect_punct(",");
    const Token& lit = peek();
    if (lit.is_punct("*")) {
      next();
      p->literal.kind = ArgLiteral::Kind::Wildcard;
    } else if (lit.kind == TokenKind::Int || lit.is_punct("-")) {
      bool neg = accept_punct("-");
      const Token& num = peek();
      if (num.kind != TokenKind::Int) fail(num, "expected an integer");
      p->literal.kind = ArgLiteral::Kind::Int;
      p->literal.int_value = std::stoll(next().text) * (neg ? -1 : 1);
    } else if (lit.kind == TokenKind::String) {
      p->literal.kind = ArgLiteral::Kind::String;
      p->literal.string_value = next().text;
    } else if (lit.is_ident("true") || lit.is_ident("false")) {
      p->literal.kind = ArgLiteral::Kind::Bool;
      p->literal.bool_value = next().text == "true";
    } else if (lit.is_ident("null")) {
      next();
      p->literal.kind = ArgLiteral::Kind::Null;
    } else {
      fail(lit, "expected a literal or '*'");
    }
  } else if (word == "cflow") {
    p->kind = PointcutKind::Cflow;
    p->left = parse_pc_or();
  } else {
    fail(kw, "unknown pointcut primitive '" + word + "'");
  }
  expect_punct(")");
  return p;
}

// ---------------------------------------------------------------------------
// Entry points

Program parse_base(std::string_view text, const std::string& path) {
  Parser p(text, path);
  return p.parse_program();
}

AspectDecl parse_aspect(std::string_view text, const std::string& path) {
  Parser p(text, path);
  return p.parse_aspect_file();
}

Program merge_programs(std::vector<Program> parts) {
  Program out;
  std::map<std::string, SourceLoc> seen;
  std::vector<Diagnostic> diags;
  for (auto& part : parts) {
    for (auto& cls : part.classes) {
      auto [it, inserted] = seen.emplace(cls.name, cls.loc);
      if (!inserted) {
        diags.push_back({cls.loc, "duplicate class '" + cls.name + "' (first declared at " +
                                      it->second.str() + ")"});
        continue;
      }
      out.classes.push_back(std::move(cls));
    }
  }
  if (!diags.empty()) throw CompileError("parse", std::move(diags));
  return out;
}

}  // namespace lom
