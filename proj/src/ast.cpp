#include "lom/ast.hpp"

#include <sstream>

namespace lom {

ExprPtr clone(const Expr& e) {
  auto out = std::make_unique<Expr>(e.kind, e.loc);
  out->int_value = e.int_value;
  out->bool_value = e.bool_value;
  out->text = e.text;
  if (e.receiver) out->receiver = clone(*e.receiver);
  for (const auto& a : e.args) out->args.push_back(clone(*a));
  out->ref = e.ref;
  out->owner = e.owner;
  return out;
}

Block clone(const Block& b) {
  Block out;
  out.reserve(b.size());
  for (const auto& s : b) {
    auto c = std::make_unique<Stmt>(s->kind, s->loc);
    c->name = s->name;
    if (s->target) c->target = clone(*s->target);
    if (s->value) c->value = clone(*s->value);
    c->body = clone(s->body);
    c->else_body = clone(s->else_body);
    out.push_back(std::move(c));
  }
  return out;
}

const Annotation* find_annotation(const std::vector<Annotation>& anns, std::string_view name) {
  for (const auto& a : anns) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

const FieldDecl* ClassDecl::find_field(std::string_view n) const {
  for (const auto& f : fields) {
    if (f.name == n) return &f;
  }
  return nullptr;
}

const MethodDecl* ClassDecl::find_method(std::string_view n) const {
  for (const auto& m : methods) {
    if (m.name == n) return &m;
  }
  return nullptr;
}

const ClassDecl* Program::find_class(std::string_view n) const {
  for (const auto& c : classes) {
    if (c.name == n) return &c;
  }
  return nullptr;
}

const FieldDecl* AspectDecl::find_field(std::string_view n) const {
  for (const auto& f : fields) {
    if (f.name == n) return &f;
  }
  return nullptr;
}

const MethodDecl* AspectDecl::find_method(std::string_view n) const {
  for (const auto& m : methods) {
    if (m.name == n) return &m;
  }
  return nullptr;
}

PointcutPtr make_and(PointcutPtr a, PointcutPtr b) {
  auto p = std::make_shared<Pointcut>();
  p->kind = PointcutKind::And;
  p->loc = a->loc;
  p->left = std::move(a);
  p->right = std::move(b);
  return p;
}

PointcutPtr make_or(PointcutPtr a, PointcutPtr b) {
  auto p = std::make_shared<Pointcut>();
  p->kind = PointcutKind::Or;
  p->loc = a->loc;
  p->left = std::move(a);
  p->right = std::move(b);
  return p;
}

PointcutPtr make_not(PointcutPtr a) {
  auto p = std::make_shared<Pointcut>();
  p->kind = PointcutKind::Not;
  p->loc = a->loc;
  p->left = std::move(a);
  return p;
}

namespace {

std::string pattern_str(const NamePattern& p) {
  if (p.type == "*") return "*." + p.member;
  return p.type + "." + p.member;
}

std::string literal_str(const ArgLiteral& l) {
  switch (l.kind) {
    case ArgLiteral::Kind::Wildcard: return "*";
    case ArgLiteral::Kind::Int: return std::to_string(l.int_value);
    case ArgLiteral::Kind::Bool: return l.bool_value ? "true" : "false";
    case ArgLiteral::Kind::Null: return "null";
    case ArgLiteral::Kind::String: {
      std::string out = "\"";
      for (char c : l.string_value) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
      }
      return out + "\"";
    }
  }
  return "*";
}

void render(const Pointcut& pc, std::ostringstream& os, bool nested) {
  switch (pc.kind) {
    case PointcutKind::Execution: os << "execution(" << pattern_str(pc.pattern) << ")"; break;
    case PointcutKind::Call: os << "call(" << pattern_str(pc.pattern) << ")"; break;
    case PointcutKind::Get: os << "get(" << pattern_str(pc.pattern) << ")"; break;
    case PointcutKind::Set: os << "set(" << pattern_str(pc.pattern) << ")"; break;
    case PointcutKind::PreInitialization: os << "preinitialization(" << pc.type_name << ")"; break;
    case PointcutKind::Initialization: os << "initialization(" << pc.type_name << ")"; break;
    case PointcutKind::StaticInitialization:
      os << "staticinitialization(" << pc.type_name << ")";
      break;
    case PointcutKind::Within: os << "within(" << pc.type_name << ")"; break;
    case PointcutKind::This: os << "this(" << pc.type_name << ")"; break;
    case PointcutKind::Target: os << "target(" << pc.type_name << ")"; break;
    case PointcutKind::Args:
      os << "args(" << pc.arg_index << ", " << literal_str(pc.literal) << ")";
      break;
    case PointcutKind::Cflow:
      os << "cflow(";
      render(*pc.left, os, false);
      os << ")";
      break;
    case PointcutKind::Not:
      os << "!";
      render(*pc.left, os, true);
      break;
    case PointcutKind::And:
    case PointcutKind::Or:
      if (nested) os << "(";
      render(*pc.left, os, pc.left->kind != pc.kind);
      os << (pc.kind == PointcutKind::And ? " && " : " || ");
      render(*pc.right, os, pc.right->kind != pc.kind);
      if (nested) os << ")";
      break;
  }
}

}  // namespace

std::string to_string(const Pointcut& pc) {
  std::ostringstream os;
  render(pc, os, false);
  return os.str();
}

const char* to_string(AdviceKind k) { return k == AdviceKind::Before ? "before" : "after"; }

}  // namespace lom
