#include "lom/printer.hpp"

namespace lom {

std::string quote_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

namespace {

std::string args_of(const Expr& e, const NameRewriter& rw) {
  std::string out = "(";
  for (std::size_t i = 0; i < e.args.size(); ++i) {
    if (i) out += ", ";
    out += print_expr(*e.args[i], rw);
  }
  return out + ")";
}

void print_stmt(const Stmt& s, int indent, const NameRewriter& rw, std::string& out) {
  std::string pad(static_cast<std::size_t>(indent), ' ');
  switch (s.kind) {
    case StmtKind::VarDecl:
      out += pad + "var " + s.name;
      if (s.value) out += " = " + print_expr(*s.value, rw);
      out += ";\n";
      break;
    case StmtKind::Assign:
      out += pad + print_expr(*s.target, rw) + " = " + print_expr(*s.value, rw) + ";\n";
      break;
    case StmtKind::If:
      out += pad + "if (" + print_expr(*s.value, rw) + ") {\n";
      out += print_block(s.body, indent + 2, rw);
      out += pad + "}";
      if (!s.else_body.empty()) {
        out += " else {\n" + print_block(s.else_body, indent + 2, rw) + pad + "}";
      }
      out += "\n";
      break;
    case StmtKind::While:
      out += pad + "while (" + print_expr(*s.value, rw) + ") {\n";
      out += print_block(s.body, indent + 2, rw);
      out += pad + "}\n";
      break;
    case StmtKind::Return:
      out += pad + "return";
      if (s.value) out += " " + print_expr(*s.value, rw);
      out += ";\n";
      break;
    case StmtKind::ExprStmt:
      out += pad + print_expr(*s.value, rw) + ";\n";
      break;
  }
}

}  // namespace

std::string print_expr(const Expr& e, const NameRewriter& rw) {
  switch (e.kind) {
    case ExprKind::IntLit: return std::to_string(e.int_value);
    case ExprKind::BoolLit: return e.bool_value ? "true" : "false";
    case ExprKind::StringLit: return quote_string(e.text);
    case ExprKind::NullLit: return "null";
    case ExprKind::This: return "this";
    case ExprKind::ListLit: {
      std::string out = "[";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        out += print_expr(*e.args[i], rw);
      }
      return out + "]";
    }
    case ExprKind::Name:
      if (rw) {
        if (auto sub = rw(e)) return *sub;
      }
      return e.text;
    case ExprKind::Member: return print_expr(*e.receiver, rw) + "." + e.text;
    case ExprKind::Index:
      return print_expr(*e.receiver, rw) + "[" + print_expr(*e.args[0], rw) + "]";
    case ExprKind::MethodCall:
      if (e.receiver) return print_expr(*e.receiver, rw) + "." + e.text + args_of(e, rw);
      return e.text + args_of(e, rw);
    case ExprKind::BuiltinCall: return e.text + args_of(e, rw);
    case ExprKind::New: return "new " + e.text + args_of(e, rw);
    case ExprKind::Spawn: return "spawn " + print_expr(*e.receiver, rw);
    case ExprKind::Unary: return e.text + "(" + print_expr(*e.args[0], rw) + ")";
    case ExprKind::Binary:
      return "(" + print_expr(*e.args[0], rw) + " " + e.text + " " + print_expr(*e.args[1], rw) + ")";
  }
  return "null";
}

std::string print_block(const Block& block, int indent, const NameRewriter& rw) {
  std::string out;
  for (const auto& s : block) print_stmt(*s, indent, rw, out);
  return out;
}

}  // namespace lom
