#include "lom/cool.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>

#include "lom/parser.hpp"
#include "lom/printer.hpp"

namespace lom {

std::string MethodRef::str() const {
  if (!arity) return name;
  return name + "/" + std::to_string(*arity);
}

const MethodAdditions* CoordinatorDecl::additions_for(const std::string& method) const {
  for (const auto& a : additions) {
    if (a.method.name == method) return &a;
  }
  return nullptr;
}

std::vector<std::string> CoordinatorDecl::coordinated_methods() const {
  std::vector<std::string> out;
  auto add = [&](const std::string& n) {
    if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
  };
  for (const auto& s : selfex)
    for (const auto& m : s.methods) add(m.name);
  for (const auto& s : mutex)
    for (const auto& m : s.methods) add(m.name);
  for (const auto& a : additions) add(a.method.name);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

MethodRef parse_method_ref(Parser& p) {
  MethodRef ref;
  ref.loc = p.loc_of(p.peek());
  ref.name = p.expect_name("method name");
  if (p.accept_punct("(")) {
    int arity = 0;
    if (!p.peek().is_punct(")")) {
      do {
        // Parameter names or (dotted) type names; only the count matters.
        p.expect_name("parameter");
        while (p.accept_punct(".")) p.expect_name("parameter");
        ++arity;
      } while (p.accept_punct(","));
    }
    p.expect_punct(")");
    ref.arity = arity;
  }
  return ref;
}

ExclusionSet parse_exclusion(Parser& p) {
  ExclusionSet set;
  set.loc = p.loc_of(p.next());
  p.expect_punct("{");
  if (!p.peek().is_punct("}")) {
    do {
      set.methods.push_back(parse_method_ref(p));
    } while (p.accept_punct(","));
  }
  p.expect_punct("}");
  p.expect_punct(";");
  return set;
}

}  // namespace

CoordinatorDecl parse_cool(std::string_view text, const std::string& path) {
  Parser p(text, path);
  CoordinatorDecl decl;
  decl.path = path;
  decl.loc = p.loc_of(p.peek());
  p.expect_ident("coordinator");
  decl.qualified_target = p.expect_name("coordinated class name");
  decl.target = decl.qualified_target;
  while (p.accept_punct(".")) {
    decl.target = p.expect_name("coordinated class name");
    decl.qualified_target += "." + decl.target;
  }
  p.expect_punct("{");
  std::set<std::string> vars;
  auto declare = [&](const Token& at, const std::string& name) {
    if (!vars.insert(name).second) p.fail(at, "duplicate condition or field '" + name + "'");
  };
  while (!p.accept_punct("}")) {
    const Token& t = p.peek();
    if (p.at_end()) p.fail(t, "expected '}'");
    if (t.is_ident("selfex")) {
      decl.selfex.push_back(parse_exclusion(p));
    } else if (t.is_ident("mutex")) {
      decl.mutex.push_back(parse_exclusion(p));
    } else if (t.is_ident("condition")) {
      p.next();
      do {
        const Token& nt = p.peek();
        CoolVar c;
        c.loc = p.loc_of(nt);
        c.name = p.expect_name("condition name");
        declare(nt, c.name);
        p.expect_punct("=");
        c.init = p.parse_expr();
        decl.conditions.push_back(std::move(c));
      } while (p.accept_punct(","));
      p.expect_punct(";");
    } else if (t.is_ident("var")) {
      p.next();
      const Token& nt = p.peek();
      CoolVar f;
      f.loc = p.loc_of(nt);
      f.name = p.expect_name("field name");
      declare(nt, f.name);
      if (p.accept_punct("=")) f.init = p.parse_expr();
      p.expect_punct(";");
      decl.fields.push_back(std::move(f));
    } else if (t.is_ident("requires") || t.is_ident("on_entry") || t.is_ident("on_exit")) {
      p.fail(t, "'" + t.text + "' outside a method addition");
    } else if (t.kind == TokenKind::Ident) {
      MethodAdditions add;
      add.loc = p.loc_of(t);
      add.method = parse_method_ref(p);
      if (decl.additions_for(add.method.name)) p.fail(t, "duplicate additions for method '" + add.method.name + "'");
      p.expect_punct(":");
      if (p.accept_ident("requires")) {
        add.requires_expr = p.parse_expr();
        p.expect_punct(";");
      }
      if (p.accept_ident("on_entry")) add.on_entry = p.parse_block();
      if (p.accept_ident("on_exit")) add.on_exit = p.parse_block();
      decl.additions.push_back(std::move(add));
    } else {
      p.fail(t, "expected a coordinator declaration");
    }
  }
  if (!p.at_end()) p.fail(p.peek(), "expected end of input after coordinator");
  return decl;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

const char* kReservedLocals[] = {"st", "target", "i", "table", "tableLock"};

/// Calls `on_free` for every identifier in coordinator code that is not a
/// local of the enclosing block; reports unsupported constructs via `on_bad`.
class FreeNames {
 public:
  std::function<void(const Expr&)> on_free;
  std::function<void(const SourceLoc&, const std::string&)> on_bad;

  void expr(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Name:
        if (!locals_.count(e.text)) on_free(e);
        return;
      case ExprKind::MethodCall:
      case ExprKind::New:
      case ExprKind::Spawn:
        on_bad(e.loc, "method calls, 'new' and 'spawn' are not allowed in coordinator code");
        return;
      case ExprKind::This:
        on_bad(e.loc, "'this' is not allowed in coordinator code; name target fields directly");
        return;
      default:
        if (e.receiver) expr(*e.receiver);
        for (const auto& a : e.args) expr(*a);
    }
  }

  void block(const Block& b) {
    for (const auto& s : b) stmt(*s);
  }

  void stmt(const Stmt& s) {
    switch (s.kind) {
      case StmtKind::VarDecl:
        if (s.value) expr(*s.value);
        for (const char* r : kReservedLocals) {
          if (s.name == r) on_bad(s.loc, "local name '" + s.name + "' is reserved in coordinator code");
        }
        locals_.insert(s.name);
        return;
      case StmtKind::Return:
        on_bad(s.loc, "'return' is not allowed in coordinator code");
        return;
      default:
        if (s.target) expr(*s.target);
        if (s.value) expr(*s.value);
        block(s.body);
        block(s.else_body);
    }
  }

  void reset() { locals_.clear(); }

 private:
  std::set<std::string> locals_;
};

bool is_state_name(const CoordinatorDecl& d, const std::string& n) {
  auto has = [&](const std::vector<CoolVar>& vs) {
    return std::any_of(vs.begin(), vs.end(), [&](const CoolVar& v) { return v.name == n; });
  };
  return has(d.conditions) || has(d.fields);
}

}  // namespace

void validate_coordinator(const CoordinatorDecl& decl, const Program& base) {
  std::vector<Diagnostic> diags;
  const ClassDecl* cls = base.find_class(decl.target);
  if (!cls) {
    throw CompileError("transform", decl.loc, "coordinator target class '" + decl.qualified_target + "' not found");
  }
  auto check_ref = [&](const MethodRef& ref) {
    const MethodDecl* m = cls->find_method(ref.name);
    if (!m) {
      diags.push_back({ref.loc, "method '" + ref.name + "' named by the coordinator is absent from class '" +
                                    cls->name + "'"});
    } else if (ref.arity && *ref.arity != m->arity()) {
      diags.push_back({ref.loc, "method '" + ref.name + "' of class '" + cls->name + "' takes " +
                                    std::to_string(m->arity()) + " argument(s), coordinator names " +
                                    std::to_string(*ref.arity)});
    }
  };
  for (const auto& s : decl.selfex)
    for (const auto& m : s.methods) check_ref(m);
  for (const auto& s : decl.mutex)
    for (const auto& m : s.methods) check_ref(m);
  for (const auto& a : decl.additions) check_ref(a.method);

  FreeNames walk;
  walk.on_bad = [&](const SourceLoc& loc, const std::string& msg) { diags.push_back({loc, msg}); };
  // Initializers may read target fields only.
  walk.on_free = [&](const Expr& e) {
    if (!cls->find_field(e.text) || cls->find_field(e.text)->is_static) {
      diags.push_back({e.loc, "initializer may only read fields of '" + cls->name + "', not '" + e.text + "'"});
    }
  };
  for (const auto& v : decl.conditions) walk.expr(*v.init);
  for (const auto& v : decl.fields) {
    if (v.init) walk.expr(*v.init);
  }
  walk.on_free = [&](const Expr& e) {
    if (is_state_name(decl, e.text)) return;
    const FieldDecl* f = cls->find_field(e.text);
    if (f && !f->is_static) return;
    diags.push_back({e.loc, "unknown name '" + e.text + "' in coordinator code (not a condition, coordinator field "
                            "or field of '" + cls->name + "')"});
  };
  for (const auto& a : decl.additions) {
    walk.reset();
    if (a.requires_expr) walk.expr(*a.requires_expr);
    walk.reset();
    if (a.on_entry) walk.block(*a.on_entry);
    walk.reset();
    if (a.on_exit) walk.block(*a.on_exit);
  }
  if (!diags.empty()) throw CompileError("transform", std::move(diags));
}

// ---------------------------------------------------------------------------
// can_enter

namespace {

Value eval_pure(const Expr& e, const CoordStateView& st) {
  auto as_bool = [](const Value& v) {
    if (auto* b = std::get_if<bool>(&v)) return *b;
    throw RuntimeError("expected bool in requires expression");
  };
  auto as_int = [](const Value& v) {
    if (auto* i = std::get_if<std::int64_t>(&v)) return *i;
    throw RuntimeError("expected int in requires expression");
  };
  switch (e.kind) {
    case ExprKind::IntLit: return e.int_value;
    case ExprKind::BoolLit: return e.bool_value;
    case ExprKind::StringLit: return e.text;
    case ExprKind::NullLit: return Value();
    case ExprKind::Name: {
      auto it = st.vars.find(e.text);
      if (it == st.vars.end()) throw RuntimeError("unbound name '" + e.text + "' in requires expression");
      return it->second;
    }
    case ExprKind::Unary: {
      Value v = eval_pure(*e.args[0], st);
      if (e.text == "!") return !as_bool(v);
      return -as_int(v);
    }
    case ExprKind::BuiltinCall:
      if (e.text == "len" && e.args.size() == 1) {
        Value v = eval_pure(*e.args[0], st);
        if (auto* l = std::get_if<ListObj*>(&v)) return static_cast<std::int64_t>((*l)->items.size());
        if (auto* s = std::get_if<std::string>(&v)) return static_cast<std::int64_t>(s->size());
      }
      throw RuntimeError("unsupported builtin in requires expression");
    case ExprKind::Binary: {
      const std::string& op = e.text;
      Value l = eval_pure(*e.args[0], st);
      if (op == "&&") return as_bool(l) && as_bool(eval_pure(*e.args[1], st));
      if (op == "||") return as_bool(l) || as_bool(eval_pure(*e.args[1], st));
      Value r = eval_pure(*e.args[1], st);
      if (op == "==") return l == r;
      if (op == "!=") return l != r;
      std::int64_t a = as_int(l), b = as_int(r);
      if (op == "<") return a < b;
      if (op == "<=") return a <= b;
      if (op == ">") return a > b;
      if (op == ">=") return a >= b;
      if (op == "+") return a + b;
      if (op == "-") return a - b;
      if (op == "*") return a * b;
      if ((op == "/" || op == "%") && b != 0) return op == "/" ? a / b : a % b;
      throw RuntimeError("unsupported operator in requires expression");
    }
    default: throw RuntimeError("unsupported construct in requires expression");
  }
}

int busy_of(const CoordStateView& st, const std::string& m) {
  auto it = st.busy.find(m);
  return it == st.busy.end() ? 0 : it->second;
}

}  // namespace

bool can_enter(const CoordinatorDecl& decl, const CoordStateView& state, const std::string& method) {
  for (const auto& s : decl.selfex) {
    for (const auto& m : s.methods) {
      if (m.name == method && busy_of(state, method) != 0) return false;
    }
  }
  for (const auto& s : decl.mutex) {
    bool member = std::any_of(s.methods.begin(), s.methods.end(), [&](const MethodRef& r) { return r.name == method; });
    if (!member) continue;
    for (const auto& m : s.methods) {
      if (m.name != method && busy_of(state, m.name) != 0) return false;
    }
  }
  if (const MethodAdditions* a = decl.additions_for(method); a && a->requires_expr) {
    Value v = eval_pure(*a->requires_expr, state);
    auto* b = std::get_if<bool>(&v);
    if (!b) throw RuntimeError("requires expression of '" + method + "' is not boolean");
    return *b;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Generation

namespace {

struct Layout {
  std::map<std::string, int> busy;   // method -> state index
  std::map<std::string, int> state;  // condition / field -> state index
  int size = 2;
};

Layout layout_of(const CoordinatorDecl& d) {
  Layout l;
  for (const auto& m : d.coordinated_methods()) l.busy[m] = l.size++;
  for (const auto& c : d.conditions) l.state[c.name] = l.size++;
  for (const auto& f : d.fields) l.state[f.name] = l.size++;
  return l;
}

bool assigns_condition(const Block& b, const CoordinatorDecl& d) {
  for (const auto& s : b) {
    if (s->kind == StmtKind::Assign && s->target->kind == ExprKind::Name) {
      const std::string& n = s->target->text;
      if (std::any_of(d.conditions.begin(), d.conditions.end(), [&](const CoolVar& c) { return c.name == n; }))
        return true;
    }
    if (assigns_condition(s->body, d) || assigns_condition(s->else_body, d)) return true;
  }
  return false;
}

/// Line of the clause a method's advice reports: its additions, else the
/// first selfex / mutex clause naming it.
int clause_line(const CoordinatorDecl& d, const std::string& m) {
  if (const MethodAdditions* a = d.additions_for(m)) return a->loc.line;
  for (const auto* sets : {&d.selfex, &d.mutex}) {
    for (const auto& s : *sets) {
      for (const auto& r : s.methods) {
        if (r.name == m) return s.loc.line;
      }
    }
  }
  return d.loc.line;
}

}  // namespace

std::string gen_cool_aspect(const CoordinatorDecl& d, const Program& base) {
  const ClassDecl* cls = base.find_class(d.target);
  const std::string aspect = "Coord_" + d.target;
  const Layout lay = layout_of(d);
  const std::string module = std::filesystem::path(d.path).filename().string();

  // Locals stay as written; coordinator state becomes st[k]; anything else
  // free is a field of the coordinated object.
  NameRewriter rw = [&](const Expr& e) -> std::optional<std::string> {
    if (auto it = lay.state.find(e.text); it != lay.state.end()) return "st[" + std::to_string(it->second) + "]";
    if (cls && cls->find_field(e.text)) return "target." + e.text;
    return std::nullopt;
  };
  NameRewriter init_rw = [&](const Expr& e) -> std::optional<std::string> {
    if (cls && cls->find_field(e.text)) return "target." + e.text;
    return std::nullopt;
  };

  std::ostringstream os;
  os << "// Generated from " << d.path << " by the cool transformation. Do not edit.\n";
  os << "@hideType\n";
  os << "aspect " << aspect << " {\n";
  os << "  @hideField var table = [];\n";
  os << "  @hideField var tableLock = make_monitor(" << quote_string(aspect + ".table") << ");\n";

  auto lookup = [&](std::ostringstream& o) {
    o << "    monitor_acquire(tableLock);\n";
    o << "    var st = null;\n";
    o << "    var i = 0;\n";
    o << "    while (st == null && i < len(table)) {\n";
    o << "      if (table[i][0] == target) {\n";
    o << "        st = table[i];\n";
    o << "      }\n";
    o << "      i = i + 1;\n";
    o << "    }\n";
    o << "    if (st == null) {\n";
    o << "      st = [target, make_monitor(" << quote_string(aspect) << ")";
    for (std::size_t k = 0; k < lay.busy.size(); ++k) o << ", 0";
    for (const auto& c : d.conditions) o << ", " << print_expr(*c.init, init_rw);
    for (const auto& f : d.fields) o << ", " << (f.init ? print_expr(*f.init, init_rw) : "null");
    o << "];\n";
    o << "      push_back(table, st);\n";
    o << "    }\n";
    o << "    monitor_release(tableLock);\n";
  };

  for (const auto& m : d.coordinated_methods()) {
    const MethodAdditions* add = d.additions_for(m);
    const std::string busy = "st[" + std::to_string(lay.busy.at(m)) + "]";

    os << "\n  @hideMethod\n";
    os << "  def canEnter_" << m << "(st, target) {\n";
    for (const auto& s : d.selfex) {
      if (std::any_of(s.methods.begin(), s.methods.end(), [&](const MethodRef& r) { return r.name == m; })) {
        os << "    if (" << busy << " != 0) {\n      return false;\n    }\n";
        break;
      }
    }
    std::set<std::string> partners;
    for (const auto& s : d.mutex) {
      if (!std::any_of(s.methods.begin(), s.methods.end(), [&](const MethodRef& r) { return r.name == m; })) continue;
      for (const auto& r : s.methods) {
        if (r.name != m) partners.insert(r.name);
      }
    }
    for (const auto& p : d.coordinated_methods()) {
      if (!partners.count(p)) continue;
      os << "    if (st[" << lay.busy.at(p) << "] != 0) {\n      return false;\n    }\n";
    }
    if (add && add->requires_expr) {
      os << "    if (!" << print_expr(*add->requires_expr, rw) << ") {\n      return false;\n    }\n";
    }
    os << "    return true;\n";
    os << "  }\n";

    os << "\n  @hideMethod\n";
    os << "  def enter_" << m << "(target) {\n";
    lookup(os);
    os << "    monitor_acquire(st[1]);\n";
    os << "    while (!canEnter_" << m << "(st, target)) {\n";
    os << "      monitor_wait(st[1]);\n";
    os << "    }\n";
    os << "    " << busy << " = " << busy << " + 1;\n";
    if (add && add->on_entry) {
      os << print_block(*add->on_entry, 4, rw);
      if (assigns_condition(*add->on_entry, d)) os << "    monitor_notify_all(st[1]);\n";
    }
    os << "    monitor_release(st[1]);\n";
    os << "  }\n";

    os << "\n  @hideMethod\n";
    os << "  def exit_" << m << "(target) {\n";
    lookup(os);
    os << "    monitor_acquire(st[1]);\n";
    os << "    " << busy << " = " << busy << " - 1;\n";
    if (add && add->on_exit) os << print_block(*add->on_exit, 4, rw);
    os << "    monitor_notify_all(st[1]);\n";
    os << "    monitor_release(st[1]);\n";
    os << "  }\n";
  }

  for (const auto& m : d.coordinated_methods()) {
    const std::string loc = "@loc(file=" + quote_string(d.path) + ", line=" + std::to_string(clause_line(d, m)) +
                            ", module=" + quote_string(module) + ")";
    os << "\n  @hideMethod\n  " << loc << "\n";
    os << "  before(): execution(" << d.target << "." << m << ") {\n";
    os << "    enter_" << m << "(thisObject);\n";
    os << "  }\n";
    os << "\n  @hideMethod\n  " << loc << "\n";
    os << "  after(): execution(" << d.target << "." << m << ") {\n";
    os << "    exit_" << m << "(thisObject);\n";
    os << "  }\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace lom
