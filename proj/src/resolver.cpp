#include <map>
#include <set>

#include "lom/parser.hpp"

namespace lom {

namespace {

struct TypeView {
  std::string name;
  const std::vector<FieldDecl>* fields = nullptr;
  const std::vector<MethodDecl>* methods = nullptr;
  bool is_aspect = false;

  const FieldDecl* field(std::string_view n) const {
    for (const auto& f : *fields) {
      if (f.name == n) return &f;
    }
    return nullptr;
  }
  const MethodDecl* method(std::string_view n) const {
    for (const auto& m : *methods) {
      if (m.name == n) return &m;
    }
    return nullptr;
  }
};

class Resolver {
 public:
  explicit Resolver(const Program& program) : program_(program) {
    for (const auto& cls : program.classes) {
      for (const auto& f : cls.fields) field_owners_[f.name].insert(cls.name);
      for (const auto& m : cls.methods) method_owners_[{m.name, m.arity()}].insert(cls.name);
    }
  }

  void body(const TypeView& type, bool static_ctx, std::set<std::string> locals, Block& block) {
    type_ = &type;
    static_ctx_ = static_ctx;
    locals_ = std::move(locals);
    stmts(block);
  }

  void initializer(const TypeView& type, bool static_ctx, Expr& e) {
    type_ = &type;
    static_ctx_ = static_ctx;
    locals_.clear();
    expr(e);
  }

  std::vector<Diagnostic>& diagnostics() { return diags_; }

 private:
  void error(const SourceLoc& loc, std::string msg) { diags_.push_back({loc, std::move(msg)}); }

  void stmts(Block& block) {
    for (auto& s : block) stmt(*s);
  }

  void stmt(Stmt& s) {
    switch (s.kind) {
      case StmtKind::VarDecl:
        if (s.value) expr(*s.value);
        locals_.insert(s.name);
        break;
      case StmtKind::Assign:
        expr(*s.target);
        if (s.target->kind == ExprKind::Name && s.target->ref == NameRef::Class) {
          error(s.target->loc, "cannot assign to class name '" + s.target->text + "'");
        }
        expr(*s.value);
        break;
      case StmtKind::If:
        expr(*s.value);
        stmts(s.body);
        stmts(s.else_body);
        break;
      case StmtKind::While:
        expr(*s.value);
        stmts(s.body);
        break;
      case StmtKind::Return:
        if (s.value) expr(*s.value);
        break;
      case StmtKind::ExprStmt:
        expr(*s.value);
        break;
    }
  }

  std::string unique_owner(const std::set<std::string>* owners) {
    if (owners && owners->size() == 1) return *owners->begin();
    return "?";
  }

  void expr(Expr& e) {
    switch (e.kind) {
      case ExprKind::IntLit:
      case ExprKind::BoolLit:
      case ExprKind::StringLit:
      case ExprKind::NullLit:
      case ExprKind::This:
        return;
      case ExprKind::Name: name(e); return;
      case ExprKind::Member: member(e); return;
      case ExprKind::MethodCall: call(e); return;
      case ExprKind::New: {
        const ClassDecl* cls = program_.find_class(e.text);
        if (!cls) {
          error(e.loc, "unknown class '" + e.text + "'");
        } else {
          int arity = cls->ctor ? cls->ctor->arity() : 0;
          if (arity != static_cast<int>(e.args.size())) {
            error(e.loc, "constructor of '" + e.text + "' takes " + std::to_string(arity) +
                             " argument(s), " + std::to_string(e.args.size()) + " given");
          }
        }
        for (auto& a : e.args) expr(*a);
        return;
      }
      case ExprKind::Spawn: expr(*e.receiver); return;
      case ExprKind::Index:
        expr(*e.receiver);
        for (auto& a : e.args) expr(*a);
        return;
      case ExprKind::BuiltinCall:
      case ExprKind::ListLit:
      case ExprKind::Unary:
      case ExprKind::Binary:
        for (auto& a : e.args) expr(*a);
        return;
    }
  }

  void name(Expr& e) {
    if (locals_.count(e.text)) {
      e.ref = NameRef::Local;
      return;
    }
    if (const FieldDecl* f = type_->field(e.text)) {
      if (f->is_static) {
        e.ref = NameRef::StaticField;
      } else if (static_ctx_) {
        error(e.loc, "instance field '" + e.text + "' used in a static context");
        return;
      } else {
        e.ref = NameRef::Field;
      }
      e.owner = type_->name;
      return;
    }
    if (program_.find_class(e.text)) {
      e.ref = NameRef::Class;
      return;
    }
    error(e.loc, "unresolved identifier '" + e.text + "'");
  }

  void member(Expr& e) {
    Expr& recv = *e.receiver;
    expr(recv);
    if (recv.kind == ExprKind::This) {
      e.owner = type_->name;
      if (!type_->field(e.text)) error(e.loc, "'" + type_->name + "' has no field '" + e.text + "'");
    } else if (recv.kind == ExprKind::Name && recv.ref == NameRef::Class) {
      e.owner = recv.text;
      const ClassDecl* cls = program_.find_class(recv.text);
      const FieldDecl* f = cls ? cls->find_field(e.text) : nullptr;
      if (!f || !f->is_static) error(e.loc, "'" + recv.text + "' has no static field '" + e.text + "'");
    } else {
      auto it = field_owners_.find(e.text);
      e.owner = unique_owner(it == field_owners_.end() ? nullptr : &it->second);
    }
  }

  void call(Expr& e) {
    int arity = static_cast<int>(e.args.size());
    if (!e.receiver || e.receiver->kind == ExprKind::This) {
      if (e.receiver) expr(*e.receiver);
      const MethodDecl* m = type_->method(e.text);
      if (!m) {
        error(e.loc, "'" + type_->name + "' has no method '" + e.text + "'");
      } else if (m->arity() != arity) {
        error(e.loc, "method '" + e.text + "' takes " + std::to_string(m->arity()) +
                         " argument(s), " + std::to_string(arity) + " given");
      }
      if (!e.receiver && static_ctx_) {
        error(e.loc, "instance method '" + e.text + "' called in a static context");
      }
      e.owner = type_->name;
    } else {
      expr(*e.receiver);
      if (e.receiver->kind == ExprKind::Name && e.receiver->ref == NameRef::Class) {
        error(e.loc, "static methods are not supported ('" + e.receiver->text + "." + e.text + "')");
      }
      auto it = method_owners_.find({e.text, arity});
      e.owner = unique_owner(it == method_owners_.end() ? nullptr : &it->second);
    }
    for (auto& a : e.args) expr(*a);
  }

  const Program& program_;
  std::map<std::string, std::set<std::string>> field_owners_;
  std::map<std::pair<std::string, int>, std::set<std::string>> method_owners_;
  const TypeView* type_ = nullptr;
  bool static_ctx_ = false;
  std::set<std::string> locals_;
  std::vector<Diagnostic> diags_;
};

std::set<std::string> params_of(const MethodDecl& m) { return {m.params.begin(), m.params.end()}; }

}  // namespace

void resolve_names(Program& program, std::vector<AspectDecl*> aspects) {
  Resolver r(program);
  for (auto& cls : program.classes) {
    TypeView view{cls.name, &cls.fields, &cls.methods, false};
    for (auto& f : cls.fields) {
      if (f.init) r.initializer(view, f.is_static, *f.init);
    }
    if (cls.static_init) r.body(view, true, {}, *cls.static_init);
    if (cls.ctor) r.body(view, false, params_of(*cls.ctor), cls.ctor->body);
    for (auto& m : cls.methods) r.body(view, false, params_of(m), m.body);
  }
  std::set<std::string> aspect_names;
  for (AspectDecl* a : aspects) {
    if (!aspect_names.insert(a->name).second) {
      r.diagnostics().push_back({a->loc, "duplicate aspect '" + a->name + "'"});
    }
    if (program.find_class(a->name)) {
      r.diagnostics().push_back({a->loc, "aspect '" + a->name + "' clashes with a class name"});
    }
    TypeView view{a->name, &a->fields, &a->methods, true};
    for (auto& f : a->fields) {
      if (f.init) r.initializer(view, false, *f.init);
    }
    for (auto& m : a->methods) r.body(view, false, params_of(m), m.body);
    for (auto& adv : a->advice) {
      r.body(view, false, {"thisObject", "targetObject", "args", "jp"}, adv.body);
    }
  }
  if (!r.diagnostics().empty()) throw CompileError("resolve", std::move(r.diagnostics()));
}

}  // namespace lom
