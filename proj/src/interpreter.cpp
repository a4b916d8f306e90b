#include "lom/interpreter.hpp"

#include <algorithm>
#include <memory>
#include <set>
#include <sstream>

#include "lom/task.hpp"

namespace lom {

// ---------------------------------------------------------------------------
// Values

std::string render(const Value& v) {
  struct Visitor {
    std::string operator()(std::monostate) const { return "null"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(ListObj* l) const {
      std::string out = "[";
      for (std::size_t i = 0; i < l->items.size(); ++i) {
        if (i) out += ", ";
        out += render(l->items[i]);
      }
      return out + "]";
    }
    std::string operator()(Object* o) const { return "<" + o->cls + "#" + std::to_string(o->id) + ">"; }
    std::string operator()(MonitorHandle m) const { return "monitor#" + std::to_string(m.id); }
    std::string operator()(ThreadHandle t) const { return "thread#" + std::to_string(t.id); }
  };
  return std::visit(Visitor{}, v);
}

std::string format_message(std::string_view tmpl, std::span<const Value> values) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '{') {
      std::size_t close = tmpl.find('}', i);
      if (close != std::string_view::npos && close > i + 1) {
        std::string_view digits = tmpl.substr(i + 1, close - i - 1);
        if (std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
          std::size_t k = std::stoul(std::string(digits));
          if (k >= values.size()) {
            throw RuntimeError("format placeholder {" + std::string(digits) + "} out of range (" +
                               std::to_string(values.size()) + " value(s))");
          }
          out += render(values[k]);
          i = close;
          continue;
        }
      }
    }
    out += tmpl[i];
  }
  return out;
}

const char* to_string(ExitStatus s) {
  switch (s) {
    case ExitStatus::Completed: return "completed";
    case ExitStatus::Deadlock: return "deadlock";
    case ExitStatus::StepLimit: return "step-limit-exceeded";
    case ExitStatus::RuntimeError: return "runtime-error";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Deadlock detection

const MonitorSnapshot* SchedulerSnapshot::monitor(int id) const {
  for (const auto& m : monitors) {
    if (m.id == id) return &m;
  }
  return nullptr;
}

namespace {

std::string monitor_name(int id, const std::string& label) {
  std::string out = "monitor#" + std::to_string(id);
  if (!label.empty()) out += "(" + label + ")";
  return out;
}

}  // namespace

std::optional<DeadlockReport> detect_deadlock(const SchedulerSnapshot& state) {
  DeadlockReport report;
  for (const auto& t : state.threads) {
    if (t.status == ThreadStatus::Finished) continue;
    if (t.status == ThreadStatus::Runnable) return std::nullopt;
    const MonitorSnapshot* m = state.monitor(t.monitor);
    if (t.status == ThreadStatus::Blocked && (!m || m->owner < 0)) return std::nullopt;
    DeadlockReport::Wait w;
    w.thread = t.id;
    w.monitor = t.monitor;
    w.monitor_name = monitor_name(t.monitor, m ? m->label : "");
    w.holder = m ? m->owner : -1;
    w.waiting = t.status == ThreadStatus::Waiting;
    report.threads.push_back(t.id);
    report.waits.push_back(w);
  }
  if (report.threads.empty()) return std::nullopt;
  std::sort(report.threads.begin(), report.threads.end());
  std::sort(report.waits.begin(), report.waits.end(),
            [](const auto& a, const auto& b) { return a.thread < b.thread; });

  // Follow holder edges from every thread; a revisit within one walk is a cycle.
  std::map<int, int> next;
  for (const auto& w : report.waits) next[w.thread] = w.holder;
  std::set<int> on_cycle;
  for (int start : report.threads) {
    std::vector<int> path;
    int cur = start;
    while (cur >= 0 && next.count(cur) &&
           std::find(path.begin(), path.end(), cur) == path.end()) {
      path.push_back(cur);
      cur = next[cur];
    }
    auto it = std::find(path.begin(), path.end(), cur);
    if (cur >= 0 && it != path.end()) on_cycle.insert(it, path.end());
  }
  report.cycle.assign(on_cycle.begin(), on_cycle.end());
  return report;
}

bool DeadlockReport::has_self_edge() const {
  return std::any_of(waits.begin(), waits.end(), [](const Wait& w) { return !w.waiting && w.holder == w.thread; });
}

bool DeadlockReport::has_self_edge_on(std::string_view label) const {
  return std::any_of(waits.begin(), waits.end(), [&](const Wait& w) {
    return !w.waiting && w.holder == w.thread && w.monitor_name.find(label) != std::string::npos;
  });
}

std::string DeadlockReport::str() const {
  std::ostringstream os;
  os << "deadlock: " << threads.size() << " stuck thread(s)\n";
  for (const auto& w : waits) {
    os << "  T" << w.thread << (w.waiting ? " waits for notify on " : " blocked on ") << w.monitor_name;
    if (w.holder >= 0) {
      os << " held by T" << w.holder;
      if (w.holder == w.thread) os << " (self)";
    } else {
      os << " (not held)";
    }
    os << "\n";
  }
  if (!cycle.empty()) {
    os << "  cycle:";
    for (int t : cycle) os << " T" << t;
    os << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Results

std::vector<std::string> ExecutionResult::output() const {
  std::vector<std::string> out;
  for (const auto& l : lines) {
    if (l.channel == OutputLine::Channel::Print) out.push_back(l.text);
  }
  return out;
}

std::vector<std::string> ExecutionResult::audit() const {
  std::vector<std::string> out;
  for (const auto& l : lines) {
    if (l.channel == OutputLine::Channel::Audit) out.push_back(l.text);
  }
  return out;
}

std::string ExecutionResult::trace_text() const {
  std::string out;
  for (const auto& t : trace) out += t + "\n";
  return out;
}

std::uint64_t rotation_key(std::uint64_t seed, int thread) {
  // splitmix64 finalizer over the (seed, thread) pair.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(thread) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Machine

namespace {

struct Frame {
  Object* self = nullptr;
  std::map<std::string, Value> locals;
};

struct Flow {
  bool returned = false;
  Value value;
};

struct Monitor {
  int id = 0;
  std::string label;
  int owner = -1;
};

struct Thread {
  int id = 0;
  ThreadStatus status = ThreadStatus::Runnable;
  int monitor = -1;
  Task<Value> root;
  std::coroutine_handle<> resume;
  std::set<int> held;
};

struct TypeInfo {
  std::string name;
  const void* anchor = nullptr;
  const std::vector<FieldDecl>* fields = nullptr;
  const std::vector<MethodDecl>* methods = nullptr;
  const MethodDecl* ctor = nullptr;
  const ClassDecl* cls = nullptr;

  const MethodDecl* method(const std::string& n) const {
    for (const auto& m : *methods) {
      if (m.name == n) return &m;
    }
    return nullptr;
  }
};

struct JpBindings {
  Value self;
  Value target;
  std::vector<Value> args;
};

struct JpFrame {
  const Shadow* shadow = nullptr;
  int thread = 0;
  std::size_t pushed = 0;
  JpBindings b;
  ListObj* args_list = nullptr;
  Object* jp_object = nullptr;
};

JpBindings bindings(Value self, Value target, std::vector<Value> args) {
  JpBindings b;
  b.self = std::move(self);
  b.target = std::move(target);
  b.args = std::move(args);
  return b;
}

std::optional<std::string> class_of(const Value& v) {
  if (auto* o = std::get_if<Object*>(&v)) return (*o)->cls;
  return std::nullopt;
}

bool literal_equals(const Value& v, const ArgLiteral& lit) {
  switch (lit.kind) {
    case ArgLiteral::Kind::Wildcard: return true;
    case ArgLiteral::Kind::Int: return std::holds_alternative<std::int64_t>(v) && std::get<std::int64_t>(v) == lit.int_value;
    case ArgLiteral::Kind::Bool: return std::holds_alternative<bool>(v) && std::get<bool>(v) == lit.bool_value;
    case ArgLiteral::Kind::String:
      return std::holds_alternative<std::string>(v) && std::get<std::string>(v) == lit.string_value;
    case ArgLiteral::Kind::Null: return std::holds_alternative<std::monostate>(v);
  }
  return false;
}

class JpContext : public DynamicContext {
 public:
  JpContext(const JpFrame& f, const CflowStacks& stacks) : f_(f), stacks_(stacks) {}
  std::optional<std::string> this_class() const override { return class_of(f_.b.self); }
  std::optional<std::string> target_class() const override { return class_of(f_.b.target); }
  bool arg_matches(int index, const ArgLiteral& lit) const override {
    if (index < 0 || static_cast<std::size_t>(index) >= f_.b.args.size()) return false;
    return literal_equals(f_.b.args[static_cast<std::size_t>(index)], lit);
  }
  bool cflow_active(int scope) const override { return stacks_.active(f_.thread, scope); }

 private:
  const JpFrame& f_;
  const CflowStacks& stacks_;
};

bool values_equal(const Value& a, const Value& b) { return a == b; }

std::string type_name_of(const Value& v) {
  switch (v.index()) {
    case 0: return "null";
    case 1: return "int";
    case 2: return "bool";
    case 3: return "string";
    case 4: return "list";
    case 5: return "object";
    case 6: return "monitor";
    case 7: return "thread";
  }
  return "?";
}

class Machine {
 public:
  Machine(const WovenUnit& unit, const RunOptions& options) : unit_(unit), options_(options) {
    if (unit.program) {
      for (const auto& cls : unit.program->classes) {
        TypeInfo t{cls.name, &cls, &cls.fields, &cls.methods, cls.ctor ? &*cls.ctor : nullptr, &cls};
        types_.emplace(cls.name, t);
      }
    }
    for (const AspectDecl* a : unit.aspects) {
      types_.emplace(a->name, TypeInfo{a->name, a, &a->fields, &a->methods, nullptr, nullptr});
    }
  }

  ExecutionResult run();

 private:
  // -- bookkeeping ---------------------------------------------------------
  Thread& current() { return *threads_[static_cast<std::size_t>(current_)]; }

  void trace(const std::string& event, const std::string& detail) {
    std::string line = std::to_string(steps_) + " T" + std::to_string(current_) + " " + event;
    if (!detail.empty()) line += " " + detail;
    result_.trace.push_back(std::move(line));
  }

  Suspend yield() { return Suspend{&current().resume}; }

  Object* new_object(const std::string& cls) {
    objects_.push_back(std::make_unique<Object>());
    Object* o = objects_.back().get();
    o->id = static_cast<int>(objects_.size());
    o->cls = cls;
    return o;
  }

  ListObj* new_list(std::vector<Value> items = {}) {
    lists_.push_back(std::make_unique<ListObj>());
    lists_.back()->items = std::move(items);
    return lists_.back().get();
  }

  const TypeInfo& type_info(const std::string& name) {
    auto it = types_.find(name);
    if (it == types_.end()) throw RuntimeError("unknown type '" + name + "'");
    return it->second;
  }

  [[noreturn]] static void fail(const Expr& at, const std::string& msg) {
    throw RuntimeError(at.loc.str() + ": " + msg);
  }

  Object* expect_object(const Value& v, const Expr& at, const std::string& what) {
    if (auto* o = std::get_if<Object*>(&v)) return *o;
    if (std::holds_alternative<std::monostate>(v)) fail(at, "null dereference " + what);
    fail(at, "expected an object " + what + ", got " + type_name_of(v));
  }

  static std::int64_t expect_int(const Value& v, const Expr& at) {
    if (auto* i = std::get_if<std::int64_t>(&v)) return *i;
    fail(at, "expected int, got " + type_name_of(v));
  }

  static bool expect_bool(const Value& v, const Expr& at) {
    if (auto* b = std::get_if<bool>(&v)) return *b;
    fail(at, "expected bool, got " + type_name_of(v));
  }

  ListObj* expect_list(const Value& v, const Expr& at) {
    if (auto* l = std::get_if<ListObj*>(&v)) return *l;
    fail(at, "expected list, got " + type_name_of(v));
  }

  Monitor& expect_monitor(const Value& v, const Expr& at) {
    auto* m = std::get_if<MonitorHandle>(&v);
    if (!m) fail(at, "expected monitor, got " + type_name_of(v));
    return monitors_[static_cast<std::size_t>(m->id)];
  }

  static Value self_value(const Frame& fr) { return fr.self ? Value(fr.self) : Value(); }

  Value& static_field(const std::string& cls, const std::string& name, const Expr& at) {
    auto it = statics_.find(cls);
    if (it == statics_.end() || !it->second.count(name)) fail(at, "unknown static field '" + cls + "." + name + "'");
    return it->second[name];
  }

  Value& instance_field(Object* o, const std::string& name, const Expr& at) {
    auto it = o->fields.find(name);
    if (it == o->fields.end()) fail(at, "unknown member '" + name + "' on " + render(o));
    return it->second;
  }

  std::string monitor_label(const Monitor& m) const { return monitor_name(m.id, m.label); }

  // -- join points -----------------------------------------------------------
  Task<JpFrame> jp_enter(const Shadow* s, JpBindings b);
  Task<Unit> jp_exit(JpFrame& f);
  Task<Unit> run_advice(const MatchEntry& e, JpFrame& f);

  // -- evaluation ------------------------------------------------------------
  Task<Value> eval(const Expr& e, Frame& fr);
  Task<Value> eval_binary(const Expr& e, Frame& fr);
  Task<Value> eval_builtin(const Expr& e, Frame& fr);
  Task<Flow> exec_block(const Block& b, Frame& fr);
  Task<Flow> exec(const Stmt& s, Frame& fr);
  Task<Unit> assign(const Stmt& s, Frame& fr);
  Task<Value> invoke(Object* recv, const TypeInfo& t, const MethodDecl& m, std::vector<Value> args);
  Task<Value> instantiate(const TypeInfo& t, std::vector<Value> args);
  Task<Value> main_thread();
  Task<Value> spawned_thread(Object* recv, const TypeInfo* t, const MethodDecl* m, std::vector<Value> args);

  // -- scheduling ------------------------------------------------------------
  void finish_thread(Thread& t);
  SchedulerSnapshot snapshot() const;

  const WovenUnit& unit_;
  const RunOptions& options_;
  std::map<std::string, TypeInfo> types_;
  std::map<std::string, std::map<std::string, Value>> statics_;
  std::map<std::string, Object*> aspect_instances_;
  std::vector<std::unique_ptr<Object>> objects_;
  std::vector<std::unique_ptr<ListObj>> lists_;
  std::vector<Monitor> monitors_;
  std::vector<std::unique_ptr<Thread>> threads_;
  CflowStacks cflow_;
  int current_ = 0;
  std::int64_t steps_ = 0;
  ExecutionResult result_;
};

// ---------------------------------------------------------------------------
// Join points

Task<JpFrame> Machine::jp_enter(const Shadow* s, JpBindings b) {
  JpFrame f;
  f.shadow = s;
  f.thread = current_;
  f.b = std::move(b);
  if (!s) co_return f;
  trace("jp", s->describe());
  auto ce = unit_.cflow.entries.find(s->id);
  if (ce != unit_.cflow.entries.end()) {
    for (const auto& [scope, residue] : ce->second) {
      if (!residue || eval_residue(*residue, JpContext(f, cflow_), unit_.cflow)) {
        cflow_.push(f.thread, scope);
        ++f.pushed;
      }
    }
  }
  AdviceSequence seq = advice_sequence_at(s->id, unit_.matches);
  for (const auto& e : seq.before) co_await run_advice(e, f);
  co_return f;
}

Task<Unit> Machine::jp_exit(JpFrame& f) {
  if (!f.shadow) co_return Unit{};
  AdviceSequence seq = advice_sequence_at(f.shadow->id, unit_.matches);
  for (const auto& e : seq.after) co_await run_advice(e, f);
  cflow_.pop(f.thread, f.pushed);
  f.pushed = 0;
  co_return Unit{};
}

Task<Unit> Machine::run_advice(const MatchEntry& e, JpFrame& f) {
  if (e.residue && !eval_residue(*e.residue, JpContext(f, cflow_), unit_.cflow)) co_return Unit{};
  if (!f.args_list) f.args_list = new_list(f.b.args);
  if (!f.jp_object) {
    Object* jp = new_object("JoinPoint");
    jp->fields["kind"] = std::string(to_string(f.shadow->kind));
    jp->fields["signature"] = f.shadow->signature.str();
    jp->fields["location"] = f.shadow->loc.str();
    f.jp_object = jp;
  }
  std::string label = e.advice.label();
  trace("advice-enter", label + " at " + f.shadow->describe());
  Frame fr;
  fr.self = aspect_instances_.at(e.advice.aspect->name);
  fr.locals["thisObject"] = f.b.self;
  fr.locals["targetObject"] = f.b.target;
  fr.locals["args"] = f.args_list;
  fr.locals["jp"] = f.jp_object;
  co_await exec_block(e.advice.advice->body, fr);
  trace("advice-exit", label + " at " + f.shadow->describe());
  co_return Unit{};
}

// ---------------------------------------------------------------------------
// Statements

Task<Flow> Machine::exec_block(const Block& b, Frame& fr) {
  for (const auto& s : b) {
    Flow f = co_await exec(*s, fr);
    if (f.returned) co_return f;
  }
  co_return Flow{};
}

Task<Flow> Machine::exec(const Stmt& s, Frame& fr) {
  co_await yield();
  switch (s.kind) {
    case StmtKind::VarDecl: {
      Value v;
      if (s.value) v = co_await eval(*s.value, fr);
      fr.locals[s.name] = std::move(v);
      co_return Flow{};
    }
    case StmtKind::Assign:
      co_await assign(s, fr);
      co_return Flow{};
    case StmtKind::If: {
      Value c = co_await eval(*s.value, fr);
      if (expect_bool(c, *s.value)) co_return co_await exec_block(s.body, fr);
      co_return co_await exec_block(s.else_body, fr);
    }
    case StmtKind::While:
      while (true) {
        Value c = co_await eval(*s.value, fr);
        if (!expect_bool(c, *s.value)) break;
        Flow f = co_await exec_block(s.body, fr);
        if (f.returned) co_return f;
        co_await yield();
      }
      co_return Flow{};
    case StmtKind::Return: {
      Flow f;
      f.returned = true;
      if (s.value) f.value = co_await eval(*s.value, fr);
      co_return f;
    }
    case StmtKind::ExprStmt:
      co_await eval(*s.value, fr);
      co_return Flow{};
  }
  co_return Flow{};
}

Task<Unit> Machine::assign(const Stmt& s, Frame& fr) {
  const Expr& t = *s.target;
  switch (t.kind) {
    case ExprKind::Name: {
      Value v = co_await eval(*s.value, fr);
      if (t.ref == NameRef::Local) {
        fr.locals[t.text] = std::move(v);
        co_return Unit{};
      }
      const bool is_static = t.ref == NameRef::StaticField;
      if (!is_static && !fr.self) fail(t, "no receiver for field '" + t.text + "'");
      Value target = is_static ? Value() : Value(fr.self);
      JpFrame jf = co_await jp_enter(unit_.shadow_at(&t, ShadowKind::FieldSet), bindings(self_value(fr), target, std::vector<Value>(1, v)));
      if (is_static) {
        static_field(t.owner, t.text, t) = std::move(v);
      } else {
        instance_field(fr.self, t.text, t) = std::move(v);
      }
      co_await jp_exit(jf);
      co_return Unit{};
    }
    case ExprKind::Member: {
      const Expr& recv = *t.receiver;
      if (recv.kind == ExprKind::Name && recv.ref == NameRef::Class) {
        Value v = co_await eval(*s.value, fr);
        JpFrame jf = co_await jp_enter(unit_.shadow_at(&t, ShadowKind::FieldSet), bindings(self_value(fr), Value(), std::vector<Value>(1, v)));
        static_field(recv.text, t.text, t) = std::move(v);
        co_await jp_exit(jf);
        co_return Unit{};
      }
      Value rv = co_await eval(recv, fr);
      Object* o = expect_object(rv, t, "assigning '" + t.text + "'");
      Value v = co_await eval(*s.value, fr);
      instance_field(o, t.text, t);  // existence check before the join point
      JpFrame jf = co_await jp_enter(unit_.shadow_at(&t, ShadowKind::FieldSet), bindings(self_value(fr), rv, std::vector<Value>(1, v)));
      instance_field(o, t.text, t) = std::move(v);
      co_await jp_exit(jf);
      co_return Unit{};
    }
    case ExprKind::Index: {
      Value lv = co_await eval(*t.receiver, fr);
      Value iv = co_await eval(*t.args[0], fr);
      Value v = co_await eval(*s.value, fr);
      ListObj* l = expect_list(lv, t);
      std::int64_t i = expect_int(iv, t);
      if (i < 0 || static_cast<std::size_t>(i) >= l->items.size()) {
        fail(t, "list index " + std::to_string(i) + " out of bounds (size " + std::to_string(l->items.size()) + ")");
      }
      l->items[static_cast<std::size_t>(i)] = std::move(v);
      co_return Unit{};
    }
    default: break;
  }
  fail(t, "invalid assignment target");
  co_return Unit{};
}

// ---------------------------------------------------------------------------
// Expressions

Task<Value> Machine::eval(const Expr& e, Frame& fr) {
  switch (e.kind) {
    case ExprKind::IntLit: co_return Value(e.int_value);
    case ExprKind::BoolLit: co_return Value(e.bool_value);
    case ExprKind::StringLit: co_return Value(e.text);
    case ExprKind::NullLit: co_return Value();
    case ExprKind::This:
      if (!fr.self) fail(e, "'this' used without a receiver");
      co_return Value(fr.self);
    case ExprKind::ListLit: {
      std::vector<Value> items;
      for (const auto& a : e.args) items.push_back(co_await eval(*a, fr));
      co_return Value(new_list(std::move(items)));
    }
    case ExprKind::Name: {
      switch (e.ref) {
        case NameRef::Local: {
          auto it = fr.locals.find(e.text);
          if (it == fr.locals.end()) fail(e, "local '" + e.text + "' read before assignment");
          co_return it->second;
        }
        case NameRef::Field:
        case NameRef::StaticField: {
          const bool is_static = e.ref == NameRef::StaticField;
          if (!is_static && !fr.self) fail(e, "no receiver for field '" + e.text + "'");
          Value target = is_static ? Value() : Value(fr.self);
          JpFrame jf = co_await jp_enter(unit_.shadow_at(&e, ShadowKind::FieldGet), bindings(self_value(fr), target, std::vector<Value>()));
          Value v = is_static ? static_field(e.owner, e.text, e) : instance_field(fr.self, e.text, e);
          co_await jp_exit(jf);
          co_return v;
        }
        default: fail(e, "'" + e.text + "' is not a value");
      }
    }
    case ExprKind::Member: {
      const Expr& recv = *e.receiver;
      if (recv.kind == ExprKind::Name && recv.ref == NameRef::Class) {
        JpFrame jf = co_await jp_enter(unit_.shadow_at(&e, ShadowKind::FieldGet), bindings(self_value(fr), Value(), std::vector<Value>()));
        Value v = static_field(recv.text, e.text, e);
        co_await jp_exit(jf);
        co_return v;
      }
      Value rv = co_await eval(recv, fr);
      Object* o = expect_object(rv, e, "reading '" + e.text + "'");
      instance_field(o, e.text, e);
      JpFrame jf = co_await jp_enter(unit_.shadow_at(&e, ShadowKind::FieldGet), bindings(self_value(fr), rv, std::vector<Value>()));
      Value v = instance_field(o, e.text, e);
      co_await jp_exit(jf);
      co_return v;
    }
    case ExprKind::Index: {
      Value lv = co_await eval(*e.receiver, fr);
      Value iv = co_await eval(*e.args[0], fr);
      ListObj* l = expect_list(lv, e);
      std::int64_t i = expect_int(iv, e);
      if (i < 0 || static_cast<std::size_t>(i) >= l->items.size()) {
        fail(e, "list index " + std::to_string(i) + " out of bounds (size " + std::to_string(l->items.size()) + ")");
      }
      co_return l->items[static_cast<std::size_t>(i)];
    }
    case ExprKind::MethodCall: {
      Value rv = self_value(fr);
      if (e.receiver) rv = co_await eval(*e.receiver, fr);
      std::vector<Value> args;
      for (const auto& a : e.args) args.push_back(co_await eval(*a, fr));
      Object* o = expect_object(rv, e, "calling '" + e.text + "'");
      const TypeInfo& t = type_info(o->cls);
      const MethodDecl* m = t.method(e.text);
      if (!m || m->arity() != static_cast<int>(args.size())) {
        fail(e, "unknown member '" + e.text + "/" + std::to_string(args.size()) + "' on " + render(o));
      }
      JpFrame jf = co_await jp_enter(unit_.shadow_at(&e, ShadowKind::MethodCall), bindings(self_value(fr), rv, args));
      Value r = co_await invoke(o, t, *m, std::move(args));
      co_await jp_exit(jf);
      co_return r;
    }
    case ExprKind::New: {
      std::vector<Value> args;
      for (const auto& a : e.args) args.push_back(co_await eval(*a, fr));
      co_return co_await instantiate(type_info(e.text), std::move(args));
    }
    case ExprKind::Spawn: {
      const Expr& call = *e.receiver;
      Value rv = self_value(fr);
      if (call.receiver) rv = co_await eval(*call.receiver, fr);
      std::vector<Value> args;
      for (const auto& a : call.args) args.push_back(co_await eval(*a, fr));
      Object* o = expect_object(rv, call, "spawning '" + call.text + "'");
      const TypeInfo& t = type_info(o->cls);
      const MethodDecl* m = t.method(call.text);
      if (!m || m->arity() != static_cast<int>(args.size())) {
        fail(call, "unknown member '" + call.text + "/" + std::to_string(args.size()) + "' on " + render(o));
      }
      auto th = std::make_unique<Thread>();
      th->id = static_cast<int>(threads_.size());
      th->root = spawned_thread(o, &t, m, std::move(args));
      th->resume = th->root.handle();
      int id = th->id;
      threads_.push_back(std::move(th));
      trace("spawn", "T" + std::to_string(id) + " " + t.name + "." + m->name);
      co_return Value(ThreadHandle{id});
    }
    case ExprKind::Unary: {
      Value v = co_await eval(*e.args[0], fr);
      if (e.text == "!") co_return Value(!expect_bool(v, e));
      co_return Value(-expect_int(v, e));
    }
    case ExprKind::Binary: co_return co_await eval_binary(e, fr);
    case ExprKind::BuiltinCall: co_return co_await eval_builtin(e, fr);
  }
  fail(e, "unsupported expression");
}

Task<Value> Machine::eval_binary(const Expr& e, Frame& fr) {
  const std::string& op = e.text;
  Value l = co_await eval(*e.args[0], fr);
  if (op == "&&") {
    if (!expect_bool(l, e)) co_return Value(false);
    Value r = co_await eval(*e.args[1], fr);
    co_return Value(expect_bool(r, e));
  }
  if (op == "||") {
    if (expect_bool(l, e)) co_return Value(true);
    Value r = co_await eval(*e.args[1], fr);
    co_return Value(expect_bool(r, e));
  }
  Value r = co_await eval(*e.args[1], fr);
  if (op == "==") co_return Value(values_equal(l, r));
  if (op == "!=") co_return Value(!values_equal(l, r));
  if (op == "+" && (std::holds_alternative<std::string>(l) || std::holds_alternative<std::string>(r))) {
    co_return Value(render(l) + render(r));
  }
  if (std::holds_alternative<std::string>(l) && std::holds_alternative<std::string>(r)) {
    const auto& a = std::get<std::string>(l);
    const auto& b = std::get<std::string>(r);
    if (op == "<") co_return Value(a < b);
    if (op == "<=") co_return Value(a <= b);
    if (op == ">") co_return Value(a > b);
    if (op == ">=") co_return Value(a >= b);
  }
  std::int64_t a = expect_int(l, e);
  std::int64_t b = expect_int(r, e);
  if (op == "+") co_return Value(a + b);
  if (op == "-") co_return Value(a - b);
  if (op == "*") co_return Value(a * b);
  if (op == "/" || op == "%") {
    if (b == 0) fail(e, "division by zero");
    co_return Value(op == "/" ? a / b : a % b);
  }
  if (op == "<") co_return Value(a < b);
  if (op == "<=") co_return Value(a <= b);
  if (op == ">") co_return Value(a > b);
  if (op == ">=") co_return Value(a >= b);
  fail(e, "unknown operator '" + op + "'");
}

Task<Value> Machine::eval_builtin(const Expr& e, Frame& fr) {
  std::vector<Value> args;
  for (const auto& a : e.args) args.push_back(co_await eval(*a, fr));
  const std::string& name = e.text;
  auto want = [&](std::size_t lo, std::size_t hi) {
    if (args.size() < lo || args.size() > hi) {
      fail(e, name + " expects " + (lo == hi ? std::to_string(lo) : std::to_string(lo) + ".." + std::to_string(hi)) +
                  " argument(s), got " + std::to_string(args.size()));
    }
  };

  if (name == "print") {
    std::string text;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) text += " ";
      text += render(args[i]);
    }
    trace("print", text);
    result_.lines.push_back({OutputLine::Channel::Print, text});
    co_return Value();
  }
  if (name == "emit_audit") {
    want(1, 1);
    std::string text = render(args[0]);
    trace("audit", text);
    result_.lines.push_back({OutputLine::Channel::Audit, text});
    co_return Value();
  }
  if (name == "len") {
    want(1, 1);
    if (auto* s = std::get_if<std::string>(&args[0])) co_return Value(static_cast<std::int64_t>(s->size()));
    co_return Value(static_cast<std::int64_t>(expect_list(args[0], e)->items.size()));
  }
  if (name == "push_back") {
    want(2, 2);
    expect_list(args[0], e)->items.push_back(args[1]);
    co_return Value();
  }
  if (name == "pop_back") {
    want(1, 1);
    ListObj* l = expect_list(args[0], e);
    if (l->items.empty()) fail(e, "pop_back on empty list");
    Value v = l->items.back();
    l->items.pop_back();
    co_return v;
  }
  if (name == "make_list") {
    want(0, 1);
    std::int64_t n = args.empty() ? 0 : expect_int(args[0], e);
    if (n < 0) fail(e, "make_list size is negative");
    co_return Value(new_list(std::vector<Value>(static_cast<std::size_t>(n))));
  }
  if (name == "format") {
    if (args.empty()) want(1, 1);
    if (!std::holds_alternative<std::string>(args[0])) fail(e, "format template must be a string");
    try {
      co_return Value(format_message(std::get<std::string>(args[0]), std::span<const Value>(args).subspan(1)));
    } catch (const RuntimeError& err) {
      fail(e, err.what());
    }
  }
  if (name == "format_list") {
    want(2, 2);
    if (!std::holds_alternative<std::string>(args[0])) fail(e, "format template must be a string");
    ListObj* l = expect_list(args[1], e);
    try {
      co_return Value(format_message(std::get<std::string>(args[0]), l->items));
    } catch (const RuntimeError& err) {
      fail(e, err.what());
    }
  }
  if (name == "str") {
    want(1, 1);
    co_return Value(render(args[0]));
  }
  if (name == "class_name") {
    want(1, 1);
    co_return Value(expect_object(args[0], e, "in class_name")->cls);
  }
  if (name == "thread_id") {
    want(0, 0);
    co_return Value(static_cast<std::int64_t>(current_));
  }
  if (name == "make_monitor") {
    want(0, 1);
    Monitor m;
    m.id = static_cast<int>(monitors_.size());
    if (!args.empty()) m.label = render(args[0]);
    monitors_.push_back(m);
    co_return Value(MonitorHandle{m.id});
  }
  if (name == "monitor_acquire") {
    want(1, 1);
    Monitor& m = expect_monitor(args[0], e);
    if (m.owner < 0) {
      m.owner = current_;
      current().held.insert(m.id);
      trace("acquire", monitor_label(m));
    } else {
      current().status = ThreadStatus::Blocked;
      current().monitor = m.id;
      trace("block", monitor_label(m) + " held by T" + std::to_string(m.owner));
      co_await yield();  // the scheduler grants the monitor before resuming
    }
    co_return Value();
  }
  if (name == "monitor_release") {
    want(1, 1);
    Monitor& m = expect_monitor(args[0], e);
    if (m.owner != current_) fail(e, "release of " + monitor_label(m) + " not held by this thread");
    m.owner = -1;
    current().held.erase(m.id);
    trace("release", monitor_label(m));
    co_return Value();
  }
  if (name == "monitor_wait") {
    want(1, 1);
    Monitor& m = expect_monitor(args[0], e);
    if (m.owner != current_) fail(e, "wait on " + monitor_label(m) + " not held by this thread");
    m.owner = -1;
    current().held.erase(m.id);
    current().status = ThreadStatus::Waiting;
    current().monitor = m.id;
    trace("wait", monitor_label(m));
    co_await yield();
    co_return Value();
  }
  if (name == "monitor_notify_all") {
    want(1, 1);
    Monitor& m = expect_monitor(args[0], e);
    if (m.owner != current_) fail(e, "notify on " + monitor_label(m) + " not held by this thread");
    for (auto& t : threads_) {
      if (t->status == ThreadStatus::Waiting && t->monitor == m.id) t->status = ThreadStatus::Blocked;
    }
    trace("notify", monitor_label(m));
    co_return Value();
  }
  fail(e, "unknown builtin '" + name + "'");
}

// ---------------------------------------------------------------------------
// Invocation

Task<Value> Machine::invoke(Object* recv, const TypeInfo& t, const MethodDecl& m, std::vector<Value> args) {
  Frame fr;
  fr.self = recv;
  for (std::size_t i = 0; i < m.params.size(); ++i) fr.locals[m.params[i]] = args[i];
  const Shadow* s = unit_.shadow_at(&m, ShadowKind::MethodExecution);
  JpFrame jf = co_await jp_enter(s, bindings(Value(recv), Value(recv), std::move(args)));
  if (s) trace("enter", s->signature.str() + " " + render(recv));
  Flow f = co_await exec_block(m.body, fr);
  if (s) trace("leave", s->signature.str() + " " + render(recv));
  co_await jp_exit(jf);
  (void)t;
  co_return f.value;
}

Task<Value> Machine::instantiate(const TypeInfo& t, std::vector<Value> args) {
  if (!t.cls && aspect_instances_.count(t.name)) throw RuntimeError("aspect '" + t.name + "' cannot be instantiated");
  Object* o = new_object(t.name);
  for (const auto& f : *t.fields) {
    if (!f.is_static) o->fields[f.name] = Value();
  }
  JpFrame pf = co_await jp_enter(unit_.shadow_at(t.anchor, ShadowKind::PreInitialization), bindings(o, o, args));
  Frame fr;
  fr.self = o;
  for (const auto& f : *t.fields) {
    if (f.is_static || !f.init) continue;
    o->fields[f.name] = co_await eval(*f.init, fr);
  }
  co_await jp_exit(pf);
  JpFrame jf = co_await jp_enter(unit_.shadow_at(t.anchor, ShadowKind::Initialization), bindings(o, o, args));
  if (t.ctor) {
    if (t.ctor->arity() != static_cast<int>(args.size())) {
      throw RuntimeError("constructor of '" + t.name + "' takes " + std::to_string(t.ctor->arity()) + " argument(s)");
    }
    Frame cf;
    cf.self = o;
    for (std::size_t i = 0; i < args.size(); ++i) cf.locals[t.ctor->params[i]] = args[i];
    co_await exec_block(t.ctor->body, cf);
  }
  co_await jp_exit(jf);
  co_return Value(o);
}

Task<Value> Machine::main_thread() {
  // Aspect singletons first, then class static state, then the entry point.
  for (const AspectDecl* a : unit_.aspects) {
    const TypeInfo& t = type_info(a->name);
    Value inst = co_await instantiate(t, {});
    aspect_instances_[a->name] = std::get<Object*>(inst);
  }
  if (unit_.program) {
    for (const auto& cls : unit_.program->classes) {
      auto& st = statics_[cls.name];
      for (const auto& f : cls.fields) {
        if (f.is_static) st[f.name] = Value();
      }
    }
    for (const auto& cls : unit_.program->classes) {
      Frame fr;
      for (const auto& f : cls.fields) {
        if (f.is_static && f.init) statics_[cls.name][f.name] = co_await eval(*f.init, fr);
      }
      if (cls.static_init) {
        JpFrame jf = co_await jp_enter(unit_.shadow_at(&cls, ShadowKind::StaticInitialization), bindings(Value(), Value(), std::vector<Value>()));
        co_await exec_block(*cls.static_init, fr);
        co_await jp_exit(jf);
      }
    }
  }
  const std::string& entry = options_.entry;
  auto dot = entry.rfind('.');
  if (dot == std::string::npos) throw RuntimeError("entry '" + entry + "' is not of the form Class.method");
  std::string cls = entry.substr(0, dot);
  std::string method = entry.substr(dot + 1);
  auto it = types_.find(cls);
  if (it == types_.end() || !it->second.cls) throw RuntimeError("entry class '" + cls + "' not found");
  const TypeInfo& t = it->second;
  const MethodDecl* m = t.method(method);
  if (!m || m->arity() != 0) throw RuntimeError("entry method '" + entry + "' not found or not zero-argument");
  Value inst = co_await instantiate(t, {});
  co_return co_await invoke(std::get<Object*>(inst), t, *m, {});
}

Task<Value> Machine::spawned_thread(Object* recv, const TypeInfo* t, const MethodDecl* m, std::vector<Value> args) {
  co_return co_await invoke(recv, *t, *m, std::move(args));
}

// ---------------------------------------------------------------------------
// Scheduling

void Machine::finish_thread(Thread& t) {
  t.status = ThreadStatus::Finished;
  for (int id : t.held) {
    Monitor& m = monitors_[static_cast<std::size_t>(id)];
    m.owner = -1;
    trace("release", monitor_label(m) + " (thread exit)");
  }
  t.held.clear();
  if (auto err = t.root.error()) {
    std::string msg;
    try {
      std::rethrow_exception(err);
    } catch (const std::exception& ex) {
      msg = ex.what();
    }
    trace("thread-error", msg);
    if (result_.error.empty()) result_.error = "T" + std::to_string(t.id) + ": " + msg;
  } else {
    trace("thread-finish", "");
  }
}

SchedulerSnapshot Machine::snapshot() const {
  SchedulerSnapshot s;
  for (const auto& t : threads_) s.threads.push_back({t->id, t->status, t->monitor});
  for (const auto& m : monitors_) s.monitors.push_back({m.id, m.label, m.owner});
  return s;
}

ExecutionResult Machine::run() {
  auto main = std::make_unique<Thread>();
  main->root = main_thread();
  main->resume = main->root.handle();
  threads_.push_back(std::move(main));

  while (true) {
    std::vector<Thread*> order;
    for (auto& t : threads_) {
      if (t->status != ThreadStatus::Finished) order.push_back(t.get());
    }
    if (order.empty()) break;
    std::sort(order.begin(), order.end(), [&](const Thread* a, const Thread* b) {
      auto ka = rotation_key(options_.seed, a->id), kb = rotation_key(options_.seed, b->id);
      return ka != kb ? ka < kb : a->id < b->id;
    });
    bool progressed = false;
    for (Thread* t : order) {
      if (t->status == ThreadStatus::Finished || t->status == ThreadStatus::Waiting) continue;
      current_ = t->id;
      if (t->status == ThreadStatus::Blocked) {
        Monitor& m = monitors_[static_cast<std::size_t>(t->monitor)];
        if (m.owner >= 0) continue;
        m.owner = t->id;
        t->held.insert(m.id);
        t->status = ThreadStatus::Runnable;
        t->monitor = -1;
        trace("acquire", monitor_label(m));
      }
      if (steps_ >= options_.step_limit) {
        result_.status = ExitStatus::StepLimit;
        result_.steps = steps_;
        return std::move(result_);
      }
      ++steps_;
      t->resume.resume();
      progressed = true;
      if (t->root.done()) finish_thread(*t);
    }
    if (!progressed) {
      auto report = detect_deadlock(snapshot());
      if (report) {
        result_.status = ExitStatus::Deadlock;
        result_.deadlock = std::move(report);
        trace("deadlock", "");
        result_.steps = steps_;
        return std::move(result_);
      }
    }
  }
  result_.steps = steps_;
  result_.status = result_.error.empty() ? ExitStatus::Completed : ExitStatus::RuntimeError;
  return std::move(result_);
}

}  // namespace

ExecutionResult run(const WovenUnit& unit, const RunOptions& options) {
  Machine m(unit, options);
  return m.run();
}

}  // namespace lom
