#include "lom/joinpoints.hpp"

#include <algorithm>
#include <cctype>
#include <tuple>

namespace lom {

const char* to_string(ShadowKind k) {
  switch (k) {
    case ShadowKind::MethodExecution: return "method_execution";
    case ShadowKind::MethodCall: return "method_call";
    case ShadowKind::FieldGet: return "field_get";
    case ShadowKind::FieldSet: return "field_set";
    case ShadowKind::PreInitialization: return "pre_initialization";
    case ShadowKind::Initialization: return "initialization";
    case ShadowKind::StaticInitialization: return "static_initialization";
  }
  return "?";
}

const char* to_string(HideKind k) {
  switch (k) {
    case HideKind::Set: return "set";
    case HideKind::Get: return "get";
    case HideKind::Call: return "call";
    case HideKind::Execution: return "execution";
    case HideKind::Within: return "within";
    case HideKind::PreInit: return "pre_init";
    case HideKind::Init: return "init";
    case HideKind::StaticInit: return "static_init";
    case HideKind::WithinInit: return "within_init";
    case HideKind::WithinStaticInit: return "within_static_init";
  }
  return "?";
}

std::string Signature::str() const {
  if (member.empty()) return type;
  if (arity >= 0) return type + "." + member + "/" + std::to_string(arity);
  return type + "." + member;
}

std::string Shadow::describe() const { return std::string(to_string(kind)) + " " + signature.str(); }

// ---------------------------------------------------------------------------
// ShadowTable

ShadowTable::ShadowTable(std::vector<Shadow> shadows) : shadows_(std::move(shadows)) {
  for (std::size_t i = 0; i < shadows_.size(); ++i) index_[shadows_[i].id] = i;
}

const Shadow* ShadowTable::find(ShadowId id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &shadows_[it->second];
}

std::vector<const Shadow*> ShadowTable::by_kind(ShadowKind k) const {
  std::vector<const Shadow*> out;
  for (const auto& s : shadows_) {
    if (s.kind == k) out.push_back(&s);
  }
  return out;
}

std::vector<const Shadow*> ShadowTable::by_signature(const Signature& sig) const {
  std::vector<const Shadow*> out;
  for (const auto& s : shadows_) {
    if (s.signature == sig) out.push_back(&s);
  }
  return out;
}

std::set<ShadowId> ShadowTable::ids() const {
  std::set<ShadowId> out;
  for (const auto& s : shadows_) out.insert(s.id);
  return out;
}

// ---------------------------------------------------------------------------
// Extraction

namespace {

class Extractor {
 public:
  void set_origin(Origin o) { origin_ = o; }

  void add(ShadowKind kind, Signature sig, MemberRef enclosing, const SourceLoc& loc,
           const void* anchor) {
    Shadow s;
    s.kind = kind;
    s.signature = std::move(sig);
    s.enclosing = std::move(enclosing);
    s.loc = loc;
    s.origin = origin_;
    s.anchor = anchor;
    out_.push_back(std::move(s));
  }

  void block(const Block& b, const MemberRef& within) {
    for (const auto& s : b) stmt(*s, within);
  }

  void expr(const Expr& e, const MemberRef& within) {
    switch (e.kind) {
      case ExprKind::Name:
        if (e.ref == NameRef::Field || e.ref == NameRef::StaticField) {
          add(ShadowKind::FieldGet, {e.owner, e.text, -1}, within, e.loc, &e);
        }
        return;
      case ExprKind::Member:
        expr(*e.receiver, within);
        add(ShadowKind::FieldGet, {e.owner, e.text, -1}, within, e.loc, &e);
        return;
      case ExprKind::MethodCall:
        if (e.receiver) expr(*e.receiver, within);
        for (const auto& a : e.args) expr(*a, within);
        add(ShadowKind::MethodCall, {e.owner, e.text, static_cast<int>(e.args.size())}, within,
            e.loc, &e);
        return;
      case ExprKind::Spawn: {
        // The spawned invocation runs in the new thread; only its
        // execution join point exists.
        const Expr& call = *e.receiver;
        if (call.receiver) expr(*call.receiver, within);
        for (const auto& a : call.args) expr(*a, within);
        return;
      }
      case ExprKind::Index:
        expr(*e.receiver, within);
        for (const auto& a : e.args) expr(*a, within);
        return;
      default:
        if (e.receiver) expr(*e.receiver, within);
        for (const auto& a : e.args) expr(*a, within);
        return;
    }
  }

  void stmt(const Stmt& s, const MemberRef& within) {
    switch (s.kind) {
      case StmtKind::Assign: {
        const Expr& t = *s.target;
        if (t.kind == ExprKind::Name) {
          if (t.ref == NameRef::Field || t.ref == NameRef::StaticField) {
            add(ShadowKind::FieldSet, {t.owner, t.text, -1}, within, t.loc, &t);
          }
        } else if (t.kind == ExprKind::Member) {
          expr(*t.receiver, within);
          add(ShadowKind::FieldSet, {t.owner, t.text, -1}, within, t.loc, &t);
        } else {
          expr(t, within);
        }
        expr(*s.value, within);
        return;
      }
      default:
        if (s.target) expr(*s.target, within);
        if (s.value) expr(*s.value, within);
        block(s.body, within);
        block(s.else_body, within);
        return;
    }
  }

  void type_shadows(const std::string& type, const SourceLoc& loc, const SourceLoc& init_loc,
                    const void* anchor, bool has_static, const SourceLoc& static_loc) {
    add(ShadowKind::PreInitialization, {type, "", -1}, {type, kPreInitMember, -1}, loc, anchor);
    add(ShadowKind::Initialization, {type, "", -1}, {type, kInitMember, -1}, init_loc, anchor);
    if (has_static) {
      add(ShadowKind::StaticInitialization, {type, "", -1}, {type, kStaticInitMember, -1},
          static_loc, anchor);
    }
  }

  void fields(const std::string& type, const std::vector<FieldDecl>& fs) {
    for (const auto& f : fs) {
      if (!f.init) continue;
      expr(*f.init, {type, f.is_static ? kStaticInitMember : kPreInitMember, -1});
    }
  }

  void method(const std::string& type, const MethodDecl& m) {
    MemberRef self{type, m.name, m.arity()};
    add(ShadowKind::MethodExecution, {type, m.name, m.arity()}, self, m.loc, &m);
    block(m.body, self);
  }

  std::vector<Shadow> take() { return std::move(out_); }

 private:
  Origin origin_ = Origin::Base;
  std::vector<Shadow> out_;
};

}  // namespace

ShadowTable extract_shadows(const CompilationUnit& unit) {
  Extractor ex;
  if (unit.program) {
    ex.set_origin(Origin::Base);
    for (const auto& cls : unit.program->classes) {
      ex.type_shadows(cls.name, cls.loc, cls.ctor ? cls.ctor->loc : cls.loc, &cls,
                      cls.static_init.has_value(), cls.static_loc);
      ex.fields(cls.name, cls.fields);
      if (cls.static_init) ex.block(*cls.static_init, {cls.name, kStaticInitMember, -1});
      if (cls.ctor) ex.block(cls.ctor->body, {cls.name, kInitMember, -1});
      for (const auto& m : cls.methods) ex.method(cls.name, m);
    }
  }
  for (const AspectDecl* a : unit.aspects) {
    ex.set_origin(a->generated ? Origin::Generated : Origin::Base);
    ex.type_shadows(a->name, a->loc, a->loc, a, false, a->loc);
    ex.fields(a->name, a->fields);
    for (const auto& m : a->methods) ex.method(a->name, m);
    for (const auto& adv : a->advice) ex.block(adv.body, {a->name, adv.member_name(), 0});
  }

  std::vector<Shadow> shadows = ex.take();
  std::vector<std::size_t> order(shadows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& la = shadows[a].loc;
    const auto& lb = shadows[b].loc;
    return std::tie(la.path, la.line, la.column) < std::tie(lb.path, lb.line, lb.column);
  });
  std::vector<Shadow> sorted;
  sorted.reserve(shadows.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted.push_back(std::move(shadows[order[i]]));
    sorted.back().id = static_cast<ShadowId>(i);
  }
  return ShadowTable(std::move(sorted));
}

// ---------------------------------------------------------------------------
// Hide specs

std::set<HideKind> default_hide_kinds(HideCategory c) {
  switch (c) {
    case HideCategory::Field: return {HideKind::Set, HideKind::Get};
    case HideCategory::Method: return {HideKind::Call, HideKind::Execution, HideKind::Within};
    case HideCategory::Type:
      return {HideKind::PreInit, HideKind::Init, HideKind::StaticInit, HideKind::WithinInit,
              HideKind::WithinStaticInit};
  }
  return {};
}

std::string HideSpec::label() const {
  std::string ann;
  switch (category) {
    case HideCategory::Field: ann = "@hideField"; break;
    case HideCategory::Method: ann = "@hideMethod"; break;
    case HideCategory::Type: ann = "@hideType"; break;
  }
  std::string target = type;
  if (!member.empty()) target += "." + member;
  if (category == HideCategory::Method && arity >= 0) target += "/" + std::to_string(arity);
  return ann + " on " + target;
}

namespace {

const char* annotation_name(HideCategory c) {
  switch (c) {
    case HideCategory::Field: return "hideField";
    case HideCategory::Method: return "hideMethod";
    case HideCategory::Type: return "hideType";
  }
  return "";
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

std::optional<HideSpec> hide_spec_of(const std::vector<Annotation>& annotations,
                                     HideCategory category, const std::string& type,
                                     const std::string& member, int arity) {
  const Annotation* ann = find_annotation(annotations, annotation_name(category));
  if (!ann) return std::nullopt;
  HideSpec spec;
  spec.category = category;
  spec.type = type;
  spec.member = member;
  spec.arity = arity;
  spec.loc = ann->loc;
  if (!ann->has_parens) {
    spec.kinds = default_hide_kinds(category);
    return spec;
  }
  spec.explicit_kinds = true;
  const std::set<HideKind> allowed = default_hide_kinds(category);
  for (const auto& arg : ann->args) {
    std::optional<HideKind> kind;
    std::string name = lower(arg.text);
    for (HideKind k : allowed) {
      if (arg.kind == AnnotationArg::Kind::Ident && arg.key.empty() && name == to_string(k)) kind = k;
    }
    if (!kind) {
      throw CompileError("hide", arg.loc,
                         "unknown @" + std::string(annotation_name(category)) + " kind '" +
                             arg.text + "'");
    }
    spec.kinds.insert(*kind);
  }
  return spec;
}

std::vector<HideSpec> collect_hide_specs(const CompilationUnit& unit) {
  std::vector<HideSpec> out;
  auto push = [&](std::optional<HideSpec> s) {
    if (s) out.push_back(std::move(*s));
  };
  auto members = [&](const std::string& type, const std::vector<FieldDecl>& fields,
                     const std::vector<MethodDecl>& methods) {
    for (const auto& f : fields) push(hide_spec_of(f.annotations, HideCategory::Field, type, f.name));
    for (const auto& m : methods) {
      push(hide_spec_of(m.annotations, HideCategory::Method, type, m.name, m.arity()));
    }
  };
  if (unit.program) {
    for (const auto& cls : unit.program->classes) {
      push(hide_spec_of(cls.annotations, HideCategory::Type, cls.name));
      members(cls.name, cls.fields, cls.methods);
    }
  }
  for (const AspectDecl* a : unit.aspects) {
    push(hide_spec_of(a->annotations, HideCategory::Type, a->name));
    members(a->name, a->fields, a->methods);
    for (const auto& adv : a->advice) {
      push(hide_spec_of(adv.annotations, HideCategory::Method, a->name, adv.member_name(), 0));
    }
  }
  return out;
}

namespace {

bool is_body_kind(ShadowKind k) {
  return k == ShadowKind::MethodCall || k == ShadowKind::FieldGet || k == ShadowKind::FieldSet;
}

bool spec_hides(const HideSpec& spec, HideKind kind, const Shadow& s) {
  const Signature& sig = s.signature;
  switch (kind) {
    case HideKind::Set:
      return s.kind == ShadowKind::FieldSet && sig.type == spec.type && sig.member == spec.member;
    case HideKind::Get:
      return s.kind == ShadowKind::FieldGet && sig.type == spec.type && sig.member == spec.member;
    case HideKind::Execution:
      return s.kind == ShadowKind::MethodExecution && sig.type == spec.type &&
             sig.member == spec.member && sig.arity == spec.arity;
    case HideKind::Call:
      return s.kind == ShadowKind::MethodCall && sig.type == spec.type &&
             sig.member == spec.member && sig.arity == spec.arity;
    case HideKind::Within:
      return is_body_kind(s.kind) && s.enclosing.type == spec.type &&
             s.enclosing.member == spec.member && s.enclosing.arity == spec.arity;
    case HideKind::PreInit:
      return s.kind == ShadowKind::PreInitialization && sig.type == spec.type;
    case HideKind::Init:
      return s.kind == ShadowKind::Initialization && sig.type == spec.type;
    case HideKind::StaticInit:
      return s.kind == ShadowKind::StaticInitialization && sig.type == spec.type;
    case HideKind::WithinInit:
      return is_body_kind(s.kind) && s.enclosing.type == spec.type &&
             (s.enclosing.member == kInitMember || s.enclosing.member == kPreInitMember);
    case HideKind::WithinStaticInit:
      return is_body_kind(s.kind) && s.enclosing.type == spec.type &&
             s.enclosing.member == kStaticInitMember;
  }
  return false;
}

}  // namespace

std::optional<HideAttribution> hidden_by(const Shadow& s, std::span<const HideSpec> specs) {
  for (std::size_t i = 0; i < specs.size(); ++i) {
    for (HideKind k : specs[i].kinds) {
      if (spec_hides(specs[i], k, s)) return HideAttribution{i, k};
    }
  }
  return std::nullopt;
}

ShadowTable apply_hide_filter(const ShadowTable& table, std::span<const HideSpec> specs,
                              bool strip_hide) {
  if (strip_hide || specs.empty()) return table;
  std::vector<Shadow> kept;
  for (const auto& s : table.shadows()) {
    if (!hidden_by(s, specs)) kept.push_back(s);
  }
  return ShadowTable(std::move(kept));
}

std::vector<std::string> hidden_listing(const ShadowTable& table, std::span<const HideSpec> specs) {
  std::vector<std::string> out;
  for (const auto& s : table.shadows()) {
    auto attr = hidden_by(s, specs);
    if (!attr) continue;
    const HideSpec& spec = specs[attr->spec_index];
    std::string by = spec.label();
    by.insert(by.find(' '), std::string("(") + to_string(attr->kind) + ")");
    out.push_back("HIDDEN " + s.describe() + " @ " + s.loc.str() + " by " + by);
  }
  return out;
}

}  // namespace lom
