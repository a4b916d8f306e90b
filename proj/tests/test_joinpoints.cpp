#include <doctest.h>

#include <random>
#include <set>

#include "lom/joinpoints.hpp"
#include "support.hpp"

using namespace lom;
using lom::test::weave_sources;

namespace {

std::multiset<std::string> describe_all(const ShadowTable& t) {
  std::multiset<std::string> out;
  for (const auto& s : t.shadows()) out.insert(s.describe());
  return out;
}

std::vector<Annotation> annotations_of(const std::string& decl) {
  Program p = parse_base("class A { " + decl + " }", "h.ml0");
  const ClassDecl& c = p.classes[0];
  if (!c.fields.empty()) return c.fields[0].annotations;
  return c.methods[0].annotations;
}

}  // namespace

TEST_CASE("extract: empty method has only its execution shadow") {
  auto u = weave_sources("class A { def f() { } }");
  // A also gets pre_initialization and initialization shadows as a type.
  auto kinds = describe_all(u.all_shadows);
  CHECK(kinds.count("method_execution A.f/0") == 1);
  CHECK(u.all_shadows.by_kind(ShadowKind::MethodExecution).size() == 1);
  CHECK(u.all_shadows.by_kind(ShadowKind::MethodCall).empty());
  CHECK(u.all_shadows.by_kind(ShadowKind::FieldGet).empty());
  CHECK(u.all_shadows.by_kind(ShadowKind::FieldSet).empty());
}

TEST_CASE("extract: this.x = this.x + 1") {
  auto u = weave_sources("class A { var x = 0; def f() { this.x = this.x + 1; } }");
  std::multiset<std::string> body;
  for (const auto& s : u.all_shadows.shadows()) {
    if (s.enclosing.member == "f") body.insert(s.describe());
  }
  CHECK(body == std::multiset<std::string>{"method_execution A.f/0", "field_get A.x", "field_set A.x"});
}

TEST_CASE("extract: ported non-thread-safe bounded stack") {
  auto u = weave_sources(R"(
class BoundedStack {
  var buffer = null;
  var usedSlots = 0;
  static var instance = null;
  init(capacity) { buffer = make_list(capacity); instance = this; }
  def getInstance() { return instance; }
  def pop() {
    var result = buffer[usedSlots - 1];
    usedSlots = usedSlots - 1;
    buffer[usedSlots] = null;
    return result;
  }
  def push(obj) { buffer[usedSlots] = obj; usedSlots = usedSlots + 1; }
})");
  auto d = describe_all(u.all_shadows);
  for (const char* s : {"method_execution BoundedStack.push/1", "method_execution BoundedStack.pop/0",
                        "method_execution BoundedStack.getInstance/0", "field_get BoundedStack.buffer",
                        "field_set BoundedStack.buffer", "field_get BoundedStack.usedSlots",
                        "field_set BoundedStack.usedSlots", "pre_initialization BoundedStack",
                        "initialization BoundedStack"}) {
    CHECK_MESSAGE(d.count(s) >= 1, s);
  }
  // pop reads usedSlots three times (two indexes, one decrement) and writes it once.
  std::size_t gets = 0, sets = 0;
  for (const auto& s : u.all_shadows.shadows()) {
    if (s.enclosing.member != "pop" || s.signature.member != "usedSlots") continue;
    gets += s.kind == ShadowKind::FieldGet;
    sets += s.kind == ShadowKind::FieldSet;
  }
  CHECK(gets == 3);
  CHECK(sets == 1);
  // No static block, so no static_initialization shadow.
  CHECK(u.all_shadows.by_kind(ShadowKind::StaticInitialization).empty());
}

TEST_CASE("extract: ids are unique and order is source order") {
  auto u = weave_sources("class A { var x = 1; def g() { f(); } def f() { x = 2; } }\nclass B { static { print(1); } }");
  std::set<ShadowId> ids;
  SourceLoc prev;
  for (const auto& s : u.all_shadows.shadows()) {
    CHECK(ids.insert(s.id).second);
    CHECK(!(std::tie(s.loc.path, s.loc.line, s.loc.column) < std::tie(prev.path, prev.line, prev.column)));
    prev = s.loc;
  }
  CHECK(u.all_shadows.by_kind(ShadowKind::StaticInitialization).size() == 1);
  auto calls = u.all_shadows.by_kind(ShadowKind::MethodCall);
  REQUIRE(calls.size() == 1);
  CHECK(calls[0]->signature.str() == "A.f/0");
  CHECK(calls[0]->enclosing.member == "g");
}

TEST_CASE("extract: advice bodies yield shadows, advice has no execution shadow") {
  auto u = weave_sources("class A { def f() { } }",
                         {{"aspect L { before(): execution(A.f) { note(); } def note() { } }", "l.ma0"}});
  auto d = describe_all(u.all_shadows);
  CHECK(d.count("method_call L.note/0") == 1);
  CHECK(d.count("method_execution L.note/0") == 1);
  for (const auto& s : u.all_shadows.shadows()) {
    if (s.signature.member.rfind("advice#", 0) == 0) CHECK(s.kind != ShadowKind::MethodExecution);
  }
}

TEST_CASE("hide_spec_of") {
  SUBCASE("bare @hideMethod") {
    auto spec = hide_spec_of(annotations_of("@hideMethod def f() { }"), HideCategory::Method, "A", "f", 0);
    REQUIRE(spec);
    CHECK(spec->kinds == std::set<HideKind>{HideKind::Call, HideKind::Execution, HideKind::Within});
    CHECK_FALSE(spec->explicit_kinds);
  }
  SUBCASE("@hideField(get)") {
    auto spec = hide_spec_of(annotations_of("@hideField(get) var x = 0;"), HideCategory::Field, "A", "x");
    REQUIRE(spec);
    CHECK(spec->kinds == std::set<HideKind>{HideKind::Get});
    CHECK(spec->explicit_kinds);
  }
  SUBCASE("@hideMethod() hides nothing") {
    auto spec = hide_spec_of(annotations_of("@hideMethod() def f() { }"), HideCategory::Method, "A", "f", 0);
    REQUIRE(spec);
    CHECK(spec->kinds.empty());
  }
  SUBCASE("no annotation") {
    CHECK_FALSE(hide_spec_of(annotations_of("def f() { }"), HideCategory::Method, "A", "f", 0));
  }
  SUBCASE("kind from another category") {
    CHECK_THROWS_AS(hide_spec_of(annotations_of("@hideField(call) var x = 0;"), HideCategory::Field, "A", "x"),
                    CompileError);
  }
  SUBCASE("defaults") {
    CHECK(default_hide_kinds(HideCategory::Field) == std::set<HideKind>{HideKind::Set, HideKind::Get});
    CHECK(default_hide_kinds(HideCategory::Type) ==
          std::set<HideKind>{HideKind::PreInit, HideKind::Init, HideKind::StaticInit, HideKind::WithinInit,
                             HideKind::WithinStaticInit});
  }
}

TEST_CASE("apply_hide_filter: hidden audit helper leaves no call shadow in advice") {
  auto u = weave_sources(R"(
class CopyJob { var nbFiles = 2; def start() { } })",
                         {{R"(@hideType
aspect Logs {
  @hideMethod
  def audit(template, values) { emit_audit(format_list(template, values)); }
  after(): execution(CopyJob.start) && this(CopyJob) { audit("n={0}", [thisObject.nbFiles]); }
})",
                           "gen/jobs_audit.ma0"}});
  CHECK(describe_all(u.all_shadows).count("method_call Logs.audit/2") == 1);
  for (const auto& s : u.visible.shadows()) CHECK(s.signature.str() != "Logs.audit/2");
  // The advice body's own field read is not covered by @hideMethod on audit.
  CHECK(describe_all(u.visible).count("field_get CopyJob.nbFiles") == 1);
}

TEST_CASE("apply_hide_filter: identity, strip, idempotence") {
  auto u = weave_sources("@hideType class A { @hideField var x = 0; @hideMethod def f() { x = 1; } def g() { f(); } }");
  auto specs = u.hide_specs;
  REQUIRE(specs.size() == 3);
  CHECK(apply_hide_filter(u.all_shadows, {}, false) == u.all_shadows);
  CHECK(apply_hide_filter(u.all_shadows, specs, true) == u.all_shadows);
  auto once = apply_hide_filter(u.all_shadows, specs, false);
  CHECK(apply_hide_filter(once, specs, false) == once);
  CHECK(describe_all(once) == std::multiset<std::string>{"method_execution A.g/0"});
}

TEST_CASE("hidden_listing attributes every suppressed shadow once") {
  auto u = weave_sources("class A { @hideField(set) var x = 0; @hideMethod(call) def f() { x = 1; } def g() { f(); } }");
  auto lines = hidden_listing(u.all_shadows, u.hide_specs);
  CHECK(lines.size() == u.all_shadows.size() - u.visible.size());
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "HIDDEN field_set A.x @ t.ml0:1 by @hideField(set) on A.x");
  CHECK(lines[1] == "HIDDEN method_call A.f/0 @ t.ml0:1 by @hideMethod(call) on A.f/0");
}

// Random programs with random hide annotations. Oracle: brute-force
// predicate per shadow written independently from the filter.
TEST_CASE("apply_hide_filter: randomized against brute force") {
  std::mt19937 rng(20261016);
  const char* field_opts[] = {"", "@hideField ", "@hideField(get) ", "@hideField(set) ", "@hideField() "};
  const char* method_opts[] = {"", "@hideMethod ", "@hideMethod(call) ", "@hideMethod(execution) ",
                               "@hideMethod(within) ", "@hideMethod(call, within) "};
  for (int iter = 0; iter < 50; ++iter) {
    std::string src;
    struct FieldAnn { std::string cls, name, ann; };
    struct MethodAnn { std::string cls, name, ann; };
    std::vector<FieldAnn> fanns;
    std::vector<MethodAnn> manns;
    for (int c = 0; c < 2; ++c) {
      std::string cls = c ? "B" : "A";
      src += "class " + cls + " {\n";
      for (int f = 0; f < 2; ++f) {
        std::string fa = field_opts[rng() % 5];
        std::string fname = cls + "f" + std::to_string(f);
        fanns.push_back({cls, fname, fa});
        src += "  " + fa + "var " + fname + " = 0;\n";
      }
      for (int m = 0; m < 3; ++m) {
        std::string ma = method_opts[rng() % 6];
        std::string mname = "m" + std::to_string(m);
        manns.push_back({cls, mname, ma});
        std::string body;
        for (int k = 0; k < 3; ++k) {
          switch (rng() % 3) {
            case 0: body += cls + "f" + std::to_string(rng() % 2) + " = 1; "; break;
            case 1: body += "print(" + cls + "f" + std::to_string(rng() % 2) + "); "; break;
            case 2: body += "new " + std::string(rng() % 2 ? "A" : "B") + "().m" + std::to_string(rng() % 3) + "(); "; break;
          }
        }
        src += "  " + ma + "def " + mname + "() { " + body + "}\n";
      }
      src += "}\n";
    }
    auto u = weave_sources(src);
    auto kinds_of = [](const std::string& ann, bool field) -> std::set<std::string> {
      if (ann.empty()) return {};
      auto lp = ann.find('(');
      if (lp == std::string::npos) {
        if (field) return {"get", "set"};
        return {"call", "execution", "within"};
      }
      std::set<std::string> out;
      std::string inner = ann.substr(lp + 1, ann.find(')') - lp - 1);
      std::size_t pos = 0;
      while (pos < inner.size()) {
        auto comma = inner.find(',', pos);
        std::string k = inner.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        k.erase(0, k.find_first_not_of(' '));
        if (!k.empty()) out.insert(k);
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
      return out;
    };
    std::set<ShadowId> expected;
    for (const auto& s : u.all_shadows.shadows()) {
      bool hidden = false;
      for (const auto& fa : fanns) {
        auto k = kinds_of(fa.ann, true);
        if (s.signature.type == fa.cls && s.signature.member == fa.name) {
          hidden |= (s.kind == ShadowKind::FieldGet && k.count("get")) || (s.kind == ShadowKind::FieldSet && k.count("set"));
        }
      }
      for (const auto& ma : manns) {
        auto k = kinds_of(ma.ann, false);
        bool targets = s.signature.type == ma.cls && s.signature.member == ma.name;
        hidden |= targets && s.kind == ShadowKind::MethodExecution && k.count("execution");
        hidden |= targets && s.kind == ShadowKind::MethodCall && k.count("call");
        bool inside = s.enclosing.type == ma.cls && s.enclosing.member == ma.name;
        hidden |= inside && s.kind != ShadowKind::MethodExecution && k.count("within");
      }
      if (!hidden) expected.insert(s.id);
    }
    CHECK(u.visible.ids() == expected);
    // Monotonicity and idempotence on the same input.
    for (auto id : u.visible.ids()) CHECK(u.all_shadows.contains(id));
    CHECK(apply_hide_filter(u.visible, u.hide_specs, false) == u.visible);
  }
}
