#pragma once

// Join-point shadow model: extraction of static join-point locations from a
// compilation unit and @hide-driven suppression.

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "lom/ast.hpp"

namespace lom {

enum class ShadowKind {
  MethodExecution,
  MethodCall,
  FieldGet,
  FieldSet,
  PreInitialization,
  Initialization,
  StaticInitialization,
};

const char* to_string(ShadowKind k);

enum class Origin { Base, Generated };

using ShadowId = int;

/// Member names used for the implicit members that own initializer code.
inline constexpr const char* kPreInitMember = "<preinit>";
inline constexpr const char* kInitMember = "<init>";
inline constexpr const char* kStaticInitMember = "<clinit>";

/// What a shadow refers to. `member` is empty for the initialization kinds;
/// `arity` is -1 except for method kinds.
struct Signature {
  std::string type;
  std::string member;
  int arity = -1;

  std::string str() const;
  friend auto operator<=>(const Signature&, const Signature&) = default;
};

/// The declaration whose body lexically contains a shadow.
struct MemberRef {
  std::string type;
  std::string member;
  int arity = -1;

  friend auto operator<=>(const MemberRef&, const MemberRef&) = default;
};

struct Shadow {
  ShadowId id = -1;
  ShadowKind kind = ShadowKind::MethodExecution;
  Signature signature;
  MemberRef enclosing;
  SourceLoc loc;
  Origin origin = Origin::Base;
  const void* anchor = nullptr;  // AST node the runtime raises this join point from

  /// "<kind> <signature>", the text used by reports and traces.
  std::string describe() const;
};

/// Ordered shadows (source order: path, line, column) with kind and
/// signature indexes.
class ShadowTable {
 public:
  ShadowTable() = default;
  explicit ShadowTable(std::vector<Shadow> shadows);

  const std::vector<Shadow>& shadows() const { return shadows_; }
  std::size_t size() const { return shadows_.size(); }
  bool empty() const { return shadows_.empty(); }
  const Shadow* find(ShadowId id) const;
  bool contains(ShadowId id) const { return find(id) != nullptr; }
  std::vector<const Shadow*> by_kind(ShadowKind k) const;
  std::vector<const Shadow*> by_signature(const Signature& sig) const;
  std::set<ShadowId> ids() const;

  friend bool operator==(const ShadowTable& a, const ShadowTable& b) { return a.ids() == b.ids(); }

 private:
  std::vector<Shadow> shadows_;
  std::map<ShadowId, std::size_t> index_;
};

/// Walks every body in the unit. Per method: one execution shadow plus call /
/// get / set shadows in its body. Per type: pre-initialization and
/// initialization shadows, and static-initialization when a static block is
/// present. Advice bodies yield shadows but advice has no execution shadow.
ShadowTable extract_shadows(const CompilationUnit& unit);

// ---------------------------------------------------------------------------
// @hide metadata

enum class HideCategory { Field, Method, Type };

enum class HideKind {
  Set,
  Get,
  Call,
  Execution,
  Within,
  PreInit,
  Init,
  StaticInit,
  WithinInit,
  WithinStaticInit,
};

const char* to_string(HideKind k);

struct HideSpec {
  HideCategory category = HideCategory::Method;
  std::string type;    // declaring type
  std::string member;  // field / method / advice member name; empty for types
  int arity = -1;      // methods only
  std::set<HideKind> kinds;
  bool explicit_kinds = false;
  SourceLoc loc;

  /// "@hideMethod on Logs.audit/2" style label for diagnostics.
  std::string label() const;
};

/// Default kind sets when an annotation carries no argument list.
std::set<HideKind> default_hide_kinds(HideCategory c);

/// Interprets the @hide* annotation (if any) on one declaration. Throws
/// CompileError on a kind name that does not belong to the category.
std::optional<HideSpec> hide_spec_of(const std::vector<Annotation>& annotations,
                                     HideCategory category, const std::string& type,
                                     const std::string& member = {}, int arity = -1);

/// Every HideSpec declared anywhere in the unit, in declaration order.
std::vector<HideSpec> collect_hide_specs(const CompilationUnit& unit);

/// Which (spec, kind) pair suppresses a shadow, or nullopt if it stays visible.
struct HideAttribution {
  std::size_t spec_index = 0;
  HideKind kind = HideKind::Execution;
};
std::optional<HideAttribution> hidden_by(const Shadow& s, std::span<const HideSpec> specs);

/// Shadows remaining visible after suppression. strip_hide returns the input.
ShadowTable apply_hide_filter(const ShadowTable& table, std::span<const HideSpec> specs,
                              bool strip_hide);

/// `HIDDEN <kind> <signature> @ <path>:<line> by <spec>` lines, one per
/// suppressed shadow, in table order.
std::vector<std::string> hidden_listing(const ShadowTable& table, std::span<const HideSpec> specs);

}  // namespace lom
