#pragma once

// COOL-style coordination DSAL: parser, validation against the base program,
// the entry predicate, and the transformer to annotated MiniAspect.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lom/ast.hpp"
#include "lom/interpreter.hpp"

namespace lom {

/// `push(x)` (arity 1), `pop()` (arity 0) or bare `push` (any arity).
struct MethodRef {
  std::string name;
  std::optional<int> arity;
  SourceLoc loc;

  std::string str() const;
};

struct ExclusionSet {
  std::vector<MethodRef> methods;
  SourceLoc loc;
};

struct CoolVar {
  std::string name;
  ExprPtr init;
  SourceLoc loc;
};

struct MethodAdditions {
  MethodRef method;
  ExprPtr requires_expr;  // null when absent
  std::optional<Block> on_entry;
  std::optional<Block> on_exit;
  SourceLoc loc;
};

struct CoordinatorDecl {
  std::string target;            // last segment of the (possibly dotted) name
  std::string qualified_target;  // as written
  SourceLoc loc;
  std::string path;
  std::vector<ExclusionSet> selfex;
  std::vector<ExclusionSet> mutex;
  std::vector<CoolVar> conditions;
  std::vector<CoolVar> fields;
  std::vector<MethodAdditions> additions;

  const MethodAdditions* additions_for(const std::string& method) const;
  /// Every method named anywhere, in order of first mention.
  std::vector<std::string> coordinated_methods() const;
};

/// Parses one `.cool` file holding one coordinator.
CoordinatorDecl parse_cool(std::string_view text, const std::string& path);

/// Checks the coordinator against the base program: the target class and
/// every named method exist, and every free name in coordinator code is a
/// condition, coordinator field, local or target field. Throws CompileError
/// (stage "transform") with one diagnostic per problem.
void validate_coordinator(const CoordinatorDecl& decl, const Program& base);

/// Values visible to a requires expression: busy counts per coordinated
/// method plus conditions, coordinator fields and target fields by name.
struct CoordStateView {
  std::map<std::string, int> busy;
  std::map<std::string, Value> vars;
};

/// True iff selfex, mutex and the method's requires clause all allow entry.
bool can_enter(const CoordinatorDecl& decl, const CoordStateView& state, const std::string& method);

/// MiniAspect source for aspect `Coord_<Target>`. `source_path` is written
/// into every @loc.
std::string gen_cool_aspect(const CoordinatorDecl& decl, const Program& base);

}  // namespace lom
