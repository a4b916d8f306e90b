#pragma once

// Auditing DSAL: `logs for Type: case <transition> (& guard)* log ID (with f...)? ... ;`
// plus the message catalog and the transformer to annotated MiniAspect.

#include <map>
#include <string>
#include <vector>

#include "lom/ast.hpp"

namespace lom {

enum class Transition { Start, Finish, Interrupt, Pause, Resume };

const char* to_string(Transition t);

struct AuditCase {
  Transition transition = Transition::Start;
  std::vector<std::string> guards;  // boolean fields, all must hold
  std::string message;              // catalog id
  std::vector<std::string> values;  // fields rendered into the template
  SourceLoc loc;
};

struct AuditCommand {
  std::string target;            // last segment of the qualified name
  std::string qualified_target;  // as written
  std::vector<AuditCase> cases;  // source order
  SourceLoc loc;
};

struct AuditModel {
  std::string path;
  std::vector<AuditCommand> commands;
};

AuditModel parse_audit(std::string_view text, const std::string& path);

/// Message id -> template with `{k}` placeholders.
using MessageCatalog = std::map<std::string, std::string>;

/// `ID = template` lines; blank lines and `#` comments ignored. Throws
/// ParseError on a malformed line or duplicate id.
MessageCatalog parse_messages(std::string_view text, const std::string& path);

/// Checks target types, guard and value fields, the transition methods,
/// message ids and placeholder ranges. Throws CompileError (stage "transform").
void validate_audit(const AuditModel& model, const Program& base, const MessageCatalog& catalog);

/// The method whose execution a transition is woven after.
std::string transition_method(Transition t);

/// MiniAspect source for aspect `Logs`.
std::string gen_audit_aspect(const AuditModel& model, const MessageCatalog& catalog, const Program& base);

}  // namespace lom
