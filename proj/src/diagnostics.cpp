#include "lom/diagnostics.hpp"

namespace lom {

namespace {

std::string render(const std::string& stage, const std::vector<Diagnostic>& diags) {
  std::string out;
  for (const auto& d : diags) {
    if (!out.empty()) out += '\n';
    out += "[" + stage + "] " + d.str();
  }
  return out;
}

}  // namespace

std::string Diagnostic::str() const {
  if (loc.path.empty()) return message;
  if (loc.line <= 0) return loc.path + ": " + message;
  return loc.path + ":" + std::to_string(loc.line) + ":" + std::to_string(loc.column) +
         ": " + message;
}

ParseError::ParseError(SourceLoc loc, const std::string& message)
    : std::runtime_error(Diagnostic{loc, message}.str()), loc_(std::move(loc)), detail_(message) {}

CompileError::CompileError(std::string stage, std::vector<Diagnostic> diags)
    : std::runtime_error(render(stage, diags)), stage_(std::move(stage)), diags_(std::move(diags)) {}

CompileError::CompileError(std::string stage, SourceLoc loc, const std::string& message)
    : CompileError(std::move(stage), std::vector<Diagnostic>{{std::move(loc), message}}) {}

}  // namespace lom
