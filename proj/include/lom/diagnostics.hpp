#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lom {

struct SourceLoc {
  std::string path;
  int line = 0;
  int column = 0;

  std::string str() const { return path + ":" + std::to_string(line); }
  friend bool operator==(const SourceLoc&, const SourceLoc&) = default;
  friend auto operator<=>(const SourceLoc&, const SourceLoc&) = default;
};

struct Diagnostic {
  SourceLoc loc;
  std::string message;

  std::string str() const;
};

/// Thrown by the MiniLang / MiniAspect / DSAL front-ends on malformed input.
class ParseError : public std::runtime_error {
 public:
  ParseError(SourceLoc loc, const std::string& message);
  const SourceLoc& loc() const { return loc_; }
  const std::string& detail() const { return detail_; }

 private:
  SourceLoc loc_;
  std::string detail_;
};

/// Any failure of a compile stage. `stage` names the pipeline step
/// ("registry", "transform", "parse", "resolve", "weave", "emit", "io").
class CompileError : public std::runtime_error {
 public:
  CompileError(std::string stage, std::vector<Diagnostic> diags);
  CompileError(std::string stage, SourceLoc loc, const std::string& message);

  const std::string& stage() const { return stage_; }
  const std::vector<Diagnostic>& diagnostics() const { return diags_; }

 private:
  std::string stage_;
  std::vector<Diagnostic> diags_;
};

}  // namespace lom
