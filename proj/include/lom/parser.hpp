#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lom/ast.hpp"
#include "lom/lexer.hpp"

namespace lom {

/// Recursive-descent parser over the shared token stream. The public entry
/// points below cover whole files; the DSAL front-ends reuse the expression
/// and block productions directly.
class Parser {
 public:
  Parser(std::string_view text, std::string path);

  // File-level productions.
  Program parse_program();
  AspectDecl parse_aspect_file();

  // Embeddable productions.
  ExprPtr parse_expr();
  Block parse_block();
  StmtPtr parse_statement();
  PointcutPtr parse_pointcut();
  std::vector<Annotation> parse_annotations();

  // Token stream access.
  const Token& peek(std::size_t ahead = 0) const;
  const Token& next();
  bool at_end() const { return peek().kind == TokenKind::End; }
  bool accept_punct(std::string_view p);
  bool accept_ident(std::string_view word);
  const Token& expect_punct(std::string_view p);
  const Token& expect_ident(std::string_view word);
  std::string expect_name(std::string_view what);
  [[noreturn]] void fail(const Token& at, const std::string& message) const;
  SourceLoc loc_of(const Token& t) const { return SourceLoc{path_, t.line, t.column}; }
  const std::string& path() const { return path_; }

 private:
  ClassDecl parse_class(std::vector<Annotation> anns);
  FieldDecl parse_field(std::vector<Annotation> anns, bool is_static);
  MethodDecl parse_method_rest(std::string name, SourceLoc loc, std::vector<Annotation> anns);
  AdviceDecl parse_advice(std::vector<Annotation> anns, int index);
  std::vector<std::string> parse_name_list_until(std::string_view terminator);

  ExprPtr parse_binary(int min_prec);
  ExprPtr parse_unary();
  ExprPtr parse_postfix();
  ExprPtr parse_primary();
  std::vector<ExprPtr> parse_args();
  Block parse_block_or_statement();

  PointcutPtr parse_pc_or();
  PointcutPtr parse_pc_and();
  PointcutPtr parse_pc_unary();
  PointcutPtr parse_pc_primitive();
  std::string parse_glob();

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::string path_;
};

/// Parses a MiniLang (.ml0) compilation unit. Detects syntax errors and
/// duplicate class / member names within the file.
Program parse_base(std::string_view text, const std::string& path);

/// Parses a MiniAspect (.ma0) file holding exactly one aspect.
AspectDecl parse_aspect(std::string_view text, const std::string& path);

/// Names usable as unqualified calls without a declaration.
bool is_builtin(std::string_view name);

/// Merges per-file programs; rejects class names declared twice.
Program merge_programs(std::vector<Program> parts);

/// Resolves every identifier in the unit: locals, fields of the enclosing
/// type, class names and builtins. Also records the statically resolved
/// declaring type of member accesses and calls ("?" when ambiguous).
/// Throws CompileError (stage "resolve") listing every unresolved name.
void resolve_names(Program& program, std::vector<AspectDecl*> aspects);

}  // namespace lom
