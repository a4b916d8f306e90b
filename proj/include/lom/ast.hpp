#pragma once

// Syntax trees shared by the MiniLang base language, the MiniAspect aspect
// language and the DSAL front-ends that embed MiniLang expressions.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lom/diagnostics.hpp"

namespace lom {

// ---------------------------------------------------------------------------
// Expressions and statements

enum class ExprKind {
  IntLit,
  BoolLit,
  StringLit,
  NullLit,
  ListLit,
  Name,
  This,
  Member,      // operands[0].text
  Index,       // operands[0][operands[1]]
  MethodCall,  // receiver.text(args); receiver == nullptr means implicit `this`
  BuiltinCall, // text(args)
  New,         // new text(args)
  Spawn,       // spawn <MethodCall>
  Unary,
  Binary,
};

/// How a bare identifier was resolved. Filled in by the resolver.
enum class NameRef { Unresolved, Local, Field, StaticField, Class };

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  ExprKind kind = ExprKind::NullLit;
  SourceLoc loc;
  std::int64_t int_value = 0;
  bool bool_value = false;
  std::string text;

  // Member / MethodCall / Index / Unary / Binary / Spawn: receiver or operands.
  ExprPtr receiver;
  std::vector<ExprPtr> args;

  // Resolution results.
  NameRef ref = NameRef::Unresolved;
  std::string owner;  // Name:Field -> declaring type; Member/MethodCall -> static target type

  Expr() = default;
  Expr(ExprKind k, SourceLoc l) : kind(k), loc(std::move(l)) {}
};

enum class StmtKind { VarDecl, Assign, If, While, Return, ExprStmt };

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;
using Block = std::vector<StmtPtr>;

struct Stmt {
  StmtKind kind = StmtKind::ExprStmt;
  SourceLoc loc;
  std::string name;  // VarDecl
  ExprPtr target;    // Assign lvalue
  ExprPtr value;     // initializer / rhs / condition / return value / expression
  Block body;
  Block else_body;

  Stmt() = default;
  Stmt(StmtKind k, SourceLoc l) : kind(k), loc(std::move(l)) {}
};

ExprPtr clone(const Expr& e);
Block clone(const Block& b);

// ---------------------------------------------------------------------------
// Annotations

struct AnnotationArg {
  enum class Kind { Ident, String, Number };
  std::string key;  // empty for positional arguments
  Kind kind = Kind::Ident;
  std::string text;
  double number = 0;
  SourceLoc loc;
};

struct Annotation {
  std::string name;  // without '@'
  SourceLoc loc;
  bool has_parens = false;
  std::vector<AnnotationArg> args;
};

const Annotation* find_annotation(const std::vector<Annotation>& anns, std::string_view name);

// ---------------------------------------------------------------------------
// Declarations

struct FieldDecl {
  std::string name;
  ExprPtr init;
  bool is_static = false;
  SourceLoc loc;
  std::vector<Annotation> annotations;
};

struct MethodDecl {
  std::string name;
  std::vector<std::string> params;
  Block body;
  SourceLoc loc;
  std::vector<Annotation> annotations;

  int arity() const { return static_cast<int>(params.size()); }
};

struct ClassDecl {
  std::string name;
  SourceLoc loc;
  std::vector<Annotation> annotations;
  std::vector<FieldDecl> fields;
  std::vector<MethodDecl> methods;
  std::optional<MethodDecl> ctor;  // `init(...) { ... }`
  std::optional<Block> static_init;
  SourceLoc static_loc;

  const FieldDecl* find_field(std::string_view n) const;
  const MethodDecl* find_method(std::string_view n) const;
};

struct Program {
  std::vector<ClassDecl> classes;

  const ClassDecl* find_class(std::string_view n) const;
};

// ---------------------------------------------------------------------------
// Pointcuts

enum class PointcutKind {
  Execution,
  Call,
  Get,
  Set,
  PreInitialization,
  Initialization,
  StaticInitialization,
  Within,
  This,
  Target,
  Args,
  Cflow,
  And,
  Or,
  Not,
};

/// `Type.member` with `*` wildcards in either segment. A bare name means `*.name`.
struct NamePattern {
  std::string type = "*";
  std::string member = "*";
};

struct ArgLiteral {
  enum class Kind { Wildcard, Int, Bool, String, Null };
  Kind kind = Kind::Wildcard;
  std::int64_t int_value = 0;
  bool bool_value = false;
  std::string string_value;
};

struct Pointcut;
using PointcutPtr = std::shared_ptr<const Pointcut>;

struct Pointcut {
  PointcutKind kind = PointcutKind::Execution;
  NamePattern pattern;     // kinded primitives
  std::string type_name;   // within / this / target / *initialization
  int arg_index = 0;       // args
  ArgLiteral literal;      // args
  PointcutPtr left;        // And/Or/Not/Cflow operand
  PointcutPtr right;       // And/Or
  SourceLoc loc;
};

PointcutPtr make_and(PointcutPtr a, PointcutPtr b);
PointcutPtr make_or(PointcutPtr a, PointcutPtr b);
PointcutPtr make_not(PointcutPtr a);

/// Rendered back to MiniAspect pointcut syntax.
std::string to_string(const Pointcut& pc);

// ---------------------------------------------------------------------------
// Aspects

enum class AdviceKind { Before, After };

/// Source location an advice reports instead of its own (the `@loc` annotation).
struct SourceBridge {
  std::string file;
  int line = 1;
  std::string module;
};

struct AdviceDecl {
  AdviceKind kind = AdviceKind::Before;
  PointcutPtr pointcut;
  Block body;
  int index = 0;  // declaration index within the aspect
  std::optional<double> order;
  std::optional<SourceBridge> bridge;
  SourceLoc loc;
  std::vector<Annotation> annotations;

  /// Member name used for shadows enclosed by this advice body.
  std::string member_name() const { return "advice#" + std::to_string(index); }
};

struct AspectDecl {
  std::string name;
  SourceLoc loc;
  std::vector<Annotation> annotations;
  std::vector<FieldDecl> fields;
  std::vector<MethodDecl> methods;
  std::vector<AdviceDecl> advice;
  std::vector<std::string> precedence;  // `precedence A, B;` statements, in order
  std::string path;
  bool generated = false;

  const FieldDecl* find_field(std::string_view n) const;
  const MethodDecl* find_method(std::string_view n) const;
};

/// Everything a compilation sees: one merged base program plus aspects.
struct CompilationUnit {
  const Program* program = nullptr;
  std::vector<const AspectDecl*> aspects;
};

const char* to_string(AdviceKind k);

}  // namespace lom
