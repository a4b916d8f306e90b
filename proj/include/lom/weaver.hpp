#pragma once

// Pointcut matching against shadows, advice ordering, the match table and the
// woven unit handed to the interpreter.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lom/ast.hpp"
#include "lom/joinpoints.hpp"

namespace lom {

/// `*` matches any (possibly empty) run of characters.
bool glob_match(std::string_view pattern, std::string_view text);

struct AdviceRef {
  const AspectDecl* aspect = nullptr;
  const AdviceDecl* advice = nullptr;

  /// "Aspect.advice#i".
  std::string label() const;
  friend bool operator==(const AdviceRef&, const AdviceRef&) = default;
};

/// Three-valued match result. `residue` null means "matches unconditionally".
struct MatchOutcome {
  bool matched = false;
  PointcutPtr residue;

  static MatchOutcome no() { return {}; }
  static MatchOutcome yes(PointcutPtr r = nullptr) { return {true, std::move(r)}; }
};

MatchOutcome match(const PointcutPtr& pc, const Shadow& shadow);

// ---------------------------------------------------------------------------
// Ordering

enum class Precedence { Precedes, Follows };

/// Concatenation of every `precedence` statement, aspects in compilation
/// order, statements in file order. Later duplicates are ignored.
std::vector<std::string> collect_precedence(const std::vector<const AspectDecl*>& aspects);

/// Strict total order on advice. Sort key: (@order value, unordered last;
/// rank in the precedence list, unlisted last; aspect name; declaration index).
Precedence compare_advice(const AdviceRef& a, const AdviceRef& b,
                          const std::vector<std::string>& precedence);

// ---------------------------------------------------------------------------
// Match table

struct MatchEntry {
  AdviceRef advice;
  PointcutPtr residue;  // null: no dynamic test
};

/// Visible shadow id -> matching advice, highest precedence first.
using MatchTable = std::map<ShadowId, std::vector<MatchEntry>>;

MatchTable build_match_table(const std::vector<const AspectDecl*>& aspects, const ShadowTable& visible,
                             const std::vector<std::string>& precedence);

struct AdviceSequence {
  std::vector<MatchEntry> before;  // precedence order
  std::vector<MatchEntry> after;   // reverse precedence order
};

AdviceSequence advice_sequence_at(ShadowId shadow, const MatchTable& table);

/// Entries of `table` whose advice belongs to `aspect`, as comparable
/// (shadow, advice label, residue text) triples.
std::vector<std::tuple<ShadowId, std::string, std::string>> restrict_to_aspect(
    const MatchTable& table, const std::string& aspect);

// ---------------------------------------------------------------------------
// cflow

/// One scope per cflow(...) node in any advice pointcut. For each visible
/// shadow, the scopes whose inner pointcut matches it (with residue).
struct CflowTable {
  std::vector<PointcutPtr> scopes;  // inner pointcuts, by scope id
  std::map<const Pointcut*, int> scope_of;
  std::map<ShadowId, std::vector<std::pair<int, PointcutPtr>>> entries;
};

CflowTable build_cflow_table(const std::vector<const AspectDecl*>& aspects, const ShadowTable& visible);

/// Per-logical-thread stacks of entered cflow scopes.
class CflowStacks {
 public:
  void push(int thread, int scope) { stacks_[thread].push_back(scope); }
  void pop(int thread, std::size_t n);
  bool active(int thread, int scope) const;
  std::size_t depth(int thread) const;

 private:
  std::map<int, std::vector<int>> stacks_;
};

bool cflow_active(const CflowStacks& stacks, int thread, int scope);

/// Runtime facts a residue is evaluated against.
class DynamicContext {
 public:
  virtual ~DynamicContext() = default;
  virtual std::optional<std::string> this_class() const = 0;
  virtual std::optional<std::string> target_class() const = 0;
  virtual bool arg_matches(int index, const ArgLiteral& lit) const = 0;
  virtual bool cflow_active(int scope) const = 0;
};

bool eval_residue(const Pointcut& residue, const DynamicContext& ctx, const CflowTable& cflow);

// ---------------------------------------------------------------------------
// Woven unit

struct WovenUnit {
  std::shared_ptr<const Program> program;
  std::vector<std::shared_ptr<const AspectDecl>> aspect_storage;
  std::vector<const AspectDecl*> aspects;
  ShadowTable all_shadows;
  ShadowTable visible;
  std::vector<HideSpec> hide_specs;
  std::vector<std::string> precedence;
  MatchTable matches;
  CflowTable cflow;
  std::map<std::pair<const void*, ShadowKind>, ShadowId> anchors;  // visible shadows only

  CompilationUnit unit() const { return {program.get(), aspects}; }
  /// The visible shadow raised from `anchor`, or null when hidden / absent.
  const Shadow* shadow_at(const void* anchor, ShadowKind kind) const;
};

/// Extract, hide-filter, match. Program and aspects must already be resolved.
WovenUnit weave(std::shared_ptr<const Program> program,
                std::vector<std::shared_ptr<const AspectDecl>> aspects, bool strip_hide);

}  // namespace lom
