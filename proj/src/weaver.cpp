#include "lom/weaver.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <tuple>

namespace lom {

bool glob_match(std::string_view pattern, std::string_view text) {
  // Iterative wildcard match with single-star backtracking.
  std::size_t p = 0, t = 0, star = std::string_view::npos, mark = 0;
  while (t < text.size()) {
    if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = t;
    } else if (p < pattern.size() && pattern[p] == text[t]) {
      ++p;
      ++t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

std::string AdviceRef::label() const {
  return (aspect ? aspect->name : std::string("?")) + "." + (advice ? advice->member_name() : "?");
}

// ---------------------------------------------------------------------------
// match

namespace {

bool pattern_matches(const NamePattern& p, const Signature& sig) {
  return glob_match(p.type, sig.type) && glob_match(p.member, sig.member);
}

bool kinded(PointcutKind pk, ShadowKind sk) {
  switch (pk) {
    case PointcutKind::Execution: return sk == ShadowKind::MethodExecution;
    case PointcutKind::Call: return sk == ShadowKind::MethodCall;
    case PointcutKind::Get: return sk == ShadowKind::FieldGet;
    case PointcutKind::Set: return sk == ShadowKind::FieldSet;
    case PointcutKind::PreInitialization: return sk == ShadowKind::PreInitialization;
    case PointcutKind::Initialization: return sk == ShadowKind::Initialization;
    case PointcutKind::StaticInitialization: return sk == ShadowKind::StaticInitialization;
    default: return false;
  }
}

}  // namespace

MatchOutcome match(const PointcutPtr& pc, const Shadow& s) {
  switch (pc->kind) {
    case PointcutKind::Execution:
    case PointcutKind::Call:
    case PointcutKind::Get:
    case PointcutKind::Set:
      return kinded(pc->kind, s.kind) && pattern_matches(pc->pattern, s.signature) ? MatchOutcome::yes()
                                                                                   : MatchOutcome::no();
    case PointcutKind::PreInitialization:
    case PointcutKind::Initialization:
    case PointcutKind::StaticInitialization:
      return kinded(pc->kind, s.kind) && glob_match(pc->type_name, s.signature.type) ? MatchOutcome::yes()
                                                                                      : MatchOutcome::no();
    case PointcutKind::Within:
      return glob_match(pc->type_name, s.enclosing.type) ? MatchOutcome::yes() : MatchOutcome::no();
    case PointcutKind::This:
    case PointcutKind::Target:
    case PointcutKind::Args:
    case PointcutKind::Cflow:
      return MatchOutcome::yes(pc);
    case PointcutKind::And: {
      auto l = match(pc->left, s);
      if (!l.matched) return l;
      auto r = match(pc->right, s);
      if (!r.matched) return r;
      if (!l.residue) return r;
      if (!r.residue) return l;
      return MatchOutcome::yes(make_and(l.residue, r.residue));
    }
    case PointcutKind::Or: {
      auto l = match(pc->left, s);
      auto r = match(pc->right, s);
      if (!l.matched) return r;
      if (!r.matched) return l;
      if (!l.residue || !r.residue) return MatchOutcome::yes();
      return MatchOutcome::yes(make_or(l.residue, r.residue));
    }
    case PointcutKind::Not: {
      auto inner = match(pc->left, s);
      if (!inner.matched) return MatchOutcome::yes();
      if (!inner.residue) return MatchOutcome::no();
      return MatchOutcome::yes(make_not(inner.residue));
    }
  }
  return MatchOutcome::no();
}

// ---------------------------------------------------------------------------
// Ordering

std::vector<std::string> collect_precedence(const std::vector<const AspectDecl*>& aspects) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const AspectDecl* a : aspects) {
    for (const auto& name : a->precedence) {
      if (seen.insert(name).second) out.push_back(name);
    }
  }
  return out;
}

namespace {

auto sort_key(const AdviceRef& r, const std::vector<std::string>& precedence) {
  double order = r.advice->order ? *r.advice->order : std::numeric_limits<double>::infinity();
  auto it = std::find(precedence.begin(), precedence.end(), r.aspect->name);
  std::size_t rank = static_cast<std::size_t>(it - precedence.begin());
  return std::make_tuple(order, rank, r.aspect->name, r.advice->index);
}

}  // namespace

Precedence compare_advice(const AdviceRef& a, const AdviceRef& b, const std::vector<std::string>& precedence) {
  return sort_key(a, precedence) < sort_key(b, precedence) ? Precedence::Precedes : Precedence::Follows;
}

// ---------------------------------------------------------------------------
// Match table

MatchTable build_match_table(const std::vector<const AspectDecl*>& aspects, const ShadowTable& visible,
                             const std::vector<std::string>& precedence) {
  MatchTable table;
  for (const auto& s : visible.shadows()) {
    std::vector<MatchEntry> entries;
    for (const AspectDecl* a : aspects) {
      for (const auto& adv : a->advice) {
        auto m = match(adv.pointcut, s);
        if (m.matched) entries.push_back({AdviceRef{a, &adv}, m.residue});
      }
    }
    if (entries.empty()) continue;
    std::sort(entries.begin(), entries.end(), [&](const MatchEntry& x, const MatchEntry& y) {
      return compare_advice(x.advice, y.advice, precedence) == Precedence::Precedes;
    });
    table.emplace(s.id, std::move(entries));
  }
  return table;
}

AdviceSequence advice_sequence_at(ShadowId shadow, const MatchTable& table) {
  AdviceSequence seq;
  auto it = table.find(shadow);
  if (it == table.end()) return seq;
  for (const auto& e : it->second) {
    (e.advice.advice->kind == AdviceKind::Before ? seq.before : seq.after).push_back(e);
  }
  std::reverse(seq.after.begin(), seq.after.end());
  return seq;
}

std::vector<std::tuple<ShadowId, std::string, std::string>> restrict_to_aspect(const MatchTable& table,
                                                                               const std::string& aspect) {
  std::vector<std::tuple<ShadowId, std::string, std::string>> out;
  for (const auto& [id, entries] : table) {
    for (const auto& e : entries) {
      if (e.advice.aspect->name != aspect) continue;
      out.emplace_back(id, e.advice.label(), e.residue ? to_string(*e.residue) : "");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// cflow

namespace {

void collect_cflow(const PointcutPtr& pc, CflowTable& table) {
  if (!pc) return;
  if (pc->kind == PointcutKind::Cflow && !table.scope_of.count(pc.get())) {
    table.scope_of[pc.get()] = static_cast<int>(table.scopes.size());
    table.scopes.push_back(pc->left);
  }
  collect_cflow(pc->left, table);
  collect_cflow(pc->right, table);
}

}  // namespace

CflowTable build_cflow_table(const std::vector<const AspectDecl*>& aspects, const ShadowTable& visible) {
  CflowTable table;
  for (const AspectDecl* a : aspects) {
    for (const auto& adv : a->advice) collect_cflow(adv.pointcut, table);
  }
  for (const auto& s : visible.shadows()) {
    for (std::size_t i = 0; i < table.scopes.size(); ++i) {
      auto m = match(table.scopes[i], s);
      if (m.matched) table.entries[s.id].emplace_back(static_cast<int>(i), m.residue);
    }
  }
  return table;
}

void CflowStacks::pop(int thread, std::size_t n) {
  auto& st = stacks_[thread];
  st.resize(st.size() >= n ? st.size() - n : 0);
}

bool CflowStacks::active(int thread, int scope) const {
  auto it = stacks_.find(thread);
  if (it == stacks_.end()) return false;
  return std::find(it->second.begin(), it->second.end(), scope) != it->second.end();
}

std::size_t CflowStacks::depth(int thread) const {
  auto it = stacks_.find(thread);
  return it == stacks_.end() ? 0 : it->second.size();
}

bool cflow_active(const CflowStacks& stacks, int thread, int scope) { return stacks.active(thread, scope); }

bool eval_residue(const Pointcut& pc, const DynamicContext& ctx, const CflowTable& cflow) {
  switch (pc.kind) {
    case PointcutKind::This: {
      auto c = ctx.this_class();
      return c && glob_match(pc.type_name, *c);
    }
    case PointcutKind::Target: {
      auto c = ctx.target_class();
      return c && glob_match(pc.type_name, *c);
    }
    case PointcutKind::Args: return ctx.arg_matches(pc.arg_index, pc.literal);
    case PointcutKind::Cflow: {
      auto it = cflow.scope_of.find(&pc);
      return it != cflow.scope_of.end() && ctx.cflow_active(it->second);
    }
    case PointcutKind::And: return eval_residue(*pc.left, ctx, cflow) && eval_residue(*pc.right, ctx, cflow);
    case PointcutKind::Or: return eval_residue(*pc.left, ctx, cflow) || eval_residue(*pc.right, ctx, cflow);
    case PointcutKind::Not: return !eval_residue(*pc.left, ctx, cflow);
    default:
      // Static primitives never survive into a residue.
      return true;
  }
}

// ---------------------------------------------------------------------------
// Woven unit

const Shadow* WovenUnit::shadow_at(const void* anchor, ShadowKind kind) const {
  auto it = anchors.find({anchor, kind});
  return it == anchors.end() ? nullptr : visible.find(it->second);
}

WovenUnit weave(std::shared_ptr<const Program> program, std::vector<std::shared_ptr<const AspectDecl>> aspects,
                bool strip_hide) {
  WovenUnit w;
  w.program = std::move(program);
  w.aspect_storage = std::move(aspects);
  for (const auto& a : w.aspect_storage) w.aspects.push_back(a.get());
  CompilationUnit unit = w.unit();
  w.all_shadows = extract_shadows(unit);
  w.hide_specs = collect_hide_specs(unit);
  w.visible = apply_hide_filter(w.all_shadows, w.hide_specs, strip_hide);
  w.precedence = collect_precedence(w.aspects);
  w.matches = build_match_table(w.aspects, w.visible, w.precedence);
  w.cflow = build_cflow_table(w.aspects, w.visible);
  for (const auto& s : w.visible.shadows()) w.anchors[{s.anchor, s.kind}] = s.id;
  return w;
}

}  // namespace lom
