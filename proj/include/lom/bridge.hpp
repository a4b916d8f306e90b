#pragma once

// Advice source handles (honoring @loc) and the advises / advised-by report.

#include <string>
#include <vector>

#include "lom/weaver.hpp"

namespace lom {

/// `<file>:<line>` from the advice's @loc when present, else the advice's
/// own `<path>:<line>`.
std::string advice_handle(const AdviceRef& advice);

/// The @loc module when present, else the aspect name.
std::string advice_module(const AdviceRef& advice);

struct RelationshipRecord {
  std::string advice;   // advice handle
  std::string module;
  std::string shadow;   // "<kind> <signature>"
  std::string at;       // shadow "<path>:<line>"
  std::string residue;  // rendered dynamic test, empty when none
  SourceLoc shadow_loc;

  friend bool operator==(const RelationshipRecord&, const RelationshipRecord&) = default;
};

struct RelationshipMap {
  std::vector<RelationshipRecord> advises;     // sorted by (advice, shadow location)
  std::vector<RelationshipRecord> advised_by;  // sorted by (shadow location, advice)
};

RelationshipMap build_relationship_map(const MatchTable& table, const ShadowTable& visible);

/// Deterministic JSON text (two-space indent, trailing newline).
std::string relationship_json(const RelationshipMap& map);

/// Writes relationship_json to `path`. Throws CompileError (stage "emit").
void emit_relationship_map(const RelationshipMap& map, const std::string& path);

}  // namespace lom
