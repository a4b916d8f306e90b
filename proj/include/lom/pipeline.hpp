#pragma once

// Transformation plugins, the dsals.txt registry and the compiler driver.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lom/bridge.hpp"
#include "lom/weaver.hpp"

namespace lom {

/// What a transformer may consult besides its input file.
struct TransformContext {
  const Program* base = nullptr;       // merged base program (not yet resolved)
  std::optional<std::string> messages; // audit catalog override
};

/// Produces MiniAspect source for one DSAL file.
using GenerateFn = std::function<std::string(const std::string& input, const TransformContext& ctx)>;

struct TransformationDescriptor {
  std::string name;
  std::string extension;  // without the dot
  GenerateFn generate;

  /// Writes `<gen_dir>/<stem>_<name>.ma0` and returns its path.
  std::string transform(const std::string& input, const std::string& gen_dir, const TransformContext& ctx) const;
};

using TransformerCatalog = std::map<std::string, TransformationDescriptor>;

/// The built-in transformers: cool (.cool) and audit (.audit).
const TransformerCatalog& builtin_catalog();

/// One name per non-blank, non-comment line. An absent file is an empty
/// registry. Unknown names raise CompileError (stage "registry").
std::vector<TransformationDescriptor> load_registry(const std::string& path,
                                                    const TransformerCatalog& catalog = builtin_catalog());

struct EffectiveInput {
  std::string path;    // what gets compiled
  std::string origin;  // DSAL file it was generated from; empty for pass-through
  std::string dsal;    // transformation name; empty for pass-through
};

/// Replaces each input whose extension is registered by its generated
/// aspect file; first matching descriptor wins; order preserved.
std::vector<EffectiveInput> transform_inputs(const std::vector<std::string>& inputs,
                                             const std::vector<TransformationDescriptor>& registry,
                                             const std::string& gen_dir, const TransformContext& ctx);

struct CompileOptions {
  std::string dsals = "dsals.txt";
  std::string gen_dir = "gen";
  bool strip_hide = false;
  std::optional<std::string> messages;
  std::optional<std::string> relationships_out;
  const TransformerCatalog* catalog = nullptr;  // null: builtin_catalog()
};

struct CompileArtifacts {
  std::vector<EffectiveInput> inputs;
  std::vector<EffectiveInput> generated;  // subset of inputs with an origin
  std::shared_ptr<Program> program;
  std::vector<std::shared_ptr<AspectDecl>> aspects;
  WovenUnit woven;
  RelationshipMap relationships;
  std::optional<std::string> relationships_path;
};

/// load_registry -> parse base -> transform_inputs -> parse aspects ->
/// resolve -> extract / hide / match -> relationships. Throws CompileError.
CompileArtifacts compile(const std::vector<std::string>& paths, const CompileOptions& options);

/// Whole-file read; throws CompileError (stage "io") when missing.
std::string read_source(const std::string& path);

}  // namespace lom
