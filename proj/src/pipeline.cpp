#include "lom/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lom/audit.hpp"
#include "lom/cool.hpp"
#include "lom/parser.hpp"

namespace fs = std::filesystem;

namespace lom {

std::string read_source(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in || fs::is_directory(path)) throw CompileError("io", SourceLoc{path, 0, 0}, "file not found");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::string extension_of(const std::string& path) {
  std::string ext = fs::path(path).extension().string();
  return ext.empty() ? ext : ext.substr(1);
}

CompileError as_compile_error(const std::string& stage, const ParseError& e) {
  return CompileError(stage, e.loc(), e.detail());
}

std::string generate_cool(const std::string& input, const TransformContext& ctx) {
  CoordinatorDecl decl = parse_cool(read_source(input), input);
  validate_coordinator(decl, *ctx.base);
  return gen_cool_aspect(decl, *ctx.base);
}

std::string generate_audit(const std::string& input, const TransformContext& ctx) {
  AuditModel model = parse_audit(read_source(input), input);
  std::string messages = ctx.messages ? *ctx.messages : (fs::path(input).parent_path() / "messages.txt").string();
  if (!fs::exists(messages)) {
    throw CompileError("transform", SourceLoc{input, 0, 0}, "message catalog '" + messages + "' not found");
  }
  MessageCatalog catalog = parse_messages(read_source(messages), messages);
  validate_audit(model, *ctx.base, catalog);
  return gen_audit_aspect(model, catalog, *ctx.base);
}

}  // namespace

std::string TransformationDescriptor::transform(const std::string& input, const std::string& gen_dir,
                                                const TransformContext& ctx) const {
  std::string text;
  try {
    text = generate(input, ctx);
  } catch (const ParseError& e) {
    throw as_compile_error("transform", e);
  }
  std::error_code ec;
  fs::create_directories(gen_dir, ec);
  std::string out = (fs::path(gen_dir) / (fs::path(input).stem().string() + "_" + name + ".ma0")).string();
  std::ofstream f(out, std::ios::binary);
  if (!f) throw CompileError("transform", SourceLoc{out, 0, 0}, "cannot write generated file");
  f << text;
  if (!f) throw CompileError("transform", SourceLoc{out, 0, 0}, "cannot write generated file");
  return out;
}

const TransformerCatalog& builtin_catalog() {
  static const TransformerCatalog catalog = {
      {"cool", TransformationDescriptor{"cool", "cool", generate_cool}},
      {"audit", TransformationDescriptor{"audit", "audit", generate_audit}},
  };
  return catalog;
}

std::vector<TransformationDescriptor> load_registry(const std::string& path, const TransformerCatalog& catalog) {
  std::vector<TransformationDescriptor> out;
  if (!fs::exists(path)) return out;
  std::istringstream in(read_source(path));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto e = line.find_last_not_of(" \t\r");
    std::string name = line.substr(b, e - b + 1);
    auto it = catalog.find(name);
    if (it == catalog.end()) {
      throw CompileError("registry", SourceLoc{path, lineno, static_cast<int>(b) + 1},
                         "unknown transformation '" + name + "' (line " + std::to_string(lineno) + ")");
    }
    out.push_back(it->second);
  }
  return out;
}

std::vector<EffectiveInput> transform_inputs(const std::vector<std::string>& inputs,
                                             const std::vector<TransformationDescriptor>& registry,
                                             const std::string& gen_dir, const TransformContext& ctx) {
  std::vector<EffectiveInput> out;
  for (const auto& in : inputs) {
    std::string ext = extension_of(in);
    const TransformationDescriptor* hit = nullptr;
    for (const auto& d : registry) {
      if (d.extension == ext) {
        hit = &d;
        break;
      }
    }
    if (!hit) {
      out.push_back({in, "", ""});
      continue;
    }
    out.push_back({hit->transform(in, gen_dir, ctx), in, hit->name});
  }
  return out;
}

CompileArtifacts compile(const std::vector<std::string>& paths, const CompileOptions& options) {
  if (paths.empty()) throw CompileError("io", SourceLoc{}, "no input files");
  for (const auto& p : paths) {
    if (!fs::is_regular_file(p)) throw CompileError("io", SourceLoc{p, 0, 0}, "file not found");
  }
  const TransformerCatalog& catalog = options.catalog ? *options.catalog : builtin_catalog();
  auto registry = load_registry(options.dsals, catalog);

  CompileArtifacts art;

  // Base files first: transformers validate against the base program.
  std::vector<Program> parts;
  for (const auto& p : paths) {
    if (extension_of(p) != "ml0") continue;
    try {
      parts.push_back(parse_base(read_source(p), p));
    } catch (const ParseError& e) {
      throw as_compile_error("parse", e);
    }
  }
  art.program = std::make_shared<Program>(merge_programs(std::move(parts)));

  std::vector<std::string> rest;
  for (const auto& p : paths) {
    if (extension_of(p) != "ml0") rest.push_back(p);
  }
  TransformContext ctx{art.program.get(), options.messages};
  for (auto& in : transform_inputs(rest, registry, options.gen_dir, ctx)) {
    if (!in.origin.empty()) art.generated.push_back(in);
    art.inputs.push_back(std::move(in));
  }

  for (const auto& in : art.inputs) {
    if (extension_of(in.path) != "ma0") {
      throw CompileError("io", SourceLoc{in.path, 0, 0},
                         "no transformation registered for '." + extension_of(in.path) + "' files");
    }
    try {
      auto a = std::make_shared<AspectDecl>(parse_aspect(read_source(in.path), in.path));
      a->generated = !in.origin.empty();
      art.aspects.push_back(std::move(a));
    } catch (const ParseError& e) {
      if (in.origin.empty()) throw as_compile_error("parse", e);
      throw CompileError("parse", {Diagnostic{e.loc(), e.detail()},
                                   Diagnostic{SourceLoc{in.origin, 0, 0},
                                              "generated by the '" + in.dsal + "' transformation from this file"}});
    }
  }

  std::vector<AspectDecl*> raw;
  for (auto& a : art.aspects) raw.push_back(a.get());
  resolve_names(*art.program, raw);

  std::vector<std::shared_ptr<const AspectDecl>> aspects(art.aspects.begin(), art.aspects.end());
  art.woven = weave(art.program, std::move(aspects), options.strip_hide);
  art.relationships = build_relationship_map(art.woven.matches, art.woven.visible);
  if (options.relationships_out) {
    emit_relationship_map(art.relationships, *options.relationships_out);
    art.relationships_path = options.relationships_out;
  }
  return art;
}

}  // namespace lom
