#pragma once

// Shared helpers: build woven units from inline sources, locate fixtures.

#include <algorithm>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "lom/interpreter.hpp"
#include "lom/parser.hpp"
#include "lom/pipeline.hpp"
#include "lom/weaver.hpp"

namespace lom::test {

inline std::string source_path(const std::string& rel) { return std::string(LOM_SOURCE_DIR) + "/" + rel; }

/// Fresh scratch directory under the build tree.
inline std::string scratch_dir(const std::string& name) {
  auto p = std::filesystem::current_path() / "scratch" / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

struct AspectSource {
  std::string text;
  std::string path = "a.ma0";
};

/// Parse + resolve + weave; the unit owns every AST.
inline WovenUnit weave_sources(const std::string& base, const std::vector<AspectSource>& aspects = {},
                               bool strip_hide = false) {
  auto prog = std::make_shared<Program>(parse_base(base, "t.ml0"));
  std::vector<std::shared_ptr<AspectDecl>> owned;
  std::vector<AspectDecl*> raw;
  for (const auto& a : aspects) {
    owned.push_back(std::make_shared<AspectDecl>(parse_aspect(a.text, a.path)));
    raw.push_back(owned.back().get());
  }
  resolve_names(*prog, raw);
  std::vector<std::shared_ptr<const AspectDecl>> cs(owned.begin(), owned.end());
  return weave(prog, std::move(cs), strip_hide);
}

inline ExecutionResult run_sources(const std::string& base, const std::vector<AspectSource>& aspects = {},
                                   std::uint64_t seed = 0) {
  WovenUnit u = weave_sources(base, aspects);
  RunOptions o;
  o.seed = seed;
  return run(u, o);
}

/// Trace lines whose event field equals `event`, detail only.
inline std::vector<std::string> events(const ExecutionResult& r, const std::string& event) {
  std::vector<std::string> out;
  for (const auto& line : r.trace) {
    // "<step> T<tid> <event> <detail>"
    auto a = line.find(' ');
    auto b = line.find(' ', a + 1);
    auto c = line.find(' ', b + 1);
    std::string ev = line.substr(b + 1, c == std::string::npos ? std::string::npos : c - b - 1);
    if (ev == event) out.push_back(c == std::string::npos ? "" : line.substr(c + 1));
  }
  return out;
}

inline std::size_t count_prefix(const std::vector<std::string>& v, const std::string& prefix) {
  return static_cast<std::size_t>(
      std::count_if(v.begin(), v.end(), [&](const std::string& s) { return s.rfind(prefix, 0) == 0; }));
}

}  // namespace lom::test
