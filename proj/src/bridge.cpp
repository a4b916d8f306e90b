#include "lom/bridge.hpp"

#include <algorithm>
#include <fstream>
#include <tuple>

#include <json.hpp>

namespace lom {

std::string advice_handle(const AdviceRef& r) {
  if (r.advice->bridge) return r.advice->bridge->file + ":" + std::to_string(r.advice->bridge->line);
  return r.aspect->path + ":" + std::to_string(r.advice->loc.line);
}

std::string advice_module(const AdviceRef& r) {
  if (r.advice->bridge) return r.advice->bridge->module;
  return r.aspect->name;
}

RelationshipMap build_relationship_map(const MatchTable& table, const ShadowTable& visible) {
  RelationshipMap map;
  for (const auto& [id, entries] : table) {
    const Shadow* s = visible.find(id);
    if (!s) continue;
    for (const auto& e : entries) {
      RelationshipRecord rec;
      rec.advice = advice_handle(e.advice);
      rec.module = advice_module(e.advice);
      rec.shadow = s->describe();
      rec.at = s->loc.str();
      rec.residue = e.residue ? to_string(*e.residue) : "";
      rec.shadow_loc = s->loc;
      map.advises.push_back(rec);
    }
  }
  map.advised_by = map.advises;
  auto key_advice = [](const RelationshipRecord& r) {
    return std::tie(r.advice, r.shadow_loc, r.shadow, r.residue, r.module);
  };
  auto key_shadow = [](const RelationshipRecord& r) {
    return std::tie(r.shadow_loc, r.shadow, r.advice, r.residue, r.module);
  };
  std::sort(map.advises.begin(), map.advises.end(),
            [&](const auto& a, const auto& b) { return key_advice(a) < key_advice(b); });
  std::sort(map.advised_by.begin(), map.advised_by.end(),
            [&](const auto& a, const auto& b) { return key_shadow(a) < key_shadow(b); });
  return map;
}

namespace {

nlohmann::ordered_json record_json(const RelationshipRecord& r) {
  nlohmann::ordered_json j;
  j["advice"] = r.advice;
  j["module"] = r.module;
  j["shadow"] = r.shadow;
  j["at"] = r.at;
  j["residue"] = r.residue;
  return j;
}

}  // namespace

std::string relationship_json(const RelationshipMap& map) {
  nlohmann::ordered_json root;
  root["advises"] = nlohmann::ordered_json::array();
  root["advised_by"] = nlohmann::ordered_json::array();
  for (const auto& r : map.advises) root["advises"].push_back(record_json(r));
  for (const auto& r : map.advised_by) root["advised_by"].push_back(record_json(r));
  return root.dump(2) + "\n";
}

void emit_relationship_map(const RelationshipMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CompileError("emit", SourceLoc{path, 0, 0}, "cannot open '" + path + "' for writing");
  out << relationship_json(map);
  if (!out) throw CompileError("emit", SourceLoc{path, 0, 0}, "write to '" + path + "' failed");
}

}  // namespace lom
