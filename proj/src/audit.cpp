#include "lom/audit.hpp"

#include <algorithm>
#include <filesystem>
#include <regex>
#include <sstream>

#include "lom/parser.hpp"
#include "lom/printer.hpp"

namespace lom {

const char* to_string(Transition t) {
  switch (t) {
    case Transition::Start: return "start";
    case Transition::Finish: return "finish";
    case Transition::Interrupt: return "interrupt";
    case Transition::Pause: return "pause";
    case Transition::Resume: return "resume";
  }
  return "?";
}

std::string transition_method(Transition t) {
  switch (t) {
    case Transition::Start: return "start";
    case Transition::Finish: return "run";
    case Transition::Interrupt: return "interrupt";
    case Transition::Pause:
    case Transition::Resume: return "setPaused";
  }
  return "";
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

Transition parse_transition(Parser& p) {
  const Token& t = p.peek();
  static const std::pair<const char*, Transition> kNames[] = {
      {"start", Transition::Start},
      {"finish", Transition::Finish},
      {"interrupt", Transition::Interrupt},
      {"pause", Transition::Pause},
      {"resume", Transition::Resume},
  };
  if (t.kind == TokenKind::Ident) {
    for (const auto& [name, tr] : kNames) {
      if (t.text == name) {
        p.next();
        return tr;
      }
    }
    p.fail(t, "unknown transition '" + t.text + "' (expected start, finish, interrupt, pause or resume)");
  }
  p.fail(t, "expected a transition");
}

}  // namespace

AuditModel parse_audit(std::string_view text, const std::string& path) {
  Parser p(text, path);
  AuditModel model;
  model.path = path;
  while (!p.at_end()) {
    AuditCommand cmd;
    cmd.loc = p.loc_of(p.peek());
    p.expect_ident("logs");
    p.expect_ident("for");
    cmd.qualified_target = p.expect_name("type name");
    cmd.target = cmd.qualified_target;
    while (p.accept_punct(".")) {
      cmd.target = p.expect_name("type name");
      cmd.qualified_target += "." + cmd.target;
    }
    p.expect_punct(":");
    while (!p.accept_punct(";")) {
      AuditCase c;
      c.loc = p.loc_of(p.peek());
      p.expect_ident("case");
      c.transition = parse_transition(p);
      while (p.accept_punct("&")) c.guards.push_back(p.expect_name("guard field"));
      p.expect_ident("log");
      c.message = p.expect_name("message id");
      if (p.accept_ident("with")) {
        do {
          c.values.push_back(p.expect_name("value field"));
        } while (p.peek().kind == TokenKind::Ident && !p.peek().is_ident("case"));
      }
      cmd.cases.push_back(std::move(c));
    }
    model.commands.push_back(std::move(cmd));
  }
  return model;
}

MessageCatalog parse_messages(std::string_view text, const std::string& path) {
  MessageCatalog cat;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  static const std::regex kLine(R"(^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s?(.*)$)");
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::smatch m;
    if (!std::regex_match(line, m, kLine)) {
      throw ParseError(SourceLoc{path, lineno, static_cast<int>(first) + 1}, "expected 'ID = template'");
    }
    if (!cat.emplace(m[1].str(), m[2].str()).second) {
      throw ParseError(SourceLoc{path, lineno, static_cast<int>(first) + 1}, "duplicate message id '" + m[1].str() + "'");
    }
  }
  return cat;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

/// Largest `{k}` index in a template, or -1.
int max_placeholder(const std::string& tmpl) {
  static const std::regex kPlaceholder(R"(\{([0-9]+)\})");
  int best = -1;
  for (auto it = std::sregex_iterator(tmpl.begin(), tmpl.end(), kPlaceholder); it != std::sregex_iterator(); ++it) {
    best = std::max(best, std::stoi((*it)[1].str()));
  }
  return best;
}

}  // namespace

void validate_audit(const AuditModel& model, const Program& base, const MessageCatalog& catalog) {
  std::vector<Diagnostic> diags;
  for (const auto& cmd : model.commands) {
    const ClassDecl* cls = base.find_class(cmd.target);
    if (!cls) {
      diags.push_back({cmd.loc, "audited type '" + cmd.qualified_target + "' not found"});
      continue;
    }
    auto check_field = [&](const std::string& f, const SourceLoc& at, const char* role) {
      const FieldDecl* fd = cls->find_field(f);
      if (!fd || fd->is_static) {
        diags.push_back({at, std::string(role) + " '" + f + "' is not an instance field of '" + cls->name + "'"});
      }
    };
    for (const auto& c : cmd.cases) {
      std::string method = transition_method(c.transition);
      const MethodDecl* m = cls->find_method(method);
      if (!m) {
        diags.push_back({c.loc, "transition '" + std::string(to_string(c.transition)) + "' needs method '" + method +
                                    "' on '" + cls->name + "'"});
      } else if ((c.transition == Transition::Pause || c.transition == Transition::Resume) && m->arity() < 1) {
        diags.push_back({c.loc, "method 'setPaused' of '" + cls->name + "' must take the paused flag"});
      }
      for (const auto& g : c.guards) check_field(g, c.loc, "guard field");
      for (const auto& v : c.values) check_field(v, c.loc, "value field");
      auto it = catalog.find(c.message);
      if (it == catalog.end()) {
        diags.push_back({c.loc, "unknown message id '" + c.message + "'"});
      } else if (max_placeholder(it->second) >= static_cast<int>(c.values.size())) {
        diags.push_back({c.loc, "message '" + c.message + "' uses {" + std::to_string(max_placeholder(it->second)) +
                                    "} but only " + std::to_string(c.values.size()) + " value(s) are given"});
      }
    }
  }
  if (!diags.empty()) throw CompileError("transform", std::move(diags));
}

// ---------------------------------------------------------------------------
// Generation

std::string gen_audit_aspect(const AuditModel& model, const MessageCatalog& catalog, const Program& base) {
  const std::string module = std::filesystem::path(model.path).filename().string();

  // (type, transition) groups in order of first appearance.
  struct Group {
    std::string target;
    Transition transition;
    std::vector<const AuditCase*> cases;
  };
  std::vector<Group> groups;
  for (const auto& cmd : model.commands) {
    for (const auto& c : cmd.cases) {
      auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
        return g.target == cmd.target && g.transition == c.transition;
      });
      if (it == groups.end()) {
        groups.push_back({cmd.target, c.transition, {}});
        it = groups.end() - 1;
      }
      it->cases.push_back(&c);
    }
  }

  std::ostringstream os;
  os << "// Generated from " << model.path << " by the audit transformation. Do not edit.\n";
  os << "@hideType\n";
  os << "aspect Logs {\n";
  os << "  @hideMethod\n";
  os << "  def audit(template, values) {\n";
  os << "    emit_audit(format_list(template, values));\n";
  os << "  }\n";

  for (const auto& g : groups) {
    const ClassDecl* cls = base.find_class(g.target);
    // @hideMethod on the advice keeps its body's field reads out of other aspects' reach.
    os << "\n  @hideMethod\n";
    os << "  @loc(file=" << quote_string(model.path) << ", line=" << g.cases.front()->loc.line
       << ", module=" << quote_string(module) << ")\n";
    os << "  after(): execution(" << g.target << "." << transition_method(g.transition) << ") && this(" << g.target
       << ")";
    if (g.transition == Transition::Pause) os << " && args(0, true)";
    if (g.transition == Transition::Resume) os << " && args(0, false)";
    os << " {\n";
    if (g.transition == Transition::Finish && cls && cls->find_field("state")) {
      // An interrupted run unwinds without reaching FINISHED.
      os << "    if (thisObject.state != \"FINISHED\") {\n      return;\n    }\n";
    }
    for (const AuditCase* c : g.cases) {
      std::string cond = "true";
      if (!c->guards.empty()) {
        cond.clear();
        for (std::size_t i = 0; i < c->guards.size(); ++i) {
          if (i) cond += " && ";
          cond += "thisObject." + c->guards[i];
        }
      }
      os << "    if (" << cond << ") {\n";
      os << "      audit(" << quote_string(catalog.at(c->message)) << ", [";
      for (std::size_t i = 0; i < c->values.size(); ++i) {
        if (i) os << ", ";
        os << "thisObject." << c->values[i];
      }
      os << "]);\n";
      os << "      return;\n";
      os << "    }\n";
    }
    os << "  }\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace lom
