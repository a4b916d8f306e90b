#include "lom/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>

#include "lom/interpreter.hpp"
#include "lom/joinpoints.hpp"
#include "lom/pipeline.hpp"

namespace lom {

namespace {

struct CliOptions {
  std::vector<std::string> inputs;
  std::string dsals = "dsals.txt";
  std::string gen_dir = "gen";
  bool strip_hide = false;
  bool show_hidden = false;
  std::uint64_t seed = 0;
  std::int64_t step_limit = 1000000;
  std::string entry = "Main.main";
  std::optional<std::string> messages;
  std::optional<std::string> audit_out;
  std::optional<std::string> relationships_out;
  std::optional<std::string> trace_out;
};

void add_compile_flags(CLI::App* cmd, CliOptions& o) {
  cmd->add_option("inputs", o.inputs, "Source files (.ml0, .ma0, DSAL files)")->required();
  cmd->add_option("--dsals", o.dsals, "Transformation registry")->capture_default_str();
  cmd->add_option("--gen-dir", o.gen_dir, "Directory for generated aspects")->capture_default_str();
  cmd->add_flag("--strip-hide", o.strip_hide, "Ignore @hide annotations when weaving");
  cmd->add_option("--messages", o.messages, "Audit message catalog");
  cmd->add_flag("--show-hidden", o.show_hidden, "List shadows removed by @hide annotations");
}

void print_compile_error(const CompileError& e, std::ostream& err) {
  for (const auto& d : e.diagnostics()) err << "error[" << e.stage() << "]: " << d.str() << "\n";
  if (e.diagnostics().empty()) err << "error[" << e.stage() << "]: " << e.what() << "\n";
}

bool write_file(const std::string& path, const std::string& text, std::ostream& err) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) {
    err << "error[io]: " << path << ": cannot write\n";
    return false;
  }
  return true;
}

CompileOptions to_compile_options(const CliOptions& o) {
  CompileOptions c;
  c.dsals = o.dsals;
  c.gen_dir = o.gen_dir;
  c.strip_hide = o.strip_hide;
  c.messages = o.messages;
  c.relationships_out = o.relationships_out;
  return c;
}

int do_run(const CliOptions& o, const CompileArtifacts& art, std::ostream& out, std::ostream& err) {
  RunOptions ro;
  ro.entry = o.entry;
  ro.seed = o.seed;
  ro.step_limit = o.step_limit;
  ExecutionResult r = run(art.woven, ro);

  std::ofstream audit_file;
  if (o.audit_out) {
    audit_file.open(*o.audit_out, std::ios::binary);
    if (!audit_file) {
      err << "error[io]: " << *o.audit_out << ": cannot write\n";
      return kExitCompileError;
    }
  }
  for (const auto& line : r.lines) {
    if (line.channel == OutputLine::Channel::Audit && o.audit_out) {
      audit_file << line.text << "\n";
    } else {
      out << line.text << "\n";
    }
  }
  if (o.trace_out && !write_file(*o.trace_out, r.trace_text(), err)) return kExitCompileError;

  switch (r.status) {
    case ExitStatus::Completed:
      return kExitOk;
    case ExitStatus::Deadlock:
      err << "deadlock after " << r.steps << " steps\n";
      if (r.deadlock) err << r.deadlock->str();
      return kExitDeadlock;
    case ExitStatus::RuntimeError:
      err << "runtime error: " << r.error << "\n";
      return kExitRuntimeError;
    case ExitStatus::StepLimit:
      err << "step limit of " << o.step_limit << " reached\n";
      return kExitStepLimit;
  }
  return kExitRuntimeError;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"lomc: compile and run MiniLang programs with aspects and DSALs"};
  app.require_subcommand(1);
  CliOptions o;

  auto* compile_cmd = app.add_subcommand("compile", "Transform, parse, resolve and weave");
  add_compile_flags(compile_cmd, o);
  compile_cmd->add_option("-o,--relationships-out", o.relationships_out, "Also write relationships JSON here");

  auto* run_cmd = app.add_subcommand("run", "Compile, then interpret");
  add_compile_flags(run_cmd, o);
  run_cmd->add_option("--seed", o.seed, "Scheduler seed")->capture_default_str();
  run_cmd->add_option("--step-limit", o.step_limit, "Maximum scheduler steps")->capture_default_str();
  run_cmd->add_option("--entry", o.entry, "Entry point Class.method")->capture_default_str();
  run_cmd->add_option("--audit-out", o.audit_out, "Write audit lines to this file instead of stdout");
  run_cmd->add_option("--trace-out", o.trace_out, "Write the execution trace to this file");
  run_cmd->add_option("-o,--relationships-out", o.relationships_out, "Also write relationships JSON here");

  auto* rel_cmd = app.add_subcommand("relationships", "Compile and write the relationships JSON");
  add_compile_flags(rel_cmd, o);
  rel_cmd->add_option("-o,--relationships-out", o.relationships_out, "Output path (default relationships.json)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error[usage]: " << e.what() << "\n";
    return kExitCompileError;
  }

  if (rel_cmd->parsed() && !o.relationships_out) o.relationships_out = "relationships.json";
  if (run_cmd->parsed() && o.entry.find('.') == std::string::npos) {
    err << "error[usage]: --entry must be Class.method\n";
    return kExitCompileError;
  }

  CompileArtifacts art;
  try {
    art = compile(o.inputs, to_compile_options(o));
  } catch (const CompileError& e) {
    print_compile_error(e, err);
    return kExitCompileError;
  }

  if (o.show_hidden) {
    for (const auto& line : hidden_listing(art.woven.all_shadows, art.woven.hide_specs)) out << line << "\n";
  }
  if (compile_cmd->parsed()) {
    for (const auto& g : art.generated) out << "generated " << g.path << " from " << g.origin << "\n";
    return kExitOk;
  }
  if (rel_cmd->parsed()) {
    out << "wrote " << *art.relationships_path << "\n";
    return kExitOk;
  }
  return do_run(o, art, out, err);
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace lom
