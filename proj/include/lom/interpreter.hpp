#pragma once

// Deterministic interpreter for woven MiniLang programs with simulated
// threads and non-reentrant monitors.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "lom/weaver.hpp"

namespace lom {

struct ListObj;
struct Object;

struct MonitorHandle {
  int id = 0;
  friend bool operator==(const MonitorHandle&, const MonitorHandle&) = default;
};

struct ThreadHandle {
  int id = 0;
  friend bool operator==(const ThreadHandle&, const ThreadHandle&) = default;
};

using Value = std::variant<std::monostate, std::int64_t, bool, std::string, ListObj*, Object*, MonitorHandle,
                           ThreadHandle>;

struct ListObj {
  std::vector<Value> items;
};

struct Object {
  int id = 0;
  std::string cls;
  std::map<std::string, Value> fields;
};

/// Ints decimal, strings verbatim, lists `[a, b]`, objects `<C#id>`.
std::string render(const Value& v);

/// Replaces each `{k}` with render(values[k]). Throws RuntimeError when k is
/// out of range.
std::string format_message(std::string_view tmpl, std::span<const Value> values);

class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Scheduler state and deadlock detection

enum class ThreadStatus { Runnable, Blocked, Waiting, Finished };

struct ThreadSnapshot {
  int id = 0;
  ThreadStatus status = ThreadStatus::Runnable;
  int monitor = -1;  // Blocked / Waiting
};

struct MonitorSnapshot {
  int id = 0;
  std::string label;
  int owner = -1;
};

struct SchedulerSnapshot {
  std::vector<ThreadSnapshot> threads;
  std::vector<MonitorSnapshot> monitors;

  const MonitorSnapshot* monitor(int id) const;
};

struct DeadlockReport {
  struct Wait {
    int thread = 0;
    int monitor = -1;
    std::string monitor_name;  // "monitor#id(label)"
    int holder = -1;           // -1: nobody holds it (a waiter with no notifier)
    bool waiting = false;      // waiting for notify rather than for the lock
  };

  std::vector<int> threads;  // stuck threads, ascending
  std::vector<Wait> waits;   // one per stuck thread (the wait-for edges)
  std::vector<int> cycle;    // threads on a wait-for cycle, ascending

  bool has_self_edge() const;
  bool has_self_edge_on(std::string_view label) const;
  std::string str() const;
};

/// Absent when some thread can make progress (runnable, or blocked on a free
/// monitor) or every thread has finished.
std::optional<DeadlockReport> detect_deadlock(const SchedulerSnapshot& state);

// ---------------------------------------------------------------------------
// run

enum class ExitStatus { Completed, Deadlock, StepLimit, RuntimeError };

const char* to_string(ExitStatus s);

struct RunOptions {
  std::string entry = "Main.main";
  std::uint64_t seed = 0;
  std::int64_t step_limit = 1000000;
};

struct OutputLine {
  enum class Channel { Print, Audit };
  Channel channel = Channel::Print;
  std::string text;
};

struct ExecutionResult {
  ExitStatus status = ExitStatus::Completed;
  std::optional<DeadlockReport> deadlock;
  std::string error;             // first runtime error, "T<tid>: message"
  std::vector<std::string> trace;  // "<step> T<tid> <event> <detail>"
  std::vector<OutputLine> lines;
  std::int64_t steps = 0;

  std::vector<std::string> output() const;  // printed lines
  std::vector<std::string> audit() const;   // audit sink lines
  std::string trace_text() const;
};

/// Rotation position of a thread for a seed; lower runs earlier in a round.
std::uint64_t rotation_key(std::uint64_t seed, int thread);

ExecutionResult run(const WovenUnit& unit, const RunOptions& options);

}  // namespace lom
