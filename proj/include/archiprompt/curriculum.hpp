#pragma once

// Task progression: rubric modules, hidden-prompt tasks and word limits.
//
// A curriculum is loaded from a YAML document (schema in
// docs/curriculum_format.md) and is immutable afterwards. Loading and
// validating are separate steps so that `curriculum validate` can report
// every broken rule at once.

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "archiprompt/errors.hpp"

namespace archiprompt::curriculum {

ARCHIPROMPT_DEFINE_ERROR(ParseError, validation);
ARCHIPROMPT_DEFINE_ERROR(MissingField, validation);
ARCHIPROMPT_DEFINE_ERROR(IndexOutOfRange, not_found);

struct RubricModule {
  int id = 0;
  std::string name;
  std::vector<std::string> parameters;  // e.g. subject, medium, environment
  int word_min = 0;
  int word_max = 0;
  std::string tip_text;
  std::string tip_example_prompt;
};

struct TaskSpec {
  std::string task_id;
  int module_id = 0;
  std::string hidden_prompt;
  std::string image_ref;       // opaque; empty means "generate from the hidden prompt"
  std::string prompt_pattern;  // "A [subject] rendered in [medium] set in [environment]."
  // Phrase of the hidden prompt that realizes each rubric parameter. Drives
  // the rule-based feedback; optional per parameter.
  std::map<std::string, std::string> slots;
};

struct Curriculum {
  std::string version;
  std::vector<RubricModule> modules;
  std::vector<TaskSpec> tasks;

  const RubricModule* find_module(int id) const;
  /// Throws NotFound when the task's module does not exist.
  const RubricModule& module_for(const TaskSpec& task) const;
  std::size_t task_count() const noexcept { return tasks.size(); }
};

inline constexpr std::size_t kMinTasks = 4;

Curriculum parse_curriculum(std::string_view yaml_text);
Curriculum load_curriculum(const std::filesystem::path& path);

struct Violation {
  std::string subject;  // "module 2", "task t3", "curriculum"
  std::string rule;     // word_limit, cumulative_parameters, ...
  std::string message;
};

std::vector<Violation> validate_curriculum(const Curriculum& c);

const TaskSpec& get_task(const Curriculum& c, std::size_t index);

/// Names of the `[placeholder]` slots in a prompt pattern, in order.
std::vector<std::string> pattern_placeholders(std::string_view pattern);

struct WordLimitVerdict {
  enum class Kind { ok, too_short, too_long };
  Kind kind = Kind::ok;
  std::size_t count = 0;

  bool ok() const noexcept { return kind == Kind::ok; }
  friend bool operator==(const WordLimitVerdict&, const WordLimitVerdict&) = default;
};

std::string_view to_string(WordLimitVerdict::Kind kind);

WordLimitVerdict check_word_limit(std::string_view text, const RubricModule& module);

}  // namespace archiprompt::curriculum
