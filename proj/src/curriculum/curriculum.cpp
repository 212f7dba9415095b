#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "archiprompt/curriculum.hpp"
#include "archiprompt/metrics.hpp"

namespace archiprompt::curriculum {
namespace {

std::string where(const YAML::Node& node) {
  const auto m = node.Mark();
  if (m.is_null()) return "document";
  return "line " + std::to_string(m.line + 1) + ", column " + std::to_string(m.column + 1);
}

template <typename T>
T required(const YAML::Node& parent, const std::string& key, const std::string& context) {
  auto node = parent[key];
  if (!node || node.IsNull())
    throw MissingField(context + ": missing field '" + key + "'", {{"field", key}});
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ParseError(context + ": field '" + key + "' has the wrong type at " + where(node),
                     {{"field", key}, {"location", where(node)}});
  }
}

template <typename T>
T optional_field(const YAML::Node& parent, const std::string& key, T fallback) {
  auto node = parent[key];
  if (!node || node.IsNull()) return fallback;
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ParseError("field '" + key + "' has the wrong type at " + where(node),
                     {{"field", key}, {"location", where(node)}});
  }
}

YAML::Node required_sequence(const YAML::Node& root, const std::string& key) {
  auto node = root[key];
  if (!node) throw MissingField("curriculum: missing field '" + key + "'", {{"field", key}});
  if (!node.IsSequence())
    throw ParseError("curriculum: '" + key + "' must be a list at " + where(node),
                     {{"field", key}, {"location", where(node)}});
  return node;
}

RubricModule parse_module(const YAML::Node& n, std::size_t index) {
  const std::string ctx = "modules[" + std::to_string(index) + "]";
  if (!n.IsMap()) throw ParseError(ctx + " must be a mapping at " + where(n), {{"location", where(n)}});
  RubricModule m;
  m.id = required<int>(n, "id", ctx);
  m.name = required<std::string>(n, "name", ctx);
  m.parameters = required<std::vector<std::string>>(n, "parameters", ctx);
  m.word_min = required<int>(n, "word_min", ctx);
  m.word_max = required<int>(n, "word_max", ctx);
  m.tip_text = optional_field<std::string>(n, "tip_text", "");
  m.tip_example_prompt = optional_field<std::string>(n, "tip_example_prompt", "");
  return m;
}

TaskSpec parse_task(const YAML::Node& n, std::size_t index) {
  const std::string ctx = "tasks[" + std::to_string(index) + "]";
  if (!n.IsMap()) throw ParseError(ctx + " must be a mapping at " + where(n), {{"location", where(n)}});
  TaskSpec t;
  t.task_id = required<std::string>(n, "task_id", ctx);
  t.module_id = required<int>(n, "module_id", ctx);
  t.hidden_prompt = required<std::string>(n, "hidden_prompt", ctx);
  t.prompt_pattern = required<std::string>(n, "prompt_pattern", ctx);
  t.image_ref = optional_field<std::string>(n, "image_ref", "");
  t.slots = optional_field<std::map<std::string, std::string>>(n, "slots", {});
  return t;
}

bool contains_all(const metrics::TokenList& haystack, const metrics::TokenList& needles) {
  std::set<std::string_view> words(haystack.begin(), haystack.end());
  return std::all_of(needles.begin(), needles.end(), [&](const auto& w) { return words.count(w) > 0; });
}

}  // namespace

const RubricModule* Curriculum::find_module(int id) const {
  auto it = std::find_if(modules.begin(), modules.end(), [id](const auto& m) { return m.id == id; });
  return it == modules.end() ? nullptr : &*it;
}

const RubricModule& Curriculum::module_for(const TaskSpec& task) const {
  if (auto* m = find_module(task.module_id)) return *m;
  throw NotFound("task " + task.task_id + " references unknown module " + std::to_string(task.module_id));
}

Curriculum parse_curriculum(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::ParserException& e) {
    throw ParseError(std::string("curriculum: ") + e.what(),
                     {{"location", "line " + std::to_string(e.mark.line + 1) + ", column " +
                                       std::to_string(e.mark.column + 1)}});
  }
  if (!root || root.IsNull()) throw ParseError("curriculum: empty document", {{"location", "document"}});
  if (!root.IsMap()) throw ParseError("curriculum: top level must be a mapping", {{"location", where(root)}});

  Curriculum c;
  c.version = required<std::string>(root, "version", "curriculum");
  auto modules = required_sequence(root, "modules");
  for (std::size_t i = 0; i < modules.size(); ++i) c.modules.push_back(parse_module(modules[i], i));
  auto tasks = required_sequence(root, "tasks");
  for (std::size_t i = 0; i < tasks.size(); ++i) c.tasks.push_back(parse_task(tasks[i], i));
  return c;
}

Curriculum load_curriculum(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open curriculum file " + path.string(), {{"path", path.string()}});
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_curriculum(buf.str());
}

std::vector<std::string> pattern_placeholders(std::string_view pattern) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = pattern.find('[', pos)) != std::string_view::npos) {
    auto close = pattern.find(']', pos);
    if (close == std::string_view::npos) break;
    out.emplace_back(pattern.substr(pos + 1, close - pos - 1));
    pos = close + 1;
  }
  return out;
}

std::vector<Violation> validate_curriculum(const Curriculum& c) {
  std::vector<Violation> out;
  auto add = [&out](std::string subject, std::string rule, std::string message) {
    out.push_back({std::move(subject), std::move(rule), std::move(message)});
  };

  if (c.tasks.size() < kMinTasks)
    add("curriculum", "min_tasks",
        "needs at least " + std::to_string(kMinTasks) + " tasks, has " + std::to_string(c.tasks.size()));
  if (c.modules.empty()) add("curriculum", "modules", "no modules defined");

  const RubricModule* prev = nullptr;
  for (const auto& m : c.modules) {
    const std::string who = "module " + std::to_string(m.id);
    if (m.id < 1) add(who, "module_id", "module ids start at 1");
    if (prev && m.id <= prev->id)
      add(who, "module_order", "module ids must be strictly increasing (follows module " +
                                   std::to_string(prev->id) + ")");
    if (m.parameters.empty()) add(who, "parameters", "no rubric parameters");
    if (m.word_min < 1 || m.word_max < 1) add(who, "word_limits", "word limits must be positive");
    if (m.word_min >= m.word_max)
      add(who, "word_limits",
          "word_min " + std::to_string(m.word_min) + " must be below word_max " + std::to_string(m.word_max));
    std::set<std::string> seen;
    for (const auto& p : m.parameters)
      if (!seen.insert(p).second) add(who, "parameters", "parameter '" + p + "' listed twice");
    if (prev) {
      for (const auto& p : prev->parameters) {
        if (std::find(m.parameters.begin(), m.parameters.end(), p) == m.parameters.end())
          add(who, "cumulative_parameters",
              "lacks parameter '" + p + "' from module " + std::to_string(prev->id));
      }
    }
    prev = &m;
  }

  std::set<std::string> task_ids;
  for (const auto& t : c.tasks) {
    const std::string who = "task " + t.task_id;
    if (!task_ids.insert(t.task_id).second) add(who, "task_id", "duplicate task id");
    const auto* m = c.find_module(t.module_id);
    if (!m) {
      add(who, "module_ref", "references unknown module " + std::to_string(t.module_id));
      continue;
    }
    const auto hidden = metrics::tokenize(t.hidden_prompt);
    if (hidden.empty()) {
      add(who, "hidden_prompt", "hidden prompt is empty");
    } else {
      auto verdict = check_word_limit(t.hidden_prompt, *m);
      if (!verdict.ok())
        add(who, "word_limit",
            "hidden prompt has " + std::to_string(verdict.count) + " words, module " +
                std::to_string(m->id) + " allows " + std::to_string(m->word_min) + "-" +
                std::to_string(m->word_max));
    }

    auto placeholders = pattern_placeholders(t.prompt_pattern);
    std::multiset<std::string> ph(placeholders.begin(), placeholders.end());
    for (const auto& p : m->parameters) {
      auto n = ph.count(p);
      if (n != 1)
        add(who, "prompt_pattern",
            "pattern has " + std::to_string(n) + " placeholders for parameter '" + p + "'");
    }
    for (const auto& p : std::set<std::string>(placeholders.begin(), placeholders.end()))
      if (std::find(m->parameters.begin(), m->parameters.end(), p) == m->parameters.end())
        add(who, "prompt_pattern", "placeholder '" + p + "' is not a parameter of module " + std::to_string(m->id));

    for (const auto& [param, phrase] : t.slots) {
      if (std::find(m->parameters.begin(), m->parameters.end(), param) == m->parameters.end())
        add(who, "slots", "slot '" + param + "' is not a parameter of module " + std::to_string(m->id));
      auto slot_tokens = metrics::tokenize(phrase);
      if (slot_tokens.empty() || !contains_all(hidden, slot_tokens))
        add(who, "slots", "slot '" + param + "' phrase does not occur in the hidden prompt");
    }
  }
  return out;
}

const TaskSpec& get_task(const Curriculum& c, std::size_t index) {
  if (index >= c.tasks.size())
    throw IndexOutOfRange("task index " + std::to_string(index) + " out of range (have " +
                              std::to_string(c.tasks.size()) + ")",
                          {{"index", index}, {"count", c.tasks.size()}});
  return c.tasks[index];
}

std::string_view to_string(WordLimitVerdict::Kind kind) {
  switch (kind) {
    case WordLimitVerdict::Kind::ok: return "ok";
    case WordLimitVerdict::Kind::too_short: return "too_short";
    case WordLimitVerdict::Kind::too_long: return "too_long";
  }
  return "ok";
}

WordLimitVerdict check_word_limit(std::string_view text, const RubricModule& module) {
  const auto n = metrics::word_count(text);
  if (n < static_cast<std::size_t>(std::max(module.word_min, 0))) return {WordLimitVerdict::Kind::too_short, n};
  if (n > static_cast<std::size_t>(std::max(module.word_max, 0))) return {WordLimitVerdict::Kind::too_long, n};
  return {WordLimitVerdict::Kind::ok, n};
}

}  // namespace archiprompt::curriculum
