#include <algorithm>
#include <set>

#include "archiprompt/session.hpp"

namespace archiprompt::session {
namespace {

// Function words never count as covering a rubric slot.
const std::set<std::string, std::less<>> kSlotStopwords = {
    "a", "an", "the", "and", "or", "of", "in", "on", "at", "with", "for", "from", "to", "by", "into", "during", "its",
};

FeedbackCategory category_for(std::string_view parameter) {
  if (parameter == "environment") return FeedbackCategory::expand_environment;
  if (parameter == "medium" || parameter == "architectural_style") return FeedbackCategory::add_medium_style;
  return FeedbackCategory::highlight_features;
}

std::string hint_for(const std::string& parameter) {
  if (parameter == "environment")
    return "Describe the setting in more detail: what surrounds the building and what the place feels like.";
  if (parameter == "medium")
    return "Say how the image is rendered, for example watercolor, charcoal sketch or digital painting.";
  if (parameter == "architectural_style") return "Name the architectural style the building follows.";
  if (parameter == "subject") return "Be more specific about the project type shown in the image.";
  if (parameter == "materials") return "Mention the materials you can see on the building.";
  if (parameter == "lighting") return "Describe the lighting or the time of day.";
  if (parameter == "colors") return "Describe the dominant colors of the image.";
  if (parameter == "resolution") return "Specify the resolution or level of detail of the output.";
  if (parameter == "sociocultural") return "Add the social or cultural activity happening around the building.";
  if (parameter == "sustainability") return "Point out the sustainability features visible in the design.";
  return "Add details about the " + parameter + ".";
}

std::set<std::string> content_words(std::string_view text) {
  std::set<std::string> out;
  for (auto& t : metrics::tokenize(text))
    if (!kSlotStopwords.count(t)) out.insert(std::move(t));
  return out;
}

std::string join(const std::vector<std::string>& terms) {
  std::string out;
  for (const auto& t : terms) out += (out.empty() ? "" : ", ") + t;
  return out;
}

}  // namespace

std::vector<FeedbackSuggestion> rubric_feedback(std::string_view candidate, const curriculum::TaskSpec& task,
                                                const curriculum::RubricModule& module, double similarity_pct) {
  std::vector<FeedbackSuggestion> out;
  const auto words = content_words(candidate);
  for (const auto& param : module.parameters) {
    auto slot = task.slots.find(param);
    if (slot == task.slots.end()) continue;
    auto slot_words = content_words(slot->second);
    bool covered = std::any_of(slot_words.begin(), slot_words.end(), [&](const auto& w) { return words.count(w) > 0; });
    if (!covered) out.push_back({category_for(param), param, hint_for(param)});
  }

  const auto have = metrics::word_count(candidate);
  if (have < metrics::word_count(task.hidden_prompt)) {
    out.push_back({FeedbackCategory::length, "",
                   "Your prompt has " + std::to_string(have) + " words. There is room for more detail within the " +
                       std::to_string(module.word_min) + "-" + std::to_string(module.word_max) + " word range."});
  }

  if (out.empty() && similarity_pct < 100.0) {
    out.push_back({FeedbackCategory::vocabulary, "",
                   "Every rubric element is present. Refine word choice and ordering to match the image more closely."});
  }
  return out;
}

FeedbackReport Engine::feedback_report(const Session& session) const {
  const auto kind = session.state.kind;
  if (kind != StateKind::awaiting_choice && kind != StateKind::revising)
    throw IllegalState("feedback needs a submitted prompt", {{"state", to_string(kind)}});
  const auto& task = current_task(session);
  auto attempts = session.attempts_for(task.task_id);
  if (attempts.empty()) throw IllegalState("no submission for the current task");
  const Attempt& last = *attempts.back();
  const auto& module = curriculum_.module_for(task);

  FeedbackReport report;
  report.suggestions = rubric_feedback(last.submitted_text, task, module, last.evaluation.similarity_pct);

  std::vector<std::string> missing;
  for (const auto& s : report.suggestions)
    if (!s.parameter.empty()) missing.push_back(s.parameter);

  if (allows_consult(session.condition) && !missing.empty() && !personas_.list().empty()) {
    std::string role = personas_.list().front().role_id;
    for (const auto& c : session.consultations)
      if (c.task_id == task.task_id) role = c.role_id;
    try {
      const auto& persona = personas_.get(role);
      for (const auto& pt : personas::suggest_vocabulary(personas_, role, task, curriculum_, mode_, &client_)) {
        if (std::find(missing.begin(), missing.end(), pt.parameter) == missing.end()) continue;
        auto shown = pt.terms;
        if (shown.size() > 3) shown.resize(3);
        report.suggestions.push_back({FeedbackCategory::vocabulary, pt.parameter,
                                      persona.display_name + " suggests for " + pt.parameter + ": " + join(shown)});
      }
    } catch (const personas::UpstreamFailure&) {
      // Vocabulary is optional enrichment.
    }
  }

  if (mode_ == personas::Mode::live) {
    genai::GenRequest req;
    req.kind = genai::Kind::text;
    req.system_instruction =
        "Rewrite the student's architectural image prompt so it follows the given structure and addresses the "
        "listed gaps. Reply with the revised prompt only.";
    std::string gaps;
    for (const auto& s : report.suggestions) gaps += "- " + s.text + "\n";
    req.user_content = "Structure: " + task.prompt_pattern + "\nPrompt: " + last.submitted_text + "\nGaps:\n" + gaps;
    try {
      report.suggested_revision = client_.generate_text(req).content;
    } catch (const Error&) {
      // Rule-based feedback stands on its own.
    }
  }
  return report;
}

}  // namespace archiprompt::session
