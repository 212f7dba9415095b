#include <algorithm>

#include "archiprompt/session.hpp"

namespace archiprompt::session {

std::string_view to_string(GroupCondition c) {
  switch (c) {
    case GroupCondition::group1_guide_and_personas: return "group1_guide_and_personas";
    case GroupCondition::group2_guide_only: return "group2_guide_only";
    case GroupCondition::group3_control: return "group3_control";
  }
  return "";
}

GroupCondition parse_condition(std::string_view name) {
  for (auto c : {GroupCondition::group1_guide_and_personas, GroupCondition::group2_guide_only,
                 GroupCondition::group3_control}) {
    auto full = to_string(c);
    if (name == full || name == full.substr(0, 6)) return c;
  }
  throw InvalidCondition("unknown group condition '" + std::string(name) + "'", {{"condition", name}});
}

int group_number(GroupCondition c) {
  switch (c) {
    case GroupCondition::group1_guide_and_personas: return 1;
    case GroupCondition::group2_guide_only: return 2;
    case GroupCondition::group3_control: return 3;
  }
  return 0;
}

bool shows_tips(GroupCondition c) { return c != GroupCondition::group3_control; }
bool allows_consult(GroupCondition c) { return c == GroupCondition::group1_guide_and_personas; }
bool allows_feedback(GroupCondition c) { return c != GroupCondition::group3_control; }

std::string_view to_string(StateKind k) {
  switch (k) {
    case StateKind::intro: return "intro";
    case StateKind::tip_shown: return "tip_shown";
    case StateKind::task_shown: return "task_shown";
    case StateKind::awaiting_choice: return "awaiting_choice";
    case StateKind::revising: return "revising";
    case StateKind::result_shown: return "result_shown";
    case StateKind::completed: return "completed";
  }
  return "";
}

std::string_view to_string(FeedbackCategory c) {
  switch (c) {
    case FeedbackCategory::expand_environment: return "expand_environment";
    case FeedbackCategory::add_medium_style: return "add_medium_style";
    case FeedbackCategory::highlight_features: return "highlight_features";
    case FeedbackCategory::vocabulary: return "vocabulary";
    case FeedbackCategory::length: return "length";
  }
  return "";
}

namespace {

FeedbackCategory parse_feedback_category(std::string_view name) {
  for (auto c : {FeedbackCategory::expand_environment, FeedbackCategory::add_medium_style,
                 FeedbackCategory::highlight_features, FeedbackCategory::vocabulary, FeedbackCategory::length})
    if (to_string(c) == name) return c;
  throw ReplayError("unknown feedback category '" + std::string(name) + "'");
}

constexpr EventKind kAllEvents[] = {EventKind::created,     EventKind::proceed,     EventKind::start_task,
                                    EventKind::consult,     EventKind::submit,      EventKind::get_feedback,
                                    EventKind::show_result, EventKind::resubmit,    EventKind::next};

}  // namespace

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::created: return "created";
    case EventKind::proceed: return "proceed";
    case EventKind::start_task: return "start_task";
    case EventKind::consult: return "consult";
    case EventKind::submit: return "submit";
    case EventKind::get_feedback: return "get_feedback";
    case EventKind::show_result: return "show_result";
    case EventKind::resubmit: return "resubmit";
    case EventKind::next: return "next";
  }
  return "";
}

EventKind parse_event_kind(std::string_view name) {
  for (auto k : kAllEvents)
    if (to_string(k) == name) return k;
  throw IllegalTransition("unknown event kind '" + std::string(name) + "'", {{"event", name}});
}

std::vector<const Attempt*> Session::attempts_for(std::string_view task_id) const {
  std::vector<const Attempt*> out;
  for (const auto& a : attempts)
    if (a.task_id == task_id) out.push_back(&a);
  return out;
}

int Session::consults_for(std::string_view task_id) const {
  return static_cast<int>(std::count_if(consultations.begin(), consultations.end(),
                                        [&](const auto& c) { return c.task_id == task_id; }));
}

void to_json(nlohmann::json& j, const State& s) {
  j = nlohmann::json{{"kind", to_string(s.kind)}};
  if (s.kind == StateKind::tip_shown) j["module_id"] = s.index;
  else if (s.kind != StateKind::intro && s.kind != StateKind::completed) j["task_index"] = s.index;
}

void to_json(nlohmann::json& j, const FeedbackReport& r) {
  j = nlohmann::json{{"suggestions", nlohmann::json::array()}, {"suggested_revision", nullptr}};
  for (const auto& s : r.suggestions)
    j["suggestions"].push_back({{"category", to_string(s.category)}, {"parameter", s.parameter}, {"text", s.text}});
  if (r.suggested_revision) j["suggested_revision"] = *r.suggested_revision;
}

void from_json(const nlohmann::json& j, FeedbackReport& r) {
  r.suggestions.clear();
  for (const auto& s : j.at("suggestions"))
    r.suggestions.push_back({parse_feedback_category(s.at("category").get<std::string>()),
                             s.value("parameter", ""), s.at("text").get<std::string>()});
  r.suggested_revision.reset();
  if (j.contains("suggested_revision") && !j["suggested_revision"].is_null())
    r.suggested_revision = j["suggested_revision"].get<std::string>();
}

void to_json(nlohmann::json& j, const Attempt& a) {
  j = nlohmann::json{
      {"task_id", a.task_id},
      {"submitted_text", a.submitted_text},
      {"evaluation", a.evaluation},
      {"consult_count", a.consult_count},
      {"revision_index", a.revision_index},
      {"started_at", a.started_at},
      {"submitted_at", a.submitted_at},
      {"feedback", nullptr},
  };
  if (a.feedback) j["feedback"] = *a.feedback;
}

void to_json(nlohmann::json& j, const Consultation& c) {
  j = nlohmann::json{{"task_id", c.task_id}, {"role_id", c.role_id}, {"at", c.at}, {"terms", c.terms}};
}

void to_json(nlohmann::json& j, const Session& s) {
  j = nlohmann::json{
      {"session_id", s.session_id},
      {"participant_id", s.participant_id},
      {"condition", to_string(s.condition)},
      {"group", group_number(s.condition)},
      {"curriculum_version", s.curriculum_version},
      {"state", s.state},
      {"current_task_index", s.current_task_index},
      {"task_started_at", s.task_started_at},
      {"attempts", s.attempts},
      {"consultations", s.consultations},
      {"created_at", s.created_at},
      {"updated_at", s.updated_at},
      {"version", s.version},
  };
}

void to_json(nlohmann::json& j, const Event& e) {
  j = nlohmann::json{{"seq", e.seq},
                     {"timestamp", e.timestamp},
                     {"session_id", e.session_id},
                     {"kind", to_string(e.kind)},
                     {"payload", e.payload}};
}

void from_json(const nlohmann::json& j, Event& e) {
  e.seq = j.at("seq").get<std::uint64_t>();
  e.timestamp = j.at("timestamp").get<Timestamp>();
  e.session_id = j.at("session_id").get<std::string>();
  e.kind = parse_event_kind(j.at("kind").get<std::string>());
  e.payload = j.value("payload", nlohmann::json::object());
}

void to_json(nlohmann::json& j, const ResultReport& r) {
  j = nlohmann::json{
      {"task_id", r.task_id},
      {"hidden_prompt", r.hidden_prompt},
      {"candidate_prompt", r.candidate_prompt},
      {"candidate_word_count", r.candidate_word_count},
      {"reference_word_count", r.reference_word_count},
      {"similarity_pct", r.similarity_pct},
      {"concreteness_score", nullptr},
      {"concreteness_category", nullptr},
  };
  if (r.concreteness_score) j["concreteness_score"] = *r.concreteness_score;
  if (r.concreteness_category) j["concreteness_category"] = metrics::to_string(*r.concreteness_category);
}

void to_json(nlohmann::json& j, const FinalRow& r) {
  j = nlohmann::json{{"task_id", r.task_id},         {"word_count", r.word_count},
                     {"elapsed_minutes", r.elapsed_minutes}, {"similarity_pct", r.similarity_pct},
                     {"concreteness", nullptr},      {"consult_count", r.consult_count},
                     {"revisions", r.revisions}};
  if (r.concreteness) j["concreteness"] = *r.concreteness;
}

void to_json(nlohmann::json& j, const FinalReport& r) {
  j = nlohmann::json{{"session_id", r.session_id},
                     {"participant_id", r.participant_id},
                     {"condition", to_string(r.condition)},
                     {"rows", r.rows},
                     {"history", r.history}};
}

std::string session_record(const Session& s) { return nlohmann::json(s).dump(); }

}  // namespace archiprompt::session
