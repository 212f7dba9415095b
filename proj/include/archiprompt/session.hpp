#pragma once

// The student tutoring loop as an event-sourced state machine.
//
//   Intro --proceed--> TipShown(m) --start_task--> TaskShown(t)
//   TaskShown --consult[role]--> TaskShown            (group 1 only)
//   TaskShown --submit--> AwaitingChoice
//   AwaitingChoice --get_feedback--> Revising         (groups 1 and 2)
//   AwaitingChoice --show_result--> ResultShown
//   Revising --resubmit--> AwaitingChoice
//   ResultShown --next--> TipShown(next module) | TaskShown(next task) | Completed
//
// A Session is a pure left fold of its events (Engine::apply). Anything
// nondeterministic (timestamps, persona terms, feedback produced by a live
// model) is captured in the event payload before it is applied, so replaying
// a log always rebuilds the same record.

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "archiprompt/curriculum.hpp"
#include "archiprompt/errors.hpp"
#include "archiprompt/genai.hpp"
#include "archiprompt/metrics.hpp"
#include "archiprompt/personas.hpp"

namespace archiprompt::session {

ARCHIPROMPT_DEFINE_ERROR(InvalidCondition, validation);
ARCHIPROMPT_DEFINE_ERROR(IllegalTransition, illegal_transition);
ARCHIPROMPT_DEFINE_ERROR(ConsultNotAllowed, illegal_transition);
ARCHIPROMPT_DEFINE_ERROR(IllegalState, illegal_transition);
ARCHIPROMPT_DEFINE_ERROR(SessionNotCompleted, illegal_transition);
ARCHIPROMPT_DEFINE_ERROR(WordLimitViolation, word_limit);
ARCHIPROMPT_DEFINE_ERROR(VersionConflict, conflict);
ARCHIPROMPT_DEFINE_ERROR(ReplayError, validation);
ARCHIPROMPT_DEFINE_ERROR(InvalidPayload, validation);

/// Milliseconds since the Unix epoch.
using Timestamp = std::int64_t;

enum class GroupCondition {
  group1_guide_and_personas,
  group2_guide_only,
  group3_control,
};

std::string_view to_string(GroupCondition c);
/// Accepts the full names and the short forms group1/group2/group3.
/// Throws InvalidCondition.
GroupCondition parse_condition(std::string_view name);
int group_number(GroupCondition c);
bool shows_tips(GroupCondition c);
bool allows_consult(GroupCondition c);
bool allows_feedback(GroupCondition c);

enum class StateKind { intro, tip_shown, task_shown, awaiting_choice, revising, result_shown, completed };

std::string_view to_string(StateKind k);

struct State {
  StateKind kind = StateKind::intro;
  // Module id for tip_shown, task index for the task states, 0 otherwise.
  std::size_t index = 0;

  friend bool operator==(const State&, const State&) = default;
};

enum class FeedbackCategory { expand_environment, add_medium_style, highlight_features, vocabulary, length };

std::string_view to_string(FeedbackCategory c);

struct FeedbackSuggestion {
  FeedbackCategory category;
  std::string parameter;  // rubric parameter it refers to, may be empty
  std::string text;

  friend bool operator==(const FeedbackSuggestion&, const FeedbackSuggestion&) = default;
};

struct FeedbackReport {
  std::vector<FeedbackSuggestion> suggestions;
  std::optional<std::string> suggested_revision;

  friend bool operator==(const FeedbackReport&, const FeedbackReport&) = default;
};

struct Attempt {
  std::string task_id;
  std::string submitted_text;
  metrics::PromptEvaluation evaluation;
  int consult_count = 0;
  int revision_index = 0;
  Timestamp started_at = 0;
  Timestamp submitted_at = 0;
  std::optional<FeedbackReport> feedback;
};

struct Consultation {
  std::string task_id;
  std::string role_id;
  Timestamp at = 0;
  std::vector<personas::ParameterTerms> terms;
};

struct Session {
  std::string session_id;
  std::string participant_id;
  GroupCondition condition = GroupCondition::group1_guide_and_personas;
  std::string curriculum_version;
  State state;
  std::size_t current_task_index = 0;
  Timestamp task_started_at = 0;  // first display of the current task
  std::vector<Attempt> attempts;
  std::vector<Consultation> consultations;
  Timestamp created_at = 0;
  Timestamp updated_at = 0;
  std::uint64_t version = 0;  // number of applied events

  /// Attempts on the current task, oldest first.
  std::vector<const Attempt*> attempts_for(std::string_view task_id) const;
  int consults_for(std::string_view task_id) const;
};

enum class EventKind { created, proceed, start_task, consult, submit, get_feedback, show_result, resubmit, next };

std::string_view to_string(EventKind k);
/// Throws IllegalTransition for unknown names.
EventKind parse_event_kind(std::string_view name);

struct Event {
  std::uint64_t seq = 0;  // session version after this event
  Timestamp timestamp = 0;
  std::string session_id;
  EventKind kind = EventKind::created;
  nlohmann::json payload = nlohmann::json::object();
};

struct ResultReport {
  std::string task_id;
  std::string hidden_prompt;
  std::string candidate_prompt;
  std::size_t candidate_word_count = 0;
  std::size_t reference_word_count = 0;
  double similarity_pct = 0.0;
  std::optional<double> concreteness_score;
  std::optional<metrics::ConcretenessCategory> concreteness_category;
};

struct FinalRow {
  std::string task_id;
  std::size_t word_count = 0;
  double elapsed_minutes = 0.0;
  double similarity_pct = 0.0;
  std::optional<double> concreteness;
  int consult_count = 0;
  int revisions = 0;
};

struct FinalReport {
  std::string session_id;
  std::string participant_id;
  GroupCondition condition;
  std::vector<FinalRow> rows;
  std::vector<Attempt> history;
};

/// What one engine step produced besides the new session.
struct Step {
  Session session;
  Event event;
  std::optional<metrics::PromptEvaluation> evaluation;
  std::vector<personas::ParameterTerms> vocabulary;
  std::optional<FeedbackReport> feedback;
  std::optional<ResultReport> result;
};

class Engine {
 public:
  /// Throws ConfigError when the curriculum does not validate.
  Engine(const curriculum::Curriculum& curriculum, const metrics::Lexicon& lexicon,
         const personas::PersonaRegistry& personas, genai::Client& client, personas::Mode mode);

  Step create_session(std::string session_id, std::string participant_id, GroupCondition condition,
                      Timestamp now) const;

  /// Validates `input` against the current state, captures any
  /// nondeterministic data into the event payload and applies it. Throws
  /// without touching `session` when the event is not legal.
  Step advance(const Session& session, EventKind kind, const nlohmann::json& input, Timestamp now) const;

  Step submit_prompt(const Session& session, std::string_view text, Timestamp now) const;
  Step consult(const Session& session, std::string_view role_id, Timestamp now) const;
  /// AwaitingChoice -> ResultShown; Step::result carries the report.
  Step result_report(const Session& session, Timestamp now) const;

  /// Rule-based feedback on the latest attempt of the current task.
  /// Requires AwaitingChoice or Revising.
  FeedbackReport feedback_report(const Session& session) const;
  /// Report for the revealed task; requires ResultShown.
  ResultReport current_result(const Session& session) const;
  /// Requires Completed.
  FinalReport final_report(const Session& session) const;

  /// Pure fold step used both live and on replay.
  Session apply(Session session, const Event& event) const;
  Session replay(const std::vector<Event>& events) const;

  const curriculum::Curriculum& curriculum() const noexcept { return curriculum_; }
  const metrics::Lexicon& lexicon() const noexcept { return lexicon_; }
  const personas::PersonaRegistry& personas() const noexcept { return personas_; }
  personas::Mode mode() const noexcept { return mode_; }

  /// The image shown for a task: the curriculum's ref, or a generated one.
  std::string task_image_ref(const curriculum::TaskSpec& task) const;

 private:
  ResultReport build_result(const Session& session) const;
  const curriculum::TaskSpec& current_task(const Session& session) const;

  const curriculum::Curriculum& curriculum_;
  const metrics::Lexicon& lexicon_;
  const personas::PersonaRegistry& personas_;
  genai::Client& client_;
  personas::Mode mode_;
  mutable std::mutex image_mutex_;
  mutable std::map<std::string, std::string> image_cache_;
};

/// Rule-based suggestions for one candidate against a task. Exposed for
/// testing; Engine::feedback_report adds persona vocabulary and the
/// optional model revision on top.
std::vector<FeedbackSuggestion> rubric_feedback(std::string_view candidate, const curriculum::TaskSpec& task,
                                                const curriculum::RubricModule& module,
                                                double similarity_pct);

void to_json(nlohmann::json& j, const State& s);
void to_json(nlohmann::json& j, const FeedbackReport& r);
void from_json(const nlohmann::json& j, FeedbackReport& r);
void to_json(nlohmann::json& j, const Attempt& a);
void to_json(nlohmann::json& j, const Consultation& c);
void to_json(nlohmann::json& j, const Session& s);
void to_json(nlohmann::json& j, const Event& e);
void from_json(const nlohmann::json& j, Event& e);
void to_json(nlohmann::json& j, const ResultReport& r);
void to_json(nlohmann::json& j, const FinalRow& r);
void to_json(nlohmann::json& j, const FinalReport& r);

/// Canonical serialized session record (stable key order, full precision).
std::string session_record(const Session& s);

/// Append-only JSONL log, one event per line.
class EventLog {
 public:
  explicit EventLog(std::filesystem::path path) : path_(std::move(path)) {}

  /// Appends and flushes to disk before returning.
  void append(const Event& event) const;
  std::vector<Event> read() const;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace archiprompt::session
