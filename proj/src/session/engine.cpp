#include <algorithm>

#include "archiprompt/session.hpp"

namespace archiprompt::session {
namespace {

[[noreturn]] void illegal(const State& state, EventKind kind) {
  throw IllegalTransition(
      "event '" + std::string(to_string(kind)) + "' is not allowed in state '" + std::string(to_string(state.kind)) + "'",
      {{"state", to_string(state.kind)}, {"event", to_string(kind)}});
}

void require_state(const State& state, StateKind expected, EventKind kind) {
  if (state.kind != expected) illegal(state, kind);
}

std::string required_text(const nlohmann::json& input) {
  if (!input.is_object() || !input.contains("text") || !input["text"].is_string())
    throw InvalidPayload("payload needs a string 'text' field");
  return input["text"].get<std::string>();
}

double minutes_between(Timestamp from, Timestamp to) {
  return static_cast<double>(std::max<Timestamp>(0, to - from)) / 60000.0;
}

}  // namespace

Engine::Engine(const curriculum::Curriculum& curriculum, const metrics::Lexicon& lexicon,
               const personas::PersonaRegistry& personas, genai::Client& client, personas::Mode mode)
    : curriculum_(curriculum), lexicon_(lexicon), personas_(personas), client_(client), mode_(mode) {
  auto violations = curriculum::validate_curriculum(curriculum_);
  if (!violations.empty()) {
    nlohmann::json detail = nlohmann::json::array();
    for (const auto& v : violations) detail.push_back({{"subject", v.subject}, {"rule", v.rule}, {"message", v.message}});
    throw ConfigError("curriculum is invalid: " + violations.front().subject + ": " + violations.front().message,
                      detail);
  }
}

const curriculum::TaskSpec& Engine::current_task(const Session& session) const {
  return curriculum::get_task(curriculum_, session.current_task_index);
}

std::string Engine::task_image_ref(const curriculum::TaskSpec& task) const {
  if (!task.image_ref.empty()) return task.image_ref;
  if (mode_ == personas::Mode::mock || client_.provider() == genai::Provider::mock)
    return genai::MockClient::image_id_for(task.hidden_prompt);
  std::lock_guard lock(image_mutex_);
  auto it = image_cache_.find(task.task_id);
  if (it != image_cache_.end()) return it->second;
  genai::GenRequest req;
  req.kind = genai::Kind::image;
  req.user_content = task.hidden_prompt;
  auto ref = client_.generate_image(req).content;
  image_cache_.emplace(task.task_id, ref);
  return ref;
}

Session Engine::apply(Session s, const Event& e) const {
  if (e.seq != s.version + 1)
    throw ReplayError("event seq " + std::to_string(e.seq) + " does not follow version " + std::to_string(s.version));
  if (e.kind != EventKind::created && e.session_id != s.session_id)
    throw ReplayError("event belongs to session " + e.session_id);
  const Timestamp ts = e.timestamp;

  switch (e.kind) {
    case EventKind::created: {
      if (s.version != 0) illegal(s.state, e.kind);
      s.session_id = e.session_id;
      s.participant_id = e.payload.at("participant_id").get<std::string>();
      s.condition = parse_condition(e.payload.at("condition").get<std::string>());
      s.curriculum_version = e.payload.at("curriculum_version").get<std::string>();
      if (s.curriculum_version != curriculum_.version)
        throw ReplayError("session was recorded against curriculum " + s.curriculum_version + ", loaded " +
                          curriculum_.version);
      s.created_at = ts;
      s.current_task_index = 0;
      if (shows_tips(s.condition)) {
        s.state = {StateKind::intro, 0};
      } else {
        s.state = {StateKind::task_shown, 0};
        s.task_started_at = ts;
      }
      break;
    }
    case EventKind::proceed: {
      require_state(s.state, StateKind::intro, e.kind);
      s.state = {StateKind::tip_shown, static_cast<std::size_t>(current_task(s).module_id)};
      break;
    }
    case EventKind::start_task: {
      require_state(s.state, StateKind::tip_shown, e.kind);
      s.state = {StateKind::task_shown, s.current_task_index};
      s.task_started_at = ts;
      break;
    }
    case EventKind::consult: {
      if (!allows_consult(s.condition))
        throw ConsultNotAllowed("persona consultation is not available for " + std::string(to_string(s.condition)),
                                {{"condition", to_string(s.condition)}});
      require_state(s.state, StateKind::task_shown, e.kind);
      Consultation c;
      c.task_id = current_task(s).task_id;
      c.role_id = e.payload.at("role_id").get<std::string>();
      c.at = ts;
      c.terms = e.payload.value("terms", std::vector<personas::ParameterTerms>{});
      s.consultations.push_back(std::move(c));
      break;
    }
    case EventKind::submit:
    case EventKind::resubmit: {
      require_state(s.state, e.kind == EventKind::submit ? StateKind::task_shown : StateKind::revising, e.kind);
      const auto& task = current_task(s);
      const auto text = required_text(e.payload);
      auto verdict = curriculum::check_word_limit(text, curriculum_.module_for(task));
      if (!verdict.ok())
        throw WordLimitViolation("prompt is " + std::string(curriculum::to_string(verdict.kind)) + " (" +
                                     std::to_string(verdict.count) + " words)",
                                 {{"verdict", curriculum::to_string(verdict.kind)},
                                  {"count", verdict.count},
                                  {"word_min", curriculum_.module_for(task).word_min},
                                  {"word_max", curriculum_.module_for(task).word_max}});
      Attempt a;
      a.task_id = task.task_id;
      a.submitted_text = text;
      a.started_at = s.task_started_at;
      a.submitted_at = ts;
      a.evaluation = metrics::evaluate(text, task.hidden_prompt, lexicon_, minutes_between(a.started_at, ts));
      a.consult_count = s.consults_for(task.task_id);
      a.revision_index = static_cast<int>(s.attempts_for(task.task_id).size());
      s.attempts.push_back(std::move(a));
      s.state = {StateKind::awaiting_choice, s.current_task_index};
      break;
    }
    case EventKind::get_feedback: {
      require_state(s.state, StateKind::awaiting_choice, e.kind);
      if (!allows_feedback(s.condition)) illegal(s.state, e.kind);
      s.attempts.back().feedback = e.payload.at("report").get<FeedbackReport>();
      s.state = {StateKind::revising, s.current_task_index};
      break;
    }
    case EventKind::show_result: {
      require_state(s.state, StateKind::awaiting_choice, e.kind);
      s.state = {StateKind::result_shown, s.current_task_index};
      break;
    }
    case EventKind::next: {
      require_state(s.state, StateKind::result_shown, e.kind);
      const int module_before = current_task(s).module_id;
      if (s.current_task_index + 1 >= curriculum_.task_count()) {
        s.state = {StateKind::completed, 0};
        break;
      }
      ++s.current_task_index;
      const int module_after = current_task(s).module_id;
      if (shows_tips(s.condition) && module_after != module_before) {
        s.state = {StateKind::tip_shown, static_cast<std::size_t>(module_after)};
      } else {
        s.state = {StateKind::task_shown, s.current_task_index};
        s.task_started_at = ts;
      }
      break;
    }
  }

  s.version = e.seq;
  s.updated_at = ts;
  return s;
}

Session Engine::replay(const std::vector<Event>& events) const {
  if (events.empty() || events.front().kind != EventKind::created)
    throw ReplayError("event log must start with a 'created' event");
  Session s;
  for (const auto& e : events) s = apply(std::move(s), e);
  return s;
}

Step Engine::create_session(std::string session_id, std::string participant_id, GroupCondition condition,
                            Timestamp now) const {
  Event e;
  e.seq = 1;
  e.timestamp = now;
  e.session_id = std::move(session_id);
  e.kind = EventKind::created;
  e.payload = {{"participant_id", std::move(participant_id)},
               {"condition", to_string(condition)},
               {"curriculum_version", curriculum_.version}};
  Step step;
  step.session = apply(Session{}, e);
  step.event = std::move(e);
  return step;
}

Step Engine::advance(const Session& session, EventKind kind, const nlohmann::json& input, Timestamp now) const {
  if (kind == EventKind::created) illegal(session.state, kind);

  Event e;
  e.seq = session.version + 1;
  e.timestamp = std::max(now, session.updated_at);
  e.session_id = session.session_id;
  e.kind = kind;

  Step step;
  switch (kind) {
    case EventKind::consult: {
      if (!allows_consult(session.condition))
        throw ConsultNotAllowed("persona consultation is not available for " +
                                    std::string(to_string(session.condition)),
                                {{"condition", to_string(session.condition)}});
      require_state(session.state, StateKind::task_shown, kind);
      if (!input.is_object() || !input.contains("role_id") || !input["role_id"].is_string())
        throw InvalidPayload("consult needs a string 'role_id'");
      const auto role = input["role_id"].get<std::string>();
      step.vocabulary = personas::suggest_vocabulary(personas_, role, current_task(session), curriculum_, mode_, &client_);
      e.payload = {{"role_id", role}, {"terms", step.vocabulary}};
      break;
    }
    case EventKind::submit:
    case EventKind::resubmit:
      e.payload = {{"text", required_text(input)}};
      break;
    case EventKind::get_feedback: {
      require_state(session.state, StateKind::awaiting_choice, kind);
      if (!allows_feedback(session.condition)) illegal(session.state, kind);
      step.feedback = feedback_report(session);
      e.payload = {{"report", *step.feedback}};
      break;
    }
    default:
      break;
  }

  step.session = apply(session, e);
  step.event = std::move(e);
  if (kind == EventKind::submit || kind == EventKind::resubmit) step.evaluation = step.session.attempts.back().evaluation;
  if (kind == EventKind::show_result) step.result = build_result(step.session);
  return step;
}

Step Engine::submit_prompt(const Session& session, std::string_view text, Timestamp now) const {
  const auto kind = session.state.kind == StateKind::revising ? EventKind::resubmit : EventKind::submit;
  return advance(session, kind, {{"text", text}}, now);
}

Step Engine::consult(const Session& session, std::string_view role_id, Timestamp now) const {
  return advance(session, EventKind::consult, {{"role_id", role_id}}, now);
}

Step Engine::result_report(const Session& session, Timestamp now) const {
  if (session.state.kind != StateKind::awaiting_choice)
    throw IllegalState("results are revealed from the choice screen only",
                       {{"state", to_string(session.state.kind)}});
  return advance(session, EventKind::show_result, nlohmann::json::object(), now);
}

ResultReport Engine::build_result(const Session& session) const {
  const auto& task = current_task(session);
  auto attempts = session.attempts_for(task.task_id);
  if (attempts.empty()) throw IllegalState("no submission for the current task");
  const Attempt& a = *attempts.back();
  ResultReport r;
  r.task_id = task.task_id;
  r.hidden_prompt = task.hidden_prompt;
  r.candidate_prompt = a.submitted_text;
  r.candidate_word_count = a.evaluation.word_count;
  r.reference_word_count = metrics::word_count(task.hidden_prompt);
  r.similarity_pct = a.evaluation.similarity_pct;
  r.concreteness_score = a.evaluation.concreteness_score;
  r.concreteness_category = a.evaluation.concreteness_category;
  return r;
}

ResultReport Engine::current_result(const Session& session) const {
  if (session.state.kind != StateKind::result_shown)
    throw IllegalState("the result is only available after it has been revealed",
                       {{"state", to_string(session.state.kind)}});
  return build_result(session);
}

FinalReport Engine::final_report(const Session& session) const {
  if (session.state.kind != StateKind::completed)
    throw SessionNotCompleted("session " + session.session_id + " is not completed",
                              {{"state", to_string(session.state.kind)}});
  FinalReport r;
  r.session_id = session.session_id;
  r.participant_id = session.participant_id;
  r.condition = session.condition;
  r.history = session.attempts;
  for (const auto& task : curriculum_.tasks) {
    auto attempts = session.attempts_for(task.task_id);
    if (attempts.empty()) continue;
    // One row per task from the final attempt.
    const Attempt& last = *attempts.back();
    FinalRow row;
    row.task_id = task.task_id;
    row.word_count = last.evaluation.word_count;
    row.elapsed_minutes = last.evaluation.elapsed_minutes;
    row.similarity_pct = last.evaluation.similarity_pct;
    row.concreteness = last.evaluation.concreteness_score;
    row.consult_count = last.consult_count;
    row.revisions = last.revision_index;
    r.rows.push_back(std::move(row));
  }
  return r;
}

}  // namespace archiprompt::session
