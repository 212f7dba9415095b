#pragma once

// Scripted four-task student run over the bundled curriculum, shared by the
// session tests and the acceptance checks.

#include <string>
#include <vector>

#include "archiprompt/curriculum.hpp"
#include "archiprompt/genai.hpp"
#include "archiprompt/metrics.hpp"
#include "archiprompt/personas.hpp"
#include "archiprompt/session.hpp"

namespace test {

struct Bundle {
  archiprompt::curriculum::Curriculum curriculum;
  archiprompt::metrics::Lexicon lexicon;
  archiprompt::personas::PersonaRegistry personas;
  archiprompt::genai::MockClient client;

  explicit Bundle(const std::filesystem::path& root)
      : curriculum(archiprompt::curriculum::load_curriculum(root / "curriculum.yaml")),
        lexicon(archiprompt::metrics::load_lexicon(root / "lexicon_mini.tsv").lexicon),
        personas(archiprompt::personas::PersonaRegistry::load(root / "personas.yaml")) {}

  archiprompt::session::Engine engine() {
    return archiprompt::session::Engine(curriculum, lexicon, personas, client, archiprompt::personas::Mode::mock);
  }
};

// Student prompts that fit each bundled module's word limits.
inline const std::vector<std::string> kFirstDrafts = {
    "A tropical villa rendered in watercolor located on a coastal cliff.",
    "A modern house made of bamboo and recycled steel, rendered in a minimalist watercolor style, set in a lush "
    "tropical forest by a calm river at dusk.",
    "A futuristic skyscraper of glass and steel rendered as a digital painting, set in a neon city at night with "
    "blue and purple lighting, ultra detailed at 150 DPI resolution for print.",
    "A community library built from rammed earth and timber, rendered in a soft watercolor, set in a village square "
    "where families gather for a market, with green roofs and passive solar design and warm afternoon light.",
};

inline const std::string kRevision =
    "A tropical villa rendered in watercolor located on a steep coastal cliff above the sea.";

struct Run {
  std::vector<archiprompt::session::Event> events;
  archiprompt::session::Session session;
};

// Plays the whole curriculum. Group 1 consults a persona on every task;
// groups with feedback revise the first task once. Each step advances the
// clock by `step_ms`.
inline Run play_session(const archiprompt::session::Engine& engine, archiprompt::session::GroupCondition condition,
                        const std::string& session_id, archiprompt::session::Timestamp t0,
                        archiprompt::session::Timestamp step_ms = 30000) {
  using namespace archiprompt::session;
  Run run;
  Timestamp now = t0;
  auto record = [&](Step step) {
    run.events.push_back(step.event);
    run.session = std::move(step.session);
    now += step_ms;
  };
  record(engine.create_session(session_id, "participant-" + session_id, condition, now));
  const auto& cur = engine.curriculum();
  for (std::size_t i = 0; i < cur.task_count(); ++i) {
    if (run.session.state.kind == StateKind::intro)
      record(engine.advance(run.session, EventKind::proceed, nlohmann::json::object(), now));
    if (run.session.state.kind == StateKind::tip_shown)
      record(engine.advance(run.session, EventKind::start_task, nlohmann::json::object(), now));
    if (allows_consult(condition)) record(engine.consult(run.session, "sustainability_consultant", now));
    record(engine.submit_prompt(run.session, kFirstDrafts[i], now));
    if (i == 0 && allows_feedback(condition)) {
      record(engine.advance(run.session, EventKind::get_feedback, nlohmann::json::object(), now));
      record(engine.submit_prompt(run.session, kRevision, now));
    }
    record(engine.result_report(run.session, now));
    record(engine.advance(run.session, EventKind::next, nlohmann::json::object(), now));
  }
  return run;
}

// The same run as terminal input for `tutor run`.
inline std::string tutor_script(archiprompt::session::GroupCondition condition) {
  using namespace archiprompt::session;
  std::string s;
  if (shows_tips(condition)) s += "/proceed\n";
  for (std::size_t i = 0; i < kFirstDrafts.size(); ++i) {
    if (shows_tips(condition)) s += "/start\n";
    if (allows_consult(condition)) s += "/consult sustainability_consultant\n";
    s += kFirstDrafts[i] + "\n";
    if (i == 0 && allows_feedback(condition)) s += "/feedback\n" + kRevision + "\n";
    s += "/result\n/next\n";
  }
  return s;
}

}  // namespace test
