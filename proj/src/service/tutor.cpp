#include <cstdio>
#include <istream>
#include <ostream>

#include "archiprompt/service.hpp"

namespace archiprompt::service {
namespace {

using session::EventKind;
using session::StateKind;

std::string fixed(double v, int decimals) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class Tutor {
 public:
  Tutor(SessionStore& store, std::ostream& out) : store_(store), engine_(store.engine()), out_(out) {}

  void start(const TutorOptions& options) {
    auto step = store_.create(options.participant_id, options.condition, options.session_id);
    session_ = step.session;
    out_ << "Session " << session_.session_id << " (group " << session::group_number(session_.condition) << ")\n";
    render();
  }

  bool done() const { return session_.state.kind == StateKind::completed; }

  // Returns false on /quit.
  bool handle(const std::string& raw) {
    const auto line = trim(raw);
    if (line.empty()) return true;
    if (line == "/quit") return false;
    try {
      if (line == "/help") {
        help();
      } else if (line == "/proceed") {
        advance(EventKind::proceed);
      } else if (line == "/start") {
        advance(EventKind::start_task);
      } else if (line == "/feedback") {
        advance(EventKind::get_feedback);
      } else if (line == "/result") {
        advance(EventKind::show_result);
      } else if (line == "/next") {
        advance(EventKind::next);
      } else if (line == "/personas") {
        for (const auto& p : engine_.personas().list()) out_ << "  " << p.role_id << "  " << p.display_name << '\n';
      } else if (line.rfind("/consult", 0) == 0) {
        advance(EventKind::consult, {{"role_id", trim(line.substr(8))}});
      } else if (line[0] == '/') {
        out_ << "! unknown command " << line << " (try /help)\n";
      } else {
        const auto kind = session_.state.kind == StateKind::revising ? EventKind::resubmit : EventKind::submit;
        advance(kind, {{"text", line}});
      }
    } catch (const Error& e) {
      out_ << "! " << e.what() << '\n';
    }
    return true;
  }

 private:
  void advance(EventKind kind, const nlohmann::json& input = nlohmann::json::object()) {
    auto step = store_.apply(session_.session_id, session_.version, kind, input);
    session_ = step.session;
    if (step.evaluation) show_evaluation(*step.evaluation);
    if (!step.vocabulary.empty()) {
      out_ << "Vocabulary from " << input.value("role_id", "") << ":\n";
      for (const auto& pt : step.vocabulary) {
        out_ << "  " << pt.parameter << ":";
        for (std::size_t i = 0; i < pt.terms.size(); ++i) out_ << (i ? ", " : " ") << pt.terms[i];
        out_ << '\n';
      }
    }
    if (step.feedback) show_feedback(*step.feedback);
    if (step.result) show_result(*step.result);
    render();
  }

  void show_evaluation(const metrics::PromptEvaluation& e) {
    out_ << "Your prompt: " << e.word_count << " words, " << fixed(e.elapsed_minutes, 1) << " min\n";
  }

  void show_feedback(const session::FeedbackReport& f) {
    out_ << "Feedback:\n";
    if (f.suggestions.empty()) out_ << "  Nothing is missing.\n";
    for (const auto& s : f.suggestions) out_ << "  - " << s.text << '\n';
    if (f.suggested_revision) out_ << "  Suggested revision: " << *f.suggested_revision << '\n';
  }

  void show_result(const session::ResultReport& r) {
    out_ << "Result for " << r.task_id << ":\n"
         << "  Original prompt: " << r.hidden_prompt << '\n'
         << "  Your prompt: " << r.candidate_prompt << '\n'
         << "  Word count: " << r.candidate_word_count << " (original " << r.reference_word_count << ")\n"
         << "  Similarity: " << fixed(r.similarity_pct, 1) << "%\n"
         << "  Concreteness: "
         << (r.concreteness_score ? fixed(*r.concreteness_score, 2) + " (" +
                                        std::string(metrics::display_name(*r.concreteness_category)) + ")"
                                  : std::string("n/a"))
         << '\n';
  }

  void render() {
    const auto& cur = engine_.curriculum();
    switch (session_.state.kind) {
      case StateKind::intro:
        out_ << "\nA strong architectural prompt names a subject, a medium and an environment, then adds detail.\n"
             << "Type /proceed to see the first tip.\n";
        break;
      case StateKind::tip_shown: {
        const auto* m = cur.find_module(static_cast<int>(session_.state.index));
        out_ << "\nTip " << m->id << ": " << m->name << '\n' << "  " << m->tip_text << '\n'
             << "  Example: " << m->tip_example_prompt << '\n'
             << "Type /start to begin the task.\n";
        break;
      }
      case StateKind::task_shown: {
        const auto& task = curriculum::get_task(cur, session_.current_task_index);
        const auto& m = cur.module_for(task);
        out_ << "\nTask " << session_.current_task_index + 1 << " of " << cur.task_count() << " [" << task.task_id
             << "]\n"
             << "  Image: " << engine_.task_image_ref(task) << '\n'
             << "  Structure: " << task.prompt_pattern << '\n'
             << "  Length: " << m.word_min << "-" << m.word_max << " words\n";
        if (session::allows_consult(session_.condition))
          out_ << "Type your prompt, or /consult <role> for vocabulary (/personas lists roles).\n";
        else
          out_ << "Type your prompt.\n";
        break;
      }
      case StateKind::awaiting_choice:
        if (session::allows_feedback(session_.condition))
          out_ << "Type /feedback to revise or /result to see the original prompt.\n";
        else
          out_ << "Type /result to see the original prompt.\n";
        break;
      case StateKind::revising:
        out_ << "Type a revised prompt, or /result.\n";
        break;
      case StateKind::result_shown:
        out_ << "Type /next to continue.\n";
        break;
      case StateKind::completed: {
        const auto report = engine_.final_report(session_);
        out_ << "\nAll tasks completed.\n"
             << "task      words  minutes  similarity  concreteness  consults  revisions\n";
        for (const auto& r : report.rows) {
          char buf[160];
          std::snprintf(buf, sizeof buf, "%-8s %6zu %8.2f %11.1f %13s %9d %10d\n", r.task_id.c_str(), r.word_count,
                        r.elapsed_minutes, r.similarity_pct,
                        r.concreteness ? fixed(*r.concreteness, 2).c_str() : "n/a", r.consult_count, r.revisions);
          out_ << buf;
        }
        break;
      }
    }
  }

  void help() {
    out_ << "Commands: /proceed /start /consult <role> /personas /feedback /result /next /quit\n"
         << "Any other line is submitted as your prompt.\n";
  }

  SessionStore& store_;
  const session::Engine& engine_;
  std::ostream& out_;
  session::Session session_;
};

}  // namespace

int run_tutor(SessionStore& store, const TutorOptions& options, std::istream& in, std::ostream& out) {
  Tutor tutor(store, out);
  tutor.start(options);
  std::string line;
  while (!tutor.done() && std::getline(in, line)) {
    if (!tutor.handle(line)) break;
  }
  out.flush();
  return tutor.done() ? 0 : 1;
}

}  // namespace archiprompt::service
