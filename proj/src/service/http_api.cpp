#include <csignal>
#include <ostream>

#include <httplib.h>

#include "archiprompt/service.hpp"

namespace archiprompt::service {
namespace {

using session::EventKind;
using session::StateKind;

constexpr const char* kJson = "application/json";

std::vector<std::string> allowed_events(const session::Session& s) {
  switch (s.state.kind) {
    case StateKind::intro: return {"proceed"};
    case StateKind::tip_shown: return {"start_task"};
    case StateKind::task_shown:
      if (session::allows_consult(s.condition)) return {"consult", "submit"};
      return {"submit"};
    case StateKind::awaiting_choice:
      if (session::allows_feedback(s.condition)) return {"get_feedback", "show_result"};
      return {"show_result"};
    case StateKind::revising: return {"resubmit", "show_result"};
    case StateKind::result_shown: return {"next"};
    case StateKind::completed: return {};
  }
  return {};
}

void send_json(httplib::Response& res, const nlohmann::json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, const Error& e) {
  send_json(res, api_error(e), http_status(e.code()));
}

nlohmann::json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  auto j = nlohmann::json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw session::InvalidPayload("request body must be a JSON object");
  return j;
}

std::optional<std::uint64_t> version_of(const nlohmann::json& body, bool required) {
  if (!body.contains("version")) {
    if (required) throw session::InvalidPayload("version is required", {{"field", "version"}});
    return std::nullopt;
  }
  if (!body["version"].is_number_unsigned())
    throw session::InvalidPayload("version must be a nonnegative integer", {{"field", "version"}});
  return body["version"].get<std::uint64_t>();
}

std::string string_field(const nlohmann::json& body, const char* name) {
  if (!body.contains(name) || !body[name].is_string())
    throw session::InvalidPayload(std::string(name) + " must be a string", {{"field", name}});
  return body[name].get<std::string>();
}

nlohmann::json step_body(const session::Engine& engine, const session::Step& step) {
  nlohmann::json out{{"session", step.session}, {"view", session_view(engine, step.session)}};
  if (step.evaluation) out["evaluation"] = *step.evaluation;
  if (!step.vocabulary.empty()) out["vocabulary"] = step.vocabulary;
  if (step.feedback) out["feedback"] = *step.feedback;
  if (step.result) out["result"] = *step.result;
  return out;
}

// Runs a handler, turning library errors into ApiError responses.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const nlohmann::json::exception& e) {
      send_error(res, session::InvalidPayload(e.what()));
    }
  };
}

std::atomic<httplib::Server*> g_server{nullptr};

extern "C" void on_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}

}  // namespace

nlohmann::json api_error(const Error& e) {
  nlohmann::json body{{"code", to_string(e.code())}, {"message", e.what()}};
  if (!e.detail().is_null()) body["detail"] = e.detail();
  return body;
}

nlohmann::json session_view(const session::Engine& engine, const session::Session& s) {
  const auto& cur = engine.curriculum();
  nlohmann::json view{{"session_id", s.session_id},
                      {"state", s.state},
                      {"group", session::group_number(s.condition)},
                      {"version", s.version},
                      {"task_count", cur.task_count()},
                      {"allowed_events", allowed_events(s)}};
  if (s.state.kind == StateKind::tip_shown) {
    if (const auto* m = cur.find_module(static_cast<int>(s.state.index)))
      view["tip"] = {{"module_id", m->id},
                     {"name", m->name},
                     {"text", m->tip_text},
                     {"example_prompt", m->tip_example_prompt},
                     {"parameters", m->parameters}};
  }
  const bool in_task = s.state.kind != StateKind::intro && s.state.kind != StateKind::tip_shown &&
                       s.state.kind != StateKind::completed;
  if (in_task) {
    const auto& task = curriculum::get_task(cur, s.current_task_index);
    const auto& m = cur.module_for(task);
    view["task"] = {{"index", s.current_task_index},
                    {"task_id", task.task_id},
                    {"module_id", m.id},
                    {"prompt_pattern", task.prompt_pattern},
                    {"parameters", m.parameters},
                    {"word_min", m.word_min},
                    {"word_max", m.word_max},
                    {"image_ref", engine.task_image_ref(task)},
                    {"attempts", s.attempts_for(task.task_id).size()},
                    {"consults", s.consults_for(task.task_id)}};
    if (session::allows_consult(s.condition)) {
      auto roles = nlohmann::json::array();
      for (const auto& p : engine.personas().list())
        roles.push_back({{"role_id", p.role_id}, {"display_name", p.display_name}});
      view["personas"] = roles;
    }
  }
  return view;
}

void mount_api(httplib::Server& server, SessionStore& store) {
  const auto& engine = store.engine();

  server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, {{"status", "ok"}});
  });

  server.Post("/sessions", guarded([&](const httplib::Request& req, httplib::Response& res) {
                auto body = parse_body(req);
                auto condition = session::parse_condition(string_field(body, "condition"));
                std::optional<std::string> id;
                if (body.contains("session_id")) id = string_field(body, "session_id");
                auto step = store.create(string_field(body, "participant_id"), condition, id);
                send_json(res, step_body(engine, step), 201);
              }));

  server.Get(R"(/sessions/([A-Za-z0-9_-]+))", guarded([&](const httplib::Request& req, httplib::Response& res) {
               auto s = store.get(req.matches[1]);
               send_json(res, {{"session", s}, {"view", session_view(engine, s)}});
             }));

  server.Post(R"(/sessions/([A-Za-z0-9_-]+)/events)",
              guarded([&](const httplib::Request& req, httplib::Response& res) {
                auto body = parse_body(req);
                auto version = version_of(body, true);
                auto kind = session::parse_event_kind(string_field(body, "kind"));
                auto payload = body.value("payload", nlohmann::json::object());
                auto step = store.apply(req.matches[1], version, kind, payload);
                send_json(res, step_body(engine, step));
              }));

  server.Post(R"(/sessions/([A-Za-z0-9_-]+)/consult)",
              guarded([&](const httplib::Request& req, httplib::Response& res) {
                auto body = parse_body(req);
                auto version = version_of(body, false);
                auto step = store.apply(req.matches[1], version, EventKind::consult,
                                        {{"role_id", string_field(body, "role_id")}});
                send_json(res, {{"role_id", body["role_id"]},
                                {"vocabulary", step.vocabulary},
                                {"session", step.session},
                                {"view", session_view(engine, step.session)}});
              }));

  server.Get(R"(/sessions/([A-Za-z0-9_-]+)/result)",
             guarded([&](const httplib::Request& req, httplib::Response& res) {
               auto s = store.get(req.matches[1]);
               send_json(res, engine.current_result(s));
             }));

  server.Get("/analytics/dataset", guarded([&](const httplib::Request&, httplib::Response& res) {
               res.set_content(analytics::dataset_csv(export_dataset(engine, store.list())), "text/csv");
             }));

  server.Get("/analytics/anova", guarded([&](const httplib::Request& req, httplib::Response& res) {
               if (!req.has_param("metric"))
                 throw session::InvalidPayload("metric query parameter is required", {{"field", "metric"}});
               auto metric = analytics::parse_metric(req.get_param_value("metric"));
               auto table = analytics::anova_oneway(export_dataset(engine, store.list()), metric);
               auto body = analytics::to_json(table);
               body["metric"] = analytics::to_string(metric);
               send_json(res, body);
             }));

  server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
    const auto code = res.status == 404 ? ErrorCode::not_found : ErrorCode::validation;
    send_json(res, api_error(Error(code, "no route for " + req.method + " " + req.path)), res.status);
    return httplib::Server::HandlerResponse::Handled;
  });

  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      send_json(res, {{"code", "upstream"}, {"message", e.what()}}, 500);
    } catch (...) {
      send_json(res, {{"code", "upstream"}, {"message", "internal error"}}, 500);
    }
  });
}

int serve(const ServiceConfig& config, std::ostream& log) {
  Runtime runtime(config);
  SessionStore store(runtime.engine(), config.data_dir);
  const auto loaded = store.load_all();

  httplib::Server server;
  mount_api(server, store);
  if (!server.bind_to_port(config.host, config.port)) {
    log << "error: cannot bind " << config.host << ":" << config.port << '\n';
    return 1;
  }
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  log << "listening on http://" << config.host << ":" << config.port << " (" << (config.mock ? "mock" : "live")
      << " mode, " << loaded << " sessions loaded, data in " << config.data_dir.string() << ")" << std::endl;
  server.listen_after_bind();
  g_server = nullptr;
  // Logs are flushed on every append, so there is nothing left to write.
  log << "stopped" << std::endl;
  return 0;
}

}  // namespace archiprompt::service
