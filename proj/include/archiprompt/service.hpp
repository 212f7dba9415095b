#pragma once

// Persistence, HTTP API and command-line front end around one Engine.
//
// Sessions live in <data_dir>/sessions/<session_id>.jsonl, one append-only
// event log each.

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "archiprompt/analytics.hpp"
#include "archiprompt/session.hpp"

namespace httplib {
class Server;
}

namespace archiprompt::service {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path curriculum_path;
  std::filesystem::path lexicon_path;
  std::filesystem::path personas_path;
  std::filesystem::path data_dir;
  bool mock = true;
  genai::RemoteConfig remote;
};

/// Bundled curriculum, lexicon and personas; data_dir from
/// ARCHIPROMPT_DATA_DIR, else ./archiprompt-data.
ServiceConfig default_config();
std::filesystem::path bundled_data_root();

/// Loaded curriculum, lexicon, personas and client with an Engine over them.
class Runtime {
 public:
  /// Throws ConfigError naming any missing or invalid input file.
  explicit Runtime(const ServiceConfig& config);
  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  const ServiceConfig& config() const noexcept { return config_; }
  const session::Engine& engine() const noexcept { return *engine_; }

 private:
  ServiceConfig config_;
  curriculum::Curriculum curriculum_;
  metrics::Lexicon lexicon_;
  personas::PersonaRegistry personas_;
  std::unique_ptr<genai::Client> client_;
  std::unique_ptr<session::Engine> engine_;
};

using Clock = std::function<session::Timestamp()>;
session::Timestamp system_now();

/// In-memory sessions backed by per-session event logs. Every mutation is
/// appended to the log before the new state becomes visible.
class SessionStore {
 public:
  SessionStore(const session::Engine& engine, std::filesystem::path data_dir, Clock clock = system_now);

  /// Replays every log under data_dir/sessions. Returns the count loaded.
  std::size_t load_all();

  session::Step create(const std::string& participant_id, session::GroupCondition condition,
                       std::optional<std::string> session_id = std::nullopt);
  /// Throws NotFound.
  session::Session get(const std::string& session_id) const;
  /// Serialized per session. With `expected_version` set, a stale version
  /// raises VersionConflict and nothing is recorded.
  session::Step apply(const std::string& session_id, std::optional<std::uint64_t> expected_version,
                      session::EventKind kind, const nlohmann::json& input);
  std::vector<session::Session> list() const;

  std::filesystem::path log_path(const std::string& session_id) const;
  const std::filesystem::path& data_dir() const noexcept { return data_dir_; }
  const session::Engine& engine() const noexcept { return engine_; }

 private:
  struct Entry {
    std::mutex mutex;
    session::Session session;
  };
  std::shared_ptr<Entry> find(const std::string& session_id) const;

  const session::Engine& engine_;
  std::filesystem::path data_dir_;
  Clock clock_;
  mutable std::shared_mutex map_mutex_;
  std::unordered_map<std::string, std::shared_ptr<Entry>> sessions_;
};

/// One row per task of every completed session, ordered by creation time.
analytics::ExperimentDataset export_dataset(const session::Engine& engine,
                                            const std::vector<session::Session>& sessions);

/// Read-only replay of all logs in a data directory.
std::vector<session::Session> load_sessions(const session::Engine& engine, const std::filesystem::path& data_dir);

/// Client-facing view of a session: current screen without hidden prompts.
nlohmann::json session_view(const session::Engine& engine, const session::Session& s);

/// {code, message, detail} body and HTTP status for an error.
nlohmann::json api_error(const Error& e);

/// Registers the JSON API routes on `server`.
void mount_api(httplib::Server& server, SessionStore& store);

/// Runs the HTTP service until SIGINT/SIGTERM. Returns a process exit code.
int serve(const ServiceConfig& config, std::ostream& log);

struct TutorOptions {
  std::string participant_id = "participant";
  session::GroupCondition condition = session::GroupCondition::group1_guide_and_personas;
  std::optional<std::string> session_id;
};

/// Line-oriented tutoring session. Returns 0 once the curriculum is
/// completed, 1 if input ends first.
int run_tutor(SessionStore& store, const TutorOptions& options, std::istream& in, std::ostream& out);

/// Entry point shared by the executable and the tests.
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace archiprompt::service
