#include <algorithm>
#include <cctype>
#include <cstdio>
#include <mutex>
#include <random>
#include <tuple>

#include "archiprompt/service.hpp"

namespace archiprompt::service {
namespace {

bool valid_id(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  return std::all_of(id.begin(), id.end(),
                     [](unsigned char c) { return std::isalnum(c) || c == '-' || c == '_'; });
}

std::string random_id() {
  static std::mutex mutex;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mutex);
  char buf[24];
  std::snprintf(buf, sizeof buf, "s-%016llx", static_cast<unsigned long long>(rng()));
  return buf;
}

void sort_sessions(std::vector<session::Session>& v) {
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    return std::tie(a.created_at, a.session_id) < std::tie(b.created_at, b.session_id);
  });
}

}  // namespace

SessionStore::SessionStore(const session::Engine& engine, std::filesystem::path data_dir, Clock clock)
    : engine_(engine), data_dir_(std::move(data_dir)), clock_(std::move(clock)) {}

std::filesystem::path SessionStore::log_path(const std::string& session_id) const {
  return data_dir_ / "sessions" / (session_id + ".jsonl");
}

std::size_t SessionStore::load_all() {
  auto loaded = load_sessions(engine_, data_dir_);
  std::unique_lock lock(map_mutex_);
  for (auto& s : loaded) {
    auto entry = std::make_shared<Entry>();
    entry->session = std::move(s);
    sessions_[entry->session.session_id] = entry;
  }
  return loaded.size();
}

session::Step SessionStore::create(const std::string& participant_id, session::GroupCondition condition,
                                   std::optional<std::string> session_id) {
  if (participant_id.empty()) throw session::InvalidPayload("participant_id is required", {{"field", "participant_id"}});
  std::string id = session_id.value_or(random_id());
  if (!valid_id(id))
    throw session::InvalidPayload("session id may only contain letters, digits, '-' and '_'", {{"field", "session_id"}});

  std::unique_lock lock(map_mutex_);
  if (sessions_.count(id) || std::filesystem::exists(log_path(id)))
    throw session::VersionConflict("session " + id + " already exists", {{"session_id", id}});
  auto step = engine_.create_session(id, participant_id, condition, clock_());
  session::EventLog(log_path(id)).append(step.event);
  auto entry = std::make_shared<Entry>();
  entry->session = step.session;
  sessions_.emplace(id, std::move(entry));
  return step;
}

std::shared_ptr<SessionStore::Entry> SessionStore::find(const std::string& session_id) const {
  std::shared_lock lock(map_mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw NotFound("no session " + session_id, {{"session_id", session_id}});
  return it->second;
}

session::Session SessionStore::get(const std::string& session_id) const {
  auto entry = find(session_id);
  std::lock_guard lock(entry->mutex);
  return entry->session;
}

session::Step SessionStore::apply(const std::string& session_id, std::optional<std::uint64_t> expected_version,
                                  session::EventKind kind, const nlohmann::json& input) {
  auto entry = find(session_id);
  std::lock_guard lock(entry->mutex);
  if (expected_version && *expected_version != entry->session.version)
    throw session::VersionConflict("session is at version " + std::to_string(entry->session.version),
                                   {{"expected", *expected_version}, {"current", entry->session.version}});
  auto step = engine_.advance(entry->session, kind, input, clock_());
  session::EventLog(log_path(session_id)).append(step.event);
  entry->session = step.session;
  return step;
}

std::vector<session::Session> SessionStore::list() const {
  std::vector<std::shared_ptr<Entry>> entries;
  {
    std::shared_lock lock(map_mutex_);
    for (const auto& [id, e] : sessions_) entries.push_back(e);
  }
  std::vector<session::Session> out;
  for (const auto& e : entries) {
    std::lock_guard lock(e->mutex);
    out.push_back(e->session);
  }
  sort_sessions(out);
  return out;
}

std::vector<session::Session> load_sessions(const session::Engine& engine, const std::filesystem::path& data_dir) {
  std::vector<session::Session> out;
  const auto dir = data_dir / "sessions";
  if (!std::filesystem::is_directory(dir)) return out;
  for (const auto& f : std::filesystem::directory_iterator(dir)) {
    if (f.path().extension() != ".jsonl") continue;
    out.push_back(engine.replay(session::EventLog(f.path()).read()));
  }
  sort_sessions(out);
  return out;
}

analytics::ExperimentDataset export_dataset(const session::Engine& engine,
                                            const std::vector<session::Session>& sessions) {
  analytics::ExperimentDataset data;
  for (const auto& s : sessions) {
    if (s.state.kind != session::StateKind::completed) continue;
    const auto report = engine.final_report(s);
    for (const auto& row : report.rows) {
      analytics::DatasetRow r;
      r.participant_id = s.participant_id;
      r.group = session::group_number(s.condition);
      r.task_id = row.task_id;
      r.word_count = static_cast<long long>(row.word_count);
      r.time_minutes = row.elapsed_minutes;
      r.similarity_pct = row.similarity_pct;
      r.concreteness = row.concreteness;
      data.rows.push_back(std::move(r));
    }
  }
  return data;
}

}  // namespace archiprompt::service
