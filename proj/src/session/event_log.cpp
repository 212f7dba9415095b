#include <fstream>

#include "archiprompt/session.hpp"

namespace archiprompt::session {

void EventLog::append(const Event& event) const {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw ConfigError("cannot open event log " + path_.string(), {{"path", path_.string()}});
  out << nlohmann::json(event).dump() << '\n';
  out.flush();
  if (!out) throw ConfigError("failed to write event log " + path_.string(), {{"path", path_.string()}});
}

std::vector<Event> EventLog::read() const {
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw NotFound("no event log at " + path_.string(), {{"path", path_.string()}});
  std::vector<Event> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw ReplayError(path_.string() + ":" + std::to_string(line_no) + ": not valid JSON");
    try {
      events.push_back(j.get<Event>());
    } catch (const nlohmann::json::exception& e) {
      throw ReplayError(path_.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return events;
}

}  // namespace archiprompt::session
