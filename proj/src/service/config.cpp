#include <chrono>
#include <cstdlib>

#include "archiprompt/service.hpp"

namespace archiprompt::service {

std::filesystem::path bundled_data_root() { return ARCHIPROMPT_DATA_ROOT; }

ServiceConfig default_config() {
  ServiceConfig c;
  const auto root = bundled_data_root();
  c.curriculum_path = root / "curriculum.yaml";
  c.lexicon_path = root / "lexicon_mini.tsv";
  c.personas_path = root / "personas.yaml";
  const char* dir = std::getenv("ARCHIPROMPT_DATA_DIR");
  c.data_dir = dir && *dir ? std::filesystem::path(dir) : std::filesystem::path("archiprompt-data");
  return c;
}

session::Timestamp system_now() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

Runtime::Runtime(const ServiceConfig& config) : config_(config) {
  curriculum_ = curriculum::load_curriculum(config_.curriculum_path);
  lexicon_ = metrics::load_lexicon(config_.lexicon_path).lexicon;
  personas_ = personas::PersonaRegistry::load(config_.personas_path);
  if (config_.mock) {
    client_ = std::make_unique<genai::MockClient>();
  } else {
    if (config_.remote.provider_url.empty())
      throw ConfigError("live mode needs a provider URL", {{"field", "provider_url"}});
    client_ = std::make_unique<genai::RemoteClient>(config_.remote);
  }
  engine_ = std::make_unique<session::Engine>(curriculum_, lexicon_, personas_, *client_,
                                              config_.mock ? personas::Mode::mock : personas::Mode::live);
}

}  // namespace archiprompt::service
