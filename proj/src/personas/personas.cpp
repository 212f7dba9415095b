#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "archiprompt/metrics.hpp"
#include "archiprompt/personas.hpp"

namespace archiprompt::personas {
namespace {

std::set<std::vector<std::string>> ngrams(const metrics::TokenList& tokens, std::size_t n) {
  std::set<std::vector<std::string>> out;
  if (tokens.size() < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i)
    out.emplace(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
  return out;
}

std::string live_instruction(const PersonaProfile& p) {
  return "You are " + p.display_name + ". " + p.description +
         " Suggest vocabulary a student could use when describing an architectural image. "
         "Answer with a JSON object mapping each requested rubric parameter to an array of short terms.";
}

std::string live_content(const curriculum::TaskSpec& task, const curriculum::RubricModule& module) {
  std::string s = "Prompt structure: " + task.prompt_pattern + "\nParameters:";
  for (const auto& p : module.parameters) s += " " + p;
  return s;
}

std::vector<std::string> filter_terms(const std::vector<std::string>& terms, std::string_view hidden) {
  std::vector<std::string> out;
  for (const auto& term : terms) {
    if (out.size() == kMaxTermsPerParameter) break;
    if (metrics::tokenize(term).empty() || leaks_hidden_prompt(term, hidden)) continue;
    if (std::find(out.begin(), out.end(), term) != out.end()) continue;
    out.push_back(term);
  }
  return out;
}

}  // namespace

PersonaRegistry::PersonaRegistry(std::vector<PersonaProfile> profiles) : profiles_(std::move(profiles)) {
  std::set<std::string> ids;
  for (const auto& p : profiles_) {
    if (p.role_id.empty()) throw ConfigError("persona with empty role_id");
    if (!ids.insert(p.role_id).second)
      throw ConfigError("duplicate persona role_id '" + p.role_id + "'", {{"role_id", p.role_id}});
    for (const auto& param : kRequiredParameters) {
      auto it = p.static_vocabulary.find(param);
      if (it == p.static_vocabulary.end() || it->second.empty())
        throw ConfigError("persona '" + p.role_id + "' has no vocabulary for '" + param + "'",
                          {{"role_id", p.role_id}, {"parameter", param}});
    }
  }
}

PersonaRegistry PersonaRegistry::parse(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("persona config: ") + e.what());
  }
  if (!root || root.IsNull()) return PersonaRegistry{};
  auto list = root["personas"];
  if (!list || list.IsNull()) return PersonaRegistry{};
  if (!list.IsSequence()) throw ConfigError("persona config: 'personas' must be a list");

  std::vector<PersonaProfile> profiles;
  try {
    for (const auto& n : list) {
      PersonaProfile p;
      p.role_id = n["role_id"].as<std::string>();
      p.display_name = n["display_name"].as<std::string>(p.role_id);
      p.description = n["description"].as<std::string>("");
      if (n["vocabulary"])
        p.static_vocabulary = n["vocabulary"].as<std::map<std::string, std::vector<std::string>>>();
      profiles.push_back(std::move(p));
    }
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("persona config: ") + e.what());
  }
  return PersonaRegistry(std::move(profiles));
}

PersonaRegistry PersonaRegistry::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open persona file " + path.string(), {{"path", path.string()}});
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

const PersonaProfile* PersonaRegistry::find(std::string_view role_id) const {
  auto it = std::find_if(profiles_.begin(), profiles_.end(),
                         [&](const auto& p) { return p.role_id == role_id; });
  return it == profiles_.end() ? nullptr : &*it;
}

const PersonaProfile& PersonaRegistry::get(std::string_view role_id) const {
  if (auto* p = find(role_id)) return *p;
  throw UnknownRole("unknown persona role '" + std::string(role_id) + "'", {{"role_id", role_id}});
}

bool leaks_hidden_prompt(std::string_view term, std::string_view hidden_prompt) {
  const auto term_grams = ngrams(metrics::tokenize(term), kLeakNgram);
  if (term_grams.empty()) return false;
  const auto hidden_grams = ngrams(metrics::tokenize(hidden_prompt), kLeakNgram);
  return std::any_of(term_grams.begin(), term_grams.end(),
                     [&](const auto& g) { return hidden_grams.count(g) > 0; });
}

std::vector<ParameterTerms> suggest_vocabulary(const PersonaRegistry& registry, std::string_view role_id,
                                               const curriculum::TaskSpec& task,
                                               const curriculum::Curriculum& curriculum, Mode mode,
                                               genai::Client* client) {
  const auto& persona = registry.get(role_id);
  const auto& module = curriculum.module_for(task);

  std::map<std::string, std::vector<std::string>> source;
  if (mode == Mode::mock) {
    source = persona.static_vocabulary;
  } else {
    if (!client) throw UpstreamFailure("live suggestions need a generation client");
    genai::GenRequest req;
    req.kind = genai::Kind::text;
    req.system_instruction = live_instruction(persona);
    req.user_content = live_content(task, module);
    genai::GenResult res;
    try {
      res = client->generate_text(req);
    } catch (const Error& e) {
      throw UpstreamFailure(std::string("persona suggestion failed: ") + e.what(),
                            {{"cause", to_string(e.code())}, {"detail", e.detail()}});
    }
    auto j = nlohmann::json::parse(res.content, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw UpstreamFailure("persona suggestion response is not a JSON object");
    for (auto& [param, terms] : j.items()) {
      if (!terms.is_array()) continue;
      for (const auto& t : terms)
        if (t.is_string()) source[param].push_back(t.get<std::string>());
    }
  }

  std::vector<ParameterTerms> out;
  for (const auto& param : module.parameters) {
    auto it = source.find(param);
    if (it == source.end()) continue;
    auto terms = filter_terms(it->second, task.hidden_prompt);
    if (!terms.empty()) out.push_back({param, std::move(terms)});
  }
  return out;
}

void to_json(nlohmann::json& j, const ParameterTerms& p) {
  j = nlohmann::json{{"parameter", p.parameter}, {"terms", p.terms}};
}

void from_json(const nlohmann::json& j, ParameterTerms& p) {
  p.parameter = j.at("parameter").get<std::string>();
  p.terms = j.at("terms").get<std::vector<std::string>>();
}

}  // namespace archiprompt::personas
