#pragma once

// Role-conditioned vocabulary consultants (architect, sustainability
// consultant, ...). Mock suggestions come from authored static vocabularies;
// live suggestions go through a genai::Client. Either way no suggested term
// may repeat three consecutive words of the task's hidden prompt.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "archiprompt/curriculum.hpp"
#include "archiprompt/errors.hpp"
#include "archiprompt/genai.hpp"

namespace archiprompt::personas {

ARCHIPROMPT_DEFINE_ERROR(UnknownRole, unknown_role);
ARCHIPROMPT_DEFINE_ERROR(UpstreamFailure, upstream);

struct PersonaProfile {
  std::string role_id;
  std::string display_name;
  std::string description;
  std::map<std::string, std::vector<std::string>> static_vocabulary;  // parameter -> terms
};

// Every persona must offer terms for these.
inline const std::vector<std::string> kRequiredParameters = {"subject", "medium", "environment"};

class PersonaRegistry {
 public:
  PersonaRegistry() = default;
  /// Throws ConfigError on duplicate role ids or missing base vocabulary.
  explicit PersonaRegistry(std::vector<PersonaProfile> profiles);

  static PersonaRegistry parse(std::string_view yaml_text);
  static PersonaRegistry load(const std::filesystem::path& path);

  const std::vector<PersonaProfile>& list() const noexcept { return profiles_; }
  const PersonaProfile* find(std::string_view role_id) const;
  /// Throws UnknownRole.
  const PersonaProfile& get(std::string_view role_id) const;

 private:
  std::vector<PersonaProfile> profiles_;
};

enum class Mode { mock, live };

inline constexpr std::size_t kMaxTermsPerParameter = 5;
inline constexpr std::size_t kLeakNgram = 3;

struct ParameterTerms {
  std::string parameter;
  std::vector<std::string> terms;

  friend bool operator==(const ParameterTerms&, const ParameterTerms&) = default;
};

/// True when `term` shares any run of kLeakNgram consecutive tokens with
/// `hidden_prompt`.
bool leaks_hidden_prompt(std::string_view term, std::string_view hidden_prompt);

/// Suggestions for the parameters of the task's module, in rubric order.
/// `client` is only used in live mode and must then be non-null.
std::vector<ParameterTerms> suggest_vocabulary(const PersonaRegistry& registry, std::string_view role_id,
                                               const curriculum::TaskSpec& task,
                                               const curriculum::Curriculum& curriculum, Mode mode,
                                               genai::Client* client = nullptr);

void to_json(nlohmann::json& j, const ParameterTerms& p);
void from_json(const nlohmann::json& j, ParameterTerms& p);

}  // namespace archiprompt::personas
