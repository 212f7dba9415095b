#include <algorithm>

#include "archiprompt/curriculum.hpp"
#include "archiprompt/genai.hpp"
#include "archiprompt/metrics.hpp"
#include "archiprompt/personas.hpp"
#include "support.hpp"

using namespace archiprompt;
using namespace archiprompt::personas;

namespace {

struct Bundled {
  curriculum::Curriculum cur = curriculum::load_curriculum(test::data_root() / "curriculum.yaml");
  PersonaRegistry reg = PersonaRegistry::load(test::data_root() / "personas.yaml");
};

// Returns a fixed body for every text request and records what it saw.
class ScriptedClient : public genai::Client {
 public:
  explicit ScriptedClient(std::string body) : body_(std::move(body)) {}
  genai::GenResult generate_text(const genai::GenRequest& req) override {
    last_ = req;
    if (fail_) throw genai::Timeout("scripted timeout");
    return {genai::Kind::text, body_, std::nullopt, 1, genai::Provider::remote};
  }
  genai::GenResult generate_image(const genai::GenRequest&) override { throw genai::ProviderError("no images"); }
  genai::Provider provider() const noexcept override { return genai::Provider::remote; }

  genai::GenRequest last_;
  bool fail_ = false;

 private:
  std::string body_;
};

std::vector<std::string> all_terms(const std::vector<ParameterTerms>& v) {
  std::vector<std::string> out;
  for (const auto& p : v) out.insert(out.end(), p.terms.begin(), p.terms.end());
  return out;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

TEST(PersonaRegistry, DefaultSet) {
  Bundled b;
  std::vector<std::string> ids;
  for (const auto& p : b.reg.list()) ids.push_back(p.role_id);
  EXPECT_EQ(ids, (std::vector<std::string>{"architect", "interior_designer", "landscape_architect",
                                           "sustainability_consultant", "real_estate_developer", "urban_planner"}));
}

TEST(PersonaRegistry, EmptyConfigIsEmpty) {
  EXPECT_TRUE(PersonaRegistry::parse("").list().empty());
  EXPECT_TRUE(PersonaRegistry::parse("personas: []").list().empty());
}

TEST(PersonaRegistry, DuplicateRoleIsConfigError) {
  const char* yaml = R"(personas:
  - role_id: a
    display_name: A
    description: x
    vocabulary: {subject: [s], medium: [m], environment: [e]}
  - role_id: a
    display_name: B
    description: y
    vocabulary: {subject: [s], medium: [m], environment: [e]}
)";
  EXPECT_THROW(PersonaRegistry::parse(yaml), ConfigError);
}

TEST(PersonaRegistry, RequiresBaseVocabulary) {
  const char* yaml = R"(personas:
  - role_id: a
    display_name: A
    description: x
    vocabulary: {subject: [s], medium: [m]}
)";
  EXPECT_THROW(PersonaRegistry::parse(yaml), ConfigError);
}

TEST(PersonaRegistry, UnknownRole) {
  Bundled b;
  EXPECT_THROW(b.reg.get("bogus_role"), UnknownRole);
  EXPECT_EQ(b.reg.find("bogus_role"), nullptr);
  EXPECT_THROW(suggest_vocabulary(b.reg, "bogus_role", b.cur.tasks[0], b.cur, Mode::mock), UnknownRole);
}

TEST(SuggestVocabulary, SustainabilityConsultantOnMaterialsModule) {
  Bundled b;
  const auto& task = b.cur.tasks[1];
  ASSERT_EQ(task.module_id, 2);
  auto terms = all_terms(suggest_vocabulary(b.reg, "sustainability_consultant", task, b.cur, Mode::mock));
  EXPECT_TRUE(contains(terms, "green roofs"));
  EXPECT_TRUE(contains(terms, "recycled materials"));
  EXPECT_TRUE(contains(terms, "passive solar design"));
}

TEST(SuggestVocabulary, MockIsDeterministicAndBounded) {
  Bundled b;
  for (const auto& p : b.reg.list()) {
    for (const auto& task : b.cur.tasks) {
      auto first = suggest_vocabulary(b.reg, p.role_id, task, b.cur, Mode::mock);
      EXPECT_EQ(first, suggest_vocabulary(b.reg, p.role_id, task, b.cur, Mode::mock));
      const auto& params = b.cur.module_for(task).parameters;
      std::size_t last_pos = 0;
      for (const auto& pt : first) {
        auto it = std::find(params.begin(), params.end(), pt.parameter);
        ASSERT_NE(it, params.end()) << pt.parameter;
        auto pos = static_cast<std::size_t>(it - params.begin());
        EXPECT_GE(pos, last_pos);  // rubric order
        last_pos = pos;
        EXPECT_LE(pt.terms.size(), kMaxTermsPerParameter);
        EXPECT_FALSE(pt.terms.empty());
        for (const auto& term : pt.terms) EXPECT_FALSE(leaks_hidden_prompt(term, task.hidden_prompt)) << term;
      }
    }
  }
}

TEST(SuggestVocabulary, LeakGuardSuppressesHiddenTrigrams) {
  Bundled b;
  const auto& task = b.cur.tasks[3];
  ASSERT_NE(task.hidden_prompt.find("passive solar design"), std::string::npos);
  auto terms = all_terms(suggest_vocabulary(b.reg, "sustainability_consultant", task, b.cur, Mode::mock));
  EXPECT_FALSE(contains(terms, "passive solar design"));
}

TEST(LeakGuard, TrigramRule) {
  const std::string hidden = "A community library built from rammed earth and reclaimed timber";
  EXPECT_TRUE(leaks_hidden_prompt("rammed earth and", hidden));
  EXPECT_TRUE(leaks_hidden_prompt("Built From Rammed earth walls", hidden));
  EXPECT_FALSE(leaks_hidden_prompt("rammed earth", hidden));
  EXPECT_FALSE(leaks_hidden_prompt("earth library built", hidden));
}

TEST(SuggestVocabulary, LiveModeFiltersClientTerms) {
  Bundled b;
  const auto& task = b.cur.tasks[0];
  ScriptedClient client(R"({"subject": ["villa", "villa", "beach house", "a", "b", "c", "d"],
                             "medium": ["rendered in watercolor"],
                             "lighting": ["dusk"],
                             "environment": ["cliff top"]})");
  auto out = suggest_vocabulary(b.reg, "architect", task, b.cur, Mode::live, &client);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].parameter, "subject");
  EXPECT_EQ(out[0].terms, (std::vector<std::string>{"villa", "beach house", "a", "b", "c"}));
  EXPECT_EQ(out[1].parameter, "environment");
  EXPECT_EQ(client.last_.user_content.find(task.hidden_prompt), std::string::npos);
  EXPECT_NE(client.last_.system_instruction.find("Architect"), std::string::npos);
}

TEST(SuggestVocabulary, LiveModeErrorsAreUpstreamFailures) {
  Bundled b;
  ScriptedClient bad("not json");
  EXPECT_THROW(suggest_vocabulary(b.reg, "architect", b.cur.tasks[0], b.cur, Mode::live, &bad), UpstreamFailure);
  ScriptedClient timeout("{}");
  timeout.fail_ = true;
  auto e = test::expect_throw<UpstreamFailure>(
      [&] { suggest_vocabulary(b.reg, "architect", b.cur.tasks[0], b.cur, Mode::live, &timeout); });
  EXPECT_EQ(e.code(), ErrorCode::upstream);
  EXPECT_THROW(suggest_vocabulary(b.reg, "architect", b.cur.tasks[0], b.cur, Mode::live, nullptr), UpstreamFailure);
}
