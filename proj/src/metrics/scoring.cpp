#include <algorithm>
#include <unordered_set>

#include "archiprompt/metrics.hpp"

namespace archiprompt::metrics {

ConcretenessResult concreteness_score(const TokenList& tokens, const Lexicon& lexicon) {
  if (tokens.empty()) throw EmptyPrompt("cannot score an empty prompt");
  ConcretenessResult out;
  std::unordered_set<std::string> seen_oov;
  double sum = 0.0;
  std::size_t matched = 0;
  for (const auto& token : tokens) {
    if (auto r = lexicon.rating(token)) {
      sum += *r;
      ++matched;
    } else if (seen_oov.insert(token).second) {
      out.oov.push_back(token);
    }
  }
  if (matched == 0) throw AllTokensOOV("no prompt token is in the lexicon", {{"oov", out.oov}});
  out.score = sum / static_cast<double>(matched);
  return out;
}

ConcretenessCategory concreteness_category(double score) {
  if (!(score >= kMinRating && score <= kMaxRating))
    throw OutOfRange("concreteness score " + std::to_string(score) + " outside [1, 5]");
  if (score < kAbstractBelow) return ConcretenessCategory::high_abstractness;
  if (score <= kConcreteAbove) return ConcretenessCategory::moderate;
  return ConcretenessCategory::high_concreteness;
}

std::string_view to_string(ConcretenessCategory category) {
  switch (category) {
    case ConcretenessCategory::high_abstractness: return "high_abstractness";
    case ConcretenessCategory::moderate: return "moderate";
    case ConcretenessCategory::high_concreteness: return "high_concreteness";
  }
  return "moderate";
}

std::string_view display_name(ConcretenessCategory category) {
  switch (category) {
    case ConcretenessCategory::high_abstractness: return "High Abstractness";
    case ConcretenessCategory::moderate: return "Moderate Abstractness/Concreteness";
    case ConcretenessCategory::high_concreteness: return "High Concreteness";
  }
  return "";
}

std::optional<ConcretenessCategory> parse_category(std::string_view name) {
  for (auto c : {ConcretenessCategory::high_abstractness, ConcretenessCategory::moderate,
                 ConcretenessCategory::high_concreteness})
    if (to_string(c) == name) return c;
  return std::nullopt;
}

double jaccard(const TokenList& a, const TokenList& b) {
  std::unordered_set<std::string_view> sa(a.begin(), a.end());
  std::unordered_set<std::string_view> sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t common = 0;
  for (auto w : sa) common += sb.count(w);
  return static_cast<double>(common) / static_cast<double>(sa.size() + sb.size() - common);
}

std::size_t lcs_length(const TokenList& a, const TokenList& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double similarity_pct(const TokenList& candidate, const TokenList& reference) {
  if (candidate.empty() || reference.empty())
    throw EmptyPrompt("similarity needs two nonempty prompts");
  const double j = jaccard(candidate, reference);
  const double l = 2.0 * static_cast<double>(lcs_length(candidate, reference)) /
                   static_cast<double>(candidate.size() + reference.size());
  return std::clamp(100.0 * (0.5 * j + 0.5 * l), 0.0, 100.0);
}

PromptEvaluation evaluate(std::string_view candidate, std::string_view reference,
                          const Lexicon& lexicon, double elapsed_minutes) {
  const auto cand = tokenize(candidate);
  const auto ref = tokenize(reference);
  PromptEvaluation e;
  e.word_count = cand.size();
  e.similarity_pct = similarity_pct(cand, ref);
  e.elapsed_minutes = std::max(0.0, elapsed_minutes);
  try {
    auto c = concreteness_score(cand, lexicon);
    e.concreteness_score = c.score;
    e.concreteness_category = concreteness_category(c.score);
    e.oov_tokens = std::move(c.oov);
  } catch (const AllTokensOOV&) {
    std::unordered_set<std::string_view> seen;
    for (const auto& t : cand)
      if (seen.insert(t).second) e.oov_tokens.push_back(t);
  }
  return e;
}

void to_json(nlohmann::json& j, const PromptEvaluation& e) {
  j = nlohmann::json{
      {"word_count", e.word_count},
      {"similarity_pct", e.similarity_pct},
      {"concreteness_score", nullptr},
      {"concreteness_category", nullptr},
      {"elapsed_minutes", e.elapsed_minutes},
      {"oov_tokens", e.oov_tokens},
  };
  if (e.concreteness_score) j["concreteness_score"] = *e.concreteness_score;
  if (e.concreteness_category) j["concreteness_category"] = to_string(*e.concreteness_category);
}

void from_json(const nlohmann::json& j, PromptEvaluation& e) {
  e.word_count = j.at("word_count").get<std::size_t>();
  e.similarity_pct = j.at("similarity_pct").get<double>();
  e.elapsed_minutes = j.at("elapsed_minutes").get<double>();
  e.oov_tokens = j.at("oov_tokens").get<TokenList>();
  e.concreteness_score.reset();
  e.concreteness_category.reset();
  if (!j.at("concreteness_score").is_null()) e.concreteness_score = j["concreteness_score"].get<double>();
  if (!j.at("concreteness_category").is_null())
    e.concreteness_category = parse_category(j["concreteness_category"].get<std::string>());
}

}  // namespace archiprompt::metrics
