#pragma once

// Text metrics for prompt evaluation: tokenization, concreteness scoring
// against a lexical norms table, and prompt-to-prompt similarity.
//
// Everything here is pure. A Lexicon is immutable once loaded and may be
// shared across threads.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "archiprompt/errors.hpp"

namespace archiprompt::metrics {

/// Normalized word tokens: lowercase, no leading/trailing punctuation,
/// never empty.
using TokenList = std::vector<std::string>;

ARCHIPROMPT_DEFINE_ERROR(MalformedRow, validation);
ARCHIPROMPT_DEFINE_ERROR(RatingOutOfRange, validation);
ARCHIPROMPT_DEFINE_ERROR(EmptyPrompt, validation);
ARCHIPROMPT_DEFINE_ERROR(AllTokensOOV, validation);
ARCHIPROMPT_DEFINE_ERROR(OutOfRange, validation);

/// Splits on whitespace and internal hyphens/dashes, lowercases ASCII
/// letters and strips punctuation from both ends of every token.
TokenList tokenize(std::string_view text);

std::size_t word_count(std::string_view text);

inline constexpr double kMinRating = 1.0;
inline constexpr double kMaxRating = 5.0;

class Lexicon {
 public:
  Lexicon() = default;

  /// Builds a lexicon from already-normalized words. Throws
  /// RatingOutOfRange for ratings outside [1, 5].
  static Lexicon from_entries(std::unordered_map<std::string, double> entries);

  std::optional<double> rating(std::string_view word) const;
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

 private:
  friend struct LexiconLoader;
  std::unordered_map<std::string, double> entries_;
};

struct LexiconLoad {
  Lexicon lexicon;
  std::size_t duplicate_count = 0;  // later rows replaced earlier ones
};

/// Reads `word<TAB>rating` rows; `#` lines and blank lines are skipped.
/// Also accepts the published norms layout (header row with `Word` and
/// `Conc.M` columns), keeping single-word entries only.
LexiconLoad parse_lexicon(std::istream& in);
LexiconLoad load_lexicon(const std::filesystem::path& path);

struct ConcretenessResult {
  double score = 0.0;
  TokenList oov;  // unique, in first-seen order
};

/// Mean rating over every token occurrence found in the lexicon.
ConcretenessResult concreteness_score(const TokenList& tokens, const Lexicon& lexicon);

enum class ConcretenessCategory { high_abstractness, moderate, high_concreteness };

inline constexpr double kAbstractBelow = 2.5;
inline constexpr double kConcreteAbove = 3.5;

ConcretenessCategory concreteness_category(double score);
std::string_view to_string(ConcretenessCategory category);
std::string_view display_name(ConcretenessCategory category);
std::optional<ConcretenessCategory> parse_category(std::string_view name);

/// Jaccard similarity of the two token sets.
double jaccard(const TokenList& a, const TokenList& b);
/// Length of the longest common token subsequence.
std::size_t lcs_length(const TokenList& a, const TokenList& b);

/// 100 * (0.5 * jaccard + 0.5 * 2 * lcs / (|a| + |b|)). Symmetric, in [0, 100].
double similarity_pct(const TokenList& candidate, const TokenList& reference);

struct PromptEvaluation {
  std::size_t word_count = 0;
  double similarity_pct = 0.0;
  std::optional<double> concreteness_score;  // absent when every token is OOV
  std::optional<ConcretenessCategory> concreteness_category;
  double elapsed_minutes = 0.0;
  TokenList oov_tokens;

  friend bool operator==(const PromptEvaluation&, const PromptEvaluation&) = default;
};

PromptEvaluation evaluate(std::string_view candidate, std::string_view reference,
                          const Lexicon& lexicon, double elapsed_minutes = 0.0);

void to_json(nlohmann::json& j, const PromptEvaluation& e);
void from_json(const nlohmann::json& j, PromptEvaluation& e);

}  // namespace archiprompt::metrics
