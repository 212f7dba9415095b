#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "archiprompt/metrics.hpp"

namespace archiprompt::metrics {

struct LexiconLoader {
  static void put(Lexicon& lex, std::string word, double rating, std::size_t& duplicates) {
    auto [it, inserted] = lex.entries_.insert_or_assign(std::move(word), rating);
    if (!inserted) ++duplicates;
  }
};

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  for (;;) {
    auto tab = line.find('\t', start);
    cols.push_back(trim(line.substr(start, tab == std::string_view::npos ? tab : tab - start)));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return cols;
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

nlohmann::json line_detail(std::size_t line_no) { return {{"line", line_no}}; }

}  // namespace

Lexicon Lexicon::from_entries(std::unordered_map<std::string, double> entries) {
  for (const auto& [word, rating] : entries) {
    if (rating < kMinRating || rating > kMaxRating)
      throw RatingOutOfRange("rating for '" + word + "' outside [1, 5]");
  }
  Lexicon lex;
  lex.entries_ = std::move(entries);
  return lex;
}

std::optional<double> Lexicon::rating(std::string_view word) const {
  auto it = entries_.find(std::string(word));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

LexiconLoad parse_lexicon(std::istream& in) {
  LexiconLoad out;
  std::string raw;
  std::size_t line_no = 0;
  bool header_checked = false;
  // Column layout; the published norms file carries a header row.
  std::size_t word_col = 0, rating_col = 1;
  std::optional<std::size_t> bigram_col;
  bool published = false;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto cols = split_tabs(line);

    if (!header_checked) {
      header_checked = true;
      for (std::size_t i = 0; i < cols.size(); ++i) {
        if (cols[i] == "Conc.M") {
          published = true;
          rating_col = i;
        } else if (cols[i] == "Word") {
          word_col = i;
        } else if (cols[i] == "Bigram") {
          bigram_col = i;
        }
      }
      if (published) continue;
    }

    if (cols.size() <= std::max(word_col, rating_col))
      throw MalformedRow("line " + std::to_string(line_no) + ": expected word<TAB>rating",
                         line_detail(line_no));

    auto rating = parse_double(cols[rating_col]);
    if (!rating)
      throw MalformedRow("line " + std::to_string(line_no) + ": rating '" +
                             std::string(cols[rating_col]) + "' is not numeric",
                         line_detail(line_no));
    if (*rating < kMinRating || *rating > kMaxRating)
      throw RatingOutOfRange("line " + std::to_string(line_no) + ": rating " +
                                 std::string(cols[rating_col]) + " outside [1, 5]",
                             line_detail(line_no));

    auto tokens = tokenize(cols[word_col]);
    if (published) {
      // Multi-word expressions are not usable against single tokens.
      if (bigram_col && *bigram_col < cols.size() && cols[*bigram_col] == "1") continue;
      if (tokens.size() != 1) continue;
    } else if (tokens.size() != 1) {
      throw MalformedRow("line " + std::to_string(line_no) + ": '" + std::string(cols[word_col]) +
                             "' is not a single word",
                         line_detail(line_no));
    }
    LexiconLoader::put(out.lexicon, std::move(tokens.front()), *rating, out.duplicate_count);
  }
  return out;
}

LexiconLoad load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open lexicon file " + path.string(), {{"path", path.string()}});
  return parse_lexicon(in);
}

}  // namespace archiprompt::metrics
