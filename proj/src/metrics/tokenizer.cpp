#include <array>
#include <cctype>

#include "archiprompt/metrics.hpp"

namespace archiprompt::metrics {
namespace {

// Multi-byte punctuation that commonly shows up in pasted prompts.
constexpr std::array<std::string_view, 8> kUnicodePunct = {
    "“", "”", "‘", "’", "«", "»", "…", "·",
};
constexpr std::array<std::string_view, 2> kUnicodeDashes = {"–", "—"};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_ascii_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

std::size_t punct_prefix(std::string_view s) {
  if (s.empty()) return 0;
  if (is_ascii_punct(s.front())) return 1;
  for (auto p : kUnicodePunct)
    if (s.starts_with(p)) return p.size();
  return 0;
}

std::size_t punct_suffix(std::string_view s) {
  if (s.empty()) return 0;
  if (is_ascii_punct(s.back())) return 1;
  for (auto p : kUnicodePunct)
    if (s.ends_with(p)) return p.size();
  return 0;
}

void emit(std::string_view piece, TokenList& out) {
  while (auto n = punct_prefix(piece)) piece.remove_prefix(n);
  while (auto n = punct_suffix(piece)) piece.remove_suffix(n);
  if (piece.empty()) return;
  std::string token(piece);
  for (char& c : token)
    if (static_cast<unsigned char>(c) < 0x80) c = static_cast<char>(std::tolower(c));
  out.push_back(std::move(token));
}

void split_chunk(std::string_view chunk, TokenList& out) {
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < chunk.size()) {
    std::size_t dash = 0;
    if (chunk[i] == '-') {
      dash = 1;
    } else {
      for (auto d : kUnicodeDashes)
        if (chunk.substr(i).starts_with(d)) dash = d.size();
    }
    if (dash) {
      emit(chunk.substr(start, i - start), out);
      i += dash;
      start = i;
    } else {
      ++i;
    }
  }
  emit(chunk.substr(start), out);
}

}  // namespace

TokenList tokenize(std::string_view text) {
  TokenList out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) split_chunk(text.substr(i, j - i), out);
    i = j;
  }
  return out;
}

std::size_t word_count(std::string_view text) { return tokenize(text).size(); }

}  // namespace archiprompt::metrics
