#ifndef NATVER_TEXT_HPP_
#define NATVER_TEXT_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace natver {

struct Token {
  std::string surface;
  std::size_t char_start = 0;
  std::size_t char_end = 0;  // exclusive

  friend bool operator==(const Token&, const Token&) = default;
};

struct TokenizedText {
  std::string text;
  std::vector<Token> tokens;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }

  // Original text covered by tokens [begin, end); empty if begin >= end.
  std::string slice(std::size_t begin, std::size_t end) const;
};

// Whitespace + punctuation tokenizer. Words are maximal runs of letters,
// digits and non-ASCII bytes, with inner apostrophes and hyphens kept;
// every other non-space character is its own token.
TokenizedText tokenize(std::string_view text);

// True if offsets are in bounds, non-empty, increasing and non-overlapping.
bool offsets_valid(const TokenizedText& t);

std::string fold_case(std::string_view s);

// Contains at least one ASCII letter/digit or non-ASCII byte.
bool has_word_char(std::string_view s);

// Crude suffix-stripping stem with a small irregular-verb table
// ("wrote" -> "write" -> "writ", "writing" -> "writ").
std::string stem(std::string_view word);

// Function-word list plus the content-word predicate built on it.
class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::unordered_set<std::string> stopwords)
      : stopwords_(std::move(stopwords)) {}

  // One token per line, '#' comments and blank lines ignored.
  static Lexicon from_file(const std::filesystem::path& path);
  static Lexicon shipped();

  bool is_stopword(std::string_view token) const;
  bool is_content_word(std::string_view token) const;

  // Case-folded content tokens of the text, in order.
  std::vector<std::string> content_tokens(std::string_view text) const;

  // Case-folded content tokens joined by single spaces; falls back to all
  // word tokens when the text holds no content word.
  std::string normalize(std::string_view text) const;

  std::size_t size() const { return stopwords_.size(); }

 private:
  std::unordered_set<std::string> stopwords_;
};

std::filesystem::path default_data_dir();

}  // namespace natver

#endif  // NATVER_TEXT_HPP_
