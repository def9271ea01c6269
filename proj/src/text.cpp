#include "natver/text.hpp"

#include <array>
#include <cstdlib>
#include <fstream>
#include <utility>

#include "natver/error.hpp"

namespace natver {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c >= 0x80;
}

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

// Past forms whose stem differs from the base form.
constexpr std::array<std::pair<std::string_view, std::string_view>, 40>
    kIrregular = {{
        {"wrote", "write"},   {"written", "write"}, {"ran", "run"},
        {"began", "begin"},   {"begun", "begin"},   {"became", "become"},
        {"came", "come"},     {"gave", "give"},     {"given", "give"},
        {"took", "take"},     {"taken", "take"},    {"made", "make"},
        {"found", "find"},    {"told", "tell"},     {"held", "hold"},
        {"brought", "bring"}, {"bought", "buy"},    {"thought", "think"},
        {"taught", "teach"},  {"fought", "fight"},  {"sold", "sell"},
        {"built", "build"},   {"spent", "spend"},   {"sang", "sing"},
        {"sung", "sing"},     {"spoke", "speak"},   {"spoken", "speak"},
        {"chose", "choose"},  {"chosen", "choose"}, {"drew", "draw"},
        {"drawn", "draw"},    {"grew", "grow"},     {"grown", "grow"},
        {"knew", "know"},     {"known", "know"},    {"left", "leave"},
        {"led", "lead"},      {"won", "win"},       {"lost", "lose"},
        {"met", "meet"},
    }};

}  // namespace

std::string TokenizedText::slice(std::size_t begin, std::size_t end) const {
  if (begin >= end || end > tokens.size()) return {};
  const std::size_t from = tokens[begin].char_start;
  const std::size_t to = tokens[end - 1].char_end;
  return text.substr(from, to - from);
}

TokenizedText tokenize(std::string_view text) {
  TokenizedText out;
  out.text = std::string(text);
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_space(c)) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    if (is_word_byte(c)) {
      while (j < n) {
        const auto d = static_cast<unsigned char>(text[j]);
        if (is_word_byte(d)) {
          ++j;
        } else if ((d == '\'' || d == '-') && j + 1 < n &&
                   is_word_byte(static_cast<unsigned char>(text[j + 1]))) {
          j += 2;
        } else {
          break;
        }
      }
    }
    out.tokens.push_back({std::string(text.substr(i, j - i)), i, j});
    i = j;
  }
  return out;
}

bool offsets_valid(const TokenizedText& t) {
  std::size_t prev_end = 0;
  for (const Token& tok : t.tokens) {
    if (tok.char_start < prev_end || tok.char_start >= tok.char_end ||
        tok.char_end > t.text.size())
      return false;
    if (t.text.compare(tok.char_start, tok.char_end - tok.char_start,
                       tok.surface) != 0)
      return false;
    prev_end = tok.char_end;
  }
  return true;
}

std::string fold_case(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool has_word_char(std::string_view s) {
  for (char c : s)
    if (is_word_byte(static_cast<unsigned char>(c))) return true;
  return false;
}

std::string stem(std::string_view word) {
  std::string w = fold_case(word);
  for (const auto& [form, base] : kIrregular) {
    if (w == form) {
      w = std::string(base);
      break;
    }
  }
  if (ends_with(w, "ing") && w.size() >= 6) {
    w.resize(w.size() - 3);
  } else if (ends_with(w, "ed") && w.size() >= 5) {
    w.resize(w.size() - 2);
  } else if (ends_with(w, "es") && w.size() >= 5) {
    w.resize(w.size() - 2);
  } else if (ends_with(w, "s") && !ends_with(w, "ss") && w.size() >= 4) {
    w.resize(w.size() - 1);
  }
  if (ends_with(w, "e") && w.size() >= 4) w.resize(w.size() - 1);
  return w;
}

Lexicon Lexicon::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open stopword file: " + path.string());
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    words.insert(fold_case(line));
  }
  return Lexicon(std::move(words));
}

Lexicon Lexicon::shipped() {
  return from_file(default_data_dir() / "stopwords.txt");
}

bool Lexicon::is_stopword(std::string_view token) const {
  return stopwords_.contains(fold_case(token));
}

bool Lexicon::is_content_word(std::string_view token) const {
  return has_word_char(token) && !is_stopword(token);
}

std::vector<std::string> Lexicon::content_tokens(std::string_view text) const {
  std::vector<std::string> out;
  for (const Token& t : tokenize(text).tokens) {
    if (is_content_word(t.surface)) out.push_back(fold_case(t.surface));
  }
  return out;
}

std::string Lexicon::normalize(std::string_view text) const {
  const TokenizedText tt = tokenize(text);
  std::vector<std::string> words = content_tokens(text);
  if (words.empty()) {
    for (const Token& t : tt.tokens)
      if (has_word_char(t.surface)) words.push_back(fold_case(t.surface));
  }
  std::string out;
  for (const std::string& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("NATVER_DATA_DIR"); env && *env)
    return env;
  return NATVER_DATA_DIR;
}

}  // namespace natver
