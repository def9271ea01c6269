#include "natver/chunking.hpp"

#include <limits>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <unordered_set>

#include "natver/error.hpp"

namespace natver {

namespace {

const std::unordered_set<std::string>& auxiliaries() {
  static const std::unordered_set<std::string> words = {
      "is",    "am",     "are",   "was",    "were", "be",    "been",
      "being", "has",    "have",  "had",    "do",   "does",  "did",
      "will",  "would",  "shall", "should", "can",  "could", "may",
      "might", "must",   "isn't", "wasn't", "aren't", "weren't",
      "hasn't", "haven't", "hadn't", "doesn't", "didn't", "won't",
      "can't", "couldn't", "wouldn't"};
  return words;
}

const std::unordered_set<std::string>& prepositions() {
  static const std::unordered_set<std::string> words = {
      "in",     "on",      "at",      "to",     "from",   "of",
      "by",     "with",    "for",     "about",  "into",   "onto",
      "over",   "under",   "after",   "before", "during", "since",
      "until",  "between", "through", "without", "within", "against",
      "among",  "across",  "behind",  "beyond", "near",   "upon"};
  return words;
}

const std::unordered_set<std::string>& conjunctions() {
  static const std::unordered_set<std::string> words = {"and", "or", "but",
                                                        "nor"};
  return words;
}

bool is_punct(std::string_view token) { return !has_word_char(token); }

}  // namespace

std::vector<Chunk> RuleChunker::chunk(const TokenizedText& text) const {
  std::vector<Chunk> out;
  const std::size_t n = text.size();
  if (n == 0) return out;

  std::size_t start = 0;
  for (std::size_t i = 1; i < n; ++i) {
    const std::string& prev_surface = text.tokens[i - 1].surface;
    const std::string& surface = text.tokens[i].surface;
    const std::string word = fold_case(surface);
    const std::string prev = fold_case(prev_surface);

    bool boundary = is_punct(surface) || is_punct(prev_surface);
    if (!boundary && auxiliaries().contains(word))
      boundary = !auxiliaries().contains(prev);
    if (!boundary)
      boundary = prepositions().contains(word) || conjunctions().contains(word);

    if (boundary) {
      out.push_back({start, i});
      start = i;
    }
  }
  out.push_back({start, n});
  return out;
}

std::vector<Chunk> chunk_claim(const TokenizedText& claim,
                               const ChunkerBackend& chunker) {
  if (claim.empty()) throw Error("cannot chunk an empty claim");
  std::vector<Chunk> chunks = chunker.chunk(claim);
  std::size_t expected = 0;
  for (const Chunk& c : chunks) {
    if (c.token_start != expected || c.token_end <= c.token_start)
      throw Error("chunker returned non-consecutive chunks");
    expected = c.token_end;
  }
  if (expected != claim.size())
    throw Error("chunker did not cover the whole claim");
  return chunks;
}

std::vector<Chunk> merge_function_word_chunks(const std::vector<Chunk>& chunks,
                                              const TokenizedText& text,
                                              const Lexicon& lexicon) {
  auto has_content = [&](const Chunk& c) {
    for (std::size_t t = c.token_start; t < c.token_end; ++t) {
      if (lexicon.is_content_word(text.tokens[t].surface)) return true;
    }
    return false;
  };

  std::vector<Chunk> out;
  std::optional<std::size_t> pending_start;
  for (const Chunk& c : chunks) {
    const std::size_t begin = pending_start.value_or(c.token_start);
    if (has_content(c)) {
      out.push_back({begin, c.token_end});
      pending_start.reset();
    } else {
      pending_start = begin;
    }
  }
  if (pending_start) {
    const std::size_t end = chunks.back().token_end;
    if (out.empty()) {
      out.push_back({*pending_start, end});
    } else {
      out.back().token_end = end;
    }
  }
  return out;
}

Chunk SpanLattice::tokens_of(const MergedSpan& span) const {
  return {base_chunks.at(span.chunk_start).token_start,
          base_chunks.at(span.chunk_end() - 1).token_end};
}

SpanLattice build_lattice(std::vector<Chunk> chunks, std::size_t max_merge) {
  if (chunks.empty()) throw std::invalid_argument("build_lattice: no chunks");
  if (max_merge == 0) throw std::invalid_argument("build_lattice: max_merge 0");
  SpanLattice lattice;
  lattice.max_merge = max_merge;
  lattice.base_chunks = std::move(chunks);
  const std::size_t l = lattice.base_chunks.size();
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t len = 1; len <= max_merge && i + len <= l; ++len)
      lattice.spans.push_back({i, len});
  }
  return lattice;
}

std::uint64_t count_segmentations(std::size_t l, std::size_t m) {
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::uint64_t> c(l + 1, 0);
  c[0] = 1;
  for (std::size_t i = 1; i <= l; ++i) {
    std::uint64_t total = 0;
    for (std::size_t k = 1; k <= m && k <= i; ++k) {
      total = (c[i - k] > kMax - total) ? kMax : total + c[i - k];
    }
    c[i] = total;
  }
  return c[l];
}

}  // namespace natver
