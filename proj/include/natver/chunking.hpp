#ifndef NATVER_CHUNKING_HPP_
#define NATVER_CHUNKING_HPP_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "natver/text.hpp"

namespace natver {

// Token range [token_start, token_end) of a tokenized claim.
struct Chunk {
  std::size_t token_start = 0;
  std::size_t token_end = 0;

  friend bool operator==(const Chunk&, const Chunk&) = default;
};

class ChunkerBackend {
 public:
  virtual ~ChunkerBackend() = default;
  virtual std::vector<Chunk> chunk(const TokenizedText& text) const = 0;
};

// Starts a new chunk at punctuation, after punctuation, and at closed-class
// boundary cues (auxiliaries/finite verbs, prepositions, coordinating
// conjunctions). Consecutive auxiliaries stay together ("has been").
class RuleChunker : public ChunkerBackend {
 public:
  std::vector<Chunk> chunk(const TokenizedText& text) const override;
};

// Throws natver::Error on an empty claim; otherwise returns consecutive,
// exhaustive chunks.
std::vector<Chunk> chunk_claim(const TokenizedText& claim,
                               const ChunkerBackend& chunker);

// Merges chunks without content words into their successor. A trailing
// function-word-only run is folded into the previous chunk.
std::vector<Chunk> merge_function_word_chunks(const std::vector<Chunk>& chunks,
                                              const TokenizedText& text,
                                              const Lexicon& lexicon);

// A run of chunk_len consecutive base chunks starting at chunk_start.
struct MergedSpan {
  std::size_t chunk_start = 0;
  std::size_t chunk_len = 1;

  std::size_t chunk_end() const { return chunk_start + chunk_len; }
  friend auto operator<=>(const MergedSpan&, const MergedSpan&) = default;
};

struct SpanLattice {
  std::vector<Chunk> base_chunks;
  std::vector<MergedSpan> spans;  // ordered by (chunk_start, chunk_len)
  std::size_t max_merge = 4;

  std::size_t num_chunks() const { return base_chunks.size(); }
  // Token range covered by the span.
  Chunk tokens_of(const MergedSpan& span) const;
};

inline constexpr std::size_t kDefaultMaxMerge = 4;

SpanLattice build_lattice(std::vector<Chunk> chunks,
                          std::size_t max_merge = kDefaultMaxMerge);

// Number of segmentations of l chunks into runs of at most m chunks:
// C(0) = 1, C(l) = C(l-1) + ... + C(l-m). Saturates at UINT64_MAX.
std::uint64_t count_segmentations(std::size_t l,
                                  std::size_t m = kDefaultMaxMerge);

}  // namespace natver

#endif  // NATVER_CHUNKING_HPP_
