#ifndef NATVER_ALIGNMENT_HPP_
#define NATVER_ALIGNMENT_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "natver/chunking.hpp"
#include "natver/text.hpp"

namespace natver {

using WordLink = std::pair<std::size_t, std::size_t>;  // (claim, evidence)

struct WordAlignment {
  std::size_t evidence_sentence_idx = 0;
  std::set<WordLink> links;
};

// Evidence span chosen for one lattice span.
struct AlignedSpan {
  MergedSpan claim_span;
  std::size_t evidence_sentence_idx = 0;
  std::size_t evidence_token_start = 0;
  std::size_t evidence_token_end = 0;
  std::string evidence_text;
  double similarity = 0.0;
  double weighted_score = 0.0;
};

class AlignerBackend {
 public:
  virtual ~AlignerBackend() = default;
  // Links claim tokens to evidence tokens. Must be deterministic and safe
  // for concurrent calls. evidence_sentence_idx is left for the caller.
  virtual WordAlignment align(const TokenizedText& claim,
                              const TokenizedText& evidence) = 0;
};

// Exact surface match, then case-folded match, then a shared stem of at
// least four characters; the leftmost evidence token wins within a tier.
// Punctuation is never linked.
class LexicalAligner : public AlignerBackend {
 public:
  WordAlignment align(const TokenizedText& claim,
                      const TokenizedText& evidence) override;
};

WordAlignment builtin_lexical_align(const TokenizedText& claim,
                                    const TokenizedText& evidence);

// Links recorded per (claim tokens, evidence tokens) pair. Unknown pairs
// throw natver::Error.
class ReplayAligner : public AlignerBackend {
 public:
  explicit ReplayAligner(const std::filesystem::path& store_path);
  WordAlignment align(const TokenizedText& claim,
                      const TokenizedText& evidence) override;
  std::size_t size() const { return store_.size(); }

 private:
  std::map<std::string, std::set<WordLink>> store_;
};

// Forwards to another aligner and keeps every answer for save().
class RecordingAligner : public AlignerBackend {
 public:
  RecordingAligner(std::shared_ptr<AlignerBackend> inner,
                   std::filesystem::path store_path)
      : inner_(std::move(inner)), path_(std::move(store_path)) {}
  WordAlignment align(const TokenizedText& claim,
                      const TokenizedText& evidence) override;
  void save() const;

 private:
  struct Entry {
    std::vector<std::string> source;
    std::vector<std::string> target;
    std::set<WordLink> links;
  };
  std::shared_ptr<AlignerBackend> inner_;
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::map<std::string, Entry> entries_;
};

// Client for POST {endpoint}/v1/align.
class HttpAligner : public AlignerBackend {
 public:
  explicit HttpAligner(std::string endpoint) : endpoint_(std::move(endpoint)) {}
  WordAlignment align(const TokenizedText& claim,
                      const TokenizedText& evidence) override;

 private:
  std::string endpoint_;
};

class SimilarityBackend {
 public:
  virtual ~SimilarityBackend() = default;
  // In [0, 1].
  virtual double similarity(const std::string& a, const std::string& b) const = 0;
};

// Cosine similarity of case-folded word-count vectors.
class LexicalSimilarity : public SimilarityBackend {
 public:
  double similarity(const std::string& a, const std::string& b) const override;
};

// Contiguous evidence token range [min linked, max linked + 1) for the claim
// tokens in claim_tokens, or nullopt when none of them is linked.
std::optional<Chunk> project_span(const Chunk& claim_tokens,
                                  const WordAlignment& alignment);

inline constexpr double kDefaultRankDecay = 0.8;

// Scores each candidate with sim(claim_text, evidence_text) * decay^rank,
// rank being evidence_sentence_idx, and returns the best one (lower rank on
// ties).
std::optional<AlignedSpan> select_evidence_span(
    const std::string& claim_text, std::vector<AlignedSpan> candidates,
    const SimilarityBackend& sim, double rank_decay = kDefaultRankDecay);

}  // namespace natver

#endif  // NATVER_ALIGNMENT_HPP_
