#ifndef NATVER_PROOFSEARCH_HPP_
#define NATVER_PROOFSEARCH_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "natver/alignment.hpp"
#include "natver/chunking.hpp"
#include "natver/natlog.hpp"
#include "natver/qa.hpp"

namespace natver {

struct ProofStep {
  MergedSpan claim_span;
  std::string claim_text;
  std::optional<std::string> evidence_text;
  std::optional<std::size_t> evidence_sentence;
  NatOp natop = NatOp::Independence;
  double yes_probability = kIndependenceProbability;
};

struct Proof {
  std::vector<ProofStep> steps;
  double s_p = 0.0;
  double s_v = 0.0;
  double score = 0.0;
  VeracityState final_state = kStartState;
  VeracityLabel label = kStartState;
  // Binary label mode only: every proof ended in N and the label came from
  // the veracity distribution restricted to Supports/Refutes.
  bool binary_fallback = false;

  std::vector<NatOp> ops() const;
  // State after each step (one entry per step).
  std::vector<VeracityState> states() const;
};

// Everything the search needs to know about one lattice span.
struct SpanChoice {
  std::string claim_text;
  std::optional<AlignedSpan> evidence;
  NatOpAssignment assignment;
};

using AssignmentMap = std::map<MergedSpan, SpanChoice>;

enum class SearchMode { Auto, Enumerate, Dp };
enum class LabelMode { ThreeWay, Binary };

struct SearchOptions {
  SearchMode mode = SearchMode::Auto;
  LabelMode label_mode = LabelMode::ThreeWay;
  double weight_p = 1.0;
  double weight_v = 1.0;
  // Auto mode enumerates when C(l) is at most this, otherwise runs the DP.
  std::uint64_t enumeration_cutoff = 4096;
};

// Scores closer than this are ties, resolved by more steps first and then
// by the segmentation with the longest leading spans.
inline constexpr double kScoreTolerance = 1e-9;

// Mean yes-probability over the steps; throws std::invalid_argument on an
// empty proof.
double compute_s_p(std::span<const ProofStep> steps);

// Probability of the label the DFA ends in.
double compute_s_v(std::span<const NatOp> ops, const VeracityDistribution& dist);

// Highest scoring segmentation under weight_p * s_p + weight_v * s_v. Every
// lattice span must have an entry in assignments.
Proof select_proof(const SpanLattice& lattice, const AssignmentMap& assignments,
                   const VeracityDistribution& dist,
                   const SearchOptions& options = {});

}  // namespace natver

#endif  // NATVER_PROOFSEARCH_HPP_
