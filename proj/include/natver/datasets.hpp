#ifndef NATVER_DATASETS_HPP_
#define NATVER_DATASETS_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "natver/natlog.hpp"
#include "natver/qa.hpp"

namespace natver {

inline constexpr std::size_t kDefaultEvidenceCap = 5;

struct ClaimRecord {
  std::string id;
  std::string claim;
  std::optional<VeracityLabel> label;
  std::vector<EvidenceSentence> evidence;  // retrieval rank order

  friend bool operator==(const ClaimRecord&, const ClaimRecord&) = default;
};

// FEVER-style label spelling: SUPPORTS, REFUTES, NOT ENOUGH INFO.
std::string_view fever_label(VeracityLabel label);

std::optional<VeracityLabel> parse_fever_label(std::string_view text);
// Ids that read as canonical integers are written back as JSON numbers.
nlohmann::json id_to_json(const std::string& id);

// One JSON object per line: {"id", "claim", "label"?, "evidence"}. Evidence
// entries are [title, sentence] pairs or bare sentence strings; only the
// first evidence_cap are kept. Throws natver::Error with the line number on
// malformed input or unknown labels.
std::vector<ClaimRecord> load_claims(std::istream& in,
                                     std::size_t evidence_cap = kDefaultEvidenceCap);
std::vector<ClaimRecord> load_claims(const std::filesystem::path& path,
                                     std::size_t evidence_cap = kDefaultEvidenceCap);

std::string serialize_claim(const ClaimRecord& record);

struct GoldStep {
  std::string claim_span;
  std::string evidence_span;
  NatOp natop = NatOp::Independence;
};

struct GoldProof {
  std::string claim_id;
  std::vector<GoldStep> steps;
};

// JSONL {"claim_id", "steps": [{"claim_span", "evidence_span", "natop"}]}.
std::vector<GoldProof> load_gold_proofs(std::istream& in);
std::vector<GoldProof> load_gold_proofs(const std::filesystem::path& path);

enum class Polarity { Positive, Negative };

struct QaTrainingPair {
  std::string input;
  std::string answer;
  Polarity polarity = Polarity::Positive;
  std::string source_claim_id;
};

std::string serialize_training_pair(const QaTrainingPair& pair);

// Positive pair per (gold step, template of its operator); negatives_per_step
// "No" pairs per step on a random wrong questionable operator. Labeled
// claims (optional) add one veracity pair per veracity template.
std::vector<QaTrainingPair> export_training_pairs(
    const std::vector<GoldProof>& golds, const TemplateSet& templates,
    std::size_t negatives_per_step, std::uint64_t seed,
    const std::vector<ClaimRecord>& claims = {});

struct Metrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::array<double, 3> f1{};
  // confusion[gold][predicted], indexed by VeracityState.
  std::array<std::array<std::size_t, 3>, 3> confusion{};
  std::size_t total = 0;
};

using LabeledId = std::pair<std::string, VeracityLabel>;

// Throws natver::Error on empty predictions or ids missing from gold.
Metrics evaluate(const std::vector<LabeledId>& predictions,
                 const std::vector<LabeledId>& gold);

}  // namespace natver

#endif  // NATVER_DATASETS_HPP_
