#ifndef NATVER_QA_HPP_
#define NATVER_QA_HPP_

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "natver/natlog.hpp"
#include "natver/text.hpp"

namespace natver {

inline const std::vector<std::string> kBooleanChoices = {"Yes", "No"};
inline const std::vector<std::string> kVeracityChoices = {
    "Supports", "Refutes", "Not enough info"};

// A boolean question for one operator ({claim_span}, {evidence_span}) or a
// veracity question over the whole claim ({claim}, {evidence_block}).
struct QuestionTemplate {
  std::optional<NatOp> natop;  // nullopt for veracity templates
  std::string pattern;
  std::vector<std::string> choices;
  std::string id;  // "<target>/<index within target>"

  bool is_veracity() const { return !natop.has_value(); }
};

class TemplateSet {
 public:
  TemplateSet() = default;
  explicit TemplateSet(std::vector<QuestionTemplate> templates);

  // UTF-8 JSON list of {"target", "pattern", "choices"}; target is an
  // operator key or "veracity".
  static TemplateSet from_file(const std::filesystem::path& path);
  static TemplateSet shipped();

  const std::vector<QuestionTemplate>& all() const { return templates_; }
  std::vector<const QuestionTemplate*> for_op(NatOp op) const;
  std::vector<const QuestionTemplate*> veracity() const;
  // Largest number of templates attached to any questionable operator.
  std::size_t max_per_op() const;

 private:
  std::vector<QuestionTemplate> templates_;
};

std::string fill_natop_template(const QuestionTemplate& t,
                                const std::string& claim_span,
                                const std::string& evidence_span);
std::string fill_veracity_template(const QuestionTemplate& t,
                                   const std::string& claim,
                                   const std::string& evidence_block);

struct EvidenceSentence {
  std::string title;
  std::string text;

  friend bool operator==(const EvidenceSentence&, const EvidenceSentence&) = default;
};

// "[t0] e0 </s> [t1] e1 ..." with the bracket block omitted for empty titles.
std::string evidence_block(const std::vector<EvidenceSentence>& evidence);
// "claim </s> " followed by evidence_block.
std::string build_evidence_input(const std::string& claim,
                                 const std::vector<EvidenceSentence>& evidence);

struct ScoreRequest {
  std::string input;
  std::vector<std::string> choices;
};

// Maps a prompt and its answer choices to one length-normalized
// log-probability per choice. Implementations must be deterministic and
// tolerate concurrent calls.
class QaBackend {
 public:
  virtual ~QaBackend() = default;
  virtual std::vector<double> score(const std::string& input,
                                    const std::vector<std::string>& choices) = 0;
  virtual std::vector<std::vector<double>> score_batch(
      const std::vector<ScoreRequest>& items);
};

// Deterministic offline backend. Recovers the operator and spans from the
// prompt by matching it against the template set, then answers with fixed
// log-probabilities (0 for the chosen answer, -20 for the other). Veracity
// prompts get 0 for every label.
class RuleOracleBackend : public QaBackend {
 public:
  RuleOracleBackend(const TemplateSet& templates, Lexicon lexicon);
  ~RuleOracleBackend() override;

  std::vector<double> score(const std::string& input,
                            const std::vector<std::string>& choices) override;

  // The yes/no decision on a (claim span, evidence span) pair.
  bool holds(NatOp op, const std::string& claim_span,
             const std::string& evidence_span) const;

  static constexpr double kChosen = 0.0;
  static constexpr double kRejected = -20.0;

 private:
  struct Matcher;
  std::vector<Matcher> matchers_;
  Lexicon lexicon_;
};

// True if the text contains a negation cue (not, no, never, incapable,
// n't, "other than").
bool has_negation_cue(const std::string& text);

// 64-bit FNV-1a over the input and choices; hex string.
std::string prompt_key(const std::string& input,
                       const std::vector<std::string>& choices);

// Serves recorded scores. Unknown prompts throw natver::Error naming the
// input ("unrecorded prompt: ...").
class ReplayBackend : public QaBackend {
 public:
  explicit ReplayBackend(const std::filesystem::path& store_path);
  std::vector<double> score(const std::string& input,
                            const std::vector<std::string>& choices) override;
  std::size_t size() const { return store_.size(); }

 private:
  std::unordered_map<std::string, std::vector<double>> store_;
};

// Forwards to a live backend and keeps every response for save().
class RecordingBackend : public QaBackend {
 public:
  RecordingBackend(std::shared_ptr<QaBackend> inner,
                   std::filesystem::path store_path)
      : inner_(std::move(inner)), path_(std::move(store_path)) {}
  std::vector<double> score(const std::string& input,
                            const std::vector<std::string>& choices) override;
  void save() const;

 private:
  struct Entry {
    std::string input;
    std::vector<std::string> choices;
    std::vector<double> log_probs;
  };
  std::shared_ptr<QaBackend> inner_;
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::map<std::string, Entry> entries_;
};

// Client for the scoring service: POST {endpoint}/v1/score.
class HttpQaBackend : public QaBackend {
 public:
  explicit HttpQaBackend(std::string endpoint) : endpoint_(std::move(endpoint)) {}
  std::vector<double> score(const std::string& input,
                            const std::vector<std::string>& choices) override;
  std::vector<std::vector<double>> score_batch(
      const std::vector<ScoreRequest>& items) override;

 private:
  std::string endpoint_;
};

// Per-template score cache keyed by (claim span, evidence span, template id).
class QaCache {
 public:
  std::optional<std::vector<double>> get(const std::string& key) const;
  void put(const std::string& key, std::vector<double> value);
  std::size_t size() const;

  static std::string key(const std::string& claim_span,
                         const std::string& evidence_span,
                         const std::string& template_id);

 private:
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, std::vector<double>> map_;
};

struct NatOpScore {
  NatOp natop = NatOp::Equivalence;
  double avg_log_yes = 0.0;
  double avg_log_no = 0.0;

  bool answered_yes() const { return avg_log_yes > avg_log_no; }
  // exp(yes) / (exp(yes) + exp(no)).
  double yes_probability() const;
};

struct NatOpAssignment {
  NatOp natop = NatOp::Independence;
  double yes_probability = 0.5;
  std::vector<NatOpScore> per_op_scores;
};

inline constexpr double kIndependenceProbability = 0.5;

// Averages per-template log-probabilities of Yes and No. Throws
// std::invalid_argument for Independence, natver::Error if op has no
// templates.
NatOpScore score_natop(const std::string& claim_span,
                       const std::string& evidence_span, NatOp op,
                       const TemplateSet& templates, QaBackend& backend,
                       QaCache* cache = nullptr);

// Picks the operator for an aligned pair: the Yes-answered operator with the
// highest yes-probability, or Independence (0.5) when none answers Yes or
// the evidence span is absent.
NatOpAssignment assign_natop(const std::string& claim_span,
                             const std::optional<std::string>& evidence_span,
                             const TemplateSet& templates, QaBackend& backend,
                             QaCache* cache = nullptr);

// Probability per VeracityState (S, R, N).
using VeracityDistribution = std::array<double, 3>;

inline double prob_of(const VeracityDistribution& d, VeracityState s) {
  return d[static_cast<std::size_t>(s)];
}

// Averages per-template label log-probabilities and softmaxes them into a
// distribution over the three labels.
VeracityDistribution score_veracity(const std::string& claim,
                                    const std::vector<EvidenceSentence>& evidence,
                                    const TemplateSet& templates,
                                    QaBackend& backend);

}  // namespace natver

#endif  // NATVER_QA_HPP_
