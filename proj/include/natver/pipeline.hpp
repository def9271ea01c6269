#ifndef NATVER_PIPELINE_HPP_
#define NATVER_PIPELINE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "natver/alignment.hpp"
#include "natver/chunking.hpp"
#include "natver/datasets.hpp"
#include "natver/proofsearch.hpp"
#include "natver/qa.hpp"
#include "natver/text.hpp"

namespace natver {

enum class BackendKind { Oracle, Replay, Http };
enum class AlignerKind { Lexical, Replay, Http };

struct EngineConfig {
  std::size_t max_merge = kDefaultMaxMerge;
  std::size_t evidence_cap = 5;
  double rank_decay = kDefaultRankDecay;
  std::uint64_t enumeration_cutoff = 4096;
  SearchMode search_mode = SearchMode::Auto;

  BackendKind backend = BackendKind::Oracle;
  std::string endpoint;                 // http backend
  std::filesystem::path replay_store;   // replay backend

  AlignerKind aligner = AlignerKind::Lexical;
  std::string align_endpoint;
  std::filesystem::path align_store;

  std::filesystem::path template_file;  // empty: shipped templates
  std::filesystem::path stopword_file;  // empty: shipped stopwords

  LabelMode label_mode = LabelMode::ThreeWay;
  double weight_p = 1.0;
  double weight_v = 1.0;
  std::size_t jobs = 1;

  // Throws std::invalid_argument when a field is out of range.
  void validate() const;
  SearchOptions search_options() const;
};

// Sets one field from its textual form. Relative paths are resolved
// against base_dir. Throws natver::Error on unknown keys or bad values.
void apply_config_value(EngineConfig& config, std::string_view key,
                        std::string_view value,
                        const std::filesystem::path& base_dir = {});

// Flat "key = value" lines; '#' starts a comment.
EngineConfig load_config(const std::filesystem::path& path);
void load_config_into(EngineConfig& config, const std::filesystem::path& path);

// Fills empty endpoints from NATVER_QA_ENDPOINT / NATVER_ALIGN_ENDPOINT.
void apply_environment(EngineConfig& config);

std::string_view backend_kind_name(BackendKind kind);
std::string_view aligner_kind_name(AlignerKind kind);

struct Verdict {
  std::string id;
  VeracityLabel label = kStartState;
  Proof proof;
  std::vector<VeracityState> state_trace;  // steps + 1 entries, from S
};

// Wires chunking, alignment, operator assignment and proof search together.
// verify() may be called from several threads at once.
class Engine {
 public:
  // Builds the lexicon, templates and backends named by the config.
  explicit Engine(EngineConfig config);
  Engine(EngineConfig config, Lexicon lexicon, TemplateSet templates,
         std::shared_ptr<QaBackend> qa, std::shared_ptr<AlignerBackend> aligner);

  Verdict verify(const ClaimRecord& record);

  const EngineConfig& config() const { return config_; }
  const TemplateSet& templates() const { return templates_; }
  const Lexicon& lexicon() const { return lexicon_; }
  QaBackend& qa() { return *qa_; }
  AlignerBackend& aligner() { return *aligner_; }
  const QaCache& cache() const { return cache_; }

 private:
  EngineConfig config_;
  Lexicon lexicon_;
  TemplateSet templates_;
  std::shared_ptr<QaBackend> qa_;
  std::shared_ptr<AlignerBackend> aligner_;
  RuleChunker chunker_;
  LexicalSimilarity similarity_;
  QaCache cache_;
};

std::shared_ptr<QaBackend> make_qa_backend(const EngineConfig& config,
                                           const TemplateSet& templates,
                                           const Lexicon& lexicon);
std::shared_ptr<AlignerBackend> make_aligner(const EngineConfig& config);

nlohmann::json proof_to_json(const Proof& proof);
nlohmann::json verdict_to_json(const Verdict& verdict);

enum class RenderStyle { Table, Inline, Json };
std::optional<RenderStyle> parse_render_style(std::string_view text);

std::string render_proof(const Proof& proof, RenderStyle style = RenderStyle::Table);
std::string render_verdict(const Verdict& verdict, const std::string& claim,
                           RenderStyle style = RenderStyle::Table);

struct ClaimFailure {
  std::size_t index = 0;
  std::string id;
  std::string message;
};

struct EvalResult {
  std::vector<std::optional<Verdict>> verdicts;  // input order
  std::vector<ClaimFailure> failures;
  std::optional<Metrics> metrics;
  std::optional<std::string> metrics_error;
};

// Verifies every record on up to config.jobs threads. Throws natver::Error
// on an empty dataset or when every claim fails.
EvalResult run_eval(const std::vector<ClaimRecord>& records, Engine& engine);

// One verdict per line, input order, failed claims skipped.
std::string verdicts_jsonl(const EvalResult& result);
nlohmann::json metrics_to_json(const EvalResult& result);

}  // namespace natver

#endif  // NATVER_PIPELINE_HPP_
