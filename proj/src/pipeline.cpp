#include "natver/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "natver/error.hpp"

namespace natver {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw Error("config: bad value for " + std::string(key) + ": \"" +
                std::string(value) + "\"");
  }
  return out;
}

std::filesystem::path resolve(std::string_view value,
                              const std::filesystem::path& base_dir) {
  std::filesystem::path p{std::string(value)};
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  return p;
}

[[noreturn]] void bad_choice(std::string_view key, std::string_view value) {
  throw Error("config: unknown " + std::string(key) + " \"" +
              std::string(value) + "\"");
}

}  // namespace

void EngineConfig::validate() const {
  if (max_merge < 1) throw std::invalid_argument("max_merge must be >= 1");
  if (evidence_cap < 1) throw std::invalid_argument("evidence_cap must be >= 1");
  if (!(rank_decay > 0.0 && rank_decay <= 1.0))
    throw std::invalid_argument("rank_decay must be in (0, 1]");
  if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
  if (weight_p < 0.0 || weight_v < 0.0)
    throw std::invalid_argument("score weights must be non-negative");
}

SearchOptions EngineConfig::search_options() const {
  SearchOptions o;
  o.mode = search_mode;
  o.label_mode = label_mode;
  o.weight_p = weight_p;
  o.weight_v = weight_v;
  o.enumeration_cutoff = enumeration_cutoff;
  return o;
}

std::string_view backend_kind_name(BackendKind kind) {
  switch (kind) {
    case BackendKind::Oracle: return "oracle";
    case BackendKind::Replay: return "replay";
    case BackendKind::Http: return "http";
  }
  return "?";
}

std::string_view aligner_kind_name(AlignerKind kind) {
  switch (kind) {
    case AlignerKind::Lexical: return "lexical";
    case AlignerKind::Replay: return "replay";
    case AlignerKind::Http: return "http";
  }
  return "?";
}

void apply_config_value(EngineConfig& c, std::string_view key,
                        std::string_view value,
                        const std::filesystem::path& base_dir) {
  if (key == "max_merge") {
    c.max_merge = parse_number<std::size_t>(key, value);
  } else if (key == "evidence_cap") {
    c.evidence_cap = parse_number<std::size_t>(key, value);
  } else if (key == "rank_decay") {
    c.rank_decay = parse_number<double>(key, value);
  } else if (key == "enumeration_cutoff") {
    c.enumeration_cutoff = parse_number<std::uint64_t>(key, value);
  } else if (key == "search_mode") {
    if (value == "auto") c.search_mode = SearchMode::Auto;
    else if (value == "enumerate") c.search_mode = SearchMode::Enumerate;
    else if (value == "dp") c.search_mode = SearchMode::Dp;
    else bad_choice(key, value);
  } else if (key == "backend") {
    if (value == "oracle") c.backend = BackendKind::Oracle;
    else if (value == "replay") c.backend = BackendKind::Replay;
    else if (value == "http") c.backend = BackendKind::Http;
    else bad_choice(key, value);
  } else if (key == "endpoint") {
    c.endpoint = std::string(value);
  } else if (key == "replay_store") {
    c.replay_store = resolve(value, base_dir);
  } else if (key == "aligner") {
    if (value == "lexical") c.aligner = AlignerKind::Lexical;
    else if (value == "replay") c.aligner = AlignerKind::Replay;
    else if (value == "http") c.aligner = AlignerKind::Http;
    else bad_choice(key, value);
  } else if (key == "align_endpoint") {
    c.align_endpoint = std::string(value);
  } else if (key == "align_store") {
    c.align_store = resolve(value, base_dir);
  } else if (key == "template_file") {
    c.template_file = resolve(value, base_dir);
  } else if (key == "stopword_file") {
    c.stopword_file = resolve(value, base_dir);
  } else if (key == "label_mode") {
    if (value == "three_way") c.label_mode = LabelMode::ThreeWay;
    else if (value == "binary") c.label_mode = LabelMode::Binary;
    else bad_choice(key, value);
  } else if (key == "weight_p") {
    c.weight_p = parse_number<double>(key, value);
  } else if (key == "weight_v") {
    c.weight_v = parse_number<double>(key, value);
  } else if (key == "jobs") {
    c.jobs = parse_number<std::size_t>(key, value);
  } else {
    throw Error("config: unknown key \"" + std::string(key) + "\"");
  }
}

void load_config_into(EngineConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path.string());
  const std::filesystem::path base = path.parent_path();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos)
      view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw Error(path.string() + ":" + std::to_string(lineno) +
                  ": expected key = value");
    }
    try {
      apply_config_value(config, trim(view.substr(0, eq)),
                         trim(view.substr(eq + 1)), base);
    } catch (const Error& ex) {
      throw Error(path.string() + ":" + std::to_string(lineno) + ": " +
                  ex.what());
    }
  }
}

EngineConfig load_config(const std::filesystem::path& path) {
  EngineConfig c;
  load_config_into(c, path);
  return c;
}

void apply_environment(EngineConfig& config) {
  if (config.endpoint.empty()) {
    if (const char* v = std::getenv("NATVER_QA_ENDPOINT")) config.endpoint = v;
  }
  if (config.align_endpoint.empty()) {
    if (const char* v = std::getenv("NATVER_ALIGN_ENDPOINT"))
      config.align_endpoint = v;
  }
}

std::shared_ptr<QaBackend> make_qa_backend(const EngineConfig& config,
                                           const TemplateSet& templates,
                                           const Lexicon& lexicon) {
  switch (config.backend) {
    case BackendKind::Oracle:
      return std::make_shared<RuleOracleBackend>(templates, lexicon);
    case BackendKind::Replay:
      if (config.replay_store.empty())
        throw Error("replay backend needs replay_store");
      return std::make_shared<ReplayBackend>(config.replay_store);
    case BackendKind::Http:
      if (config.endpoint.empty())
        throw Error("http backend needs an endpoint (NATVER_QA_ENDPOINT)");
      return std::make_shared<HttpQaBackend>(config.endpoint);
  }
  throw Error("unknown backend");
}

std::shared_ptr<AlignerBackend> make_aligner(const EngineConfig& config) {
  switch (config.aligner) {
    case AlignerKind::Lexical:
      return std::make_shared<LexicalAligner>();
    case AlignerKind::Replay:
      if (config.align_store.empty())
        throw Error("replay aligner needs align_store");
      return std::make_shared<ReplayAligner>(config.align_store);
    case AlignerKind::Http:
      if (config.align_endpoint.empty())
        throw Error("http aligner needs an endpoint (NATVER_ALIGN_ENDPOINT)");
      return std::make_shared<HttpAligner>(config.align_endpoint);
  }
  throw Error("unknown aligner");
}

namespace {

Lexicon load_lexicon(const EngineConfig& c) {
  return c.stopword_file.empty() ? Lexicon::shipped()
                                 : Lexicon::from_file(c.stopword_file);
}

TemplateSet load_templates(const EngineConfig& c) {
  return c.template_file.empty() ? TemplateSet::shipped()
                                 : TemplateSet::from_file(c.template_file);
}

}  // namespace

Engine::Engine(EngineConfig config)
    : config_(std::move(config)),
      lexicon_((config_.validate(), load_lexicon(config_))),
      templates_(load_templates(config_)),
      qa_(make_qa_backend(config_, templates_, lexicon_)),
      aligner_(make_aligner(config_)) {}

Engine::Engine(EngineConfig config, Lexicon lexicon, TemplateSet templates,
               std::shared_ptr<QaBackend> qa,
               std::shared_ptr<AlignerBackend> aligner)
    : config_(std::move(config)),
      lexicon_(std::move(lexicon)),
      templates_(std::move(templates)),
      qa_(std::move(qa)),
      aligner_(std::move(aligner)) {
  config_.validate();
  if (!qa_ || !aligner_) throw std::invalid_argument("null backend");
}

Verdict Engine::verify(const ClaimRecord& record) {
  try {
    std::vector<EvidenceSentence> evidence = record.evidence;
    if (evidence.size() > config_.evidence_cap)
      evidence.resize(config_.evidence_cap);
    if (evidence.empty()) throw Error("no evidence sentences");

    const TokenizedText claim = tokenize(record.claim);
    const std::vector<Chunk> chunks = merge_function_word_chunks(
        chunk_claim(claim, chunker_), claim, lexicon_);
    const SpanLattice lattice = build_lattice(chunks, config_.max_merge);

    std::vector<TokenizedText> ev_tokens;
    std::vector<WordAlignment> alignments;
    for (std::size_t j = 0; j < evidence.size(); ++j) {
      ev_tokens.push_back(tokenize(evidence[j].text));
      WordAlignment wa = aligner_->align(claim, ev_tokens.back());
      wa.evidence_sentence_idx = j;
      alignments.push_back(std::move(wa));
    }

    AssignmentMap assignments;
    for (const MergedSpan& span : lattice.spans) {
      const Chunk tokens = lattice.tokens_of(span);
      SpanChoice choice;
      choice.claim_text = claim.slice(tokens.token_start, tokens.token_end);

      std::vector<AlignedSpan> candidates;
      for (std::size_t j = 0; j < alignments.size(); ++j) {
        const auto projected = project_span(tokens, alignments[j]);
        if (!projected) continue;
        AlignedSpan cand;
        cand.claim_span = span;
        cand.evidence_sentence_idx = j;
        cand.evidence_token_start = projected->token_start;
        cand.evidence_token_end = projected->token_end;
        cand.evidence_text =
            ev_tokens[j].slice(projected->token_start, projected->token_end);
        candidates.push_back(std::move(cand));
      }
      choice.evidence = select_evidence_span(choice.claim_text,
                                             std::move(candidates), similarity_,
                                             config_.rank_decay);
      std::optional<std::string> ev_text;
      if (choice.evidence) ev_text = choice.evidence->evidence_text;
      choice.assignment =
          assign_natop(choice.claim_text, ev_text, templates_, *qa_, &cache_);
      assignments.emplace(span, std::move(choice));
    }

    const VeracityDistribution dist =
        score_veracity(record.claim, evidence, templates_, *qa_);

    Verdict v;
    v.id = record.id;
    v.proof = select_proof(lattice, assignments, dist, config_.search_options());
    v.label = v.proof.label;
    v.state_trace = dfa_trace(v.proof.ops());
    return v;
  } catch (const std::exception& ex) {
    throw Error("claim " + record.id + ": " + ex.what());
  }
}

json proof_to_json(const Proof& proof) {
  json steps = json::array();
  for (const ProofStep& s : proof.steps) {
    json step;
    step["claim_span"] = s.claim_text;
    step["evidence_span"] = s.evidence_text ? json(*s.evidence_text) : json(nullptr);
    step["evidence_sentence"] =
        s.evidence_sentence ? json(*s.evidence_sentence) : json(nullptr);
    step["natop"] = natop_key(s.natop);
    step["prob"] = s.yes_probability;
    steps.push_back(std::move(step));
  }
  json states = json::array();
  for (VeracityState st : proof.states()) states.push_back(state_name(st));

  json j;
  j["steps"] = std::move(steps);
  j["s_p"] = proof.s_p;
  j["s_v"] = proof.s_v;
  j["score"] = proof.score;
  j["label"] = label_name(proof.label);
  j["states"] = std::move(states);
  if (proof.binary_fallback) j["binary_fallback"] = true;
  return j;
}

json verdict_to_json(const Verdict& verdict) {
  json j = proof_to_json(verdict.proof);
  j["id"] = id_to_json(verdict.id);
  j["label"] = label_name(verdict.label);
  json trace = json::array();
  for (VeracityState st : verdict.state_trace) trace.push_back(state_name(st));
  j["state_trace"] = std::move(trace);
  return j;
}

EvalResult run_eval(const std::vector<ClaimRecord>& records, Engine& engine) {
  if (records.empty()) throw Error("empty dataset");

  EvalResult result;
  result.verdicts.resize(records.size());
  std::vector<std::optional<std::string>> errors(records.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      try {
        result.verdicts[i] = engine.verify(records[i]);
      } catch (const std::exception& ex) {
        errors[i] = ex.what();
      }
    }
  };
  const std::size_t n_threads =
      std::min<std::size_t>(engine.config().jobs, records.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  for (std::size_t i = 0; i < records.size(); ++i) {
    if (errors[i]) result.failures.push_back({i, records[i].id, *errors[i]});
  }
  if (result.failures.size() == records.size()) {
    throw Error("all " + std::to_string(records.size()) +
                " claims failed; first error: " + result.failures.front().message);
  }

  std::vector<LabeledId> predictions, gold;
  std::size_t unlabeled = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].label) {
      ++unlabeled;
      continue;
    }
    gold.emplace_back(records[i].id, *records[i].label);
    if (result.verdicts[i])
      predictions.emplace_back(records[i].id, result.verdicts[i]->label);
  }
  if (unlabeled > 0) {
    result.metrics_error =
        std::to_string(unlabeled) + " record(s) have no gold label";
  } else {
    try {
      result.metrics = evaluate(predictions, gold);
    } catch (const Error& ex) {
      result.metrics_error = ex.what();
    }
  }
  return result;
}

std::string verdicts_jsonl(const EvalResult& result) {
  std::string out;
  for (const auto& v : result.verdicts) {
    if (!v) continue;
    out += verdict_to_json(*v).dump();
    out += '\n';
  }
  return out;
}

json metrics_to_json(const EvalResult& result) {
  json j;
  if (result.metrics) {
    const Metrics& m = *result.metrics;
    j["accuracy"] = m.accuracy;
    j["macro_f1"] = m.macro_f1;
    j["total"] = m.total;
    json f1 = json::object();
    json confusion = json::object();
    for (VeracityState g : kAllStates) {
      const auto gi = static_cast<std::size_t>(g);
      f1[std::string(label_name(g))] = m.f1[gi];
      json row = json::object();
      for (VeracityState p : kAllStates)
        row[std::string(label_name(p))] = m.confusion[gi][static_cast<std::size_t>(p)];
      confusion[std::string(label_name(g))] = std::move(row);
    }
    j["f1"] = std::move(f1);
    j["confusion"] = std::move(confusion);
  } else {
    j["error"] = result.metrics_error.value_or("metrics unavailable");
  }
  json failures = json::array();
  for (const ClaimFailure& f : result.failures)
    failures.push_back({{"id", id_to_json(f.id)}, {"message", f.message}});
  j["failed"] = result.failures.size();
  j["failures"] = std::move(failures);
  return j;
}

}  // namespace natver
