// natver: command-line front end for the natural-logic verification engine.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "natver/datasets.hpp"
#include "natver/error.hpp"
#include "natver/natlog.hpp"
#include "natver/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EngineFlags {
  std::string config_file;
  std::string backend;
  std::string aligner;
  std::string endpoint;
  std::string align_endpoint;
  std::string replay_store;
  std::string align_store;
  std::string templates;
  std::string label_mode;
  std::string search_mode;
  std::size_t jobs = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_file, "key = value config file");
    cmd->add_option("--backend", backend, "QA backend")
        ->check(CLI::IsMember({"oracle", "replay", "http"}));
    cmd->add_option("--aligner", aligner, "word aligner")
        ->check(CLI::IsMember({"lexical", "replay", "http"}));
    cmd->add_option("--endpoint", endpoint, "scoring service base URL");
    cmd->add_option("--align-endpoint", align_endpoint, "alignment service base URL");
    cmd->add_option("--replay-store", replay_store, "recorded QA scores");
    cmd->add_option("--align-store", align_store, "recorded alignments");
    cmd->add_option("--templates", templates, "question template file");
    cmd->add_option("--label-mode", label_mode)
        ->check(CLI::IsMember({"three_way", "binary"}));
    cmd->add_option("--search", search_mode)
        ->check(CLI::IsMember({"auto", "enumerate", "dp"}));
    cmd->add_option("--jobs", jobs, "parallel claims")->check(CLI::PositiveNumber);
  }

  natver::EngineConfig build() const {
    natver::EngineConfig c;
    try {
      if (!config_file.empty()) natver::load_config_into(c, config_file);
      auto set = [&c](const char* key, const std::string& value) {
        if (!value.empty()) natver::apply_config_value(c, key, value);
      };
      set("backend", backend);
      set("aligner", aligner);
      set("endpoint", endpoint);
      set("align_endpoint", align_endpoint);
      set("replay_store", replay_store);
      set("align_store", align_store);
      set("template_file", templates);
      set("label_mode", label_mode);
      set("search_mode", search_mode);
      if (jobs > 0) c.jobs = jobs;
      natver::apply_environment(c);
      c.validate();
    } catch (const std::exception& ex) {
      throw UsageError(ex.what());
    }
    return c;
  }
};

std::vector<natver::EvidenceSentence> read_evidence_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open evidence file: " + path);
  std::vector<natver::EvidenceSentence> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) out.push_back({"", line});
    else out.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return out;
}

std::vector<natver::ClaimRecord> read_claims(const std::string& path,
                                             std::size_t cap) {
  std::vector<natver::ClaimRecord> records;
  try {
    records = natver::load_claims(std::filesystem::path(path), cap);
  } catch (const natver::Error& ex) {
    throw UsageError(path + ": " + ex.what());
  }
  if (records.empty()) throw UsageError(path + ": no claims");
  return records;
}

std::unique_ptr<natver::Engine> make_engine(const natver::EngineConfig& config) {
  try {
    return std::make_unique<natver::Engine>(config);
  } catch (const std::exception& ex) {
    throw UsageError(ex.what());
  }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw natver::Error("cannot write " + path.string());
  out << content;
}

// ---------------------------------------------------------------------------

struct VerifyArgs {
  EngineFlags engine;
  std::string claim;
  std::string evidence;
  std::string input;
  std::string render = "table";
};

int cmd_verify(const VerifyArgs& a) {
  if (a.claim.empty() == a.input.empty())
    throw UsageError("give exactly one of --claim or --input");
  if (!a.claim.empty() && a.evidence.empty())
    throw UsageError("--claim needs --evidence");
  const auto style = natver::parse_render_style(a.render);

  const natver::EngineConfig config = a.engine.build();
  std::vector<natver::ClaimRecord> records;
  if (!a.claim.empty()) {
    natver::ClaimRecord r;
    r.id = "0";
    r.claim = a.claim;
    r.evidence = read_evidence_file(a.evidence);
    if (r.evidence.size() > config.evidence_cap) r.evidence.resize(config.evidence_cap);
    records.push_back(std::move(r));
  } else {
    records = read_claims(a.input, config.evidence_cap);
  }

  auto engine = make_engine(config);
  natver::EvalResult result;
  try {
    result = natver::run_eval(records, *engine);
  } catch (const natver::Error& ex) {
    std::cerr << "natver: " << ex.what() << '\n';
    return kExitFailure;
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (result.verdicts[i])
      std::cout << natver::render_verdict(*result.verdicts[i], records[i].claim, *style);
  }
  for (const auto& f : result.failures) std::cerr << "natver: " << f.message << '\n';
  return result.failures.empty() ? kExitOk : kExitFailure;
}

struct EvalArgs {
  EngineFlags engine;
  std::string data;
  std::string out = ".";
};

int cmd_eval(const EvalArgs& a) {
  const natver::EngineConfig config = a.engine.build();
  const auto records = read_claims(a.data, config.evidence_cap);
  auto engine = make_engine(config);

  natver::EvalResult result;
  try {
    result = natver::run_eval(records, *engine);
  } catch (const natver::Error& ex) {
    std::cerr << "natver: " << ex.what() << '\n';
    return kExitFailure;
  }
  const std::filesystem::path dir(a.out);
  std::filesystem::create_directories(dir);
  write_file(dir / "verdicts.jsonl", natver::verdicts_jsonl(result));
  write_file(dir / "metrics.json", natver::metrics_to_json(result).dump(2) + "\n");

  for (const auto& f : result.failures) std::cerr << "natver: " << f.message << '\n';
  std::size_t done = records.size() - result.failures.size();
  std::cerr << "verified " << done << "/" << records.size() << " claims\n";
  if (result.metrics) {
    std::printf("accuracy %.4f\nmacro_f1 %.4f\n", result.metrics->accuracy,
                result.metrics->macro_f1);
  } else {
    std::cerr << "natver: metrics: " << *result.metrics_error << '\n';
    return kExitFailure;
  }
  return result.failures.empty() ? kExitOk : kExitFailure;
}

struct ExportArgs {
  std::string gold;
  std::string claims;
  std::string templates;
  std::string out;
  std::size_t negatives = 1;
  std::uint64_t seed = 0;
};

int cmd_export_qa(const ExportArgs& a) {
  std::vector<natver::GoldProof> golds;
  std::vector<natver::ClaimRecord> claims;
  natver::TemplateSet templates;
  try {
    golds = natver::load_gold_proofs(std::filesystem::path(a.gold));
    if (!a.claims.empty()) claims = natver::load_claims(std::filesystem::path(a.claims));
    templates = a.templates.empty() ? natver::TemplateSet::shipped()
                                    : natver::TemplateSet::from_file(a.templates);
  } catch (const natver::Error& ex) {
    throw UsageError(ex.what());
  }
  const auto pairs =
      natver::export_training_pairs(golds, templates, a.negatives, a.seed, claims);
  std::string text;
  for (const auto& p : pairs) text += natver::serialize_training_pair(p) + "\n";
  write_file(a.out, text);
  std::cerr << "wrote " << pairs.size() << " pairs to " << a.out << '\n';
  return kExitOk;
}

int cmd_dump_dfa(const std::string& format) {
  const natver::DfaTable& dfa = natver::shipped_dfa();
  if (format == "json") {
    nlohmann::ordered_json j;
    for (natver::VeracityState s : natver::kAllStates) {
      nlohmann::ordered_json row;
      for (natver::NatOp op : natver::kAllNatOps)
        row[std::string(natver::natop_name(op))] = natver::state_name(dfa.next(s, op));
      j[std::string(natver::state_name(s))] = row;
    }
    std::cout << j.dump(2) << '\n';
    return kExitOk;
  }
  auto emit = [](std::string line) {
    line.erase(line.find_last_not_of(' ') + 1);
    std::cout << line << '\n';
  };
  char cell[32];
  std::string header = "     ";
  for (natver::NatOp op : natver::kAllNatOps) {
    std::snprintf(cell, sizeof cell, " %-18s", std::string(natver::natop_name(op)).c_str());
    header += cell;
  }
  emit(header);
  for (natver::VeracityState s : natver::kAllStates) {
    std::string row = std::string(natver::state_name(s)) + "    ";
    for (natver::NatOp op : natver::kAllNatOps) {
      std::snprintf(cell, sizeof cell, " %-18s",
                    std::string(natver::state_name(dfa.next(s, op))).c_str());
      row += cell;
    }
    emit(row);
  }
  return kExitOk;
}

struct RecordArgs {
  EngineFlags engine;
  std::string data;
  std::string qa_out;
  std::string align_out;
};

int cmd_record(const RecordArgs& a) {
  natver::EngineConfig config = a.engine.build();
  if (config.backend == natver::BackendKind::Replay)
    throw UsageError("record needs a live backend (oracle or http)");
  const auto records = read_claims(a.data, config.evidence_cap);

  natver::Lexicon lexicon;
  natver::TemplateSet templates;
  std::shared_ptr<natver::QaBackend> qa;
  std::shared_ptr<natver::AlignerBackend> aligner;
  try {
    lexicon = config.stopword_file.empty()
                  ? natver::Lexicon::shipped()
                  : natver::Lexicon::from_file(config.stopword_file);
    templates = config.template_file.empty()
                    ? natver::TemplateSet::shipped()
                    : natver::TemplateSet::from_file(config.template_file);
    qa = natver::make_qa_backend(config, templates, lexicon);
    aligner = natver::make_aligner(config);
  } catch (const std::exception& ex) {
    throw UsageError(ex.what());
  }
  auto rec_qa = std::make_shared<natver::RecordingBackend>(qa, a.qa_out);
  auto rec_align = std::make_shared<natver::RecordingAligner>(aligner, a.align_out);
  natver::Engine engine(config, lexicon, templates, rec_qa, rec_align);

  natver::EvalResult result;
  try {
    result = natver::run_eval(records, engine);
  } catch (const natver::Error& ex) {
    std::cerr << "natver: " << ex.what() << '\n';
    return kExitFailure;
  }
  rec_qa->save();
  rec_align->save();
  for (const auto& f : result.failures) std::cerr << "natver: " << f.message << '\n';
  return result.failures.empty() ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Natural-logic claim verification"};
  app.require_subcommand(1);

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "verify one claim or a JSONL batch");
  verify.engine.attach(verify_cmd);
  verify_cmd->add_option("--claim", verify.claim, "claim text");
  verify_cmd->add_option("--evidence", verify.evidence,
                         "evidence file, one 'title<TAB>sentence' per line");
  verify_cmd->add_option("--input", verify.input, "claims JSONL");
  verify_cmd->add_option("--render", verify.render)
      ->check(CLI::IsMember({"table", "inline", "json"}));

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "verify a labeled dataset and score it");
  eval.engine.attach(eval_cmd);
  eval_cmd->add_option("--data", eval.data, "claims JSONL")->required();
  eval_cmd->add_option("--out", eval.out, "output directory");

  ExportArgs exp;
  auto* export_cmd = app.add_subcommand("export-qa", "write QA training pairs");
  export_cmd->add_option("--gold", exp.gold, "gold proofs JSONL")->required();
  export_cmd->add_option("--negatives", exp.negatives, "negatives per step");
  export_cmd->add_option("--seed", exp.seed);
  export_cmd->add_option("--out", exp.out)->required();
  export_cmd->add_option("--templates", exp.templates);
  export_cmd->add_option("--claims", exp.claims, "labeled claims for veracity pairs");

  std::string dfa_format = "text";
  auto* dfa_cmd = app.add_subcommand("dump-dfa", "print the transition table");
  dfa_cmd->add_option("--format", dfa_format)->check(CLI::IsMember({"text", "json"}));

  RecordArgs record;
  auto* record_cmd =
      app.add_subcommand("record", "run a live backend and save its answers for replay");
  record.engine.attach(record_cmd);
  record_cmd->add_option("--data", record.data, "claims JSONL")->required();
  record_cmd->add_option("--qa-out", record.qa_out)->required();
  record_cmd->add_option("--align-out", record.align_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*verify_cmd) return cmd_verify(verify);
    if (*eval_cmd) return cmd_eval(eval);
    if (*export_cmd) return cmd_export_qa(exp);
    if (*dfa_cmd) return cmd_dump_dfa(dfa_format);
    if (*record_cmd) return cmd_record(record);
  } catch (const UsageError& ex) {
    std::cerr << "natver: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& ex) {
    std::cerr << "natver: " << ex.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
