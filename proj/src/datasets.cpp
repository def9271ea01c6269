#include "natver/datasets.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "natver/error.hpp"

namespace natver {

using nlohmann::json;

namespace {

std::string id_to_string(const json& id) {
  if (id.is_string()) return id.get<std::string>();
  if (id.is_number_integer()) return std::to_string(id.get<long long>());
  throw Error("id must be a string or an integer");
}

bool is_canonical_integer(const std::string& s) {
  long long v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  return ec == std::errc() && ptr == end && std::to_string(v) == s;
}

template <typename Fn>
void for_each_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception& ex) {
      throw Error("line " + std::to_string(lineno) + ": " + ex.what());
    } catch (const Error& ex) {
      throw Error("line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

}  // namespace

json id_to_json(const std::string& id) {
  if (is_canonical_integer(id)) return std::stoll(id);
  return id;
}

std::string_view fever_label(VeracityLabel label) {
  switch (label) {
    case VeracityState::S: return "SUPPORTS";
    case VeracityState::R: return "REFUTES";
    case VeracityState::N: return "NOT ENOUGH INFO";
  }
  return "?";
}

std::optional<VeracityLabel> parse_fever_label(std::string_view text) {
  for (VeracityState s : kAllStates)
    if (text == fever_label(s)) return s;
  return std::nullopt;
}

std::vector<ClaimRecord> load_claims(std::istream& in, std::size_t evidence_cap) {
  std::vector<ClaimRecord> out;
  for_each_line(in, [&](const json& j) {
    ClaimRecord r;
    r.id = id_to_string(j.at("id"));
    r.claim = j.at("claim").get<std::string>();
    if (j.contains("label") && !j.at("label").is_null()) {
      const auto text = j.at("label").get<std::string>();
      r.label = parse_fever_label(text);
      if (!r.label) throw Error("unknown label \"" + text + "\"");
    }
    if (j.contains("evidence")) {
      for (const json& e : j.at("evidence")) {
        if (r.evidence.size() >= evidence_cap) break;
        if (e.is_string()) {
          r.evidence.push_back({"", e.get<std::string>()});
        } else {
          r.evidence.push_back(
              {e.at(0).get<std::string>(), e.at(1).get<std::string>()});
        }
      }
    }
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<ClaimRecord> load_claims(const std::filesystem::path& path,
                                     std::size_t evidence_cap) {
  auto in = open_or_throw(path);
  return load_claims(in, evidence_cap);
}

std::string serialize_claim(const ClaimRecord& record) {
  json j;
  j["id"] = id_to_json(record.id);
  j["claim"] = record.claim;
  if (record.label) j["label"] = fever_label(*record.label);
  json ev = json::array();
  for (const EvidenceSentence& e : record.evidence)
    ev.push_back(json::array({e.title, e.text}));
  j["evidence"] = ev;
  return j.dump();
}

std::vector<GoldProof> load_gold_proofs(std::istream& in) {
  std::vector<GoldProof> out;
  for_each_line(in, [&](const json& j) {
    GoldProof g;
    g.claim_id = id_to_string(j.at("claim_id"));
    for (const json& s : j.at("steps")) {
      GoldStep step;
      step.claim_span = s.at("claim_span").get<std::string>();
      step.evidence_span = s.at("evidence_span").get<std::string>();
      const auto op_text = s.at("natop").get<std::string>();
      const auto op = parse_natop(op_text);
      if (!op) throw Error("unknown natop \"" + op_text + "\"");
      step.natop = *op;
      g.steps.push_back(std::move(step));
    }
    out.push_back(std::move(g));
  });
  return out;
}

std::vector<GoldProof> load_gold_proofs(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return load_gold_proofs(in);
}

std::string serialize_training_pair(const QaTrainingPair& pair) {
  return json{{"input", pair.input},
              {"answer", pair.answer},
              {"polarity",
               pair.polarity == Polarity::Positive ? "positive" : "negative"},
              {"source_claim_id", id_to_json(pair.source_claim_id)}}
      .dump();
}

std::vector<QaTrainingPair> export_training_pairs(
    const std::vector<GoldProof>& golds, const TemplateSet& templates,
    std::size_t negatives_per_step, std::uint64_t seed,
    const std::vector<ClaimRecord>& claims) {
  // mt19937_64 output is fixed by the standard; reduce with modulo so the
  // export does not depend on the library's distribution implementation.
  std::mt19937_64 rng(seed);
  auto pick = [&rng](std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
  };

  std::vector<QaTrainingPair> out;
  for (const GoldProof& gold : golds) {
    for (const GoldStep& step : gold.steps) {
      if (step.natop != NatOp::Independence) {
        for (const QuestionTemplate* t : templates.for_op(step.natop)) {
          out.push_back({fill_natop_template(*t, step.claim_span, step.evidence_span),
                         "Yes", Polarity::Positive, gold.claim_id});
        }
      }
      std::vector<NatOp> wrong;
      for (NatOp op : kQuestionableNatOps)
        if (op != step.natop && !templates.for_op(op).empty()) wrong.push_back(op);
      if (wrong.empty()) continue;
      for (std::size_t k = 0; k < negatives_per_step; ++k) {
        const NatOp op = wrong[pick(wrong.size())];
        const auto ts = templates.for_op(op);
        const QuestionTemplate* t = ts[pick(ts.size())];
        out.push_back({fill_natop_template(*t, step.claim_span, step.evidence_span),
                       "No", Polarity::Negative, gold.claim_id});
      }
    }
  }

  for (const ClaimRecord& claim : claims) {
    if (!claim.label || claim.evidence.empty()) continue;
    const std::string block = evidence_block(claim.evidence);
    for (const QuestionTemplate* t : templates.veracity()) {
      out.push_back({fill_veracity_template(*t, claim.claim, block),
                     std::string(label_name(*claim.label)), Polarity::Positive,
                     claim.id});
    }
  }
  return out;
}

Metrics evaluate(const std::vector<LabeledId>& predictions,
                 const std::vector<LabeledId>& gold) {
  if (predictions.empty()) throw Error("no predictions to evaluate");
  std::unordered_map<std::string, VeracityLabel> gold_by_id;
  for (const auto& [id, label] : gold) gold_by_id[id] = label;

  Metrics m;
  std::unordered_set<std::string> seen;
  std::size_t correct = 0;
  for (const auto& [id, predicted] : predictions) {
    auto it = gold_by_id.find(id);
    if (it == gold_by_id.end())
      throw Error("prediction id \"" + id + "\" has no gold label");
    if (!seen.insert(id).second)
      throw Error("duplicate prediction id \"" + id + "\"");
    ++m.confusion[static_cast<std::size_t>(it->second)]
                 [static_cast<std::size_t>(predicted)];
    correct += it->second == predicted ? 1 : 0;
  }
  m.total = predictions.size();
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.total);

  double f1_sum = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    const double tp = static_cast<double>(m.confusion[c][c]);
    double fp = 0.0, fn = 0.0;
    for (std::size_t o = 0; o < 3; ++o) {
      if (o == c) continue;
      fp += static_cast<double>(m.confusion[o][c]);
      fn += static_cast<double>(m.confusion[c][o]);
    }
    const double denom = 2.0 * tp + fp + fn;
    m.f1[c] = denom > 0.0 ? 2.0 * tp / denom : 0.0;
    f1_sum += m.f1[c];
  }
  m.macro_f1 = f1_sum / 3.0;
  return m;
}

}  // namespace natver
