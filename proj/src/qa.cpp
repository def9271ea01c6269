#include "natver/qa.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "natver/error.hpp"

namespace natver {

using nlohmann::json;

namespace {

constexpr std::string_view kSeparator = " </s> ";

void replace_all(std::string& s, std::string_view from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

std::string escape_regex(std::string_view literal) {
  static const std::string_view kSpecial = R"(\^$.|?*+()[]{}/)";
  std::string out;
  for (char c : literal) {
    if (kSpecial.find(c) != std::string_view::npos) out += '\\';
    out += c;
  }
  return out;
}

double log_sum_exp(std::span<const double> xs) {
  const double m = *std::max_element(xs.begin(), xs.end());
  double total = 0.0;
  for (double x : xs) total += std::exp(x - m);
  return m + std::log(total);
}

}  // namespace

// ---------------------------------------------------------------------------
// Templates

TemplateSet::TemplateSet(std::vector<QuestionTemplate> templates)
    : templates_(std::move(templates)) {
  std::map<std::string, int> counters;
  for (QuestionTemplate& t : templates_) {
    if (t.natop == NatOp::Independence)
      throw Error("independence has no question templates");
    const std::vector<std::string>& expected =
        t.is_veracity() ? kVeracityChoices : kBooleanChoices;
    if (t.choices != expected) {
      throw Error("template \"" + t.pattern + "\" must have choices " +
                  json(expected).dump());
    }
    const std::string target =
        t.is_veracity() ? "veracity" : std::string(natop_key(*t.natop));
    if (t.id.empty()) t.id = target + "/" + std::to_string(counters[target]);
    ++counters[target];
  }
}

TemplateSet TemplateSet::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open template file: " + path.string());
  std::vector<QuestionTemplate> out;
  try {
    const json doc = json::parse(in);
    for (const json& item : doc) {
      QuestionTemplate t;
      const std::string target = item.at("target").get<std::string>();
      if (target != "veracity") {
        t.natop = parse_natop(target);
        if (!t.natop) throw Error("unknown template target: " + target);
      }
      t.pattern = item.at("pattern").get<std::string>();
      t.choices = item.at("choices").get<std::vector<std::string>>();
      out.push_back(std::move(t));
    }
  } catch (const json::exception& ex) {
    throw Error("malformed template file " + path.string() + ": " + ex.what());
  }
  return TemplateSet(std::move(out));
}

TemplateSet TemplateSet::shipped() {
  return from_file(default_data_dir() / "templates.json");
}

std::vector<const QuestionTemplate*> TemplateSet::for_op(NatOp op) const {
  std::vector<const QuestionTemplate*> out;
  for (const QuestionTemplate& t : templates_)
    if (t.natop == op) out.push_back(&t);
  return out;
}

std::vector<const QuestionTemplate*> TemplateSet::veracity() const {
  std::vector<const QuestionTemplate*> out;
  for (const QuestionTemplate& t : templates_)
    if (t.is_veracity()) out.push_back(&t);
  return out;
}

std::size_t TemplateSet::max_per_op() const {
  std::size_t best = 0;
  for (NatOp op : kQuestionableNatOps) best = std::max(best, for_op(op).size());
  return best;
}

std::string fill_natop_template(const QuestionTemplate& t,
                                const std::string& claim_span,
                                const std::string& evidence_span) {
  std::string out = t.pattern;
  replace_all(out, "{claim_span}", claim_span);
  replace_all(out, "{evidence_span}", evidence_span);
  return out;
}

std::string fill_veracity_template(const QuestionTemplate& t,
                                   const std::string& claim,
                                   const std::string& evidence_block) {
  std::string out = t.pattern;
  replace_all(out, "{claim}", claim);
  replace_all(out, "{evidence_block}", evidence_block);
  return out;
}

std::string evidence_block(const std::vector<EvidenceSentence>& evidence) {
  std::string out;
  for (std::size_t i = 0; i < evidence.size(); ++i) {
    if (i > 0) out += kSeparator;
    if (!evidence[i].title.empty()) out += "[" + evidence[i].title + "] ";
    out += evidence[i].text;
  }
  return out;
}

std::string build_evidence_input(const std::string& claim,
                                 const std::vector<EvidenceSentence>& evidence) {
  return claim + std::string(kSeparator) + evidence_block(evidence);
}

// ---------------------------------------------------------------------------
// Backends

std::vector<std::vector<double>> QaBackend::score_batch(
    const std::vector<ScoreRequest>& items) {
  std::vector<std::vector<double>> out;
  out.reserve(items.size());
  for (const ScoreRequest& r : items) out.push_back(score(r.input, r.choices));
  return out;
}

bool has_negation_cue(const std::string& text) {
  static const std::set<std::string> kCues = {"not", "no", "never",
                                              "incapable"};
  const TokenizedText tt = tokenize(text);
  for (std::size_t i = 0; i < tt.size(); ++i) {
    const std::string w = fold_case(tt.tokens[i].surface);
    if (kCues.contains(w)) return true;
    if (w.size() >= 3 && w.compare(w.size() - 3, 3, "n't") == 0) return true;
    if (w == "other" && i + 1 < tt.size() &&
        fold_case(tt.tokens[i + 1].surface) == "than")
      return true;
  }
  return false;
}

struct RuleOracleBackend::Matcher {
  std::regex re;
  std::optional<NatOp> natop;
  std::vector<std::string> slots;
};

RuleOracleBackend::RuleOracleBackend(const TemplateSet& templates,
                                     Lexicon lexicon)
    : lexicon_(std::move(lexicon)) {
  static const std::regex kPlaceholder(
      R"(\{(claim_span|evidence_span|claim|evidence_block)\})");
  for (const QuestionTemplate& t : templates.all()) {
    Matcher m;
    m.natop = t.natop;
    std::string expr;
    std::size_t last = 0;
    for (auto it = std::sregex_iterator(t.pattern.begin(), t.pattern.end(),
                                        kPlaceholder);
         it != std::sregex_iterator(); ++it) {
      expr += escape_regex(std::string_view(t.pattern).substr(
          last, static_cast<std::size_t>(it->position()) - last));
      expr += "([\\s\\S]*)";
      m.slots.push_back((*it)[1].str());
      last = static_cast<std::size_t>(it->position() + it->length());
    }
    expr += escape_regex(std::string_view(t.pattern).substr(last));
    m.re = std::regex(expr);
    matchers_.push_back(std::move(m));
  }
}

RuleOracleBackend::~RuleOracleBackend() = default;

bool RuleOracleBackend::holds(NatOp op, const std::string& claim_span,
                              const std::string& evidence_span) const {
  const bool negated =
      has_negation_cue(claim_span) != has_negation_cue(evidence_span);
  const std::vector<std::string> claim_words =
      lexicon_.content_tokens(claim_span);
  const std::vector<std::string> ev_words =
      lexicon_.content_tokens(evidence_span);
  const std::set<std::string> claim_set(claim_words.begin(), claim_words.end());
  const std::set<std::string> ev_set(ev_words.begin(), ev_words.end());
  auto strict_superset = [](const std::set<std::string>& big,
                            const std::set<std::string>& small) {
    return !small.empty() && big.size() > small.size() &&
           std::includes(big.begin(), big.end(), small.begin(), small.end());
  };

  switch (op) {
    case NatOp::Equivalence:
      return lexicon_.normalize(claim_span) == lexicon_.normalize(evidence_span);
    case NatOp::ForwardEntailment:
      // More specific evidence entails the claim span.
      return !negated && strict_superset(ev_set, claim_set);
    case NatOp::ReverseEntailment:
      return !negated && strict_superset(claim_set, ev_set);
    case NatOp::Negation:
      return negated;
    case NatOp::Alternation: {
      if (claim_words.size() != ev_words.size()) return false;
      std::size_t differing = 0;
      for (std::size_t i = 0; i < claim_words.size(); ++i)
        differing += claim_words[i] != ev_words[i] ? 1 : 0;
      return differing == 1 && claim_words.size() >= 2;
    }
    case NatOp::Independence:
      break;
  }
  return false;
}

std::vector<double> RuleOracleBackend::score(
    const std::string& input, const std::vector<std::string>& choices) {
  std::smatch match;
  for (const Matcher& m : matchers_) {
    if (!std::regex_match(input, match, m.re)) continue;
    if (!m.natop) return std::vector<double>(choices.size(), kChosen);

    std::string claim_span, evidence_span;
    for (std::size_t i = 0; i < m.slots.size(); ++i) {
      if (m.slots[i] == "claim_span") claim_span = match[i + 1].str();
      if (m.slots[i] == "evidence_span") evidence_span = match[i + 1].str();
    }
    const bool yes = holds(*m.natop, claim_span, evidence_span);
    std::vector<double> out;
    for (const std::string& c : choices) {
      const bool chosen = (c == "Yes") == yes;
      out.push_back(chosen ? kChosen : kRejected);
    }
    return out;
  }
  throw Error("rule oracle cannot match prompt to any template: " + input);
}

std::string prompt_key(const std::string& input,
                       const std::vector<std::string>& choices) {
  std::uint64_t h = 14695981039346656037ull;
  auto feed = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
  };
  feed(input);
  for (const std::string& c : choices) {
    feed("\x1f");
    feed(c);
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

ReplayBackend::ReplayBackend(const std::filesystem::path& store_path) {
  std::ifstream in(store_path);
  if (!in) throw Error("cannot open replay store: " + store_path.string());
  try {
    const json doc = json::parse(in);
    for (const json& e : doc.at("entries")) {
      const auto input = e.at("input").get<std::string>();
      const auto choices = e.at("choices").get<std::vector<std::string>>();
      auto log_probs = e.at("log_probs").get<std::vector<double>>();
      if (log_probs.size() != choices.size())
        throw Error("replay entry has mismatched log_probs: " + input);
      const std::string key = prompt_key(input, choices);
      if (e.contains("key") && e.at("key").get<std::string>() != key)
        throw Error("replay entry key does not match its prompt: " + input);
      store_[key] = std::move(log_probs);
    }
  } catch (const json::exception& ex) {
    throw Error("malformed replay store " + store_path.string() + ": " +
                ex.what());
  }
}

std::vector<double> ReplayBackend::score(
    const std::string& input, const std::vector<std::string>& choices) {
  auto it = store_.find(prompt_key(input, choices));
  if (it == store_.end()) throw Error("unrecorded prompt: " + input);
  return it->second;
}

std::vector<double> RecordingBackend::score(
    const std::string& input, const std::vector<std::string>& choices) {
  std::vector<double> out = inner_->score(input, choices);
  std::string key = prompt_key(input, choices);
  std::lock_guard lock(mu_);
  entries_.insert_or_assign(std::move(key), Entry{input, choices, out});
  return out;
}

void RecordingBackend::save() const {
  json entries = json::array();
  {
    std::lock_guard lock(mu_);
    for (const auto& [key, e] : entries_) {
      entries.push_back({{"key", key},
                         {"input", e.input},
                         {"choices", e.choices},
                         {"log_probs", e.log_probs}});
    }
  }
  std::ofstream out(path_);
  if (!out) throw Error("cannot write replay store: " + path_.string());
  out << json{{"entries", entries}}.dump(1) << '\n';
}

// ---------------------------------------------------------------------------
// Cache

std::optional<std::vector<double>> QaCache::get(const std::string& key) const {
  std::shared_lock lock(mu_);
  if (auto it = map_.find(key); it != map_.end()) return it->second;
  return std::nullopt;
}

void QaCache::put(const std::string& key, std::vector<double> value) {
  std::unique_lock lock(mu_);
  map_.try_emplace(key, std::move(value));
}

std::size_t QaCache::size() const {
  std::shared_lock lock(mu_);
  return map_.size();
}

std::string QaCache::key(const std::string& claim_span,
                         const std::string& evidence_span,
                         const std::string& template_id) {
  return claim_span + '\x1f' + evidence_span + '\x1f' + template_id;
}

// ---------------------------------------------------------------------------
// Scoring

double NatOpScore::yes_probability() const {
  // Logistic form of the two-way softmax; stable for large gaps.
  return 1.0 / (1.0 + std::exp(avg_log_no - avg_log_yes));
}

NatOpScore score_natop(const std::string& claim_span,
                       const std::string& evidence_span, NatOp op,
                       const TemplateSet& templates, QaBackend& backend,
                       QaCache* cache) {
  if (op == NatOp::Independence)
    throw std::invalid_argument("independence has no questions to score");
  const auto ts = templates.for_op(op);
  if (ts.empty())
    throw Error("no templates for operator " + std::string(natop_key(op)));

  NatOpScore result;
  result.natop = op;
  for (const QuestionTemplate* t : ts) {
    std::vector<double> lp;
    const std::string key =
        cache ? QaCache::key(claim_span, evidence_span, t->id) : std::string();
    if (auto hit = cache ? cache->get(key) : std::nullopt) {
      lp = std::move(*hit);
    } else {
      lp = backend.score(fill_natop_template(*t, claim_span, evidence_span),
                         t->choices);
      if (lp.size() != t->choices.size())
        throw Error("backend returned " + std::to_string(lp.size()) +
                    " scores for " + std::to_string(t->choices.size()) +
                    " choices");
      if (cache) cache->put(key, lp);
    }
    result.avg_log_yes += lp[0];
    result.avg_log_no += lp[1];
  }
  result.avg_log_yes /= static_cast<double>(ts.size());
  result.avg_log_no /= static_cast<double>(ts.size());
  return result;
}

NatOpAssignment assign_natop(const std::string& claim_span,
                             const std::optional<std::string>& evidence_span,
                             const TemplateSet& templates, QaBackend& backend,
                             QaCache* cache) {
  NatOpAssignment out;
  if (!evidence_span) return out;

  std::optional<NatOpScore> best;
  try {
    for (NatOp op : kQuestionableNatOps) {
      NatOpScore s =
          score_natop(claim_span, *evidence_span, op, templates, backend, cache);
      out.per_op_scores.push_back(s);
      if (s.answered_yes() &&
          (!best || s.yes_probability() > best->yes_probability()))
        best = s;
    }
  } catch (const Error& ex) {
    throw Error("scoring span \"" + claim_span + "\" against \"" +
                *evidence_span + "\": " + ex.what());
  }
  if (best) {
    out.natop = best->natop;
    out.yes_probability = best->yes_probability();
  }
  return out;
}

VeracityDistribution score_veracity(const std::string& claim,
                                    const std::vector<EvidenceSentence>& evidence,
                                    const TemplateSet& templates,
                                    QaBackend& backend) {
  if (evidence.empty())
    throw std::invalid_argument("score_veracity needs at least one sentence");
  const auto ts = templates.veracity();
  if (ts.empty()) throw Error("no veracity templates");

  const std::string block = evidence_block(evidence);
  std::array<double, 3> avg{};
  for (const QuestionTemplate* t : ts) {
    const std::vector<double> lp =
        backend.score(fill_veracity_template(*t, claim, block), t->choices);
    if (lp.size() != 3)
      throw Error("backend returned " + std::to_string(lp.size()) +
                  " scores for 3 veracity labels");
    for (std::size_t i = 0; i < 3; ++i) avg[i] += lp[i];
  }
  for (double& v : avg) v /= static_cast<double>(ts.size());

  const double norm = log_sum_exp(avg);
  VeracityDistribution dist{};
  for (std::size_t i = 0; i < 3; ++i) dist[i] = std::exp(avg[i] - norm);
  return dist;
}

}  // namespace natver
