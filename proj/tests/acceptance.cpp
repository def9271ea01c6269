// Prints one PASS/FAIL line per acceptance criterion and exits nonzero when
// any criterion fails.
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "natver/pipeline.hpp"

namespace natver {
namespace {

using Clock = std::chrono::steady_clock;
using enum NatOp;
using S = VeracityState;

constexpr double kDfaBudgetSeconds = 10.0;
constexpr double kLatticeBudgetSeconds = 1.0;
constexpr double kSearchBudgetSeconds = 30.0;
constexpr double kSearchScoreTolerance = 1e-12;
// mean(F1_S = 0.8, F1_R = 0, F1_N = 0)
constexpr double kMacroF1Expected = 0.8 / 3.0;
constexpr double kMacroF1Tolerance = 1e-6;
constexpr int kSearchSeeds = 100;
constexpr int kIdenticalPairs = 1000;

const std::filesystem::path kFixtures = NATVER_FIXTURE_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Outcome dfa_derivation() {
  const auto start = Clock::now();
  const DfaTable derived = derive_dfa_table(6);
  const double t = seconds_since(start);
  const bool same = derived == shipped_dfa();
  char buf[128];
  std::snprintf(buf, sizeof buf, "table %s, %.3fs (limit %.0fs)",
                same ? "matches" : "differs", t, kDfaBudgetSeconds);
  return {same && t < kDfaBudgetSeconds, buf};
}

Outcome worked_proofs() {
  const std::vector<NatOp> highway_negated = {Equivalence, Equivalence, Negation};
  const std::vector<NatOp> highway_baseline = {Negation, ReverseEntailment, ReverseEntailment,
                                          Equivalence};
  const std::vector<NatOp> anne_rice = {Equivalence, Equivalence, Alternation};
  bool ok = dfa_run(highway_negated) == S::R && dfa_run(highway_baseline) == S::R && dfa_run(anne_rice) == S::R;
  ok = ok && dfa_trace(highway_negated) == std::vector<S>{S::S, S::S, S::S, S::R};
  ok = ok && dfa_trace(highway_baseline) == std::vector<S>{S::S, S::R, S::R, S::R, S::R};
  ok = ok && dfa_trace(anne_rice) == std::vector<S>{S::S, S::S, S::S, S::R};
  return {ok, "three operator sequences, labels and state traces"};
}

// Counts segmentations of l chunks into runs of at most m by walking every
// cut-point subset.
std::uint64_t enumerate_segmentations(std::size_t l, std::size_t m) {
  if (l == 0) return 1;
  std::uint64_t n = 0;
  for (std::uint32_t cuts = 0; cuts < (1u << (l - 1)); ++cuts) {
    std::size_t run = 1;
    bool ok = true;
    for (std::size_t i = 0; i + 1 < l && ok; ++i) {
      if (cuts & (1u << i)) {
        run = 1;
      } else if (++run > m) {
        ok = false;
      }
    }
    n += ok;
  }
  return n;
}

Outcome lattice_laws() {
  const auto start = Clock::now();
  bool ok = true;
  for (std::size_t l = 3; l <= 12; ++l) {
    std::vector<Chunk> chunks;
    for (std::size_t i = 0; i < l; ++i) chunks.push_back({i, i + 1});
    ok = ok && build_lattice(chunks, 4).spans.size() == 4 * l - 6;
  }
  for (std::size_t l = 0; l <= 12; ++l)
    ok = ok && count_segmentations(l, 4) == enumerate_segmentations(l, 4);
  const double t = seconds_since(start);
  char buf[96];
  std::snprintf(buf, sizeof buf, "l=3..12, %.4fs (limit %.0fs)", t, kLatticeBudgetSeconds);
  return {ok && t < kLatticeBudgetSeconds, buf};
}

Outcome search_agreement() {
  const auto start = Clock::now();
  double worst = 0.0;
  for (int seed = 0; seed < kSearchSeeds; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t l = 3 + rng() % 6;
    std::vector<Chunk> chunks;
    for (std::size_t i = 0; i < l; ++i) chunks.push_back({i, i + 1});
    const SpanLattice lat = build_lattice(chunks, 4);
    std::uniform_real_distribution<double> u(0.5, 1.0);
    AssignmentMap assignments;
    for (const MergedSpan& s : lat.spans) {
      SpanChoice c;
      c.assignment.natop = kAllNatOps[rng() % kAllNatOps.size()];
      const double p = u(rng);
      c.assignment.yes_probability =
          c.assignment.natop == Independence ? kIndependenceProbability : p;
      assignments[s] = c;
    }
    std::uniform_real_distribution<double> w(0.01, 1.0);
    VeracityDistribution dist{w(rng), w(rng), w(rng)};
    const double z = dist[0] + dist[1] + dist[2];
    for (double& x : dist) x /= z;

    SearchOptions dp, en;
    dp.mode = SearchMode::Dp;
    en.mode = SearchMode::Enumerate;
    const double a = select_proof(lat, assignments, dist, dp).score;
    const double b = select_proof(lat, assignments, dist, en).score;
    worst = std::max(worst, std::abs(a - b));
  }
  const double t = seconds_since(start);
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d seeds, max |dp-enum| = %.3g, %.3fs (limit %.0fs)",
                kSearchSeeds, worst, t, kSearchBudgetSeconds);
  return {worst <= kSearchScoreTolerance && t < kSearchBudgetSeconds, buf};
}

Outcome identical_spans() {
  const TemplateSet templates = TemplateSet::shipped();
  RuleOracleBackend oracle(templates, Lexicon::shipped());
  const std::vector<std::string> words = {
      "Anne", "Rice", "was", "born", "in", "New", "Orleans", "the", "drama", "series",
      "of", "NBC", "wrote", "four", "books", "not", "never", "Academy", "Award", "a",
      "1984", "television", "Maine", "farm", "owns", "chef", "famous", "is", "to", "Heaven"};
  std::mt19937_64 rng(2024);
  int equivalent = 0;
  for (int i = 0; i < kIdenticalPairs; ++i) {
    std::string span;
    const std::size_t n = 1 + rng() % 6;
    for (std::size_t k = 0; k < n; ++k) span += (k ? " " : "") + words[rng() % words.size()];
    if (assign_natop(span, span, templates, oracle).natop == Equivalence) ++equivalent;
  }
  return {equivalent == kIdenticalPairs,
          std::to_string(equivalent) + "/" + std::to_string(kIdenticalPairs) + " Equivalence"};
}

Outcome end_to_end() {
  const auto claims = load_claims(kFixtures / "claims.jsonl");
  Engine first(load_config(kFixtures / "engine.conf"));
  Engine second(load_config(kFixtures / "engine.conf"));
  const EvalResult a = run_eval(claims, first);
  const EvalResult b = run_eval(claims, second);
  const bool identical = verdicts_jsonl(a) == verdicts_jsonl(b);
  const double acc = a.metrics ? a.metrics->accuracy : -1.0;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu claims, accuracy %.4f, JSONL %s", claims.size(), acc,
                identical ? "identical" : "differs");
  return {a.failures.empty() && acc == 1.0 && identical, buf};
}

Outcome metrics_case() {
  // Gold S,S,R,N predicted all Supports.
  const std::vector<LabeledId> gold = {{"0", S::S}, {"1", S::S}, {"2", S::R}, {"3", S::N}};
  const std::vector<LabeledId> pred = {{"0", S::S}, {"1", S::S}, {"2", S::S}, {"3", S::S}};
  const Metrics m = evaluate(pred, gold);
  char buf[128];
  std::snprintf(buf, sizeof buf, "macro-F1 %.6f, expected %.6f +/- %.0e", m.macro_f1,
                kMacroF1Expected, kMacroF1Tolerance);
  return {std::abs(m.macro_f1 - kMacroF1Expected) <= kMacroF1Tolerance, buf};
}

class CountingBackend : public QaBackend {
 public:
  explicit CountingBackend(std::shared_ptr<QaBackend> inner) : inner_(std::move(inner)) {}
  std::vector<double> score(const std::string& input,
                            const std::vector<std::string>& choices) override {
    if (choices == kBooleanChoices) ++natop_calls;
    return inner_->score(input, choices);
  }
  std::atomic<std::size_t> natop_calls{0};

 private:
  std::shared_ptr<QaBackend> inner_;
};

Outcome linear_calls() {
  const std::string claim =
      "Tom sang in Paris on Monday with Ann at noon for Bob from Rome to Oslo by car "
      "and Kim.";
  const Lexicon lexicon = Lexicon::shipped();
  const TemplateSet templates = TemplateSet::shipped();
  const TokenizedText t = tokenize(claim);
  const std::size_t l =
      merge_function_word_chunks(chunk_claim(t, RuleChunker{}), t, lexicon).size();
  auto counter =
      std::make_shared<CountingBackend>(std::make_shared<RuleOracleBackend>(templates, lexicon));
  Engine engine(EngineConfig{}, lexicon, templates, counter,
                std::make_shared<LexicalAligner>());
  engine.verify({"l10", claim, std::nullopt,
                 {{"", "Tom sang in Paris on Monday with Ann at noon for Bob."},
                  {"", "Tom flew from Rome to Oslo by car and Kim."}}});
  const std::size_t bound = (4 * l - 6) * templates.max_per_op() * 5;
  const std::size_t calls = counter->natop_calls;
  return {l == 10 && calls <= bound,
          "l=" + std::to_string(l) + ", " + std::to_string(calls) + " calls, bound " +
              std::to_string(bound) + ", segmentations " +
              std::to_string(count_segmentations(l))};
}

}  // namespace
}  // namespace natver

int main() {
  using natver::Outcome;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"dfa-derivation", natver::dfa_derivation},
      {"worked-proofs", natver::worked_proofs},
      {"lattice-count-laws", natver::lattice_laws},
      {"proof-selection-dp-vs-enumerate", natver::search_agreement},
      {"identical-span-equivalence", natver::identical_spans},
      {"end-to-end-fixtures", natver::end_to_end},
      {"metrics-macro-f1", natver::metrics_case},
      {"linear-call-property", natver::linear_calls},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    failed += !o.pass;
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
