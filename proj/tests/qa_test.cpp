#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <stdexcept>
#include <thread>

#include <gtest/gtest.h>

#include "natver/error.hpp"
#include "natver/qa.hpp"

namespace natver {
namespace {

const std::filesystem::path kFixtures = NATVER_FIXTURE_DIR;

// Answers through a callback and counts calls.
class StubBackend : public QaBackend {
 public:
  using Fn = std::function<std::vector<double>(const std::string&,
                                               const std::vector<std::string>&)>;
  explicit StubBackend(Fn fn) : fn_(std::move(fn)) {}
  std::vector<double> score(const std::string& input,
                            const std::vector<std::string>& choices) override {
    ++calls;
    return fn_(input, choices);
  }
  std::atomic<int> calls{0};

 private:
  Fn fn_;
};

// One template per operator whose prompt starts with the operator key.
TemplateSet keyed_templates() {
  std::vector<QuestionTemplate> ts;
  for (NatOp op : kQuestionableNatOps)
    ts.push_back({op, std::string(natop_key(op)) + ": {claim_span} | {evidence_span}",
                  kBooleanChoices, ""});
  ts.push_back({std::nullopt, "{claim} || {evidence_block}", kVeracityChoices, ""});
  return TemplateSet(ts);
}

std::vector<double> yes_no(double p_yes) { return {std::log(p_yes), std::log(1 - p_yes)}; }

TEST(Templates, ShippedSetHasTwoPerOperator) {
  const TemplateSet ts = TemplateSet::shipped();
  for (NatOp op : kQuestionableNatOps) {
    EXPECT_GE(ts.for_op(op).size(), 2u) << natop_key(op);
    for (const QuestionTemplate* t : ts.for_op(op)) EXPECT_EQ(t->choices, kBooleanChoices);
  }
  EXPECT_TRUE(ts.for_op(NatOp::Independence).empty());
  ASSERT_FALSE(ts.veracity().empty());
  for (const QuestionTemplate* t : ts.veracity()) EXPECT_EQ(t->choices, kVeracityChoices);
}

TEST(Templates, RejectsWrongChoices) {
  EXPECT_THROW(TemplateSet({{NatOp::Negation, "{claim_span}", {"No", "Yes"}, ""}}),
               Error);
  EXPECT_THROW(TemplateSet({{std::nullopt, "{claim}", kBooleanChoices, ""}}), Error);
  EXPECT_THROW(TemplateSet({{NatOp::Independence, "{claim_span}", kBooleanChoices, ""}}),
               Error);
}

TEST(Templates, FillPlaceholders) {
  const QuestionTemplate t{NatOp::Equivalence,
                           "Is \"{claim_span}\" a paraphrase of \"{evidence_span}\"?",
                           kBooleanChoices, "equivalence/0"};
  EXPECT_EQ(fill_natop_template(t, "was born", "Born"),
            "Is \"was born\" a paraphrase of \"Born\"?");
}

TEST(EvidenceInput, TitledSentence) {
  EXPECT_EQ(build_evidence_input("c", {{"T", "e"}}), "c </s> [T] e");
}

TEST(EvidenceInput, MissingTitleOmitsBrackets) {
  EXPECT_EQ(build_evidence_input("c", {{"", "e"}}), "c </s> e");
}

TEST(EvidenceInput, SeparatorBetweenSentences) {
  EXPECT_EQ(build_evidence_input("c", {{"A", "x"}, {"B", "y"}}), "c </s> [A] x </s> [B] y");
}

TEST(NatOpScore, YesProbabilityInOpenIntervalAndMonotone) {
  double prev = 0.0;
  for (double y = -30.0; y <= 0.0; y += 0.5) {
    const NatOpScore s{NatOp::Equivalence, y, -1.0};
    const double p = s.yes_probability();
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
    EXPECT_GE(p, prev);
    prev = p;
  }
}

TEST(ScoreNatop, IndependenceIsAContractViolation) {
  StubBackend b([](auto&, auto&) { return yes_no(0.5); });
  EXPECT_THROW(score_natop("a", "b", NatOp::Independence, keyed_templates(), b),
               std::invalid_argument);
}

TEST(ScoreNatop, AveragesOverTemplates) {
  const TemplateSet ts({{NatOp::Negation, "A {claim_span} {evidence_span}", kBooleanChoices, ""},
                        {NatOp::Negation, "B {claim_span} {evidence_span}", kBooleanChoices, ""}});
  StubBackend b([](const std::string& in, auto&) {
    return in[0] == 'A' ? std::vector<double>{-1.0, -3.0} : std::vector<double>{-2.0, -5.0};
  });
  const NatOpScore s = score_natop("x", "y", NatOp::Negation, ts, b);
  EXPECT_DOUBLE_EQ(s.avg_log_yes, -1.5);
  EXPECT_DOUBLE_EQ(s.avg_log_no, -4.0);
  EXPECT_TRUE(s.answered_yes());
}

TEST(ScoreNatop, WasBornReplayFixtureAnswersYes) {
  ReplayBackend replay(kFixtures / "qa_store.json");
  const NatOpScore s =
      score_natop("was born", "Born", NatOp::Equivalence, TemplateSet::shipped(), replay);
  EXPECT_GT(s.avg_log_yes, s.avg_log_no);
}

TEST(ScoreNatop, JerseyOrleansReplayFixtureAnswersAlternation) {
  ReplayBackend replay(kFixtures / "qa_store.json");
  const NatOpScore s = score_natop("in New Jersey.", "in New Orleans", NatOp::Alternation,
                                   TemplateSet::shipped(), replay);
  EXPECT_GT(s.avg_log_yes, s.avg_log_no);
}

TEST(ScoreNatop, IdenticalSpansUnderOracle) {
  const TemplateSet ts = TemplateSet::shipped();
  RuleOracleBackend oracle(ts, Lexicon::shipped());
  const NatOpScore s = score_natop("Highway", "Highway", NatOp::Equivalence, ts, oracle);
  EXPECT_TRUE(s.answered_yes());
  EXPECT_NEAR(s.yes_probability(), 1.0, 1e-8);
}

TEST(ScoreNatop, DeterministicAcrossCalls) {
  const TemplateSet ts = TemplateSet::shipped();
  RuleOracleBackend oracle(ts, Lexicon::shipped());
  for (NatOp op : kQuestionableNatOps) {
    const NatOpScore a = score_natop("was born", "Born", op, ts, oracle);
    const NatOpScore b = score_natop("was born", "Born", op, ts, oracle);
    EXPECT_EQ(a.avg_log_yes, b.avg_log_yes);
    EXPECT_EQ(a.avg_log_no, b.avg_log_no);
  }
}

TEST(AssignNatop, AllNoGivesIndependence) {
  StubBackend b([](auto&, auto&) { return yes_no(0.2); });
  const NatOpAssignment a = assign_natop("x", std::string("y"), keyed_templates(), b);
  EXPECT_EQ(a.natop, NatOp::Independence);
  EXPECT_DOUBLE_EQ(a.yes_probability, 0.5);
  EXPECT_EQ(a.per_op_scores.size(), 5u);
}

TEST(AssignNatop, HighestYesProbabilityWins) {
  StubBackend b([](const std::string& in, auto&) {
    if (in.starts_with("negation")) return yes_no(0.9);
    if (in.starts_with("alternation")) return yes_no(0.7);
    return yes_no(0.1);
  });
  const NatOpAssignment a = assign_natop("x", std::string("y"), keyed_templates(), b);
  EXPECT_EQ(a.natop, NatOp::Negation);
  EXPECT_NEAR(a.yes_probability, 0.9, 1e-12);
}

TEST(AssignNatop, AbsentEvidenceSkipsBackend) {
  StubBackend b([](auto&, auto&) { return yes_no(0.9); });
  const NatOpAssignment a = assign_natop("x", std::nullopt, keyed_templates(), b);
  EXPECT_EQ(a.natop, NatOp::Independence);
  EXPECT_DOUBLE_EQ(a.yes_probability, kIndependenceProbability);
  EXPECT_EQ(b.calls, 0);
}

TEST(AssignNatop, BackendErrorCarriesSpans) {
  StubBackend b([](auto&, auto&) -> std::vector<double> { throw Error("backend down"); });
  try {
    assign_natop("was born", std::string("Born"), keyed_templates(), b);
    FAIL() << "expected an error";
  } catch (const Error& ex) {
    const std::string msg = ex.what();
    EXPECT_NE(msg.find("backend down"), std::string::npos);
    EXPECT_NE(msg.find("was born"), std::string::npos);
    EXPECT_NE(msg.find("Born"), std::string::npos);
  }
}

TEST(AssignNatop, CacheAvoidsRepeatedCalls) {
  StubBackend b([](auto&, auto&) { return yes_no(0.3); });
  QaCache cache;
  const TemplateSet ts = keyed_templates();
  assign_natop("x", std::string("y"), ts, b, &cache);
  const int first = b.calls;
  assign_natop("x", std::string("y"), ts, b, &cache);
  EXPECT_EQ(first, 5);
  EXPECT_EQ(b.calls, first);
  EXPECT_EQ(cache.size(), 5u);
}

TEST(QaCache, ConcurrentInsertAndRead) {
  QaCache cache;
  std::vector<std::jthread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&cache, t] {
      for (int i = 0; i < 500; ++i) {
        const std::string key = QaCache::key("c" + std::to_string(i % 50), "e", "t");
        cache.put(key, {double(i % 50)});
        const auto v = cache.get(key);
        ASSERT_TRUE(v);
        EXPECT_EQ((*v)[0], double(i % 50));
      }
      (void)t;
    });
  }
  threads.clear();
  EXPECT_EQ(cache.size(), 50u);
}

TEST(RuleOracle, WorkedDecisions) {
  const TemplateSet ts = TemplateSet::shipped();
  RuleOracleBackend o(ts, Lexicon::shipped());
  EXPECT_TRUE(o.holds(NatOp::Equivalence, "Highway", "Highway"));
  EXPECT_TRUE(o.holds(NatOp::Negation, "is something other than a drama series",
                      "is from a drama series"));
  EXPECT_TRUE(o.holds(NatOp::Alternation, "in New Jersey", "in New Orleans"));
  EXPECT_FALSE(o.holds(NatOp::Equivalence, "in New Jersey", "in New Orleans"));
  EXPECT_TRUE(o.holds(NatOp::ForwardEntailment, "a drama series",
                      "an American television drama series"));
  EXPECT_TRUE(o.holds(NatOp::ReverseEntailment, "Anne Rice was a famous chef",
                      "Anne Rice"));
  EXPECT_FALSE(o.holds(NatOp::ForwardEntailment, "drama", "drama"));
}

TEST(RuleOracle, ScoresChosenAndRejected) {
  const TemplateSet ts = TemplateSet::shipped();
  RuleOracleBackend o(ts, Lexicon::shipped());
  const auto* t = ts.for_op(NatOp::Equivalence).front();
  EXPECT_EQ(o.score(fill_natop_template(*t, "Born", "born"), kBooleanChoices),
            (std::vector<double>{0.0, -20.0}));
  EXPECT_EQ(o.score(fill_natop_template(*t, "Born", "died"), kBooleanChoices),
            (std::vector<double>{-20.0, 0.0}));
  EXPECT_THROW(o.score("What is this?", kBooleanChoices), Error);
}

TEST(NegationCue, Cues) {
  EXPECT_TRUE(has_negation_cue("has never won"));
  EXPECT_TRUE(has_negation_cue("isn't"));
  EXPECT_TRUE(has_negation_cue("something other than a drama"));
  EXPECT_TRUE(has_negation_cue("was incapable of writing"));
  EXPECT_FALSE(has_negation_cue("other dramas"));
  EXPECT_FALSE(has_negation_cue("Nothingham"));
}

TEST(ScoreVeracity, UniformBackendGivesThirds) {
  StubBackend b([](auto&, const std::vector<std::string>& c) {
    return std::vector<double>(c.size(), -1.3);
  });
  const auto d = score_veracity("c", {{"T", "e"}}, keyed_templates(), b);
  for (double p : d) EXPECT_NEAR(p, 1.0 / 3.0, 1e-12);
}

TEST(ScoreVeracity, SumsToOne) {
  std::mt19937 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const double a = -double(rng() % 400) / 10, b2 = -double(rng() % 400) / 10,
                 c = -double(rng() % 400) / 10;
    StubBackend b([&](auto&, auto&) { return std::vector<double>{a, b2, c}; });
    const auto d = score_veracity("c", {{"", "e"}}, keyed_templates(), b);
    EXPECT_NEAR(d[0] + d[1] + d[2], 1.0, 1e-9);
  }
}

TEST(ScoreVeracity, EmptyEvidenceRejected) {
  StubBackend b([](auto&, auto&) { return std::vector<double>{0, 0, 0}; });
  EXPECT_THROW(score_veracity("c", {}, keyed_templates(), b), std::invalid_argument);
}

TEST(ScoreVeracity, RecordedRefutationForHighwayClaim) {
  const auto path = std::filesystem::temp_directory_path() / "natver_fig5_store.json";
  const TemplateSet ts = TemplateSet::shipped();
  const std::string claim = "Highway to Heaven is something other than a drama.";
  const std::vector<EvidenceSentence> ev = {
      {"Highway to Heaven",
       "Highway to Heaven is an American television drama series which ran on NBC "
       "from 1984 to 1989."}};
  {
    auto live = std::make_shared<StubBackend>(
        [](auto&, auto&) { return std::vector<double>{-2.5, -0.2, -1.9}; });
    RecordingBackend rec(live, path);
    score_veracity(claim, ev, ts, rec);
    rec.save();
  }
  ReplayBackend replay(path);
  const auto d = score_veracity(claim, ev, ts, replay);
  EXPECT_GT(prob_of(d, VeracityState::R), prob_of(d, VeracityState::S));
  EXPECT_GT(prob_of(d, VeracityState::R), prob_of(d, VeracityState::N));
  std::filesystem::remove(path);
}

TEST(Replay, UnrecordedPromptNamesTheInput) {
  ReplayBackend replay(kFixtures / "qa_store.json");
  EXPECT_GT(replay.size(), 0u);
  try {
    replay.score("Is \"cat\" a paraphrase of \"dog\"?", kBooleanChoices);
    FAIL() << "expected an error";
  } catch (const Error& ex) {
    EXPECT_EQ(std::string(ex.what()),
              "unrecorded prompt: Is \"cat\" a paraphrase of \"dog\"?");
  }
}

TEST(Replay, KeyDependsOnChoices) {
  EXPECT_EQ(prompt_key("a", {"Yes", "No"}), prompt_key("a", {"Yes", "No"}));
  EXPECT_NE(prompt_key("a", {"Yes", "No"}), prompt_key("a", {"No", "Yes"}));
  EXPECT_NE(prompt_key("ab", {"c"}), prompt_key("a", {"bc"}));
}

}  // namespace
}  // namespace natver
