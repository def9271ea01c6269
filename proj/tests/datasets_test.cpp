#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "natver/datasets.hpp"
#include "natver/error.hpp"

namespace natver {
namespace {

using S = VeracityState;

TemplateSet one_per_op() {
  std::vector<QuestionTemplate> ts;
  for (NatOp op : kQuestionableNatOps)
    ts.push_back({op, std::string(natop_key(op)) + " {claim_span} / {evidence_span}",
                  kBooleanChoices, ""});
  ts.push_back({std::nullopt, "{claim} </s> {evidence_block}", kVeracityChoices, ""});
  return TemplateSet(ts);
}

std::vector<ClaimRecord> parse(const std::string& text, std::size_t cap = 5) {
  std::istringstream in(text);
  return load_claims(in, cap);
}

TEST(LoadClaims, LabeledRecord) {
  const auto r = parse(R"({"id":1,"claim":"c","label":"REFUTES","evidence":[["T","e"]]})");
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].id, "1");
  EXPECT_EQ(r[0].claim, "c");
  EXPECT_EQ(r[0].label, S::R);
  EXPECT_EQ(r[0].evidence, (std::vector<EvidenceSentence>{{"T", "e"}}));
}

TEST(LoadClaims, MissingLabelIsAbsent) {
  const auto r = parse(R"({"id":"a","claim":"c","evidence":["e"]})");
  EXPECT_FALSE(r[0].label.has_value());
  EXPECT_EQ(r[0].evidence[0].title, "");
}

TEST(LoadClaims, EvidenceTruncatedInRankOrder) {
  const auto r = parse(
      R"({"id":1,"claim":"c","evidence":[["A","0"],["A","1"],["A","2"],["A","3"],["A","4"],["A","5"],["A","6"]]})");
  ASSERT_EQ(r[0].evidence.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(r[0].evidence[i].text, std::to_string(i));
}

TEST(LoadClaims, ErrorsNameTheLine) {
  try {
    parse("{\"id\":1,\"claim\":\"c\",\"evidence\":[]}\n{oops\n");
    FAIL();
  } catch (const Error& ex) {
    EXPECT_EQ(std::string(ex.what()).rfind("line 2:", 0), 0u) << ex.what();
  }
  EXPECT_THROW(parse(R"({"id":1,"claim":"c","label":"MAYBE","evidence":[]})"), Error);
}

TEST(LoadClaims, SerializeRoundTrip) {
  const std::string text =
      "{\"id\":1,\"claim\":\"Anne Rice was born in New Jersey.\",\"label\":\"REFUTES\","
      "\"evidence\":[[\"Anne Rice\",\"Born in New Orleans.\"]]}\n"
      "{\"id\":\"x-2\",\"claim\":\"c \\\"q\\\"\",\"evidence\":[[\"\",\"e\"]]}\n";
  const auto first = parse(text);
  std::string again;
  for (const auto& r : first) again += serialize_claim(r) + "\n";
  EXPECT_EQ(parse(again), first);
  std::string third;
  for (const auto& r : parse(again)) third += serialize_claim(r) + "\n";
  EXPECT_EQ(third, again);
}

TEST(GoldProofs, ParsesBothSpellings) {
  std::istringstream in(
      R"({"claim_id":1,"steps":[{"claim_span":"a","evidence_span":"b","natop":"negation"},{"claim_span":"c","evidence_span":"d","natop":"ForwardEntailment"}]})");
  const auto g = load_gold_proofs(in);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0].steps[0].natop, NatOp::Negation);
  EXPECT_EQ(g[0].steps[1].natop, NatOp::ForwardEntailment);
  std::istringstream bad(R"({"claim_id":1,"steps":[{"claim_span":"a","evidence_span":"b","natop":"cover"}]})");
  EXPECT_THROW(load_gold_proofs(bad), Error);
}

GoldProof three_step() {
  return {"7",
          {{"Anne Rice", "Anne Rice", NatOp::Equivalence},
           {"was born", "Born", NatOp::Equivalence},
           {"in New Jersey", "in New Orleans", NatOp::Alternation}}};
}

TEST(ExportTrainingPairs, ThreeStepsOneNegativeEach) {
  const auto pairs = export_training_pairs({three_step()}, one_per_op(), 1, 42);
  ASSERT_EQ(pairs.size(), 6u);
  int pos = 0, neg = 0;
  for (const auto& p : pairs) {
    (p.polarity == Polarity::Positive ? pos : neg)++;
    EXPECT_EQ(p.answer, p.polarity == Polarity::Positive ? "Yes" : "No");
    EXPECT_EQ(p.source_claim_id, "7");
  }
  EXPECT_EQ(pos, 3);
  EXPECT_EQ(neg, 3);
}

TEST(ExportTrainingPairs, NegativesUseAWrongQuestionableOperator) {
  const GoldProof g{"1", {{"x", "y", NatOp::Negation}}};
  const auto pairs = export_training_pairs({g}, one_per_op(), 200, 3);
  std::set<std::string> ops;
  for (const auto& p : pairs) {
    if (p.polarity != Polarity::Negative) continue;
    const std::string op = p.input.substr(0, p.input.find(' '));
    EXPECT_NE(op, "negation");
    ops.insert(op);
  }
  EXPECT_EQ(ops, (std::set<std::string>{"equivalence", "forward_entailment",
                                        "reverse_entailment", "alternation"}));
}

TEST(ExportTrainingPairs, IndependenceStepHasNoQuestion) {
  const GoldProof g{"1", {{"x", "y", NatOp::Independence}}};
  const auto pairs = export_training_pairs({g}, one_per_op(), 0, 0);
  EXPECT_TRUE(pairs.empty());
}

TEST(ExportTrainingPairs, ZeroNegativesGivesPositivesOnly) {
  const auto pairs = export_training_pairs({three_step()}, one_per_op(), 0, 1);
  EXPECT_EQ(pairs.size(), 3u);
  for (const auto& p : pairs) EXPECT_EQ(p.polarity, Polarity::Positive);
}

TEST(ExportTrainingPairs, FixedSeedIsDeterministic) {
  auto dump = [](std::uint64_t seed) {
    std::string out;
    for (const auto& p : export_training_pairs({three_step()}, TemplateSet::shipped(), 3, seed))
      out += serialize_training_pair(p) + "\n";
    return out;
  };
  EXPECT_EQ(dump(5), dump(5));
  EXPECT_NE(dump(5), dump(6));
}

TEST(ExportTrainingPairs, VeracityPairsForLabeledClaims) {
  ClaimRecord c{"7", "Anne Rice was born in New Jersey.", S::R, {{"Anne Rice", "Born in New Orleans."}}};
  ClaimRecord unlabeled{"8", "x", std::nullopt, {{"", "y"}}};
  const auto pairs = export_training_pairs({}, one_per_op(), 1, 1, {c, unlabeled});
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].answer, "Refutes");
  EXPECT_EQ(pairs[0].input,
            "Anne Rice was born in New Jersey. </s> [Anne Rice] Born in New Orleans.");
}

TEST(TrainingPair, Serialization) {
  EXPECT_EQ(serialize_training_pair({"q", "Yes", Polarity::Positive, "12"}),
            R"({"answer":"Yes","input":"q","polarity":"positive","source_claim_id":12})");
}

std::vector<LabeledId> labeled(const std::vector<S>& labels) {
  std::vector<LabeledId> out;
  for (std::size_t i = 0; i < labels.size(); ++i) out.emplace_back(std::to_string(i), labels[i]);
  return out;
}

TEST(Evaluate, BalancedAllCorrect) {
  const auto gold = labeled({S::S, S::S, S::R, S::R, S::N, S::N});
  const Metrics m = evaluate(gold, gold);
  EXPECT_DOUBLE_EQ(m.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(m.macro_f1, 1.0);
}

TEST(Evaluate, AllSupportsPredictions) {
  // Gold S,S,R,N predicted all S: tp_S = 2, fp_S = 2, fn_S = 0, so
  // F1_S = 4 / 6 and the other classes score 0.
  const auto gold = labeled({S::S, S::S, S::R, S::N});
  const auto pred = labeled({S::S, S::S, S::S, S::S});
  const Metrics m = evaluate(pred, gold);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.5);
  EXPECT_NEAR(m.f1[0], 2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(m.f1[1], 0.0);
  EXPECT_DOUBLE_EQ(m.f1[2], 0.0);
  EXPECT_NEAR(m.macro_f1, 2.0 / 9.0, 1e-12);
  EXPECT_EQ(m.confusion[1][0], 1u);
  EXPECT_EQ(m.confusion[2][0], 1u);
}

TEST(Evaluate, EmptyPredictionsRejected) {
  EXPECT_THROW(evaluate({}, labeled({S::S})), Error);
}

TEST(Evaluate, UnknownOrDuplicateIdRejected) {
  EXPECT_THROW(evaluate({{"zz", S::S}}, labeled({S::S})), Error);
  EXPECT_THROW(evaluate({{"0", S::S}, {"0", S::S}}, labeled({S::S})), Error);
}

TEST(Evaluate, SelfEvaluationIsPerfectAccuracy) {
  const auto gold = labeled({S::N, S::N, S::S});
  EXPECT_DOUBLE_EQ(evaluate(gold, gold).accuracy, 1.0);
}

}  // namespace
}  // namespace natver
