#include "natver/natlog.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace natver {

namespace {

struct NatOpInfo {
  std::string_view key;
  std::string_view name;
  std::string_view symbol;
  std::string_view description;
};

constexpr std::array<NatOpInfo, 6> kNatOpInfo = {{
    {"equivalence", "Equivalence", "≡", "Equivalent Spans"},
    {"forward_entailment", "ForwardEntailment", "⊑",
     "Claim span follows from the evidence span"},
    {"reverse_entailment", "ReverseEntailment", "⊒", "Incomplete Evidence"},
    {"negation", "Negation", "¬", "Claim span is negated by the evidence"},
    {"alternation", "Alternation", "⇃↾",
     "Evidence span contradicts the claim span"},
    {"independence", "Independence", "#",
     "Unrelated claim span and evidence span"},
}};

const NatOpInfo& info(NatOp op) {
  return kNatOpInfo[static_cast<std::size_t>(op)];
}

constexpr RelationSet kSupportClass =
    relation_bit(SetRelation::Equivalence) |
    relation_bit(SetRelation::ForwardEntailment);
constexpr RelationSet kRefuteClass =
    relation_bit(SetRelation::Negation) | relation_bit(SetRelation::Alternation);

std::uint32_t to_mask(const std::set<int>& s, const std::vector<int>& index) {
  std::uint32_t mask = 0;
  for (int v : s) {
    auto it = std::lower_bound(index.begin(), index.end(), v);
    if (it == index.end() || *it != v)
      throw std::invalid_argument("set element outside the universe");
    mask |= 1u << static_cast<unsigned>(it - index.begin());
  }
  return mask;
}

}  // namespace

std::string_view natop_key(NatOp op) { return info(op).key; }
std::string_view natop_name(NatOp op) { return info(op).name; }
std::string_view natop_symbol(NatOp op) { return info(op).symbol; }
std::string_view natop_description(NatOp op) { return info(op).description; }

std::optional<NatOp> parse_natop(std::string_view text) {
  for (NatOp op : kAllNatOps) {
    if (text == info(op).key || text == info(op).name) return op;
  }
  return std::nullopt;
}

std::string_view set_relation_name(SetRelation r) {
  switch (r) {
    case SetRelation::Equivalence: return "equivalence";
    case SetRelation::ForwardEntailment: return "forward_entailment";
    case SetRelation::ReverseEntailment: return "reverse_entailment";
    case SetRelation::Negation: return "negation";
    case SetRelation::Alternation: return "alternation";
    case SetRelation::Cover: return "cover";
    case SetRelation::Independence: return "independence";
  }
  return "?";
}

SetRelation to_set_relation(NatOp op) {
  switch (op) {
    case NatOp::Equivalence: return SetRelation::Equivalence;
    case NatOp::ForwardEntailment: return SetRelation::ForwardEntailment;
    case NatOp::ReverseEntailment: return SetRelation::ReverseEntailment;
    case NatOp::Negation: return SetRelation::Negation;
    case NatOp::Alternation: return SetRelation::Alternation;
    case NatOp::Independence: return SetRelation::Independence;
  }
  return SetRelation::Independence;
}

std::vector<SetRelation> relation_members(RelationSet set) {
  std::vector<SetRelation> out;
  for (SetRelation r : kAllSetRelations) {
    if (set & relation_bit(r)) out.push_back(r);
  }
  return out;
}

SetRelation relation_of_masks(std::uint32_t x, std::uint32_t y,
                              std::uint32_t universe) {
  if (x == 0 || y == 0) throw std::invalid_argument("empty set");
  if (x == universe || y == universe)
    throw std::invalid_argument("set equals the universe");
  if ((x & ~universe) || (y & ~universe))
    throw std::invalid_argument("set element outside the universe");

  if (x == y) return SetRelation::Equivalence;
  if ((x & ~y) == 0) return SetRelation::ForwardEntailment;
  if ((y & ~x) == 0) return SetRelation::ReverseEntailment;
  const bool exhaustive = (x | y) == universe;
  if ((x & y) == 0)
    return exhaustive ? SetRelation::Negation : SetRelation::Alternation;
  return exhaustive ? SetRelation::Cover : SetRelation::Independence;
}

SetRelation relation_of_sets(const std::set<int>& x, const std::set<int>& y,
                             const std::set<int>& universe) {
  if (universe.size() > 31)
    throw std::invalid_argument("universe too large for relation_of_sets");
  const std::vector<int> index(universe.begin(), universe.end());
  const std::uint32_t full =
      index.empty() ? 0u : (1u << static_cast<unsigned>(index.size())) - 1u;
  return relation_of_masks(to_mask(x, index), to_mask(y, index), full);
}

JoinTable compute_join_table(int max_universe_size) {
  if (max_universe_size < 4 || max_universe_size > 10)
    throw std::invalid_argument("max_universe_size must be in [4, 10]");

  JoinTable table{};
  for (int n = 4; n <= max_universe_size; ++n) {
    const std::uint32_t full = (1u << n) - 1u;
    const std::uint32_t count = full - 1;  // masks 1..full-1
    std::vector<std::uint8_t> rel(static_cast<std::size_t>(count) * count);
    for (std::uint32_t a = 1; a < full; ++a)
      for (std::uint32_t b = 1; b < full; ++b)
        rel[(a - 1) * count + (b - 1)] =
            static_cast<std::uint8_t>(relation_of_masks(a, b, full));

    for (std::uint32_t x = 0; x < count; ++x) {
      for (std::uint32_t y = 0; y < count; ++y) {
        const std::uint8_t r1 = rel[x * count + y];
        for (std::uint32_t z = 0; z < count; ++z) {
          const std::uint8_t r2 = rel[y * count + z];
          const std::uint8_t r3 = rel[x * count + z];
          table[r1][r2] |= static_cast<RelationSet>(1u << r3);
        }
      }
    }
  }
  return table;
}

RelationSet join_oracle(SetRelation r1, SetRelation r2, int max_universe_size) {
  const JoinTable table = compute_join_table(max_universe_size);
  return table[static_cast<std::size_t>(r1)][static_cast<std::size_t>(r2)];
}

std::string_view state_name(VeracityState s) {
  switch (s) {
    case VeracityState::S: return "S";
    case VeracityState::R: return "R";
    case VeracityState::N: return "N";
  }
  return "?";
}

std::string_view label_name(VeracityLabel s) {
  switch (s) {
    case VeracityState::S: return "Supports";
    case VeracityState::R: return "Refutes";
    case VeracityState::N: return "Not enough info";
  }
  return "?";
}

std::optional<VeracityState> parse_state(std::string_view text) {
  for (VeracityState s : kAllStates)
    if (text == state_name(s)) return s;
  return std::nullopt;
}

std::optional<VeracityLabel> parse_label(std::string_view text) {
  for (VeracityState s : kAllStates)
    if (text == label_name(s)) return s;
  return std::nullopt;
}

const DfaTable& shipped_dfa() {
  static const DfaTable table = [] {
    using S = VeracityState;
    DfaTable t;
    t.set(S::S, NatOp::Equivalence, S::S);
    t.set(S::S, NatOp::ForwardEntailment, S::S);
    t.set(S::S, NatOp::ReverseEntailment, S::N);
    t.set(S::S, NatOp::Negation, S::R);
    t.set(S::S, NatOp::Alternation, S::R);
    t.set(S::S, NatOp::Independence, S::N);

    t.set(S::R, NatOp::Equivalence, S::R);
    t.set(S::R, NatOp::ForwardEntailment, S::N);
    t.set(S::R, NatOp::ReverseEntailment, S::R);
    t.set(S::R, NatOp::Negation, S::S);
    t.set(S::R, NatOp::Alternation, S::N);
    t.set(S::R, NatOp::Independence, S::N);

    for (NatOp op : kAllNatOps) t.set(S::N, op, S::N);
    return t;
  }();
  return table;
}

DfaTable derive_dfa_table(int max_universe_size) {
  if (max_universe_size < 5)
    throw std::invalid_argument("derive_dfa_table needs max_universe_size >= 5");
  const JoinTable joins = compute_join_table(max_universe_size);

  DfaTable table;
  for (NatOp op : kAllNatOps) table.set(VeracityState::N, op, VeracityState::N);

  const std::array<std::pair<VeracityState, RelationSet>, 2> classes = {{
      {VeracityState::S, kSupportClass},
      {VeracityState::R, kRefuteClass},
  }};
  for (const auto& [state, cls] : classes) {
    for (NatOp op : kAllNatOps) {
      RelationSet witnesses = 0;
      for (SetRelation rep : relation_members(cls)) {
        witnesses |= joins[static_cast<std::size_t>(rep)]
                          [static_cast<std::size_t>(to_set_relation(op))];
      }
      if (witnesses == 0) {
        throw std::logic_error("no witnesses for state " +
                               std::string(state_name(state)) + " under " +
                               std::string(natop_name(op)));
      }
      VeracityState target = VeracityState::N;
      if ((witnesses & ~kSupportClass) == 0) {
        target = VeracityState::S;
      } else if ((witnesses & ~kRefuteClass) == 0) {
        target = VeracityState::R;
      }
      table.set(state, op, target);
    }
  }
  return table;
}

std::vector<VeracityState> dfa_trace(std::span<const NatOp> ops,
                                     const DfaTable& table) {
  std::vector<VeracityState> trace;
  trace.reserve(ops.size() + 1);
  VeracityState state = kStartState;
  trace.push_back(state);
  for (NatOp op : ops) {
    state = table.next(state, op);
    trace.push_back(state);
  }
  return trace;
}

VeracityLabel dfa_run(std::span<const NatOp> ops, const DfaTable& table) {
  VeracityState state = kStartState;
  for (NatOp op : ops) state = table.next(state, op);
  return state;
}

}  // namespace natver
