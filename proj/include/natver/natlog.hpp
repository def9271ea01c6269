#ifndef NATVER_NATLOG_HPP_
#define NATVER_NATLOG_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace natver {

// Operators that can be assigned to an aligned (claim span, evidence span)
// pair. Cover is deliberately absent; it only exists as a SetRelation.
enum class NatOp : std::uint8_t {
  Equivalence,
  ForwardEntailment,
  ReverseEntailment,
  Negation,
  Alternation,
  Independence,
};

inline constexpr std::array<NatOp, 6> kAllNatOps = {
    NatOp::Equivalence, NatOp::ForwardEntailment, NatOp::ReverseEntailment,
    NatOp::Negation,    NatOp::Alternation,       NatOp::Independence};

// The five operators that have boolean questions attached to them.
inline constexpr std::array<NatOp, 5> kQuestionableNatOps = {
    NatOp::Equivalence, NatOp::ForwardEntailment, NatOp::ReverseEntailment,
    NatOp::Negation, NatOp::Alternation};

// "equivalence", "forward_entailment", ... (file formats).
std::string_view natop_key(NatOp op);
// "Equivalence", "ForwardEntailment", ... (DFA dumps).
std::string_view natop_name(NatOp op);
// UTF-8 symbol used in rendered proofs.
std::string_view natop_symbol(NatOp op);
// Human-readable description of the operator for non-expert readers.
std::string_view natop_description(NatOp op);
// Accepts either the key or the name spelling.
std::optional<NatOp> parse_natop(std::string_view text);

// The seven basic set relations between nonempty, non-universal sets.
enum class SetRelation : std::uint8_t {
  Equivalence,
  ForwardEntailment,
  ReverseEntailment,
  Negation,
  Alternation,
  Cover,
  Independence,
};

inline constexpr std::array<SetRelation, 7> kAllSetRelations = {
    SetRelation::Equivalence, SetRelation::ForwardEntailment,
    SetRelation::ReverseEntailment, SetRelation::Negation,
    SetRelation::Alternation, SetRelation::Cover, SetRelation::Independence};

std::string_view set_relation_name(SetRelation r);
SetRelation to_set_relation(NatOp op);

// Bitset over the seven relations, indexed by the enum value.
using RelationSet = std::uint8_t;

inline constexpr RelationSet relation_bit(SetRelation r) {
  return static_cast<RelationSet>(1u << static_cast<unsigned>(r));
}

std::vector<SetRelation> relation_members(RelationSet set);

// Classifies x against y. Throws std::invalid_argument when either set is
// empty, equal to the universe, or not contained in it.
SetRelation relation_of_sets(const std::set<int>& x, const std::set<int>& y,
                             const std::set<int>& universe);

// Same as relation_of_sets over bitmasks; universe is a mask of the valid bits.
SetRelation relation_of_masks(std::uint32_t x, std::uint32_t y,
                              std::uint32_t universe);

// Composition table gathered by exhaustive witness search: entry [r1][r2]
// holds every relation(x, z) seen for triples with relation(x, y) = r1 and
// relation(y, z) = r2, over universes of 4..max_universe_size elements.
using JoinTable = std::array<std::array<RelationSet, 7>, 7>;

JoinTable compute_join_table(int max_universe_size);

// Witness-search composition of r1 followed by r2. Requires
// max_universe_size >= 4.
RelationSet join_oracle(SetRelation r1, SetRelation r2, int max_universe_size);

enum class VeracityState : std::uint8_t { S, R, N };
using VeracityLabel = VeracityState;

inline constexpr std::array<VeracityState, 3> kAllStates = {
    VeracityState::S, VeracityState::R, VeracityState::N};

inline constexpr VeracityState kStartState = VeracityState::S;

// "S", "R", "N".
std::string_view state_name(VeracityState s);
// "Supports", "Refutes", "Not enough info".
std::string_view label_name(VeracityLabel s);
std::optional<VeracityState> parse_state(std::string_view text);
std::optional<VeracityLabel> parse_label(std::string_view text);

class DfaTable {
 public:
  DfaTable() = default;

  VeracityState next(VeracityState state, NatOp op) const {
    return cells_[static_cast<std::size_t>(state)][static_cast<std::size_t>(op)];
  }

  void set(VeracityState state, NatOp op, VeracityState target) {
    cells_[static_cast<std::size_t>(state)][static_cast<std::size_t>(op)] = target;
  }

  friend bool operator==(const DfaTable&, const DfaTable&) = default;

 private:
  std::array<std::array<VeracityState, 6>, 3> cells_{};
};

// The transition table the engine runs with.
const DfaTable& shipped_dfa();

// Rebuilds the transition table from set semantics: a state stands for the
// class of composed relations {Equivalence, ForwardEntailment} (S),
// {Negation, Alternation} (R), or anything else (N). Throws std::logic_error
// if a cell has no witnesses, std::invalid_argument if max_universe_size < 5.
DfaTable derive_dfa_table(int max_universe_size);

// States visited while folding ops from the start state; size ops.size()+1.
std::vector<VeracityState> dfa_trace(std::span<const NatOp> ops,
                                     const DfaTable& table = shipped_dfa());

VeracityLabel dfa_run(std::span<const NatOp> ops,
                      const DfaTable& table = shipped_dfa());

}  // namespace natver

#endif  // NATVER_NATLOG_HPP_
