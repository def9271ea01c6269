#include "natver/proofsearch.hpp"

#include <algorithm>
#include <stdexcept>

namespace natver {

namespace {

struct SpanScore {
  NatOp op = NatOp::Independence;
  double prob = kIndependenceProbability;
};

// op/prob per (start chunk, length); index [start][len].
using ScoreGrid = std::vector<std::vector<SpanScore>>;

struct Candidate {
  double sum = 0.0;  // left-to-right sum of step probabilities
  std::size_t count = 0;
  VeracityState state = kStartState;
  std::vector<std::size_t> lengths;
  double score = 0.0;
};

// Sum comparison within one DP cell (equal position, state and count).
bool better_in_cell(const Candidate& a, const Candidate& b) {
  if (a.sum > b.sum + kScoreTolerance) return true;
  if (b.sum > a.sum + kScoreTolerance) return false;
  return a.lengths > b.lengths;
}

bool better_final(const Candidate& a, const Candidate& b) {
  if (a.score > b.score + kScoreTolerance) return true;
  if (b.score > a.score + kScoreTolerance) return false;
  if (a.count != b.count) return a.count > b.count;
  return a.lengths > b.lengths;
}

void finish(Candidate& c, const VeracityDistribution& dist,
            const SearchOptions& opt) {
  c.score = opt.weight_p * (c.sum / static_cast<double>(c.count)) +
            opt.weight_v * prob_of(dist, c.state);
}

ScoreGrid make_grid(const SpanLattice& lattice, const AssignmentMap& assignments) {
  const std::size_t l = lattice.num_chunks();
  ScoreGrid grid(l, std::vector<SpanScore>(lattice.max_merge + 1));
  for (const MergedSpan& span : lattice.spans) {
    auto it = assignments.find(span);
    if (it == assignments.end()) {
      throw std::invalid_argument("no assignment for span (" +
                                  std::to_string(span.chunk_start) + ", " +
                                  std::to_string(span.chunk_len) + ")");
    }
    const NatOpAssignment& a = it->second.assignment;
    grid[span.chunk_start][span.chunk_len] = {
        a.natop, a.natop == NatOp::Independence ? kIndependenceProbability
                                                : a.yes_probability};
  }
  return grid;
}

class Selector {
 public:
  Selector(const VeracityDistribution& dist, const SearchOptions& opt)
      : dist_(dist), opt_(opt) {}

  void offer(Candidate c) {
    finish(c, dist_, opt_);
    if (!any_ || better_final(c, *any_)) any_ = c;
    if (opt_.label_mode == LabelMode::Binary && c.state == VeracityState::N)
      return;
    if (!best_ || better_final(c, *best_)) best_ = std::move(c);
  }

  // Winner plus whether the binary fallback applied.
  std::pair<Candidate, bool> result() const {
    if (best_) return {*best_, false};
    return {*any_, opt_.label_mode == LabelMode::Binary};
  }

 private:
  const VeracityDistribution& dist_;
  const SearchOptions& opt_;
  std::optional<Candidate> best_;
  std::optional<Candidate> any_;
};

void enumerate_from(const ScoreGrid& grid, std::size_t max_merge,
                    std::size_t pos, Candidate& cur, Selector& sel) {
  const std::size_t l = grid.size();
  if (pos == l) {
    sel.offer(cur);
    return;
  }
  for (std::size_t len = 1; len <= max_merge && pos + len <= l; ++len) {
    const SpanScore& s = grid[pos][len];
    Candidate next = cur;
    next.sum = cur.sum + s.prob;
    next.count = cur.count + 1;
    next.state = shipped_dfa().next(cur.state, s.op);
    next.lengths.push_back(len);
    enumerate_from(grid, max_merge, pos + len, next, sel);
  }
}

void run_dp(const ScoreGrid& grid, std::size_t max_merge, Selector& sel) {
  const std::size_t l = grid.size();
  // cells[pos][state][count]
  std::vector<std::array<std::vector<std::optional<Candidate>>, 3>> cells(l + 1);
  for (auto& per_state : cells)
    for (auto& per_count : per_state) per_count.resize(l + 1);
  cells[0][static_cast<std::size_t>(kStartState)][0] = Candidate{};

  for (std::size_t pos = 0; pos < l; ++pos) {
    for (VeracityState state : kAllStates) {
      for (std::size_t count = 0; count <= pos; ++count) {
        const auto& cell = cells[pos][static_cast<std::size_t>(state)][count];
        if (!cell) continue;
        for (std::size_t len = 1; len <= max_merge && pos + len <= l; ++len) {
          const SpanScore& s = grid[pos][len];
          Candidate next = *cell;
          next.sum = cell->sum + s.prob;
          next.count = count + 1;
          next.state = shipped_dfa().next(state, s.op);
          next.lengths.push_back(len);
          auto& target = cells[pos + len][static_cast<std::size_t>(next.state)]
                              [count + 1];
          if (!target || better_in_cell(next, *target)) target = std::move(next);
        }
      }
    }
  }
  for (VeracityState state : kAllStates) {
    for (std::size_t count = 1; count <= l; ++count) {
      const auto& cell = cells[l][static_cast<std::size_t>(state)][count];
      if (cell) sel.offer(*cell);
    }
  }
}

}  // namespace

std::vector<NatOp> Proof::ops() const {
  std::vector<NatOp> out;
  out.reserve(steps.size());
  for (const ProofStep& s : steps) out.push_back(s.natop);
  return out;
}

std::vector<VeracityState> Proof::states() const {
  const std::vector<NatOp> o = ops();
  std::vector<VeracityState> trace = dfa_trace(o);
  trace.erase(trace.begin());
  return trace;
}

double compute_s_p(std::span<const ProofStep> steps) {
  if (steps.empty()) throw std::invalid_argument("s_p of an empty proof");
  double sum = 0.0;
  for (const ProofStep& s : steps) {
    sum += s.natop == NatOp::Independence ? kIndependenceProbability
                                          : s.yes_probability;
  }
  return sum / static_cast<double>(steps.size());
}

double compute_s_v(std::span<const NatOp> ops, const VeracityDistribution& dist) {
  return prob_of(dist, dfa_run(ops));
}

Proof select_proof(const SpanLattice& lattice, const AssignmentMap& assignments,
                   const VeracityDistribution& dist,
                   const SearchOptions& options) {
  const std::size_t l = lattice.num_chunks();
  if (l == 0) throw std::invalid_argument("select_proof on an empty lattice");
  const ScoreGrid grid = make_grid(lattice, assignments);

  SearchMode mode = options.mode;
  if (mode == SearchMode::Auto) {
    mode = count_segmentations(l, lattice.max_merge) <= options.enumeration_cutoff
               ? SearchMode::Enumerate
               : SearchMode::Dp;
  }

  Selector sel(dist, options);
  if (mode == SearchMode::Enumerate) {
    Candidate start;
    enumerate_from(grid, lattice.max_merge, 0, start, sel);
  } else {
    run_dp(grid, lattice.max_merge, sel);
  }
  const auto [winner, fallback] = sel.result();

  Proof proof;
  std::size_t pos = 0;
  for (std::size_t len : winner.lengths) {
    const MergedSpan span{pos, len};
    const SpanChoice& choice = assignments.at(span);
    ProofStep step;
    step.claim_span = span;
    step.claim_text = choice.claim_text;
    if (choice.evidence) {
      step.evidence_text = choice.evidence->evidence_text;
      step.evidence_sentence = choice.evidence->evidence_sentence_idx;
    }
    step.natop = choice.assignment.natop;
    step.yes_probability = choice.assignment.natop == NatOp::Independence
                               ? kIndependenceProbability
                               : choice.assignment.yes_probability;
    proof.steps.push_back(std::move(step));
    pos += len;
  }
  proof.s_p = compute_s_p(proof.steps);
  proof.final_state = dfa_run(proof.ops());
  proof.s_v = prob_of(dist, proof.final_state);
  proof.score = options.weight_p * proof.s_p + options.weight_v * proof.s_v;
  proof.label = proof.final_state;
  if (fallback) {
    proof.binary_fallback = true;
    proof.label = prob_of(dist, VeracityState::R) > prob_of(dist, VeracityState::S)
                      ? VeracityState::R
                      : VeracityState::S;
  }
  return proof;
}

}  // namespace natver
