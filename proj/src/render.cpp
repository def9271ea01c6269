#include <array>
#include <cstdio>
#include <sstream>

#include "natver/pipeline.hpp"

namespace natver {

namespace {

// Code points, which is close enough to terminal columns for the symbols
// and Latin text rendered here.
std::size_t display_width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

std::string pad(const std::string& s, std::size_t width) {
  const std::size_t w = display_width(s);
  return w >= width ? s : s + std::string(width - w, ' ');
}

std::string fixed3(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

std::string header(const Proof& proof) {
  std::string h = "Verdict: " + std::string(label_name(proof.label)) +
                  " (s_p=" + fixed3(proof.s_p) + ", s_v=" + fixed3(proof.s_v) +
                  ")";
  if (proof.binary_fallback) h += " [binary fallback]";
  return h + "\n";
}

std::string render_table(const Proof& proof) {
  std::string out = header(proof);
  if (proof.steps.empty()) return out;

  const std::vector<VeracityState> states = proof.states();
  std::array<std::vector<std::string>, 4> rows;
  rows[0].push_back("Claim Span");
  rows[1].push_back("Evidence Span");
  rows[2].push_back("NatOp");
  rows[3].push_back("DFA State");
  for (std::size_t i = 0; i < proof.steps.size(); ++i) {
    const ProofStep& s = proof.steps[i];
    rows[0].push_back(s.claim_text);
    rows[1].push_back(s.evidence_text.value_or("-"));
    rows[2].push_back(std::string(natop_symbol(s.natop)));
    rows[3].push_back(std::string(state_name(states[i])));
  }

  std::vector<std::size_t> widths(rows[0].size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c)
      widths[c] = std::max(widths[c], display_width(row[c]));

  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) line += " | ";
      line += c + 1 < row.size() ? pad(row[c], widths[c]) : row[c];
    }
    out += line + "\n";
  }
  return out;
}

std::string render_inline(const Proof& proof) {
  std::string out = header(proof);
  const std::vector<VeracityState> states = proof.states();
  for (std::size_t i = 0; i < proof.steps.size(); ++i) {
    const ProofStep& s = proof.steps[i];
    out += std::to_string(i + 1) + ". \"" + s.claim_text + "\" / ";
    out += s.evidence_text ? "\"" + *s.evidence_text + "\"" : "(no evidence)";
    out += ": " + std::string(natop_description(s.natop)) + " (p=" +
           fixed3(s.yes_probability) + ") -> " +
           std::string(state_name(states[i])) + "\n";
  }
  return out;
}

}  // namespace

std::optional<RenderStyle> parse_render_style(std::string_view text) {
  if (text == "table") return RenderStyle::Table;
  if (text == "inline") return RenderStyle::Inline;
  if (text == "json") return RenderStyle::Json;
  return std::nullopt;
}

std::string render_proof(const Proof& proof, RenderStyle style) {
  switch (style) {
    case RenderStyle::Table: return render_table(proof);
    case RenderStyle::Inline: return render_inline(proof);
    case RenderStyle::Json: return proof_to_json(proof).dump(2) + "\n";
  }
  return {};
}

std::string render_verdict(const Verdict& verdict, const std::string& claim,
                           RenderStyle style) {
  if (style == RenderStyle::Json) return verdict_to_json(verdict).dump(2) + "\n";
  std::string out = "Claim " + verdict.id + ": " + claim + "\n";
  return out + render_proof(verdict.proof, style);
}

}  // namespace natver
