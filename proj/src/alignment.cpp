#include "natver/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

#include "natver/error.hpp"

namespace natver {

using nlohmann::json;

namespace {

std::vector<std::string> surfaces(const TokenizedText& t) {
  std::vector<std::string> out;
  out.reserve(t.size());
  for (const Token& tok : t.tokens) out.push_back(tok.surface);
  return out;
}

std::string store_key(const std::vector<std::string>& source,
                      const std::vector<std::string>& target) {
  std::string key;
  for (const auto& s : source) key += s + '\x1f';
  key += '\x1e';
  for (const auto& s : target) key += s + '\x1f';
  return key;
}

std::unordered_map<std::string, double> bag_of_words(const std::string& s) {
  std::unordered_map<std::string, double> bag;
  for (const Token& t : tokenize(s).tokens) {
    if (has_word_char(t.surface)) bag[fold_case(t.surface)] += 1.0;
  }
  return bag;
}

}  // namespace

WordAlignment builtin_lexical_align(const TokenizedText& claim,
                                    const TokenizedText& evidence) {
  WordAlignment wa;
  std::vector<std::string> ev_folded;
  std::vector<std::string> ev_stems;
  for (const Token& t : evidence.tokens) {
    ev_folded.push_back(fold_case(t.surface));
    ev_stems.push_back(stem(t.surface));
  }

  for (std::size_t c = 0; c < claim.size(); ++c) {
    const std::string& surface = claim.tokens[c].surface;
    if (!has_word_char(surface)) continue;
    const std::string folded = fold_case(surface);
    const std::string claim_stem = stem(surface);

    std::optional<std::size_t> best;
    int best_tier = 4;
    for (std::size_t e = 0; e < evidence.size() && best_tier > 1; ++e) {
      const std::string& ev = evidence.tokens[e].surface;
      if (!has_word_char(ev)) continue;
      int tier = 4;
      if (ev == surface) {
        tier = 1;
      } else if (ev_folded[e] == folded) {
        tier = 2;
      } else if (claim_stem.size() >= 4 && ev_stems[e] == claim_stem) {
        tier = 3;
      }
      if (tier < best_tier) {
        best_tier = tier;
        best = e;
      }
    }
    if (best) wa.links.insert({c, *best});
  }
  return wa;
}

WordAlignment LexicalAligner::align(const TokenizedText& claim,
                                    const TokenizedText& evidence) {
  return builtin_lexical_align(claim, evidence);
}

ReplayAligner::ReplayAligner(const std::filesystem::path& store_path) {
  std::ifstream in(store_path);
  if (!in) throw Error("cannot open alignment store: " + store_path.string());
  json doc;
  try {
    doc = json::parse(in);
    for (const json& e : doc.at("entries")) {
      std::set<WordLink> links;
      for (const json& l : e.at("links"))
        links.insert({l.at(0).get<std::size_t>(), l.at(1).get<std::size_t>()});
      store_[store_key(e.at("source").get<std::vector<std::string>>(),
                       e.at("target").get<std::vector<std::string>>())] =
          std::move(links);
    }
  } catch (const json::exception& ex) {
    throw Error("malformed alignment store " + store_path.string() + ": " +
                ex.what());
  }
}

WordAlignment ReplayAligner::align(const TokenizedText& claim,
                                   const TokenizedText& evidence) {
  auto it = store_.find(store_key(surfaces(claim), surfaces(evidence)));
  if (it == store_.end()) {
    throw Error("unrecorded alignment for claim \"" + claim.text +
                "\" and evidence \"" + evidence.text + "\"");
  }
  WordAlignment wa;
  wa.links = it->second;
  return wa;
}

WordAlignment RecordingAligner::align(const TokenizedText& claim,
                                      const TokenizedText& evidence) {
  WordAlignment wa = inner_->align(claim, evidence);
  Entry entry{surfaces(claim), surfaces(evidence), wa.links};
  std::string key = store_key(entry.source, entry.target);
  std::lock_guard lock(mu_);
  entries_.insert_or_assign(std::move(key), std::move(entry));
  return wa;
}

void RecordingAligner::save() const {
  json entries = json::array();
  {
    std::lock_guard lock(mu_);
    for (const auto& [key, e] : entries_) {
      json links = json::array();
      for (const auto& [c, v] : e.links) links.push_back({c, v});
      entries.push_back(
          {{"source", e.source}, {"target", e.target}, {"links", links}});
    }
  }
  std::ofstream out(path_);
  if (!out) throw Error("cannot write alignment store: " + path_.string());
  out << json{{"entries", entries}}.dump(1) << '\n';
}

double LexicalSimilarity::similarity(const std::string& a,
                                     const std::string& b) const {
  const auto bag_a = bag_of_words(a);
  const auto bag_b = bag_of_words(b);
  if (bag_a.empty() || bag_b.empty()) return (bag_a.empty() && bag_b.empty()) ? 1.0 : 0.0;
  double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
  for (const auto& [w, n] : bag_a) {
    norm_a += n * n;
    if (auto it = bag_b.find(w); it != bag_b.end()) dot += n * it->second;
  }
  for (const auto& [w, n] : bag_b) norm_b += n * n;
  return std::clamp(dot / std::sqrt(norm_a * norm_b), 0.0, 1.0);
}

std::optional<Chunk> project_span(const Chunk& claim_tokens,
                                  const WordAlignment& alignment) {
  std::optional<std::size_t> lo, hi;
  for (const auto& [c, e] : alignment.links) {
    if (c < claim_tokens.token_start || c >= claim_tokens.token_end) continue;
    lo = lo ? std::min(*lo, e) : e;
    hi = hi ? std::max(*hi, e) : e;
  }
  if (!lo) return std::nullopt;
  return Chunk{*lo, *hi + 1};
}

std::optional<AlignedSpan> select_evidence_span(
    const std::string& claim_text, std::vector<AlignedSpan> candidates,
    const SimilarityBackend& sim, double rank_decay) {
  std::optional<AlignedSpan> best;
  for (AlignedSpan& cand : candidates) {
    cand.similarity = sim.similarity(claim_text, cand.evidence_text);
    cand.weighted_score =
        cand.similarity *
        std::pow(rank_decay, static_cast<double>(cand.evidence_sentence_idx));
    if (!best || cand.weighted_score > best->weighted_score ||
        (cand.weighted_score == best->weighted_score &&
         cand.evidence_sentence_idx < best->evidence_sentence_idx)) {
      best = cand;
    }
  }
  return best;
}

}  // namespace natver
