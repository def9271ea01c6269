#include <httplib.h>

#include <json.hpp>

#include "natver/alignment.hpp"
#include "natver/error.hpp"
#include "natver/qa.hpp"

namespace natver {

using nlohmann::json;

namespace {

json post_json(const std::string& endpoint, const std::string& path,
               const json& body) {
  httplib::Client client(endpoint);
  client.set_connection_timeout(10);
  client.set_read_timeout(300);
  auto res = client.Post(path, body.dump(), "application/json");
  if (!res) {
    throw Error("request to " + endpoint + path + " failed: " +
                httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error("request to " + endpoint + path + " returned HTTP " +
                std::to_string(res->status) + ": " + res->body);
  }
  try {
    return json::parse(res->body);
  } catch (const json::exception& ex) {
    throw Error("malformed response from " + endpoint + path + ": " + ex.what());
  }
}

std::vector<double> read_log_probs(const json& j, std::size_t expected) {
  std::vector<double> lp;
  try {
    lp = j.at("log_probs").get<std::vector<double>>();
  } catch (const json::exception& ex) {
    throw Error(std::string("score response without log_probs: ") + ex.what());
  }
  if (lp.size() != expected) {
    throw Error("score response has " + std::to_string(lp.size()) +
                " log_probs for " + std::to_string(expected) + " choices");
  }
  return lp;
}

}  // namespace

std::vector<double> HttpQaBackend::score(
    const std::string& input, const std::vector<std::string>& choices) {
  const json res =
      post_json(endpoint_, "/v1/score", {{"input", input}, {"choices", choices}});
  return read_log_probs(res, choices.size());
}

std::vector<std::vector<double>> HttpQaBackend::score_batch(
    const std::vector<ScoreRequest>& items) {
  json body_items = json::array();
  for (const ScoreRequest& r : items)
    body_items.push_back({{"input", r.input}, {"choices", r.choices}});
  const json res = post_json(endpoint_, "/v1/score", {{"items", body_items}});

  const json* results = nullptr;
  if (res.contains("results") && res["results"].is_array())
    results = &res["results"];
  if (!results || results->size() != items.size())
    throw Error("batch score response does not match the request size");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < items.size(); ++i)
    out.push_back(read_log_probs((*results)[i], items[i].choices.size()));
  return out;
}

WordAlignment HttpAligner::align(const TokenizedText& claim,
                                 const TokenizedText& evidence) {
  std::vector<std::string> source, target;
  for (const Token& t : claim.tokens) source.push_back(t.surface);
  for (const Token& t : evidence.tokens) target.push_back(t.surface);
  const json res =
      post_json(endpoint_, "/v1/align", {{"source", source}, {"target", target}});

  WordAlignment wa;
  try {
    for (const json& link : res.at("links")) {
      const auto c = link.at(0).get<std::size_t>();
      const auto e = link.at(1).get<std::size_t>();
      if (c >= claim.size() || e >= evidence.size())
        throw Error("align response link out of range");
      wa.links.insert({c, e});
    }
  } catch (const json::exception& ex) {
    throw Error(std::string("malformed align response: ") + ex.what());
  }
  return wa;
}

}  // namespace natver
