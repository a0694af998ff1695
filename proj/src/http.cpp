#include <httplib.h>

#include <cmath>
#include <nlohmann/json.hpp>

#include "hatepipe/augment.hpp"
#include "hatepipe/model.hpp"

namespace hatepipe {

namespace {
// Splits "http://host:port/path" into ("http://host:port", "/path").
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos || url.compare(0, scheme, "http") != 0)
    throw UsageError("url must start with http://: " + url);
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

void set_timeouts(httplib::Client& client, double timeout) {
  const auto seconds = static_cast<time_t>(timeout);
  const auto micros = static_cast<time_t>((timeout - static_cast<double>(seconds)) * 1e6);
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
}
}  // namespace

HttpClassifier::HttpClassifier(std::string url, std::vector<std::string> classes, double timeout_seconds)
    : classes_(std::move(classes)), timeout_(timeout_seconds) {
  if (classes_.empty()) throw UsageError("HttpClassifier needs a class list");
  std::tie(host_, path_) = split_url(url);
}

std::vector<double> HttpClassifier::predict_proba(std::string_view normalized_text) const {
  httplib::Client client(host_);
  set_timeouts(client, timeout_);
  const nlohmann::json body{{"text", std::string(normalized_text)}};
  const auto res = client.Post(path_, body.dump(), "application/json");
  if (!res) throw ModelError("classifier backend unreachable at " + host_ + path_);
  if (res->status != 200) throw ModelError("classifier backend returned HTTP " + std::to_string(res->status));

  std::vector<double> probs;
  try {
    probs = nlohmann::json::parse(res->body).at("probs").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("classifier backend sent an invalid response: ") + e.what());
  }
  if (probs.size() != classes_.size())
    throw ModelError("classifier backend returned " + std::to_string(probs.size()) + " probabilities, expected " +
                     std::to_string(classes_.size()));
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) throw ModelError("classifier backend returned an invalid probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw ModelError("classifier backend probabilities do not sum to 1");
  return probs;
}

HttpTranslationClient::HttpTranslationClient(std::string url, double timeout_seconds) : timeout_(timeout_seconds) {
  std::tie(host_, path_) = split_url(url);
}

std::string HttpTranslationClient::translate(std::string_view text, std::string_view source,
                                             std::string_view target) const {
  httplib::Client client(host_);
  set_timeouts(client, timeout_);
  const nlohmann::json body{{"text", std::string(text)}, {"source", std::string(source)}, {"target", std::string(target)}};
  const auto res = client.Post(path_, body.dump(), "application/json");
  if (!res) throw TranslationError("translation service unreachable at " + host_ + path_);
  if (res->status != 200) throw TranslationError("translation service returned HTTP " + std::to_string(res->status));
  try {
    return nlohmann::json::parse(res->body).at("text").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw TranslationError(std::string("translation service sent an invalid response: ") + e.what());
  }
}

}  // namespace hatepipe
