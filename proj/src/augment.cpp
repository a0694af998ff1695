#include "hatepipe/augment.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "hatepipe/text.hpp"

namespace hatepipe {

namespace {

std::string unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out.push_back(s[i]);
      continue;
    }
    const char c = s[++i];
    out.push_back(c == 't' ? '\t' : c == 'n' ? '\n' : c);
  }
  return out;
}

const NormalizerConfig& normalizer_of(const AugmentConfig& config) {
  return config.normalizer ? *config.normalizer : NormalizerConfig::defaults();
}

}  // namespace

ScriptedClient::ScriptedClient(std::map<std::pair<std::string, std::string>, std::string> script, std::string pivot)
    : script_(std::move(script)), pivot_(std::move(pivot)) {}

ScriptedClient ScriptedClient::from_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open translation script " + path.string());
  std::map<std::pair<std::string, std::string>, std::string> script;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto a = line.find('\t');
    const auto b = a == std::string::npos ? a : line.find('\t', a + 1);
    if (b == std::string::npos)
      throw DataError(path.string() + ": row " + std::to_string(row) + ": expected input<TAB>lang<TAB>output");
    script[{unescape(line.substr(0, a)), line.substr(a + 1, b - a - 1)}] = unescape(line.substr(b + 1));
  }
  return ScriptedClient(std::move(script));
}

std::string ScriptedClient::translate(std::string_view text, std::string_view source, std::string_view target) const {
  const bool forward = source == pivot_;
  const std::string lang(forward ? target : source);
  const auto it = script_.find({std::string(text), lang});
  if (it == script_.end()) throw TranslationError("no scripted translation for this text via " + lang);
  return forward ? std::string(text) : it->second;
}

void AugmentConfig::validate() const {
  if (languages.empty()) throw UsageError("augment: no languages given");
  if (max_parallel == 0) throw UsageError("augment: max_parallel must be at least 1");
  if (!(length_ratio_lo > 0.0 && length_ratio_lo < 1.0 && length_ratio_hi > 1.0))
    throw UsageError("augment: length ratio bounds must satisfy 0 < lo < 1 < hi");
  if (!(max_nonascii_fraction >= 0.0 && max_nonascii_fraction <= 1.0))
    throw UsageError("augment: max_nonascii_fraction must lie in [0, 1]");
}

std::string remove_duplicate_words(std::string_view text) {
  std::vector<std::string> kept;
  for (auto& tok : text::split_whitespace(text))
    if (kept.empty() || kept.back() != tok) kept.push_back(std::move(tok));
  return text::join(kept, " ");
}

std::string back_translate(std::string_view text, std::string_view lang, const TranslationClient& client,
                           const AugmentConfig& config) {
  const auto pivot = client.translate(text, config.source_language, lang);
  const auto back = client.translate(pivot, lang, config.source_language);
  return normalize(remove_duplicate_words(back), normalizer_of(config));
}

bool detect_failed_translation(std::string_view original, std::string_view roundtrip, const AugmentConfig& config) {
  if (roundtrip == original) return true;
  const auto out_tokens = text::split_whitespace(roundtrip).size();
  const auto in_tokens = text::split_whitespace(original).size();
  if (out_tokens == 0 || in_tokens == 0) return true;
  const double ratio = static_cast<double>(out_tokens) / static_cast<double>(in_tokens);
  if (ratio < config.length_ratio_lo || ratio > config.length_ratio_hi) return true;
  const auto cps = text::to_u32(roundtrip);
  std::size_t non_ascii = 0;
  for (char32_t c : cps) non_ascii += c > 0x7F;
  return static_cast<double>(non_ascii) / static_cast<double>(cps.size()) > config.max_nonascii_fraction;
}

BackTranslations back_translate_all(std::span<const std::string> texts, const AugmentConfig& config,
                                    const TranslationClient& client) {
  config.validate();
  const std::size_t n = texts.size();
  const std::size_t jobs = n * config.languages.size();
  struct Outcome {
    std::optional<std::string> text;
    std::string error;  // non-empty on client failure
  };
  std::vector<Outcome> outcome(jobs);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) {
      const auto& lang = config.languages[j / n];
      const auto& original = texts[j % n];
      try {
        outcome[j].text = back_translate(original, lang, client, config);
      } catch (const std::exception& e) {
        outcome[j].error = e.what()[0] ? e.what() : "translation failed";
      }
    }
  };
  const std::size_t n_threads = std::min(config.max_parallel, jobs);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  BackTranslations out;
  out.languages = config.languages;
  out.outputs.assign(config.languages.size(), std::vector<std::optional<std::string>>(n));
  for (std::size_t l = 0; l < config.languages.size(); ++l) {
    auto& stats = out.stats[config.languages[l]];
    for (std::size_t i = 0; i < n; ++i) {
      auto& o = outcome[l * n + i];
      ++stats.attempted;
      if (!o.text) {
        ++stats.client_failures;
        if (stats.first_error.empty()) stats.first_error = o.error;
      } else if (detect_failed_translation(texts[i], *o.text, config)) {
        ++stats.rejected;
      } else {
        ++stats.accepted;
        out.outputs[l][i] = std::move(o.text);
      }
    }
  }
  return out;
}

}  // namespace hatepipe
