#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hatepipe/corpus.hpp"
#include "hatepipe/normalize.hpp"

namespace hatepipe {

// A single translation request failed; augmentation skips the item.
class TranslationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Implementations must be safe to call from several threads at once.
class TranslationClient {
 public:
  virtual ~TranslationClient() = default;
  virtual std::string translate(std::string_view text, std::string_view source, std::string_view target) const = 0;
};

class FunctionClient final : public TranslationClient {
 public:
  using Fn = std::function<std::string(std::string_view text, std::string_view source, std::string_view target)>;
  explicit FunctionClient(Fn fn) : fn_(std::move(fn)) {}
  std::string translate(std::string_view text, std::string_view source, std::string_view target) const override {
    return fn_(text, source, target);
  }

 private:
  Fn fn_;
};

// Deterministic client driven by (input, lang, output) rows: the round trip
// of `input` through `lang` yields `output`. The forward leg returns the
// input unchanged and the backward leg returns the scripted output; texts or
// languages without a row raise TranslationError.
class ScriptedClient final : public TranslationClient {
 public:
  explicit ScriptedClient(std::map<std::pair<std::string, std::string>, std::string> script, std::string pivot = "en");
  // TSV rows "input<TAB>lang<TAB>output"; '#' starts a comment line; \t, \n
  // and \\ escapes are decoded.
  static ScriptedClient from_tsv(const std::filesystem::path& path);

  std::string translate(std::string_view text, std::string_view source, std::string_view target) const override;

 private:
  std::map<std::pair<std::string, std::string>, std::string> script_;
  std::string pivot_;
};

// POST {"text", "source", "target"} to `url`, expecting {"text"} back.
class HttpTranslationClient final : public TranslationClient {
 public:
  explicit HttpTranslationClient(std::string url, double timeout_seconds = 30.0);
  std::string translate(std::string_view text, std::string_view source, std::string_view target) const override;

 private:
  std::string host_;
  std::string path_;
  double timeout_;
};

struct AugmentConfig {
  std::vector<std::string> languages{"es", "de", "fr"};
  std::string source_language = "en";
  std::size_t max_parallel = 4;
  double length_ratio_lo = 0.3;
  double length_ratio_hi = 3.0;
  double max_nonascii_fraction = 0.2;
  const NormalizerConfig* normalizer = nullptr;  // defaults() when null

  void validate() const;
};

// Collapses runs of identical adjacent tokens; whitespace is normalized to
// single spaces.
std::string remove_duplicate_words(std::string_view text);

std::string back_translate(std::string_view text, std::string_view lang, const TranslationClient& client,
                           const AugmentConfig& config = {});

bool detect_failed_translation(std::string_view original, std::string_view roundtrip, const AugmentConfig& config = {});

struct LanguageStats {
  std::size_t attempted = 0;
  std::size_t accepted = 0;
  std::size_t client_failures = 0;  // TranslationError or other exception from the client
  std::size_t rejected = 0;         // returned, but flagged by detect_failed_translation
  std::string first_error;

  bool operator==(const LanguageStats&) const = default;
};

// Accepted round trips per language, aligned with the input texts.
struct BackTranslations {
  std::vector<std::string> languages;
  std::vector<std::vector<std::optional<std::string>>> outputs;  // [language][text]
  std::map<std::string, LanguageStats> stats;
};

BackTranslations back_translate_all(std::span<const std::string> texts, const AugmentConfig& config,
                                    const TranslationClient& client);

template <class Label>
struct AugmentResult {
  std::vector<Example<Label>> examples;
  std::map<std::string, LanguageStats> stats;
};

// Originals in order, then accepted copies grouped by language in config
// order. Throws DataError if the input already contains augmented examples.
template <class Label>
AugmentResult<Label> augment_dataset(std::span<const Example<Label>> data, const AugmentConfig& config,
                                     const TranslationClient& client) {
  std::vector<std::string> texts;
  texts.reserve(data.size());
  for (const auto& e : data) {
    if (e.augmented) throw DataError("augment_dataset: input already contains augmented examples");
    texts.push_back(e.text);
  }
  auto bt = back_translate_all(texts, config, client);
  AugmentResult<Label> out;
  out.examples.assign(data.begin(), data.end());
  for (std::size_t l = 0; l < bt.languages.size(); ++l)
    for (std::size_t i = 0; i < data.size(); ++i)
      if (bt.outputs[l][i]) {
        auto copy = data[i];
        copy.text = std::move(*bt.outputs[l][i]);
        copy.augmented = true;
        copy.origin = data[i].origin.empty() ? "bt:" + bt.languages[l] : data[i].origin + "+bt:" + bt.languages[l];
        out.examples.push_back(std::move(copy));
      }
  out.stats = std::move(bt.stats);
  return out;
}

template <class Label>
AugmentResult<Label> augment_dataset(const std::vector<Example<Label>>& data, const AugmentConfig& config,
                                     const TranslationClient& client) {
  return augment_dataset(std::span<const Example<Label>>(data), config, client);
}

}  // namespace hatepipe
