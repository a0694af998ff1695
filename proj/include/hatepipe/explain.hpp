#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hatepipe/model.hpp"
#include "hatepipe/normalize.hpp"

namespace hatepipe {

enum class MaskMode { automatic, sampled, exhaustive };

struct ExplainConfig {
  std::size_t n_samples = 1000;
  std::size_t n_features = 6;
  std::optional<double> kernel_width;  // 0.75 * sqrt(token count) when unset
  double ridge_lambda = 1.0;
  std::uint64_t seed = 0;
  // automatic: exhaustive when the text has at most exhaustive_max_tokens tokens.
  MaskMode mode = MaskMode::sampled;
  std::size_t exhaustive_max_tokens = 12;
  std::size_t max_parallel = 1;
  const NormalizerConfig* normalizer = nullptr;  // defaults() when null

  void validate() const;
};

struct Perturbation {
  std::vector<bool> mask;
  std::string text;
};

// First mask is all ones; the rest keep each token with probability 0.5,
// redrawing empty masks.
std::vector<Perturbation> perturb(const std::vector<std::string>& tokens, std::size_t n, std::uint64_t seed);

// Every non-empty mask, all ones first. Requires 1 <= tokens <= 20.
std::vector<Perturbation> all_masks(const std::vector<std::string>& tokens);

struct TokenWeight {
  std::string token;
  std::size_t position = 0;
  double weight = 0.0;

  bool operator==(const TokenWeight&) const = default;
};

struct Explanation {
  std::string target_class;
  std::string text;  // normalized input
  std::vector<TokenWeight> token_weights;  // top n_features by |weight|, descending
  double intercept = 0.0;
  // Surrogate value at the all-ones mask (intercept plus every coefficient).
  double local_prediction = 0.0;
  double model_probability = 0.0;
  std::size_t n_samples = 0;
  bool exhaustive = false;

  nlohmann::json to_json() const;
  // Static fragment: tokens wrapped in spans shaded by sign and magnitude.
  std::string to_html() const;
};

// Features are token positions of the normalized text. Throws UsageError for
// an unknown class or bad config, DataError for text that is empty after
// normalization, ModelError if the surrogate system cannot be solved.
Explanation lime_explain(const Classifier& model, std::string_view text, const std::string& cls,
                         const ExplainConfig& config = {});

}  // namespace hatepipe
