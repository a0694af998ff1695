#pragma once

#include <string>
#include <vector>

#include "hatepipe/corpus.hpp"
#include "hatepipe/rng.hpp"

namespace testing {

// Two-class corpus with a `minority_share` of "hate" documents. Both classes
// draw tokens from the same vocabulary; hate documents pick from a small cue
// set more often, so the class distributions overlap.
inline std::vector<hatepipe::Sample> imbalanced_corpus(std::size_t n, double minority_share, std::uint64_t seed) {
  static const std::vector<std::string> kCue{"vermin", "invaders", "subhuman", "filth", "parasites", "savages"};
  static const std::vector<std::string> kCommon{
      "people", "today", "news", "city", "work",  "game",   "music", "school", "phone", "market",
      "river",  "train", "bread", "paper", "green", "window", "coffee", "story", "light", "garden",
      "street", "money", "party", "dream", "table", "family", "summer", "church", "doctor", "movie"};
  hatepipe::Rng rng(seed);
  std::vector<hatepipe::Sample> out;
  const auto n_hate = static_cast<std::size_t>(static_cast<double>(n) * minority_share + 0.5);
  for (std::size_t i = 0; i < n; ++i) {
    const bool hate = i < n_hate;
    const double cue_rate = hate ? 0.22 : 0.06;
    std::string text;
    for (int t = 0; t < 10; ++t) {
      const auto& pool = rng.uniform() < cue_rate ? kCue : kCommon;
      if (!text.empty()) text += ' ';
      text += pool[rng.index(pool.size())];
    }
    out.push_back({text, hate ? "hate" : "normal", "synthetic", false});
  }
  rng.shuffle(out);
  return out;
}

}  // namespace testing
