#pragma once

#include <string>
#include <vector>

#include "hatepipe/rng.hpp"
#include "hatepipe/text.hpp"

namespace hatepipe::testing {

// Random valid UTF-8 built from pieces that exercise every normalizer rule:
// entities, mixed case in several scripts, emoji (including keycaps, flags,
// skin tones), foldable punctuation, Unicode spaces, clitics and times, plus
// arbitrary code points from the whole range.
inline std::string random_unicode(Rng& rng, bool with_emoji = true) {
  static const std::vector<std::string> kPieces = {
      "@", "#", "@bob", "#Tag", "http://", "https://x.co/A", "www.", "WWW.Foo", "<USER>", "<url>", "n't", "'s", "’",
      "…", "“", "”", "–", "—", "p.m.", "a.m.", "5", "P.M.", "don't", "WON’T", "I'm", ".", ",", "!", "\"", ":", "'",
      " ", " ", "​", "　", "﻿", "\t", "\n", " ", "  ", "É", "ß", "Σ", "Ж", "İ", "Ÿ", "Ａ",
      ":United_States:", ":Côte_d'Ivoire:", "_", "a", "Z", "x"};
  static const std::vector<std::string> kEmoji = {"😂", "🇺🇸", "#️⃣", "#⃣", "5️⃣", "❤️", "❤", "🕔", "🇨🇮", "👍🏽",
                                                  "🏽", "👨‍👩‍👧", "©️", "™", "️", "⃣", "🤷‍♀️"};
  std::string out;
  const auto n = rng.index(24);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto kind = rng.index(10);
    if (kind < 5) {
      out += kPieces[rng.index(kPieces.size())];
    } else if (kind < 7 && with_emoji) {
      out += kEmoji[rng.index(kEmoji.size())];
    } else {
      char32_t cp;
      do {
        const auto range = rng.index(4);
        if (range == 0)
          cp = static_cast<char32_t>(0x20 + rng.index(0x5F));
        else if (range == 1)
          cp = static_cast<char32_t>(0x80 + rng.index(0x580));
        else if (range == 2)
          cp = static_cast<char32_t>(0x2000 + rng.index(0xE000));
        else
          cp = static_cast<char32_t>(0x10000 + rng.index(0x100000));
      } while ((cp >= 0xD800 && cp <= 0xDFFF) || (!with_emoji && cp >= 0x2000));
      text::append_utf8(out, cp);
    }
  }
  return out;
}

}  // namespace hatepipe::testing
