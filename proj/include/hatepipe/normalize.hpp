#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace hatepipe {

// Emoji code point sequences and their ":short_name:" strings, matched
// longest-first.
class EmojiTable {
 public:
  void add(std::u32string sequence, std::string name);

  // Length in code points of the longest entry starting at `pos`, or 0. On a
  // match `name` points at the entry's short name.
  std::size_t match(std::u32string_view s, std::size_t pos, const std::string** name = nullptr) const;

  bool is_name(std::string_view token) const { return names_.contains(std::string(token)); }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  // Rewrites every stored name through `fold`, so names survive the character
  // folding pass unchanged.
  template <class Fold>
  void canonicalize_names(Fold&& fold) {
    names_.clear();
    for (auto& [first, entries] : by_first_)
      for (auto& e : entries) {
        e.name = fold(e.name);
        names_.insert(e.name);
      }
  }

 private:
  struct Entry {
    std::u32string sequence;
    std::string name;
  };
  std::unordered_map<char32_t, std::vector<Entry>> by_first_;
  std::unordered_set<std::string> names_;
  std::size_t size_ = 0;
};

struct NormalizerConfig {
  std::string placeholder_user = "<USER>";
  std::string placeholder_url = "<URL>";
  std::string placeholder_hashtag = "<HASHTAG>";
  // Further tokens exempt from lowercasing, e.g. the topic marker.
  std::vector<std::string> extra_placeholders;
  EmojiTable emoji_table;
  std::map<char32_t, std::u32string> folding_table;
  // Clitics split from the end of a token, checked in order.
  std::vector<std::string> contractions;
  std::unordered_set<std::string> english_stopwords;
  double english_threshold = 0.15;

  // Configuration built from the bundled data tables.
  static const NormalizerConfig& defaults();

  // Checks the placeholder and table invariants and canonicalizes emoji names
  // through the folding table. Throws UsageError.
  void finalize();
};

EmojiTable parse_emoji_table(std::string_view tsv);
std::map<char32_t, std::u32string> parse_folding_table(std::string_view tsv);
std::unordered_set<std::string> parse_word_list(std::string_view text);
std::vector<std::string> parse_line_list(std::string_view text);

// True when at least `english_threshold` of the whitespace tokens are English
// function words. Texts with fewer than three tokens are kept.
bool is_english(std::string_view text, const NormalizerConfig& config = NormalizerConfig::defaults());

// Token-initial "@name" and "#tag" become the user and hashtag placeholders
// (trailing punctuation is kept); tokens starting with http://, https:// or
// www. become the URL placeholder. Tokens are delimited by whitespace and by
// emoji from the configured table.
std::string replace_entities(std::string_view text, const NormalizerConfig& config = NormalizerConfig::defaults());

// Replaces known emoji with their short names, separated from neighbouring
// text by single spaces. Unknown emoji pass through.
std::string demojize(std::string_view text, const NormalizerConfig& config = NormalizerConfig::defaults());

std::string fold_characters(std::string_view text, const NormalizerConfig& config = NormalizerConfig::defaults());

std::string split_contractions(std::string_view text, const NormalizerConfig& config = NormalizerConfig::defaults());

// "5p.m." -> "5 p.m.", same for "a.m.".
std::string space_time_expressions(std::string_view text);

// Collapses whitespace runs to one space and trims.
std::string collapse_whitespace(std::string_view text);

// Entities, lowercasing, emoji, folding, contractions, time expressions,
// whitespace; in that order. Total and idempotent.
std::string normalize(std::string_view text, const NormalizerConfig& config = NormalizerConfig::defaults());

}  // namespace hatepipe
