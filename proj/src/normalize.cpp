#include "hatepipe/normalize.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "embedded_data.hpp"
#include "hatepipe/error.hpp"
#include "hatepipe/text.hpp"

namespace hatepipe {

using text::append_utf8;
using text::is_space;

void EmojiTable::add(std::u32string sequence, std::string name) {
  if (sequence.empty()) throw UsageError("emoji table: empty sequence");
  auto& bucket = by_first_[sequence.front()];
  auto it = std::find_if(bucket.begin(), bucket.end(), [&](const Entry& e) { return e.sequence == sequence; });
  if (it != bucket.end()) {
    it->name = name;
  } else {
    bucket.push_back({std::move(sequence), name});
    ++size_;
    // Longest first so match() can stop at the first hit.
    std::stable_sort(bucket.begin(), bucket.end(),
                     [](const Entry& a, const Entry& b) { return a.sequence.size() > b.sequence.size(); });
  }
  names_.insert(std::move(name));
}

std::size_t EmojiTable::match(std::u32string_view s, std::size_t pos, const std::string** name) const {
  auto it = by_first_.find(s[pos]);
  if (it == by_first_.end()) return 0;
  for (const auto& e : it->second) {
    if (s.substr(pos, e.sequence.size()) == e.sequence) {
      if (name) *name = &e.name;
      return e.sequence.size();
    }
  }
  return 0;
}

namespace {

std::vector<std::string_view> data_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty() && line.front() != '#') lines.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return lines;
}

char32_t parse_hex_cp(std::string_view hex) {
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), value, 16);
  if (ec != std::errc() || ptr != hex.data() + hex.size() || value > 0x10FFFF)
    throw UsageError("folding table: bad code point '" + std::string(hex) + "'");
  return static_cast<char32_t>(value);
}

}  // namespace

EmojiTable parse_emoji_table(std::string_view tsv) {
  EmojiTable table;
  for (auto line : data_lines(tsv)) {
    auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0 || tab + 1 == line.size())
      throw UsageError("emoji table: malformed line '" + std::string(line) + "'");
    table.add(text::to_u32(line.substr(0, tab)), std::string(line.substr(tab + 1)));
  }
  return table;
}

std::map<char32_t, std::u32string> parse_folding_table(std::string_view tsv) {
  std::map<char32_t, std::u32string> table;
  for (auto line : data_lines(tsv)) {
    auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw UsageError("folding table: malformed line '" + std::string(line) + "'");
    const char32_t from = parse_hex_cp(line.substr(0, tab));
    auto rest = line.substr(tab + 1);
    rest = rest.substr(0, rest.find('\t'));
    std::u32string to;
    std::istringstream in{std::string(rest)};
    std::string hex;
    while (in >> hex) to.push_back(parse_hex_cp(hex));
    table[from] = std::move(to);
  }
  return table;
}

std::unordered_set<std::string> parse_word_list(std::string_view text) {
  std::unordered_set<std::string> words;
  for (auto line : data_lines(text))
    for (auto& w : text::split_whitespace(line)) words.insert(w);
  return words;
}

std::vector<std::string> parse_line_list(std::string_view text) {
  std::vector<std::string> out;
  for (auto line : data_lines(text)) {
    auto t = text::trim(line);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

void NormalizerConfig::finalize() {
  std::vector<std::string> placeholders{placeholder_user, placeholder_url, placeholder_hashtag};
  placeholders.insert(placeholders.end(), extra_placeholders.begin(), extra_placeholders.end());
  for (const auto& p : placeholders) {
    if (p.empty()) throw UsageError("placeholder must not be empty");
    if (p.front() == '@' || p.front() == '#' || text::starts_with_icase(p, "http") || text::starts_with_icase(p, "www."))
      throw UsageError("placeholder '" + p + "' would be rewritten as an entity");
    if (std::none_of(p.begin(), p.end(), [](char c) { return c >= 'A' && c <= 'Z'; }))
      throw UsageError("placeholder '" + p + "' must contain an uppercase letter");
    for (char c : p)
      if (text::is_ascii_space(c)) throw UsageError("placeholder '" + p + "' contains whitespace");
  }
  if (emoji_table.empty()) throw UsageError("emoji table is empty");
  if (folding_table.empty()) throw UsageError("folding table is empty");
  if (contractions.empty()) throw UsageError("contraction table is empty");
  if (english_stopwords.empty()) throw UsageError("stopword set is empty");
  if (!(english_threshold >= 0.0 && english_threshold <= 1.0)) throw UsageError("english_threshold must lie in [0, 1]");
  emoji_table.canonicalize_names([this](const std::string& name) { return fold_characters(name, *this); });
}

const NormalizerConfig& NormalizerConfig::defaults() {
  static const NormalizerConfig config = [] {
    NormalizerConfig c;
    c.emoji_table = parse_emoji_table(embedded::emoji_table());
    c.folding_table = parse_folding_table(embedded::folding_table());
    c.contractions = parse_line_list(embedded::contractions());
    c.english_stopwords = parse_word_list(embedded::english_stopwords());
    c.finalize();
    return c;
  }();
  return config;
}

bool is_english(std::string_view text, const NormalizerConfig& config) {
  const auto tokens = text::split_whitespace(text);
  if (tokens.size() < 3) return true;
  std::size_t hits = 0;
  for (const auto& tok : tokens) {
    auto lower = text::to_utf8([&] {
      auto u = text::to_u32(tok);
      for (auto& c : u) c = text::to_lower(c);
      return u;
    }());
    if (config.english_stopwords.contains(lower) ||
        config.english_stopwords.contains(std::string(text::strip_punct(lower))))
      ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(tokens.size()) >= config.english_threshold;
}

namespace {

bool is_body_char(char32_t c) {
  if (c < 0x80) return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
  return (c >= 0xC0 && c <= 0x24F && c != 0xD7 && c != 0xF7) || (c >= 0x370 && c <= 0x4FF);
}

std::u32string rewrite_run(std::u32string_view run, const NormalizerConfig& config) {
  const std::string utf8 = text::to_utf8(run);
  if (text::starts_with_icase(utf8, "http://") || text::starts_with_icase(utf8, "https://") ||
      text::starts_with_icase(utf8, "www."))
    return text::to_u32(config.placeholder_url);
  if (run.size() >= 2 && (run[0] == U'@' || run[0] == U'#') && is_body_char(run[1])) {
    std::size_t end = 1;
    while (end < run.size() && is_body_char(run[end])) ++end;
    std::u32string out = text::to_u32(run[0] == U'@' ? config.placeholder_user : config.placeholder_hashtag);
    out.append(run.substr(end));
    return out;
  }
  return std::u32string(run);
}

// Calls fn(token, is_token) for alternating whitespace runs and tokens.
template <class Fn>
void for_each_piece(std::u32string_view s, Fn&& fn) {
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t j = i;
    const bool space = is_space(s[i]);
    while (j < s.size() && is_space(s[j]) == space) ++j;
    fn(s.substr(i, j - i), !space);
    i = j;
  }
}

std::u32string lowercase(std::u32string_view s, const NormalizerConfig& config) {
  std::vector<std::u32string> placeholders{text::to_u32(config.placeholder_user), text::to_u32(config.placeholder_url),
                                           text::to_u32(config.placeholder_hashtag)};
  for (const auto& p : config.extra_placeholders) placeholders.push_back(text::to_u32(p));

  std::u32string out;
  out.reserve(s.size());
  for_each_piece(s, [&](std::u32string_view piece, bool is_token) {
    if (!is_token || config.emoji_table.is_name(text::to_utf8(piece))) {
      out.append(piece);
      return;
    }
    std::size_t i = 0;
    while (i < piece.size()) {
      auto hit = std::find_if(placeholders.begin(), placeholders.end(),
                              [&](const std::u32string& p) { return piece.substr(i, p.size()) == p; });
      if (hit != placeholders.end()) {
        out.append(*hit);
        i += hit->size();
      } else {
        out.push_back(text::to_lower(piece[i++]));
      }
    }
  });
  return out;
}

std::u32string demojize_u32(std::u32string_view s, const NormalizerConfig& config) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const std::string* name = nullptr;
    if (auto len = config.emoji_table.match(s, i, &name)) {
      if (!out.empty() && !is_space(out.back())) out.push_back(U' ');
      out.append(text::to_u32(*name));
      i += len;
      if (i < s.size() && !is_space(s[i])) out.push_back(U' ');
    } else {
      out.push_back(s[i++]);
    }
  }
  return out;
}

std::u32string fold_u32(std::u32string_view s, const NormalizerConfig& config) {
  std::u32string out;
  out.reserve(s.size());
  for (char32_t c : s) {
    auto it = config.folding_table.find(c);
    if (it == config.folding_table.end())
      out.push_back(c);
    else
      out.append(it->second);
  }
  return out;
}

bool is_trailing_punct(char c) {
  return c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':' || c == ')' || c == ']' || c == '}' ||
         c == '"';
}

std::string split_token(std::string_view token, const std::vector<std::string>& clitics) {
  std::size_t core_len = token.size();
  while (core_len > 0 && is_trailing_punct(token[core_len - 1])) --core_len;
  const auto core = token.substr(0, core_len);
  const auto trail = token.substr(core_len);
  for (const auto& clitic : clitics) {
    if (core.size() > clitic.size() && core.ends_with(clitic)) {
      std::string out = split_token(core.substr(0, core.size() - clitic.size()), clitics);
      out.push_back(' ');
      out.append(clitic);
      out.append(trail);
      return out;
    }
  }
  return std::string(token);
}

}  // namespace

std::string replace_entities(std::string_view input, const NormalizerConfig& config) {
  const auto s = text::to_u32(input);
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (is_space(s[i])) {
      out.push_back(s[i++]);
      continue;
    }
    if (auto len = config.emoji_table.match(s, i)) {
      out.append(s, i, len);
      i += len;
      continue;
    }
    std::size_t j = i + 1;
    while (j < s.size() && !is_space(s[j]) && config.emoji_table.match(s, j) == 0) ++j;
    out.append(rewrite_run(std::u32string_view(s).substr(i, j - i), config));
    i = j;
  }
  return text::to_utf8(out);
}

std::string demojize(std::string_view input, const NormalizerConfig& config) {
  return text::to_utf8(demojize_u32(text::to_u32(input), config));
}

std::string fold_characters(std::string_view input, const NormalizerConfig& config) {
  return text::to_utf8(fold_u32(text::to_u32(input), config));
}

std::string split_contractions(std::string_view input, const NormalizerConfig& config) {
  std::string out;
  out.reserve(input.size() + 8);
  for_each_piece(text::to_u32(input), [&](std::u32string_view piece, bool is_token) {
    auto utf8 = text::to_utf8(piece);
    if (!is_token || config.emoji_table.is_name(utf8))
      out.append(utf8);
    else
      out.append(split_token(utf8, config.contractions));
  });
  return out;
}

std::string space_time_expressions(std::string_view input) {
  std::string out;
  out.reserve(input.size() + 4);
  for (std::size_t i = 0; i < input.size(); ++i) {
    out.push_back(input[i]);
    if (input[i] >= '0' && input[i] <= '9') {
      auto rest = input.substr(i + 1);
      if (rest.starts_with("a.m.") || rest.starts_with("p.m.")) out.push_back(' ');
    }
  }
  return out;
}

std::string collapse_whitespace(std::string_view input) {
  std::string out;
  out.reserve(input.size());
  bool pending_space = false;
  std::size_t pos = 0;
  while (pos < input.size()) {
    const std::size_t start = pos;
    const char32_t c = text::decode_next(input, pos);
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    if (c == 0xFFFD && !(pos - start == 3))
      append_utf8(out, c);  // re-encode invalid bytes
    else
      out.append(input.substr(start, pos - start));
  }
  return out;
}

std::string normalize(std::string_view input, const NormalizerConfig& config) {
  auto s = text::to_u32(replace_entities(input, config));
  s = lowercase(s, config);
  s = demojize_u32(s, config);
  s = fold_u32(s, config);
  auto utf8 = split_contractions(text::to_utf8(s), config);
  utf8 = space_time_expressions(utf8);
  return collapse_whitespace(utf8);
}

}  // namespace hatepipe
