#include "hatepipe/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <functional>

#include <nlohmann/json.hpp>

#include "hatepipe/text.hpp"
#include "records.hpp"

namespace hatepipe {

using detail::get_bool;
using detail::get_number;
using detail::get_string;
using detail::Record;
using nlohmann::json;

std::string_view to_string(HateLabel label) { return label == HateLabel::hate ? "hate" : "normal"; }

std::string_view to_string(TargetClass target) {
  switch (target) {
    case TargetClass::African:
      return "African";
    case TargetClass::Islam:
      return "Islam";
    case TargetClass::Jewish:
      return "Jewish";
    case TargetClass::LGBT:
      return "LGBT";
    case TargetClass::Politician:
      return "Politician";
    case TargetClass::Other:
      return "Other";
  }
  return "Other";
}

std::optional<TargetClass> parse_target_class(std::string_view name) {
  const auto lower = text::to_lower_ascii(text::trim(name));
  for (auto t : {TargetClass::African, TargetClass::Islam, TargetClass::Jewish, TargetClass::LGBT,
                 TargetClass::Politician, TargetClass::Other})
    if (text::to_lower_ascii(to_string(t)) == lower) return t;
  return std::nullopt;
}

std::optional<HateLabel> parse_hate_label(std::string_view name) {
  const auto lower = text::to_lower_ascii(text::trim(name));
  if (lower == "hate") return HateLabel::hate;
  if (lower == "normal") return HateLabel::normal;
  return std::nullopt;
}

namespace {

std::optional<TargetClass> known_group(std::string_view group) {
  const auto g = text::to_lower_ascii(text::trim(group));
  auto has = [&](std::string_view needle) { return g.find(needle) != std::string::npos; };
  if (g == "african" || g == "poc" || has("black") || has("african") || has("people of color") ||
      has("people of colour"))
    return TargetClass::African;
  if (g == "islam" || has("muslim") || has("moslem")) return TargetClass::Islam;
  if (g == "jewish" || g == "jew" || g == "jews") return TargetClass::Jewish;
  if (has("lgbt") || has("homosexual") || g == "gay" || g == "gays" || g == "queer") return TargetClass::LGBT;
  return std::nullopt;
}

}  // namespace

TargetClass map_target_group(std::string_view group) { return known_group(group).value_or(TargetClass::Other); }

namespace {

const NormalizerConfig& normalizer_of(const LoadOptions& options) {
  return options.normalizer ? *options.normalizer : NormalizerConfig::defaults();
}

// Runs `parse` over every record. parse appends to result.items (or counts a
// drop) and throws std::exception to report a row error.
template <class T, class Parse>
LoadResult<T> load_records(const std::filesystem::path& path, const LoadOptions& options, Parse&& parse) {
  LoadResult<T> result;
  const auto records = detail::read_records(path);
  result.rows_read = records.size();
  if (records.empty()) {
    result.warnings.push_back(path.string() + ": no records");
    return result;
  }
  for (const auto& rec : records) {
    if (!rec.error.empty()) {
      result.errors.push_back({rec.row, rec.error});
      continue;
    }
    try {
      parse(rec.value, result, rec.row);
    } catch (const std::exception& e) {
      result.errors.push_back({rec.row, e.what()});
    }
  }
  if (static_cast<double>(result.errors.size()) > options.max_error_fraction * static_cast<double>(records.size())) {
    std::string msg = path.string() + ": " + std::to_string(result.errors.size()) + " of " +
                      std::to_string(records.size()) + " rows failed";
    for (std::size_t i = 0; i < std::min<std::size_t>(3, result.errors.size()); ++i)
      msg += "; row " + std::to_string(result.errors[i].row) + ": " + result.errors[i].message;
    throw DataError(msg);
  }
  return result;
}

std::string require_text(const json& obj) {
  auto t = get_string(obj, {"text", "generation", "post"});
  if (!t) {
    // HateXplain ships token lists.
    if (auto it = obj.find("post_tokens"); it != obj.end() && it->is_array()) {
      std::vector<std::string> toks;
      for (const auto& tok : *it) toks.push_back(tok.get<std::string>());
      t = text::join(toks, " ");
    }
  }
  if (!t || text::trim(*t).empty()) throw DataError("missing or empty text");
  return *t;
}

// Returns false when the text is filtered out as non-English.
template <class T>
bool keep_language(const std::string& raw, const LoadOptions& options, LoadResult<T>& result) {
  if (options.english_only && !is_english(raw, normalizer_of(options))) {
    ++result.excluded_non_english;
    return false;
  }
  return true;
}

}  // namespace

LoadResult<Post> load_parler(const std::filesystem::path& path, const LoadOptions& options) {
  return load_records<Post>(path, options, [&](const json& obj, LoadResult<Post>& result, std::size_t row) {
    Post post;
    post.text = require_text(obj);
    post.id = get_string(obj, {"id", "post_id"}).value_or(std::to_string(row));
    post.label_mean = get_number(obj, {"label_mean", "label mean"});
    if (!post.label_mean) throw DataError("missing label_mean");
    if (!(*post.label_mean >= 1.0 && *post.label_mean <= 5.0))
      throw DataError("label_mean " + std::to_string(*post.label_mean) + " outside [1, 5]");
    post.disputable = get_bool(obj, {"disputable"});
    post.user_id = get_string(obj, {"user_id", "user id"});
    if (!keep_language(post.text, options, result)) return;
    result.items.push_back(std::move(post));
  });
}

LabeledExample binarize(const Post& post, double threshold, bool inclusive, const NormalizerConfig& normalizer) {
  if (!post.label_mean) throw DataError("unlabeled post '" + post.id + "'");
  const double m = *post.label_mean;
  const bool hate = inclusive ? m >= threshold : m > threshold;
  return LabeledExample{normalize(post.text, normalizer), hate ? HateLabel::hate : HateLabel::normal, "parler", false};
}

std::optional<std::string> majority_vote(std::span<const std::string> annotations) {
  if (annotations.size() != 3)
    throw DataError("expected 3 annotations, found " + std::to_string(annotations.size()));
  std::vector<std::string> keys;
  for (const auto& a : annotations) keys.push_back(text::to_lower_ascii(text::trim(a)));
  for (std::size_t i = 0; i < 3; ++i) {
    const auto votes = std::count(keys.begin(), keys.end(), keys[i]);
    if (votes >= 2) return std::string(text::trim(annotations[i]));
  }
  return std::nullopt;
}

LoadResult<TargetExample> load_hatexplain(const std::filesystem::path& path, const LoadOptions& options) {
  const auto& norm = normalizer_of(options);
  return load_records<TargetExample>(path, options, [&](const json& obj, LoadResult<TargetExample>& result, std::size_t) {
    const std::string raw = require_text(obj);
    const json* ann = detail::find_field(obj, {"annotations", "annotators", "targets"});
    if (!ann || !ann->is_array()) throw DataError("missing annotations array");
    std::vector<std::string> labels;
    for (const auto& a : *ann) {
      if (a.is_string()) {
        labels.push_back(a.get<std::string>());
      } else if (a.is_object() && a.contains("target")) {
        const auto& t = a["target"];
        if (t.is_string())
          labels.push_back(t.get<std::string>());
        else if (t.is_array())
          labels.push_back(t.empty() ? "None" : t.front().get<std::string>());
        else
          throw DataError("annotation target is neither string nor list");
      } else {
        throw DataError("annotation is neither string nor object with target");
      }
    }
    auto winner = majority_vote(labels);
    if (!winner) {
      ++result.dropped;
      return;
    }
    if (!keep_language(raw, options, result)) return;
    result.items.push_back({normalize(raw, norm), map_target_group(*winner), "hatexplain", false});
  });
}

LoadResult<TargetExample> load_dialoconan(const std::filesystem::path& path, const LoadOptions& options) {
  const auto& norm = normalizer_of(options);
  return load_records<TargetExample>(path, options, [&](const json& obj, LoadResult<TargetExample>& result, std::size_t) {
    const std::string raw = require_text(obj);
    const auto type = get_string(obj, {"type", "TYPE", "role", "speaker"});
    if (!type) throw DataError("missing turn type");
    const auto target = get_string(obj, {"target", "TARGET"});
    if (!target) throw DataError("missing target");
    const auto t = text::to_lower_ascii(text::trim(*type));
    const bool hater = t == "hs" || t == "hater" || t == "hate";
    if (!hater && t != "cn" && t != "operator" && t != "ngo") throw DataError("unknown turn type '" + *type + "'");
    if (!hater) {
      ++result.dropped;
      return;
    }
    const auto g = text::to_lower_ascii(text::trim(*target));
    TargetClass cls;
    if (auto known = known_group(g)) {
      cls = *known;
    } else {
      if (g != "migrants" && g != "women") ++result.unknown_targets;
      cls = TargetClass::Other;
    }
    if (!keep_language(raw, options, result)) return;
    result.items.push_back({normalize(raw, norm), cls, "dialoconan", false});
  });
}

LoadResult<TargetExample> load_toxigen(const std::filesystem::path& path, ToxigenVariant variant,
                                       const LoadOptions& options) {
  const auto& norm = normalizer_of(options);
  const std::string origin = variant == ToxigenVariant::small ? "toxigen-small" : "toxigen-large";
  return load_records<TargetExample>(path, options, [&](const json& obj, LoadResult<TargetExample>& result, std::size_t) {
    const std::string raw = require_text(obj);
    const auto group = get_string(obj, {"target_group", "group"});
    if (!group) throw DataError("missing target group");
    if (variant == ToxigenVariant::small) {
      const auto toxicity = get_number(obj, {"toxicity", "toxicity_human"});
      if (!toxicity) throw DataError("missing toxicity");
      const auto agreement = get_bool(obj, {"agreement"});
      if (!agreement) throw DataError("missing agreement");
      if (*toxicity < 4.0 || !*agreement) {
        ++result.dropped;
        return;
      }
    }
    if (!keep_language(raw, options, result)) return;
    result.items.push_back({normalize(raw, norm), map_target_group(*group), origin, false});
  });
}

LoadResult<TargetExample> load_tap(const std::filesystem::path& path, bool fold_politician,
                                   const LoadOptions& options) {
  const auto& norm = normalizer_of(options);
  return load_records<TargetExample>(path, options, [&](const json& obj, LoadResult<TargetExample>& result, std::size_t) {
    const std::string raw = require_text(obj);
    const auto label = get_string(obj, {"label", "target", "class"});
    if (!label) throw DataError("missing class label");
    std::optional<TargetClass> cls = parse_target_class(*label);
    if (!cls && text::to_lower_ascii(text::trim(*label)) == "homosexual") cls = TargetClass::LGBT;
    if (!cls) throw DataError("unknown class '" + *label + "'");
    if (fold_politician && *cls == TargetClass::Politician) cls = TargetClass::Other;
    if (!keep_language(raw, options, result)) return;
    result.items.push_back({normalize(raw, norm), *cls, "tap", false});
  });
}

std::vector<Sample> read_samples(const std::filesystem::path& path) {
  std::vector<Sample> out;
  std::vector<RowError> errors;
  for (const auto& rec : detail::read_records(path)) {
    try {
      if (!rec.error.empty()) throw DataError(rec.error);
      Sample s;
      s.text = get_string(rec.value, {"text"}).value_or("");
      auto label = get_string(rec.value, {"label"});
      if (!label) throw DataError("missing label");
      s.label = *label;
      s.origin = get_string(rec.value, {"origin"}).value_or("");
      s.augmented = get_bool(rec.value, {"augmented"}).value_or(false);
      out.push_back(std::move(s));
    } catch (const std::exception& e) {
      throw DataError(path.string() + ": row " + std::to_string(rec.row) + ": " + e.what());
    }
  }
  return out;
}

namespace {
void write_lines(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  body(out);
  if (!out) throw DataError("write failed: " + path.string());
}
}  // namespace

void write_samples(const std::filesystem::path& path, std::span<const Sample> samples) {
  write_lines(path, [&](std::ostream& out) {
    for (const auto& s : samples)
      out << json{{"text", s.text}, {"label", s.label}, {"origin", s.origin}, {"augmented", s.augmented}}.dump()
          << '\n';
  });
}

void write_posts(const std::filesystem::path& path, std::span<const Post> posts) {
  write_lines(path, [&](std::ostream& out) {
    for (const auto& p : posts) {
      json j{{"id", p.id}, {"text", p.text}};
      if (p.label_mean) j["label_mean"] = *p.label_mean;
      if (p.disputable) j["disputable"] = *p.disputable;
      if (p.user_id) j["user_id"] = *p.user_id;
      out << j.dump() << '\n';
    }
  });
}

}  // namespace hatepipe
