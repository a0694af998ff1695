#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hatepipe/error.hpp"
#include "hatepipe/normalize.hpp"
#include "hatepipe/rng.hpp"

namespace hatepipe {

enum class HateLabel { normal, hate };

enum class TargetClass { African, Islam, Jewish, LGBT, Politician, Other };

// The five classes the target model predicts over.
inline constexpr std::array<TargetClass, 5> kModelTargets{TargetClass::African, TargetClass::Islam,
                                                          TargetClass::Jewish, TargetClass::LGBT, TargetClass::Other};

std::string_view to_string(HateLabel label);
std::string_view to_string(TargetClass target);

// Exact class names as produced by to_string (case-insensitive).
std::optional<TargetClass> parse_target_class(std::string_view name);
std::optional<HateLabel> parse_hate_label(std::string_view name);

// Maps a free-form group name ("muslims", "LGBT+", "black folks", ...) onto the
// five model classes. Anything that is not one of the four minorities is Other.
TargetClass map_target_group(std::string_view group);

struct Post {
  std::string id;
  std::string text;
  std::optional<double> label_mean;
  std::optional<bool> disputable;
  std::optional<std::string> user_id;
};

template <class Label>
struct Example {
  std::string text;
  Label label{};
  std::string origin;
  bool augmented = false;

  bool operator==(const Example&) const = default;
};

using LabeledExample = Example<HateLabel>;
using TargetExample = Example<TargetClass>;
// Label-agnostic form used by training, evaluation and the JSON-lines files.
using Sample = Example<std::string>;

template <class Label>
Sample to_sample(const Example<Label>& e) {
  return Sample{e.text, std::string(to_string(e.label)), e.origin, e.augmented};
}

template <class Label>
std::vector<Sample> to_samples(std::span<const Example<Label>> examples) {
  std::vector<Sample> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(to_sample(e));
  return out;
}

struct RowError {
  std::size_t row = 0;  // 1-based line number of the record in the input file
  std::string message;
};

template <class T>
struct LoadResult {
  std::vector<T> items;
  std::vector<RowError> errors;
  std::vector<std::string> warnings;
  std::size_t rows_read = 0;            // records parsed, including dropped ones
  std::size_t dropped = 0;              // valid records removed by a filter or vote
  std::size_t excluded_non_english = 0;
  std::size_t unknown_targets = 0;      // target strings mapped to Other by default
};

struct LoadOptions {
  // Drop records whose text fails is_english before labeling.
  bool english_only = false;
  // Loader aborts when more than this fraction of records fail to parse.
  double max_error_fraction = 0.10;
  const NormalizerConfig* normalizer = nullptr;  // defaults() when null
};

LoadResult<Post> load_parler(const std::filesystem::path& path, const LoadOptions& options = {});

// Hate iff label_mean >= threshold (inclusive) or > threshold (strict).
// Throws DataError for a post without a label mean.
LabeledExample binarize(const Post& post, double threshold, bool inclusive = true,
                        const NormalizerConfig& normalizer = NormalizerConfig::defaults());

// Strict majority over the raw annotations; returns nullopt when all three
// differ. Throws DataError unless exactly three annotations are given.
std::optional<std::string> majority_vote(std::span<const std::string> annotations);

LoadResult<TargetExample> load_hatexplain(const std::filesystem::path& path, const LoadOptions& options = {});
LoadResult<TargetExample> load_dialoconan(const std::filesystem::path& path, const LoadOptions& options = {});

enum class ToxigenVariant { small, large };
LoadResult<TargetExample> load_toxigen(const std::filesystem::path& path, ToxigenVariant variant,
                                       const LoadOptions& options = {});

LoadResult<TargetExample> load_tap(const std::filesystem::path& path, bool fold_politician,
                                   const LoadOptions& options = {});

// Sample JSON-lines: {"text", "label", "origin", "augmented"} per line.
std::vector<Sample> read_samples(const std::filesystem::path& path);
void write_samples(const std::filesystem::path& path, std::span<const Sample> samples);
void write_posts(const std::filesystem::path& path, std::span<const Post> posts);

struct SplitConfig {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  bool stratified = true;
};

template <class E>
struct SplitResult {
  std::vector<E> train;
  std::vector<E> test;
  std::vector<std::string> warnings;
};

// round-half-up(n * fraction)
inline std::size_t train_size(std::size_t n, double fraction) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction + 0.5));
}

// Seeded train/test partition. Under stratification the train share of each
// class is rounded separately; classes with fewer than two examples go wholly
// to train. Inputs containing augmented examples are rejected so augmented
// copies can never reach a test split.
template <class Label>
SplitResult<Example<Label>> split(std::span<const Example<Label>> data, const SplitConfig& config) {
  if (data.empty()) throw DataError("split: empty dataset");
  if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0))
    throw UsageError("split: train_fraction must lie in (0, 1)");
  for (const auto& e : data)
    if (e.augmented) throw DataError("split: augmented examples must be added after splitting");

  Rng rng(config.seed);
  SplitResult<Example<Label>> result;
  std::vector<std::size_t> train_idx, test_idx;

  auto take = [&](std::vector<std::size_t> idx) {
    rng.shuffle(idx);
    const std::size_t n_train = train_size(idx.size(), config.train_fraction);
    train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    test_idx.insert(test_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  };

  if (config.stratified) {
    std::map<Label, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < data.size(); ++i) by_label[data[i].label].push_back(i);
    for (auto& [label, idx] : by_label) {
      if (idx.size() < 2) {
        result.warnings.push_back("class with fewer than 2 examples placed wholly in train");
        train_idx.insert(train_idx.end(), idx.begin(), idx.end());
        continue;
      }
      take(std::move(idx));
    }
  } else {
    std::vector<std::size_t> idx(data.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    take(std::move(idx));
  }

  rng.shuffle(train_idx);
  rng.shuffle(test_idx);
  result.train.reserve(train_idx.size());
  result.test.reserve(test_idx.size());
  for (auto i : train_idx) result.train.push_back(data[i]);
  for (auto i : test_idx) result.test.push_back(data[i]);
  return result;
}

template <class Label>
SplitResult<Example<Label>> split(const std::vector<Example<Label>>& data, const SplitConfig& config) {
  return split(std::span<const Example<Label>>(data), config);
}

}  // namespace hatepipe
