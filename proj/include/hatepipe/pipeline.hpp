#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hatepipe/model.hpp"
#include "hatepipe/normalize.hpp"
#include "hatepipe/topics.hpp"

namespace hatepipe {

// Reported target classes, in canonical order.
const std::vector<std::string>& target_names();

struct PipelineConfig {
  std::filesystem::path detector_path;
  std::filesystem::path target_model_path;
  std::optional<std::filesystem::path> topic_model_path;
  std::string threshold_tag;
  std::string hate_label = "hate";
  std::size_t batch_size = 1024;
  std::size_t workers = 1;
  bool exclude_non_english = true;

  void validate() const;
};

struct PostResult {
  enum class Status { normal, hate, excluded, failed };
  Status status = Status::normal;
  std::string target;  // set for hate
  std::string error;   // set for failed

  bool operator==(const PostResult&) const = default;
};

// Immutable model set shared by all workers.
class Pipeline {
 public:
  Pipeline(std::shared_ptr<const Classifier> detector, std::shared_ptr<const Classifier> target,
           std::shared_ptr<const TopicModel> topics = nullptr, std::string hate_label = "hate",
           const NormalizerConfig* normalizer = nullptr);

  // Throws ModelError or FormatError when a referenced file does not load.
  static Pipeline load(const PipelineConfig& config, const NormalizerConfig* normalizer = nullptr);

  // Normalize, detect, and for hateful posts classify the target. Target
  // labels outside target_names() resolve to Other.
  PostResult classify_post(std::string_view raw_text) const;

  const NormalizerConfig& normalizer() const;
  std::string threshold_tag;

 private:
  std::shared_ptr<const Classifier> detector_;
  std::shared_ptr<const Classifier> target_;
  std::shared_ptr<const TopicModel> topics_;
  std::string hate_label_;
  const NormalizerConfig* normalizer_;
};

struct TargetDistribution {
  std::size_t total_posts = 0;
  std::size_t normal_posts = 0;
  std::size_t hateful_posts = 0;
  std::size_t excluded_posts = 0;
  std::size_t failed_posts = 0;
  std::map<std::string, std::size_t> counts;  // every entry of target_names()
  std::string detector_tag;

  TargetDistribution();
  double hate_rate() const;                      // hateful / total, 0 when empty
  std::map<std::string, double> fractions() const;  // over hateful posts, zeros when none

  nlohmann::json to_json() const;
  static TargetDistribution from_json(const nlohmann::json& j);  // throws DataError

  bool operator==(const TargetDistribution&) const = default;
};

// One raw post, or the reason its line could not be read.
struct RawPost {
  std::size_t row = 0;
  std::string text;
  std::string error;
};

class PostSource {
 public:
  virtual ~PostSource() = default;
  virtual std::optional<RawPost> next() = 0;
};

class VectorPostSource final : public PostSource {
 public:
  explicit VectorPostSource(std::vector<std::string> texts) : texts_(std::move(texts)) {}
  std::optional<RawPost> next() override;

 private:
  std::vector<std::string> texts_;
  std::size_t pos_ = 0;
};

// Streams a JSON-lines corpus (objects with a "text" or "body" field), or a
// plain-text file with one post per line when the extension is .txt.
class FilePostSource final : public PostSource {
 public:
  explicit FilePostSource(const std::filesystem::path& path);
  std::optional<RawPost> next() override;

 private:
  std::ifstream in_;
  bool plain_;
  std::size_t row_ = 0;
};

struct StageTimes {
  std::chrono::nanoseconds read{0};
  std::chrono::nanoseconds classify{0};  // wall time of the worker phase
};

struct RunOptions {
  std::size_t batch_size = 1024;
  std::size_t workers = 1;
  bool exclude_non_english = true;
  std::function<void(std::size_t processed)> on_progress;
};

struct RunResult {
  TargetDistribution distribution;
  StageTimes times;
  std::vector<std::string> first_errors;  // up to 10 per-post failure messages
};

// Memory is bounded by one batch. Counts do not depend on batch size or
// worker count.
RunResult run_corpus(PostSource& posts, const Pipeline& pipeline, const RunOptions& options = {});

enum class ReportFormat { json, csv, chart };
std::optional<ReportFormat> parse_report_format(std::string_view name);

// target,count,fraction rows sorted by count descending, then canonical order.
std::string report_csv(const TargetDistribution& d);
// Monospace bar chart, bars scaled to `width` columns for the largest count.
std::string report_chart(const TargetDistribution& d, std::size_t width = 40);
std::string report(const TargetDistribution& d, ReportFormat format);
// Throws DataError if the path cannot be written.
void write_report(const TargetDistribution& d, ReportFormat format, const std::filesystem::path& path);

}  // namespace hatepipe
