#include "hatepipe/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "hatepipe/error.hpp"
#include "hatepipe/text.hpp"

namespace hatepipe {

namespace {

using Clock = std::chrono::steady_clock;

std::string format_fraction(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

std::vector<std::pair<std::string, std::size_t>> by_count(const TargetDistribution& d) {
  std::vector<std::pair<std::string, std::size_t>> rows;
  for (const auto& name : target_names()) rows.emplace_back(name, d.counts.at(name));
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return rows;
}

}  // namespace

const std::vector<std::string>& target_names() {
  static const std::vector<std::string> names{"African", "Islam", "Jewish", "LGBT", "Other"};
  return names;
}

void PipelineConfig::validate() const {
  if (batch_size == 0) throw UsageError("pipeline: batch_size must be at least 1");
  if (workers == 0) throw UsageError("pipeline: workers must be at least 1");
  if (hate_label.empty()) throw UsageError("pipeline: hate_label is empty");
  if (detector_path.empty() || target_model_path.empty())
    throw UsageError("pipeline: detector and target model paths are required");
}

Pipeline::Pipeline(std::shared_ptr<const Classifier> detector, std::shared_ptr<const Classifier> target,
                   std::shared_ptr<const TopicModel> topics, std::string hate_label, const NormalizerConfig* normalizer)
    : detector_(std::move(detector)),
      target_(std::move(target)),
      topics_(std::move(topics)),
      hate_label_(std::move(hate_label)),
      normalizer_(normalizer) {
  if (!detector_ || !target_) throw UsageError("pipeline: detector and target models are required");
  const auto& dc = detector_->classes();
  if (std::find(dc.begin(), dc.end(), hate_label_) == dc.end())
    throw ModelError("pipeline: detector has no '" + hate_label_ + "' class");
}

Pipeline Pipeline::load(const PipelineConfig& config, const NormalizerConfig* normalizer) {
  config.validate();
  for (const auto& p : {config.detector_path, config.target_model_path})
    if (!std::filesystem::exists(p)) throw ModelError("model file not found: " + p.string());
  auto detector = std::make_shared<TrainedClassifier>(load_model(config.detector_path));
  auto target = std::make_shared<TrainedClassifier>(load_model(config.target_model_path));
  std::shared_ptr<const TopicModel> topics;
  if (config.topic_model_path) {
    if (!std::filesystem::exists(*config.topic_model_path))
      throw ModelError("topic model not found: " + config.topic_model_path->string());
    topics = std::make_shared<TopicModel>(TopicModel::load(*config.topic_model_path));
  }
  Pipeline p(std::move(detector), std::move(target), std::move(topics), config.hate_label, normalizer);
  p.threshold_tag = config.threshold_tag;
  return p;
}

const NormalizerConfig& Pipeline::normalizer() const {
  return normalizer_ ? *normalizer_ : NormalizerConfig::defaults();
}

PostResult Pipeline::classify_post(std::string_view raw_text) const {
  const auto text = normalize(raw_text, normalizer());
  if (detector_->predict(text).label != hate_label_) return {PostResult::Status::normal, {}, {}};
  const std::string input = topics_ ? concat_topic(text, *topics_, topics_->assign(text)) : text;
  auto label = target_->predict(input).label;
  const auto& names = target_names();
  if (std::find(names.begin(), names.end(), label) == names.end()) label = "Other";
  return {PostResult::Status::hate, std::move(label), {}};
}

TargetDistribution::TargetDistribution() {
  for (const auto& n : target_names()) counts[n] = 0;
}

double TargetDistribution::hate_rate() const {
  return total_posts ? static_cast<double>(hateful_posts) / static_cast<double>(total_posts) : 0.0;
}

std::map<std::string, double> TargetDistribution::fractions() const {
  std::map<std::string, double> out;
  for (const auto& [name, c] : counts)
    out[name] = hateful_posts ? static_cast<double>(c) / static_cast<double>(hateful_posts) : 0.0;
  return out;
}

nlohmann::json TargetDistribution::to_json() const {
  nlohmann::json targets = nlohmann::json::array();
  const auto f = fractions();
  for (const auto& name : target_names())
    targets.push_back({{"target", name}, {"count", counts.at(name)}, {"fraction", f.at(name)}});
  return {{"total_posts", total_posts},
          {"normal_posts", normal_posts},
          {"hateful_posts", hateful_posts},
          {"excluded_posts", excluded_posts},
          {"failed_posts", failed_posts},
          {"hate_rate", hate_rate()},
          {"detector", detector_tag},
          {"targets", targets}};
}

TargetDistribution TargetDistribution::from_json(const nlohmann::json& j) {
  try {
    TargetDistribution d;
    d.total_posts = j.at("total_posts").get<std::size_t>();
    d.normal_posts = j.at("normal_posts").get<std::size_t>();
    d.hateful_posts = j.at("hateful_posts").get<std::size_t>();
    d.excluded_posts = j.at("excluded_posts").get<std::size_t>();
    d.failed_posts = j.at("failed_posts").get<std::size_t>();
    d.detector_tag = j.value("detector", "");
    std::size_t sum = 0;
    for (const auto& t : j.at("targets")) {
      const auto name = t.at("target").get<std::string>();
      if (!d.counts.contains(name)) throw DataError("unknown target '" + name + "' in distribution");
      sum += d.counts[name] = t.at("count").get<std::size_t>();
    }
    if (sum != d.hateful_posts) throw DataError("distribution target counts do not sum to hateful_posts");
    if (d.normal_posts + d.hateful_posts + d.excluded_posts + d.failed_posts != d.total_posts)
      throw DataError("distribution post counts do not sum to total_posts");
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed distribution: ") + e.what());
  }
}

std::optional<RawPost> VectorPostSource::next() {
  if (pos_ == texts_.size()) return std::nullopt;
  ++pos_;
  return RawPost{pos_, texts_[pos_ - 1], {}};
}

FilePostSource::FilePostSource(const std::filesystem::path& path) : in_(path), plain_(path.extension() == ".txt") {
  if (!in_) throw DataError("cannot open corpus " + path.string());
}

std::optional<RawPost> FilePostSource::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++row_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    if (plain_) return RawPost{row_, std::move(line), {}};
    try {
      const auto obj = nlohmann::json::parse(line);
      for (const char* key : {"text", "body"})
        if (obj.is_object() && obj.contains(key) && obj[key].is_string()) return RawPost{row_, obj[key].get<std::string>(), {}};
      return RawPost{row_, {}, "row " + std::to_string(row_) + ": missing text field"};
    } catch (const nlohmann::json::exception&) {
      return RawPost{row_, {}, "row " + std::to_string(row_) + ": invalid JSON"};
    }
  }
  return std::nullopt;
}

RunResult run_corpus(PostSource& posts, const Pipeline& pipeline, const RunOptions& options) {
  if (options.batch_size == 0 || options.workers == 0) throw UsageError("run: batch_size and workers must be positive");
  RunResult result;
  auto& d = result.distribution;
  d.detector_tag = pipeline.threshold_tag;
  std::vector<RawPost> batch;
  std::vector<PostResult> out;
  for (;;) {
    const auto t0 = Clock::now();
    batch.clear();
    while (batch.size() < options.batch_size) {
      auto p = posts.next();
      if (!p) break;
      batch.push_back(std::move(*p));
    }
    const auto t1 = Clock::now();
    result.times.read += t1 - t0;
    if (batch.empty()) break;

    out.assign(batch.size(), {});
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < batch.size(); i = next++) {
        const auto& p = batch[i];
        if (!p.error.empty()) {
          out[i] = {PostResult::Status::failed, {}, p.error};
          continue;
        }
        try {
          if (options.exclude_non_english && !is_english(p.text, pipeline.normalizer()))
            out[i] = {PostResult::Status::excluded, {}, {}};
          else
            out[i] = pipeline.classify_post(p.text);
        } catch (const std::exception& e) {
          out[i] = {PostResult::Status::failed, {}, "row " + std::to_string(p.row) + ": " + e.what()};
        }
      }
    };
    const std::size_t n_threads = std::min(options.workers, batch.size());
    if (n_threads <= 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }
    result.times.classify += Clock::now() - t1;

    for (const auto& r : out) {
      ++d.total_posts;
      switch (r.status) {
        case PostResult::Status::normal: ++d.normal_posts; break;
        case PostResult::Status::hate:
          ++d.hateful_posts;
          ++d.counts[r.target];
          break;
        case PostResult::Status::excluded: ++d.excluded_posts; break;
        case PostResult::Status::failed:
          ++d.failed_posts;
          if (result.first_errors.size() < 10) result.first_errors.push_back(r.error);
          break;
      }
    }
    if (options.on_progress) options.on_progress(d.total_posts);
  }
  return result;
}

std::optional<ReportFormat> parse_report_format(std::string_view name) {
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  if (name == "chart" || name == "text-chart" || name == "text") return ReportFormat::chart;
  return std::nullopt;
}

std::string report_csv(const TargetDistribution& d) {
  const auto f = d.fractions();
  std::string out = "target,count,fraction\n";
  for (const auto& [name, c] : by_count(d)) out += name + "," + std::to_string(c) + "," + format_fraction(f.at(name)) + "\n";
  return out;
}

std::string report_chart(const TargetDistribution& d, std::size_t width) {
  std::string out = "Hate speech targets (" + std::to_string(d.hateful_posts) + " hateful of " +
                    std::to_string(d.total_posts) + " posts";
  if (!d.detector_tag.empty()) out += ", detector " + d.detector_tag;
  out += ")\n";
  if (d.hateful_posts == 0) return out + "no hateful posts\n";
  const auto rows = by_count(d);
  const auto f = d.fractions();
  const double top = static_cast<double>(rows.front().second);
  std::size_t label_width = 0;
  for (const auto& name : target_names()) label_width = std::max(label_width, name.size());
  for (const auto& [name, c] : rows) {
    const auto bar = static_cast<std::size_t>(std::lround(static_cast<double>(c) / top * static_cast<double>(width)));
    char pct[16];
    std::snprintf(pct, sizeof pct, "%5.1f%%", 100.0 * f.at(name));
    out += name + std::string(label_width - name.size(), ' ') + " | " + std::string(bar, '#') +
           std::string(width - bar, ' ') + " " + pct + " (" + std::to_string(c) + ")\n";
  }
  return out;
}

std::string report(const TargetDistribution& d, ReportFormat format) {
  switch (format) {
    case ReportFormat::json: return d.to_json().dump(2) + "\n";
    case ReportFormat::csv: return report_csv(d);
    case ReportFormat::chart: return report_chart(d);
  }
  return {};
}

void write_report(const TargetDistribution& d, ReportFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write report " + path.string());
  out << report(d, format);
  if (!out) throw DataError("write failed for report " + path.string());
}

}  // namespace hatepipe
