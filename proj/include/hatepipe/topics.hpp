#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace hatepipe {

inline constexpr std::string_view kTopicMarker = "<TOPIC>";
inline constexpr int kOutlier = -1;

using Matrix = std::vector<std::vector<double>>;

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::size_t dim() const = 0;
  // Learns corpus statistics, if any. Embedding before fit is allowed.
  virtual void fit(std::span<const std::string> texts) { (void)texts; }
  virtual Matrix embed(std::span<const std::string> texts) const = 0;
  // Must include a "type" key understood by embedder_from_json.
  virtual nlohmann::json to_json() const = 0;
};

// Unigram TF-IDF projected onto a seeded dense random +-1/sqrt(d) basis and
// L2-normalized. Vectors for empty texts are zero.
class TfidfProjectionEmbedder final : public Embedder {
 public:
  explicit TfidfProjectionEmbedder(std::size_t dim = 64, std::uint64_t seed = 0);

  std::size_t dim() const override { return dim_; }
  void fit(std::span<const std::string> texts) override;
  Matrix embed(std::span<const std::string> texts) const override;
  nlohmann::json to_json() const override;

  static std::unique_ptr<TfidfProjectionEmbedder> from_json(const nlohmann::json& j);

 private:
  double idf(const std::string& token) const;

  std::size_t dim_;
  std::uint64_t seed_;
  std::size_t n_docs_ = 0;
  std::map<std::string, std::size_t> doc_freq_;
};

std::unique_ptr<Embedder> embedder_from_json(const nlohmann::json& j);

struct ClusterParams {
  std::size_t min_cluster_size = 10;
  std::size_t min_samples = 5;

  void validate() const;
  bool operator==(const ClusterParams&) const = default;
};

struct Clustering {
  std::vector<int> labels;
  double eps = 0.0;  // connection radius picked at the knee of the core distances
  std::vector<std::string> warnings;

  std::size_t outliers() const;
  std::size_t n_topics() const;
};

// Density clustering: a point's core distance is the distance to its
// min_samples-th nearest other point; core points (core distance <= eps) are
// linked when within eps, border points join their nearest core point within
// eps, and components smaller than min_cluster_size become outliers. Topic ids
// follow the smallest member index.
Clustering cluster(const Matrix& vectors, const ClusterParams& params);

// Grid point with the fewest outliers; ties go to smaller min_cluster_size,
// then smaller min_samples.
ClusterParams tune_params(const Matrix& vectors, std::span<const ClusterParams> grid);

// Every (size, samples) pair with samples <= size.
std::vector<ClusterParams> make_grid(std::span<const std::size_t> sizes, std::span<const std::size_t> samples);

struct TopicName {
  std::string name;  // "{id}_{w1}_..._{wk}"
  std::vector<std::string> words;
  bool degenerate = false;  // no scorable words in the topic
};

struct NamingOptions {
  std::size_t k = 4;
  const std::unordered_set<std::string>* stopwords = nullptr;  // English list when null
};

// Names every label present, including the outlier label.
std::map<int, TopicName> name_topics(std::span<const std::string> texts, std::span<const int> labels,
                                     const NamingOptions& options = {});

class TopicModel {
 public:
  ClusterParams params;
  double eps = 0.0;
  std::vector<int> labels;  // training assignment
  std::map<int, TopicName> names;
  std::map<int, std::vector<double>> centroids;  // non-outlier topics only
  std::map<int, double> radius;                  // max member distance to the centroid
  std::shared_ptr<const Embedder> embedder;

  // Nearest centroid; texts farther than the topic's radius are outliers.
  int assign(std::string_view text) const;
  std::vector<int> assign(std::span<const std::string> texts) const;

  std::size_t n_topics() const { return centroids.size(); }

  nlohmann::json to_json() const;
  static TopicModel from_json(const nlohmann::json& j);
  std::string serialize() const;
  // Throws FormatError on corrupt or mismatched input.
  static TopicModel deserialize(std::string_view text);

  void save(const std::filesystem::path& path) const;
  static TopicModel load(const std::filesystem::path& path);
};

std::vector<ClusterParams> default_grid(std::size_t min_samples_floor = 1);

// Embeds, tunes over `grid`, clusters and names. Throws DataError on an
// empty corpus or an empty grid.
TopicModel fit_topics(std::span<const std::string> texts, std::shared_ptr<Embedder> embedder,
                      std::span<const ClusterParams> grid, const NamingOptions& naming = {});

// "text <TOPIC> w1 w2 w3 w4"; the outlier label returns the text unchanged.
// Throws DataError for a label the model does not name.
std::string concat_topic(std::string_view text, const TopicModel& model, int label);

}  // namespace hatepipe
