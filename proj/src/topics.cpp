#include "hatepipe/topics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "binio.hpp"
#include "hatepipe/error.hpp"
#include "hatepipe/normalize.hpp"
#include "hatepipe/rng.hpp"
#include "hatepipe/text.hpp"

namespace hatepipe {

namespace {

constexpr const char* kFormat = "hatepipe-topics";
constexpr int kVersion = 1;

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

// Knee of an ascending curve: the point farthest below the chord after both
// axes are scaled to [0, 1].
double knee(std::vector<double> y) {
  std::sort(y.begin(), y.end());
  const double lo = y.front(), hi = y.back();
  if (y.size() < 3 || hi - lo <= 0.0) return hi;
  std::size_t best = 0;
  double best_gap = -1.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(y.size() - 1);
    const double gap = x - (y[i] - lo) / (hi - lo);
    if (gap > best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  return y[best];
}

bool is_placeholder(std::string_view tok) { return tok.size() >= 2 && tok.front() == '<' && tok.back() == '>'; }

std::uint64_t body_checksum(const nlohmann::json& body) { return hash64(body.dump(), 0x544f5043); }

std::string hex(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << v;
  return out.str();
}

}  // namespace

TfidfProjectionEmbedder::TfidfProjectionEmbedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim == 0 || dim > 4096) throw UsageError("embedding dimension must lie in [1, 4096]");
}

void TfidfProjectionEmbedder::fit(std::span<const std::string> texts) {
  n_docs_ = texts.size();
  doc_freq_.clear();
  for (const auto& t : texts) {
    const auto tokens = text::split_whitespace(t);
    for (const auto& tok : std::set<std::string>(tokens.begin(), tokens.end())) ++doc_freq_[tok];
  }
}

double TfidfProjectionEmbedder::idf(const std::string& token) const {
  const auto it = doc_freq_.find(token);
  const double df = it == doc_freq_.end() ? 0.0 : static_cast<double>(it->second);
  return std::log((1.0 + static_cast<double>(n_docs_)) / (1.0 + df)) + 1.0;
}

Matrix TfidfProjectionEmbedder::embed(std::span<const std::string> texts) const {
  const double unit = 1.0 / std::sqrt(static_cast<double>(dim_));
  Matrix out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    std::map<std::string, std::size_t> tf;
    for (auto& tok : text::split_whitespace(t)) ++tf[tok];
    std::vector<double> v(dim_, 0.0);
    for (const auto& [tok, count] : tf) {
      const double weight = static_cast<double>(count) * idf(tok) * unit;
      const std::uint64_t h = hash64(tok, seed_);
      for (std::size_t block = 0; block * 64 < dim_; ++block) {
        const std::uint64_t bits = mix64(h + 0x9e3779b97f4a7c15ULL * (block + 1));
        for (std::size_t b = 0; b < 64 && block * 64 + b < dim_; ++b)
          v[block * 64 + b] += ((bits >> b) & 1) ? weight : -weight;
      }
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm > 0.0) {
      norm = std::sqrt(norm);
      for (double& x : v) x /= norm;
    }
    out.push_back(std::move(v));
  }
  return out;
}

nlohmann::json TfidfProjectionEmbedder::to_json() const {
  return {{"type", "tfidf_projection"}, {"dim", dim_}, {"seed", seed_}, {"n_docs", n_docs_}, {"doc_freq", doc_freq_}};
}

std::unique_ptr<TfidfProjectionEmbedder> TfidfProjectionEmbedder::from_json(const nlohmann::json& j) {
  auto e = std::make_unique<TfidfProjectionEmbedder>(j.at("dim").get<std::size_t>(), j.at("seed").get<std::uint64_t>());
  e->n_docs_ = j.at("n_docs").get<std::size_t>();
  e->doc_freq_ = j.at("doc_freq").get<std::map<std::string, std::size_t>>();
  return e;
}

std::unique_ptr<Embedder> embedder_from_json(const nlohmann::json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "tfidf_projection") return TfidfProjectionEmbedder::from_json(j);
  throw ModelError("unknown embedder type '" + type + "'");
}

void ClusterParams::validate() const {
  if (min_cluster_size < 2) throw UsageError("min_cluster_size must be at least 2");
  if (min_samples < 1) throw UsageError("min_samples must be at least 1");
  if (min_samples > min_cluster_size) throw UsageError("min_samples must not exceed min_cluster_size");
}

std::size_t Clustering::outliers() const { return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kOutlier)); }

std::size_t Clustering::n_topics() const {
  int top = kOutlier;
  for (int l : labels) top = std::max(top, l);
  return static_cast<std::size_t>(top + 1);
}

Clustering cluster(const Matrix& vectors, const ClusterParams& params) {
  params.validate();
  const std::size_t n = vectors.size();
  Clustering out;
  out.labels.assign(n, kOutlier);
  if (n < params.min_cluster_size) {
    out.warnings.push_back("fewer rows (" + std::to_string(n) + ") than min_cluster_size; all points are outliers");
    return out;
  }

  std::vector<double> core(n, std::numeric_limits<double>::infinity());
  std::vector<double> row;
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) row.push_back(distance(vectors[i], vectors[j]));
    if (row.size() < params.min_samples) continue;
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(params.min_samples - 1), row.end());
    core[i] = row[params.min_samples - 1];
  }
  // Duplicate documents give zero core distances, which would pull the knee
  // to zero; the knee is taken over the positive part of the curve.
  std::vector<double> finite, positive;
  for (double c : core)
    if (std::isfinite(c)) {
      finite.push_back(c);
      if (c > 0.0) positive.push_back(c);
    }
  if (finite.empty()) return out;
  out.eps = positive.empty() ? 0.0 : knee(positive);
  const double eps = out.eps;

  std::vector<char> is_core(n);
  for (std::size_t i = 0; i < n; ++i) is_core[i] = core[i] <= eps;
  UnionFind uf(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_core[i]) continue;
    for (std::size_t j = i + 1; j < n; ++j)
      if (is_core[j] && distance(vectors[i], vectors[j]) <= eps) uf.unite(i, j);
  }
  // Component root per point; border points borrow the root of their nearest
  // core point within eps.
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> root(n, kNone);
  for (std::size_t i = 0; i < n; ++i) {
    if (is_core[i]) {
      root[i] = uf.find(i);
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (!is_core[j]) continue;
      const double d = distance(vectors[i], vectors[j]);
      if (d <= eps && d < best) {
        best = d;
        root[i] = uf.find(j);
      }
    }
  }
  std::map<std::size_t, std::size_t> size;
  for (auto r : root)
    if (r != kNone) ++size[r];
  std::map<std::size_t, int> id;
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = root[i];
    if (r == kNone || size[r] < params.min_cluster_size) continue;
    auto [it, inserted] = id.emplace(r, next);
    if (inserted) ++next;
    out.labels[i] = it->second;
  }
  return out;
}

ClusterParams tune_params(const Matrix& vectors, std::span<const ClusterParams> grid) {
  if (grid.empty()) throw UsageError("tune_params: empty grid");
  std::optional<ClusterParams> best;
  std::size_t best_outliers = 0;
  for (const auto& p : grid) {
    const auto outliers = cluster(vectors, p).outliers();
    const bool better = !best || outliers < best_outliers ||
                        (outliers == best_outliers &&
                         std::pair(p.min_cluster_size, p.min_samples) < std::pair(best->min_cluster_size, best->min_samples));
    if (better) {
      best = p;
      best_outliers = outliers;
    }
  }
  return *best;
}

std::vector<ClusterParams> make_grid(std::span<const std::size_t> sizes, std::span<const std::size_t> samples) {
  std::vector<ClusterParams> grid;
  for (auto size : sizes)
    for (auto s : samples)
      if (s >= 1 && s <= size && size >= 2) grid.push_back({size, s});
  return grid;
}

std::vector<ClusterParams> default_grid(std::size_t min_samples_floor) {
  const std::vector<std::size_t> sizes{5, 10, 15, 20, 30, 50, 100};
  std::set<std::size_t> samples{std::max<std::size_t>(1, min_samples_floor)};
  for (std::size_t s : {1, 2, 5, 10, 15, 20})
    if (s >= min_samples_floor) samples.insert(s);
  const std::vector<std::size_t> sample_list(samples.begin(), samples.end());
  return make_grid(sizes, sample_list);
}

std::map<int, TopicName> name_topics(std::span<const std::string> texts, std::span<const int> labels,
                                     const NamingOptions& options) {
  if (texts.size() != labels.size()) throw UsageError("name_topics: texts and labels differ in length");
  const auto& norm = NormalizerConfig::defaults();
  const auto& stopwords = options.stopwords ? *options.stopwords : norm.english_stopwords;

  std::map<int, std::map<std::string, std::size_t>> tf;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    auto& counts = tf[labels[i]];
    for (const auto& raw : text::split_whitespace(texts[i])) {
      if (is_placeholder(raw) || norm.emoji_table.is_name(raw)) continue;
      const std::string tok(text::strip_punct(raw));
      if (tok.empty() || tok.find('_') != std::string::npos || stopwords.contains(tok)) continue;
      ++counts[tok];
    }
  }
  std::map<std::string, std::size_t> cluster_freq;
  for (const auto& [label, counts] : tf)
    for (const auto& [word, c] : counts) ++cluster_freq[word];
  const double n_clusters = static_cast<double>(tf.size());

  std::map<int, TopicName> out;
  for (const auto& [label, counts] : tf) {
    std::vector<std::pair<double, std::string>> scored;
    for (const auto& [word, c] : counts)
      scored.emplace_back(static_cast<double>(c) * std::log(1.0 + n_clusters / static_cast<double>(cluster_freq[word])), word);
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    TopicName name;
    name.name = std::to_string(label) + "_";
    for (std::size_t i = 0; i < scored.size() && i < options.k; ++i) {
      if (i) name.name += "_";
      name.name += scored[i].second;
      name.words.push_back(scored[i].second);
    }
    name.degenerate = name.words.empty();
    out[label] = std::move(name);
  }
  return out;
}

int TopicModel::assign(std::string_view text) const {
  const std::string t(text);
  return assign(std::span<const std::string>(&t, 1)).front();
}

std::vector<int> TopicModel::assign(std::span<const std::string> texts) const {
  if (!embedder) throw ModelError("topic model has no embedder");
  const auto vectors = embedder->embed(texts);
  std::vector<int> out;
  out.reserve(vectors.size());
  for (const auto& v : vectors) {
    int best = kOutlier;
    double best_d = std::numeric_limits<double>::infinity();
    const bool zero = std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
    if (!zero)
      for (const auto& [id, c] : centroids) {
        const double d = distance(v, c);
        if (d < best_d) {
          best_d = d;
          best = id;
        }
      }
    if (best != kOutlier && best_d > radius.at(best)) best = kOutlier;
    out.push_back(best);
  }
  return out;
}

nlohmann::json TopicModel::to_json() const {
  if (!embedder) throw ModelError("topic model has no embedder");
  nlohmann::json topics = nlohmann::json::array();
  for (const auto& [id, name] : names) {
    nlohmann::json t{{"id", id}, {"name", name.name}, {"words", name.words}, {"degenerate", name.degenerate}};
    if (auto c = centroids.find(id); c != centroids.end()) {
      t["centroid"] = c->second;
      t["radius"] = radius.at(id);
    }
    topics.push_back(std::move(t));
  }
  nlohmann::json body{{"params", {{"min_cluster_size", params.min_cluster_size}, {"min_samples", params.min_samples}}},
                      {"eps", eps},
                      {"labels", labels},
                      {"topics", std::move(topics)},
                      {"embedder", embedder->to_json()}};
  return {{"format", kFormat}, {"version", kVersion}, {"checksum", hex(body_checksum(body))}, {"body", std::move(body)}};
}

TopicModel TopicModel::from_json(const nlohmann::json& j) {
  using R = FormatError::Reason;
  const auto format = j.is_object() ? j.find("format") : j.end();
  if (!j.is_object() || format == j.end() || *format != kFormat)
    throw FormatError(R::bad_magic, "not a topic model document");
  const auto version = j.find("version");
  if (version == j.end() || *version != kVersion)
    throw FormatError(R::version_mismatch,
                      "unsupported topic model version " + (version == j.end() ? std::string("(none)") : version->dump()));
  try {
    const auto& body = j.at("body");
    if (j.at("checksum").get<std::string>() != hex(body_checksum(body)))
      throw FormatError(R::checksum_mismatch, "topic model checksum mismatch");
    TopicModel m;
    m.params = {body.at("params").at("min_cluster_size").get<std::size_t>(),
                body.at("params").at("min_samples").get<std::size_t>()};
    m.params.validate();
    m.eps = body.at("eps").get<double>();
    m.labels = body.at("labels").get<std::vector<int>>();
    for (const auto& t : body.at("topics")) {
      const int id = t.at("id").get<int>();
      m.names[id] = {t.at("name").get<std::string>(), t.at("words").get<std::vector<std::string>>(),
                     t.at("degenerate").get<bool>()};
      if (t.contains("centroid")) {
        m.centroids[id] = t.at("centroid").get<std::vector<double>>();
        m.radius[id] = t.at("radius").get<double>();
      }
    }
    m.embedder = embedder_from_json(body.at("embedder"));
    for (const auto& [id, c] : m.centroids)
      if (c.size() != m.embedder->dim()) throw FormatError(R::malformed, "centroid dimension does not match embedder");
    return m;
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(R::malformed, std::string("malformed topic model: ") + e.what());
  }
}

std::string TopicModel::serialize() const { return to_json().dump(); }

TopicModel TopicModel::deserialize(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const bool at_end = e.byte >= text.size();
    throw FormatError(at_end ? FormatError::Reason::truncated : FormatError::Reason::malformed,
                      std::string("topic model: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(FormatError::Reason::malformed, std::string("topic model: ") + e.what());
  }
  return from_json(j);
}

void TopicModel::save(const std::filesystem::path& path) const {
  const auto s = serialize();
  detail::write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

TopicModel TopicModel::load(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  return deserialize(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

TopicModel fit_topics(std::span<const std::string> texts, std::shared_ptr<Embedder> embedder,
                      std::span<const ClusterParams> grid, const NamingOptions& naming) {
  if (texts.empty()) throw DataError("fit_topics: empty corpus");
  if (grid.empty()) throw UsageError("fit_topics: empty parameter grid");
  if (!embedder) throw UsageError("fit_topics: no embedder");
  embedder->fit(texts);
  const auto vectors = embedder->embed(texts);

  TopicModel m;
  m.params = tune_params(vectors, grid);
  auto clustering = cluster(vectors, m.params);
  m.eps = clustering.eps;
  m.labels = std::move(clustering.labels);
  m.names = name_topics(texts, m.labels, naming);
  if (!m.names.contains(kOutlier)) m.names[kOutlier] = {std::to_string(kOutlier) + "_", {}, true};

  std::map<int, std::size_t> members;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const int l = m.labels[i];
    if (l == kOutlier) continue;
    auto& c = m.centroids[l];
    if (c.empty()) c.assign(embedder->dim(), 0.0);
    for (std::size_t d = 0; d < c.size(); ++d) c[d] += vectors[i][d];
    ++members[l];
  }
  for (auto& [l, c] : m.centroids)
    for (double& x : c) x /= static_cast<double>(members[l]);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const int l = m.labels[i];
    if (l == kOutlier) continue;
    m.radius[l] = std::max(m.radius[l], distance(vectors[i], m.centroids[l]));
  }
  m.embedder = std::move(embedder);
  return m;
}

std::string concat_topic(std::string_view text, const TopicModel& model, int label) {
  if (label == kOutlier) return std::string(text);
  const auto it = model.names.find(label);
  if (it == model.names.end()) throw DataError("unknown topic label " + std::to_string(label));
  std::string out = text::trim(text);
  if (!out.empty()) out += ' ';
  out += kTopicMarker;
  for (const auto& w : it->second.words) {
    out += ' ';
    out += w;
  }
  return out;
}

}  // namespace hatepipe
