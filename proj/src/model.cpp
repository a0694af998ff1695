#include "hatepipe/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "binio.hpp"
#include "hatepipe/text.hpp"

namespace hatepipe {

namespace {

constexpr char kMagic[] = "HSPM";
constexpr std::uint32_t kVersion = 1;

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](double x, double y) { return same_bits(x, y); });
}

std::uint32_t bucket(std::string_view key, const FeatureConfig& config) {
  return static_cast<std::uint32_t>(hash64(key, config.hash_seed) & (config.hash_dim - 1));
}

}  // namespace

void FeatureConfig::validate() const {
  if (hash_dim < (1u << 10) || hash_dim > (1u << 26) || !std::has_single_bit(hash_dim))
    throw UsageError("hash_dim must be a power of two in [2^10, 2^26], got " + std::to_string(hash_dim));
  if (word_orders.empty() && char_orders.empty()) throw UsageError("at least one n-gram order is required");
  for (auto n : word_orders)
    if (n == 0 || n > 8) throw UsageError("word n-gram orders must lie in [1, 8]");
  for (auto n : char_orders)
    if (n == 0 || n > 16) throw UsageError("char n-gram orders must lie in [1, 16]");
}

SparseVector featurize(std::string_view text, const FeatureConfig& config) {
  std::vector<std::uint32_t> hits;
  const auto tokens = text::split_whitespace(text);
  std::string key;
  for (auto n : config.word_orders) {
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      key = "w" + std::to_string(n);
      for (std::size_t j = i; j < i + n; ++j) {
        key.push_back('\x1f');
        key += tokens[j];
      }
      hits.push_back(bucket(key, config));
    }
  }
  if (!tokens.empty()) {
    const auto padded = text::to_u32(" " + text::join(tokens, " ") + " ");
    for (auto n : config.char_orders) {
      for (std::size_t i = 0; i + n <= padded.size(); ++i) {
        key = "c" + std::to_string(n) + "\x1f" + text::to_utf8(std::u32string_view(padded).substr(i, n));
        hits.push_back(bucket(key, config));
      }
    }
  }
  std::sort(hits.begin(), hits.end());
  SparseVector v;
  for (std::size_t i = 0; i < hits.size();) {
    std::size_t j = i;
    while (j < hits.size() && hits[j] == hits[i]) ++j;
    v.index.push_back(hits[i]);
    v.value.push_back(static_cast<double>(j - i));
    i = j;
  }
  double norm = 0.0;
  for (double x : v.value) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v.value) x /= norm;
  }
  return v;
}

std::map<std::string, double> class_weights(const std::map<std::string, std::size_t>& counts) {
  if (counts.empty()) throw DataError("class_weights: no classes");
  double total = 0.0;
  for (const auto& [label, n] : counts) {
    if (n == 0) throw DataError("class_weights: class '" + label + "' has no examples");
    total += static_cast<double>(n);
  }
  const double k = static_cast<double>(counts.size());
  std::map<std::string, double> out;
  for (const auto& [label, n] : counts) out[label] = total / (k * static_cast<double>(n));
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double m = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (double& x : p) sum += (x = std::exp(x - m));
  for (double& x : p) x /= sum;
  return p;
}

LossAndGrad weighted_ce_loss(std::span<const double> logits, std::size_t label, double weight) {
  if (label >= logits.size()) throw UsageError("weighted_ce_loss: label index out of range");
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - m);
  const double log_sum = std::log(sum);
  LossAndGrad out;
  out.loss = -weight * (logits[label] - m - log_sum);
  out.grad.resize(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) {
    const double p = std::exp(logits[k] - m - log_sum);
    out.grad[k] = weight * (p - (k == label ? 1.0 : 0.0));
  }
  return out;
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw UsageError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

void Hyperparams::validate() const {
  if (batch_size == 0) throw UsageError("batch_size must be positive");
  if (max_epochs == 0) throw UsageError("max_epochs must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw UsageError("learning_rate must be positive");
  if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) || !(adam_beta2 > 0.0 && adam_beta2 < 1.0))
    throw UsageError("adam betas must lie in (0, 1)");
  if (!(adam_eps > 0.0)) throw UsageError("adam_eps must be positive");
  if (early_stop_patience == 0) throw UsageError("early_stop_patience must be positive");
  if (class_weight_override)
    for (const auto& [label, w] : *class_weight_override)
      if (!(w > 0.0) || !std::isfinite(w)) throw UsageError("class weight for '" + label + "' must be positive");
}

bool EpochLog::operator==(const EpochLog& o) const {
  return epoch == o.epoch && same_bits(train_loss, o.train_loss) && same_bits(train_accuracy, o.train_accuracy) &&
         same_bits(val_loss, o.val_loss) && same_bits(val_accuracy, o.val_accuracy);
}

Prediction Classifier::predict(std::string_view normalized_text) const {
  Prediction out;
  out.probs = predict_proba(normalized_text);
  if (out.probs.size() != classes().size())
    throw ModelError("classifier returned " + std::to_string(out.probs.size()) + " probabilities for " +
                     std::to_string(classes().size()) + " classes");
  out.index = argmax(out.probs);
  out.label = classes()[out.index];
  return out;
}

TrainedClassifier::TrainedClassifier(std::vector<std::string> classes, FeatureConfig features)
    : classes_(std::move(classes)), features_(std::move(features)) {
  features_.validate();
  weights_.assign(classes_.size() * features_.hash_dim, 0.0);
  bias_.assign(classes_.size(), 0.0);
  validate();
}

std::vector<double> TrainedClassifier::logits(const SparseVector& x) const {
  const std::size_t dim = features_.hash_dim;
  std::vector<double> z(bias_);
  for (std::size_t k = 0; k < classes_.size(); ++k) {
    const double* row = weights_.data() + k * dim;
    double acc = 0.0;
    for (std::size_t j = 0; j < x.index.size(); ++j) acc += row[x.index[j]] * x.value[j];
    z[k] += acc;
  }
  return z;
}

std::vector<double> TrainedClassifier::predict_proba(std::string_view normalized_text) const {
  return softmax(logits(featurize(normalized_text, features_)));
}

void TrainedClassifier::validate() const {
  if (classes_.empty()) throw ModelError("model has no classes");
  if (std::set<std::string>(classes_.begin(), classes_.end()).size() != classes_.size())
    throw ModelError("model class list contains duplicates");
  if (weights_.size() != classes_.size() * features_.hash_dim || bias_.size() != classes_.size())
    throw ModelError("model weight shape does not match its class list and feature config");
  for (double w : weights_)
    if (!std::isfinite(w)) throw ModelError("model weights contain NaN or Inf");
  for (double b : bias_)
    if (!std::isfinite(b)) throw ModelError("model bias contains NaN or Inf");
}

bool TrainedClassifier::operator==(const TrainedClassifier& o) const {
  return classes_ == o.classes_ && features_ == o.features_ && same_bits(weights_, o.weights_) &&
         same_bits(bias_, o.bias_) && training_log == o.training_log && metadata == o.metadata;
}

bool EarlyStopper::observe(double val_loss) {
  ++epoch_;
  if (best_epoch_ == 0 || val_loss < best_) {
    best_ = val_loss;
    best_epoch_ = epoch_;
    stale_ = 0;
    return true;
  }
  ++stale_;
  return false;
}

DatasetLoss dataset_loss(const TrainedClassifier& model, std::span<const Sample> data,
                         const std::map<std::string, double>& weights) {
  if (data.empty()) return {std::nan(""), std::nan("")};
  const auto& classes = model.classes();
  double loss = 0.0;
  std::size_t correct = 0;
  for (const auto& e : data) {
    const auto it = std::find(classes.begin(), classes.end(), e.label);
    if (it == classes.end()) throw DataError("label '" + e.label + "' is not a model class");
    const auto y = static_cast<std::size_t>(it - classes.begin());
    const auto z = model.logits(featurize(e.text, model.features()));
    const auto w = weights.find(e.label);
    loss += weighted_ce_loss(z, y, w == weights.end() ? 1.0 : w->second).loss;
    if (argmax(z) == y) ++correct;
  }
  const double n = static_cast<double>(data.size());
  return {loss / n, static_cast<double>(correct) / n};
}

TrainedClassifier train(std::span<const Sample> train_set, std::span<const Sample> val_set, const Hyperparams& hp,
                        const FeatureConfig& fc, const TrainOptions& options) {
  hp.validate();
  fc.validate();
  if (train_set.empty()) throw DataError("train: empty training set");

  std::vector<std::string> classes = options.classes;
  if (classes.empty()) {
    std::set<std::string> seen;
    for (const auto& e : train_set) seen.insert(e.label);
    classes.assign(seen.begin(), seen.end());
  }
  auto index_of = [&](const std::string& label) {
    const auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) throw DataError("label '" + label + "' is not in the class list");
    return static_cast<std::size_t>(it - classes.begin());
  };
  for (const auto& e : val_set) index_of(e.label);

  std::map<std::string, double> weight_of;
  if (hp.class_weight_override) {
    weight_of = *hp.class_weight_override;
    for (const auto& c : classes)
      if (!weight_of.contains(c)) throw UsageError("class weight override is missing class '" + c + "'");
  } else if (hp.weighted_loss) {
    std::map<std::string, std::size_t> counts;
    for (const auto& c : classes) counts[c] = 0;
    for (const auto& e : train_set) ++counts[e.label];
    weight_of = class_weights(counts);
  } else {
    for (const auto& c : classes) weight_of[c] = 1.0;
  }

  const std::size_t n = train_set.size();
  const std::size_t k_classes = classes.size();
  const std::size_t dim = fc.hash_dim;
  std::vector<SparseVector> x(n);
  std::vector<std::size_t> y(n);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = featurize(train_set[i].text, fc);
    y[i] = index_of(train_set[i].label);
    w[i] = weight_of.at(train_set[i].label);
  }

  TrainedClassifier model(classes, fc);
  auto& W = model.weights();
  auto& b = model.bias();

  std::vector<double> gW(k_classes * dim, 0.0), gb(k_classes, 0.0);
  std::vector<double> mW, vW, mb, vb;
  if (hp.optimizer == Optimizer::adam) {
    mW.assign(W.size(), 0.0);
    vW.assign(W.size(), 0.0);
    mb.assign(k_classes, 0.0);
    vb.assign(k_classes, 0.0);
  }
  // Columns that have ever received a gradient. Adam moments of all other
  // columns are zero, so skipping them leaves the update unchanged.
  std::vector<char> touched(dim, 0);
  std::vector<std::uint32_t> touched_cols;
  std::vector<std::uint32_t> batch_cols;
  std::vector<char> in_batch(dim, 0);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(hp.seed);
  EarlyStopper stopper(hp.early_stop_patience);
  std::optional<TrainedClassifier> best;
  std::vector<EpochLog> log;
  std::uint64_t step = 0;

  for (std::size_t epoch = 1; epoch <= hp.max_epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += hp.batch_size) {
      const std::size_t end = std::min(n, start + hp.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      double batch_loss = 0.0;
      batch_cols.clear();
      for (std::size_t p = start; p < end; ++p) {
        const std::size_t i = order[p];
        const auto lg = weighted_ce_loss(model.logits(x[i]), y[i], w[i]);
        batch_loss += lg.loss * scale;
        for (std::size_t k = 0; k < k_classes; ++k) {
          const double g = lg.grad[k] * scale;
          gb[k] += g;
          double* row = gW.data() + k * dim;
          for (std::size_t j = 0; j < x[i].index.size(); ++j) row[x[i].index[j]] += g * x[i].value[j];
        }
        for (auto col : x[i].index) {
          if (!in_batch[col]) {
            in_batch[col] = 1;
            batch_cols.push_back(col);
          }
          if (!touched[col]) {
            touched[col] = 1;
            touched_cols.push_back(col);
          }
        }
      }
      if (!std::isfinite(batch_loss))
        throw ModelError("training diverged at epoch " + std::to_string(epoch) + ", batch starting at " +
                         std::to_string(start) + ": loss is not finite (lower the learning rate)");

      if (hp.optimizer == Optimizer::sgd) {
        for (auto col : batch_cols)
          for (std::size_t k = 0; k < k_classes; ++k) W[k * dim + col] -= hp.learning_rate * gW[k * dim + col];
        for (std::size_t k = 0; k < k_classes; ++k) b[k] -= hp.learning_rate * gb[k];
      } else {
        ++step;
        const double bc1 = 1.0 - std::pow(hp.adam_beta1, static_cast<double>(step));
        const double bc2 = 1.0 - std::pow(hp.adam_beta2, static_cast<double>(step));
        auto update = [&](double& param, double& m, double& v, double g) {
          m = hp.adam_beta1 * m + (1.0 - hp.adam_beta1) * g;
          v = hp.adam_beta2 * v + (1.0 - hp.adam_beta2) * g * g;
          param -= hp.learning_rate * (m / bc1) / (std::sqrt(v / bc2) + hp.adam_eps);
        };
        for (auto col : touched_cols)
          for (std::size_t k = 0; k < k_classes; ++k) {
            const std::size_t at = k * dim + col;
            update(W[at], mW[at], vW[at], gW[at]);
          }
        for (std::size_t k = 0; k < k_classes; ++k) update(b[k], mb[k], vb[k], gb[k]);
      }

      for (auto col : batch_cols) {
        in_batch[col] = 0;
        for (std::size_t k = 0; k < k_classes; ++k) gW[k * dim + col] = 0.0;
      }
      std::fill(gb.begin(), gb.end(), 0.0);
    }

    EpochLog entry;
    entry.epoch = static_cast<std::uint32_t>(epoch);
    const auto tr = dataset_loss(model, train_set, weight_of);
    const auto va = dataset_loss(model, val_set, weight_of);
    entry.train_loss = tr.loss;
    entry.train_accuracy = tr.accuracy;
    entry.val_loss = va.loss;
    entry.val_accuracy = va.accuracy;
    if (!std::isfinite(entry.train_loss))
      throw ModelError("training diverged at epoch " + std::to_string(epoch) + ": training loss is not finite");
    log.push_back(entry);
    if (options.on_epoch) options.on_epoch(entry, model);

    if (!val_set.empty()) {
      if (stopper.observe(entry.val_loss)) best = model;
      if (stopper.stop()) break;
    }
  }

  TrainedClassifier result = best ? std::move(*best) : std::move(model);
  result.training_log = std::move(log);
  result.metadata["optimizer"] = hp.optimizer == Optimizer::adam ? "adam" : "sgd";
  result.metadata["weighted_loss"] = hp.weighted_loss || hp.class_weight_override ? "true" : "false";
  if (!val_set.empty()) result.metadata["best_epoch"] = std::to_string(stopper.best_epoch());
  result.validate();
  return result;
}

std::vector<std::uint8_t> to_bytes(const TrainedClassifier& model) {
  model.validate();
  detail::ByteWriter w;
  const auto& fc = model.features();
  w.u32(fc.hash_dim);
  w.u32(static_cast<std::uint32_t>(fc.word_orders.size()));
  for (auto n : fc.word_orders) w.u32(n);
  w.u32(static_cast<std::uint32_t>(fc.char_orders.size()));
  for (auto n : fc.char_orders) w.u32(n);
  w.u64(fc.hash_seed);
  w.u32(static_cast<std::uint32_t>(model.classes().size()));
  for (const auto& c : model.classes()) w.str(c);
  w.u32(static_cast<std::uint32_t>(model.metadata.size()));
  for (const auto& [key, value] : model.metadata) {
    w.str(key);
    w.str(value);
  }
  w.u32(static_cast<std::uint32_t>(model.training_log.size()));
  for (const auto& e : model.training_log) {
    w.u32(e.epoch);
    w.f64(e.train_loss);
    w.f64(e.train_accuracy);
    w.f64(e.val_loss);
    w.f64(e.val_accuracy);
  }
  for (double x : model.weights()) w.f64(x);
  for (double x : model.bias()) w.f64(x);
  return detail::frame(std::string_view(kMagic, 4), kVersion, w.bytes());
}

TrainedClassifier from_bytes(std::span<const std::uint8_t> bytes) {
  const auto payload = detail::unframe(bytes, std::string_view(kMagic, 4), kVersion, "model");
  detail::ByteReader r(payload);
  FeatureConfig fc;
  fc.hash_dim = r.u32();
  fc.word_orders.resize(r.count(4));
  for (auto& n : fc.word_orders) n = r.u32();
  fc.char_orders.resize(r.count(4));
  for (auto& n : fc.char_orders) n = r.u32();
  fc.hash_seed = r.u64();
  std::vector<std::string> classes(r.count(4));
  for (auto& c : classes) c = r.str();
  if (static_cast<std::uint64_t>(classes.size()) * fc.hash_dim * 8 > r.remaining())
    throw FormatError(FormatError::Reason::malformed, "model: weight block exceeds file size");

  try {
    TrainedClassifier model(std::move(classes), fc);
    const auto n_meta = r.count(8);
    for (std::size_t i = 0; i < n_meta; ++i) {
      auto key = r.str();
      model.metadata[key] = r.str();
    }
    model.training_log.resize(r.count(36));
    for (auto& e : model.training_log) {
      e.epoch = r.u32();
      e.train_loss = r.f64();
      e.train_accuracy = r.f64();
      e.val_loss = r.f64();
      e.val_accuracy = r.f64();
    }
    if (r.remaining() != (model.weights().size() + model.bias().size()) * 8)
      throw FormatError(FormatError::Reason::malformed, "model: weight block size does not match header");
    for (double& x : model.weights()) x = r.f64();
    for (double& x : model.bias()) x = r.f64();
    model.validate();
    return model;
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(FormatError::Reason::malformed, std::string("model: ") + e.what());
  }
}

void save(const TrainedClassifier& model, const std::filesystem::path& path) {
  detail::write_file_atomic(path, to_bytes(model));
}

TrainedClassifier load_model(const std::filesystem::path& path) { return from_bytes(detail::read_file_bytes(path)); }

}  // namespace hatepipe
