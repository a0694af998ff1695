#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hatepipe/corpus.hpp"

namespace hatepipe {

struct FeatureConfig {
  std::uint32_t hash_dim = 1u << 18;
  std::vector<std::uint32_t> word_orders{1, 2};
  std::vector<std::uint32_t> char_orders{3, 4, 5};
  std::uint64_t hash_seed = 0;

  // Throws UsageError unless hash_dim is a power of two in [2^10, 2^26] and
  // at least one order is set.
  void validate() const;
  bool operator==(const FeatureConfig&) const = default;
};

// Sorted, duplicate-free indices.
struct SparseVector {
  std::vector<std::uint32_t> index;
  std::vector<double> value;

  bool empty() const { return index.empty(); }
  bool operator==(const SparseVector&) const = default;
};

// Hashed word and character n-gram counts, L2-normalized. Word n-grams split
// on whitespace; character n-grams run over code points of " " + text + " ".
SparseVector featurize(std::string_view text, const FeatureConfig& config);

// w_c = N / (K * N_c). Throws DataError on an empty map or a zero count.
std::map<std::string, double> class_weights(const std::map<std::string, std::size_t>& counts);

struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d logits
};

// -w * log softmax(logits)[label], computed with max subtraction.
LossAndGrad weighted_ce_loss(std::span<const double> logits, std::size_t label, double weight);

std::vector<double> softmax(std::span<const double> logits);

// Lowest index wins ties.
std::size_t argmax(std::span<const double> values);

enum class Optimizer { adam, sgd };

struct Hyperparams {
  std::size_t batch_size = 8;
  std::size_t max_epochs = 10;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t early_stop_patience = 2;
  bool weighted_loss = false;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::adam;
  // Explicit per-class weights; when set, takes precedence over weighted_loss.
  std::optional<std::map<std::string, double>> class_weight_override;

  void validate() const;
};

struct EpochLog {
  std::uint32_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;      // NaN when there is no validation set
  double val_accuracy = 0.0;  // NaN when there is no validation set

  bool operator==(const EpochLog& o) const;
};

struct Prediction {
  std::size_t index = 0;
  std::string label;
  std::vector<double> probs;
};

// Any model mapping normalized text to a distribution over a fixed class list.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual const std::vector<std::string>& classes() const = 0;
  virtual std::vector<double> predict_proba(std::string_view normalized_text) const = 0;

  Prediction predict(std::string_view normalized_text) const;
};

class TrainedClassifier final : public Classifier {
 public:
  TrainedClassifier() = default;
  TrainedClassifier(std::vector<std::string> classes, FeatureConfig features);

  const std::vector<std::string>& classes() const override { return classes_; }
  std::vector<double> predict_proba(std::string_view normalized_text) const override;

  std::vector<double> logits(const SparseVector& x) const;

  const FeatureConfig& features() const { return features_; }
  // Row-major, classes x hash_dim.
  std::vector<double>& weights() { return weights_; }
  const std::vector<double>& weights() const { return weights_; }
  std::vector<double>& bias() { return bias_; }
  const std::vector<double>& bias() const { return bias_; }

  std::vector<EpochLog> training_log;
  // Free-form provenance such as task, threshold and augmentation flags.
  std::map<std::string, std::string> metadata;

  // Throws ModelError if the class list is empty or duplicated, the weight
  // shapes disagree, or any parameter is not finite.
  void validate() const;

  bool operator==(const TrainedClassifier&) const;

 private:
  std::vector<std::string> classes_;
  FeatureConfig features_;
  std::vector<double> weights_;
  std::vector<double> bias_;
};

// Tracks validation loss; stop() once `patience` epochs pass without a strict
// improvement over the best seen.
class EarlyStopper {
 public:
  explicit EarlyStopper(std::size_t patience) : patience_(patience) {}

  // Returns true when this epoch is the new best.
  bool observe(double val_loss);
  bool stop() const { return stale_ >= patience_; }
  std::size_t best_epoch() const { return best_epoch_; }  // 1-based, 0 before any observation
  double best_loss() const { return best_; }

 private:
  std::size_t patience_;
  std::size_t epoch_ = 0;
  std::size_t best_epoch_ = 0;
  std::size_t stale_ = 0;
  double best_ = 0.0;
};

struct TrainOptions {
  // Fixes the class order; defaults to the sorted labels of the training set.
  std::vector<std::string> classes;
  // Called after each epoch with the log entry and the current model.
  std::function<void(const EpochLog&, const TrainedClassifier&)> on_epoch;
};

// Mini-batch training of a multinomial logistic regression on hashed
// features. With a non-empty validation set the best-validation-loss
// snapshot is returned. Throws ModelError when the loss diverges.
TrainedClassifier train(std::span<const Sample> train_set, std::span<const Sample> val_set, const Hyperparams& hp,
                        const FeatureConfig& fc, const TrainOptions& options = {});

// Mean weighted cross-entropy and accuracy of a model over a dataset.
struct DatasetLoss {
  double loss = 0.0;
  double accuracy = 0.0;
};
DatasetLoss dataset_loss(const TrainedClassifier& model, std::span<const Sample> data,
                         const std::map<std::string, double>& weights);

std::vector<std::uint8_t> to_bytes(const TrainedClassifier& model);
TrainedClassifier from_bytes(std::span<const std::uint8_t> bytes);

void save(const TrainedClassifier& model, const std::filesystem::path& path);
TrainedClassifier load_model(const std::filesystem::path& path);

// Adapter for an external model server. POST {"text": ...} to `url` must
// return {"probs": [...]} in the order of `classes`.
class HttpClassifier final : public Classifier {
 public:
  HttpClassifier(std::string url, std::vector<std::string> classes, double timeout_seconds = 10.0);

  const std::vector<std::string>& classes() const override { return classes_; }
  std::vector<double> predict_proba(std::string_view normalized_text) const override;

 private:
  std::string host_;
  std::string path_;
  std::vector<std::string> classes_;
  double timeout_;
};

}  // namespace hatepipe
