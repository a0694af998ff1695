#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hatepipe/corpus.hpp"
#include "hatepipe/model.hpp"
#include "hatepipe/topics.hpp"

namespace hatepipe {

struct ConfusionMatrix {
  std::vector<std::string> classes;
  std::vector<std::vector<std::size_t>> counts;  // [gold][predicted]

  std::size_t total() const;
  std::size_t trace() const;
  std::size_t index_of(const std::string& label) const;  // throws DataError
};

// Throws DataError on empty or mismatched input and on labels outside `classes`.
ConfusionMatrix confusion(std::span<const std::string> preds, std::span<const std::string> golds,
                          std::vector<std::string> classes);

struct ClassMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct EvaluationReport {
  double accuracy = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  std::optional<std::string> positive;  // set in binary mode
  std::vector<ClassMetrics> per_class;
  // Metrics whose denominator was zero, e.g. "precision" or "recall[Islam]".
  std::vector<std::string> degenerate;
  std::string dataset;
  std::string model;
  bool back_translation = false;
  bool topic_in_input = false;
  ConfusionMatrix confusion;

  nlohmann::json to_json() const;
};

// Binary mode with `positive`, otherwise macro-averaged one-vs-rest.
// Zero denominators give 0 and a degenerate entry.
EvaluationReport metrics(const ConfusionMatrix& cm, const std::optional<std::string>& positive = std::nullopt);

struct EvaluateOptions {
  const TopicModel* topic_model = nullptr;  // concatenates assigned topics before prediction
  std::optional<std::string> positive;
  std::string dataset;
  std::string model;
  bool back_translation = false;
};

EvaluationReport evaluate(const Classifier& model, std::span<const Sample> dataset, const EvaluateOptions& options = {});

// "Weighted Loss Threshold 3 & 75 & 76 & 59 & 66": integer percents.
std::string table_row(const std::string& model_name, const EvaluationReport& r);
// "Targets Annotated Parler &  & ✓ & 0.82 & 0.73 & 0.61 & 0.66": ticks for
// back translation and topic, two-decimal metrics without trailing zeros.
std::string table2_row(const EvaluationReport& r);

// Aligned plain-text tables in the column order of the LaTeX rows.
std::string render_table(const std::vector<std::pair<std::string, EvaluationReport>>& rows);
std::string render_table2(const std::vector<EvaluationReport>& rows);

// Helpers shared by the renderers.
int percent(double x);
std::string two_decimals(double x);

}  // namespace hatepipe
