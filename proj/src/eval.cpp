#include "hatepipe/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "hatepipe/text.hpp"

namespace hatepipe {

namespace {

double ratio(std::size_t num, std::size_t den, const std::string& name, std::vector<std::string>& degenerate) {
  if (den == 0) {
    degenerate.push_back(name);
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

std::size_t display_width(const std::string& s) { return text::to_u32(s).size(); }

std::string render(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (width.size() <= c) width.push_back(0);
      width[c] = std::max(width[c], display_width(row[c]));
    }
  std::string out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::string line;
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (c) line += " | ";
      line += rows[r][c];
      if (c + 1 < rows[r].size()) line.append(width[c] - display_width(rows[r][c]), ' ');
    }
    out += line + "\n";
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      out += std::string(total + 3 * (width.size() - 1), '-') + "\n";
    }
  }
  return out;
}

}  // namespace

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (const auto& row : counts)
    for (auto c : row) t += c;
  return t;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t t = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
  return t;
}

std::size_t ConfusionMatrix::index_of(const std::string& label) const {
  const auto it = std::find(classes.begin(), classes.end(), label);
  if (it == classes.end()) throw DataError("label '" + label + "' is not one of the evaluated classes");
  return static_cast<std::size_t>(it - classes.begin());
}

ConfusionMatrix confusion(std::span<const std::string> preds, std::span<const std::string> golds,
                          std::vector<std::string> classes) {
  if (preds.empty()) throw DataError("confusion: no predictions");
  if (preds.size() != golds.size()) throw DataError("confusion: predictions and gold labels differ in length");
  if (classes.empty()) throw DataError("confusion: empty class list");
  ConfusionMatrix cm;
  cm.classes = std::move(classes);
  cm.counts.assign(cm.classes.size(), std::vector<std::size_t>(cm.classes.size(), 0));
  for (std::size_t i = 0; i < preds.size(); ++i) ++cm.counts[cm.index_of(golds[i])][cm.index_of(preds[i])];
  return cm;
}

EvaluationReport metrics(const ConfusionMatrix& cm, const std::optional<std::string>& positive) {
  EvaluationReport r;
  r.confusion = cm;
  const std::size_t k = cm.classes.size();
  const std::size_t total = cm.total();
  r.accuracy = ratio(cm.trace(), total, "accuracy", r.degenerate);

  for (std::size_t c = 0; c < k; ++c) {
    std::size_t tp = cm.counts[c][c], predicted = 0, support = 0;
    for (std::size_t o = 0; o < k; ++o) {
      predicted += cm.counts[o][c];
      support += cm.counts[c][o];
    }
    ClassMetrics m;
    m.label = cm.classes[c];
    m.support = support;
    std::vector<std::string> flags;
    m.precision = ratio(tp, predicted, "precision[" + m.label + "]", flags);
    m.recall = ratio(tp, support, "recall[" + m.label + "]", flags);
    m.f1 = harmonic(m.precision, m.recall);
    if (!positive) r.degenerate.insert(r.degenerate.end(), flags.begin(), flags.end());
    r.per_class.push_back(std::move(m));
  }

  if (positive) {
    const auto p = cm.index_of(*positive);
    r.positive = positive;
    std::size_t predicted = 0, support = 0;
    for (std::size_t o = 0; o < k; ++o) {
      predicted += cm.counts[o][p];
      support += cm.counts[p][o];
    }
    r.precision = ratio(cm.counts[p][p], predicted, "precision", r.degenerate);
    r.recall = ratio(cm.counts[p][p], support, "recall", r.degenerate);
    r.f1 = harmonic(r.precision, r.recall);
  } else {
    for (const auto& m : r.per_class) {
      r.precision += m.precision;
      r.recall += m.recall;
      r.f1 += m.f1;
    }
    r.precision /= static_cast<double>(k);
    r.recall /= static_cast<double>(k);
    r.f1 /= static_cast<double>(k);
  }
  return r;
}

EvaluationReport evaluate(const Classifier& model, std::span<const Sample> dataset, const EvaluateOptions& options) {
  if (dataset.empty()) throw DataError("evaluate: empty dataset");
  std::vector<std::string> preds, golds;
  preds.reserve(dataset.size());
  golds.reserve(dataset.size());
  for (const auto& e : dataset) {
    const std::string input = options.topic_model
                                  ? concat_topic(e.text, *options.topic_model, options.topic_model->assign(e.text))
                                  : e.text;
    preds.push_back(model.predict(input).label);
    golds.push_back(e.label);
  }
  auto r = metrics(confusion(preds, golds, model.classes()), options.positive);
  r.dataset = options.dataset;
  r.model = options.model;
  r.back_translation = options.back_translation;
  r.topic_in_input = options.topic_model != nullptr;
  return r;
}

nlohmann::json EvaluationReport::to_json() const {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& m : per_class)
    per.push_back({{"label", m.label}, {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}});
  return {{"dataset", dataset},
          {"model", model},
          {"mode", positive ? "binary" : "macro"},
          {"positive", positive ? nlohmann::json(*positive) : nlohmann::json()},
          {"accuracy", accuracy},
          {"recall", recall},
          {"precision", precision},
          {"f1", f1},
          {"back_translation", back_translation},
          {"topic_in_input", topic_in_input},
          {"degenerate", degenerate},
          {"per_class", per},
          {"confusion", {{"classes", confusion.classes}, {"counts", confusion.counts}}}};
}

int percent(double x) { return static_cast<int>(std::floor(x * 100.0 + 0.5 + 1e-9)); }

std::string two_decimals(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", std::floor(x * 100.0 + 0.5 + 1e-9) / 100.0);
  std::string s(buf);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

std::string table_row(const std::string& model_name, const EvaluationReport& r) {
  return model_name + " & " + std::to_string(percent(r.accuracy)) + " & " + std::to_string(percent(r.recall)) + " & " +
         std::to_string(percent(r.precision)) + " & " + std::to_string(percent(r.f1));
}

std::string table2_row(const EvaluationReport& r) {
  return r.dataset + " & " + (r.back_translation ? "✓" : "") + " & " + (r.topic_in_input ? "✓" : "") + " & " +
         two_decimals(r.accuracy) + " & " + two_decimals(r.recall) + " & " + two_decimals(r.precision) + " & " +
         two_decimals(r.f1);
}

std::string render_table(const std::vector<std::pair<std::string, EvaluationReport>>& rows) {
  std::vector<std::vector<std::string>> cells{{"Model", "Accuracy", "Recall", "Precision", "F1"}};
  for (const auto& [name, r] : rows)
    cells.push_back({name, std::to_string(percent(r.accuracy)), std::to_string(percent(r.recall)),
                     std::to_string(percent(r.precision)), std::to_string(percent(r.f1))});
  return render(cells);
}

std::string render_table2(const std::vector<EvaluationReport>& rows) {
  std::vector<std::vector<std::string>> cells{
      {"Evaluation dataset", "Back Translation", "Topic in input", "Accuracy", "Recall", "Precision", "F1"}};
  for (const auto& r : rows)
    cells.push_back({r.dataset, r.back_translation ? "✓" : "", r.topic_in_input ? "✓" : "", two_decimals(r.accuracy),
                     two_decimals(r.recall), two_decimals(r.precision), two_decimals(r.f1)});
  return render(cells);
}

}  // namespace hatepipe
