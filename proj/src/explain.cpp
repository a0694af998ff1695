#include "hatepipe/explain.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "hatepipe/error.hpp"
#include "hatepipe/rng.hpp"
#include "hatepipe/text.hpp"

namespace hatepipe {

namespace {

std::string join_masked(const std::vector<std::string>& tokens, const std::vector<bool>& mask) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (mask[i]) {
      if (!out.empty()) out += ' ';
      out += tokens[i];
    }
  return out;
}

std::string html_escape(std::string_view s) {
  std::string out;
  for (char c : s) switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  return out;
}

}  // namespace

void ExplainConfig::validate() const {
  if (n_samples < 10) throw UsageError("explain: n_samples must be at least 10");
  if (n_features == 0) throw UsageError("explain: n_features must be at least 1");
  if (!(ridge_lambda > 0.0) || !std::isfinite(ridge_lambda)) throw UsageError("explain: ridge_lambda must be positive");
  if (kernel_width && !(*kernel_width > 0.0)) throw UsageError("explain: kernel_width must be positive");
  if (exhaustive_max_tokens > 20) throw UsageError("explain: exhaustive_max_tokens is capped at 20");
  if (max_parallel == 0) throw UsageError("explain: max_parallel must be at least 1");
}

std::vector<Perturbation> perturb(const std::vector<std::string>& tokens, std::size_t n, std::uint64_t seed) {
  if (tokens.empty()) throw DataError("perturb: no tokens");
  std::vector<Perturbation> out;
  out.reserve(n);
  Rng rng(seed);
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<bool> mask(tokens.size(), true);
    if (s > 0) {
      bool any = false;
      while (!any)
        for (std::size_t i = 0; i < mask.size(); ++i) any |= (mask[i] = rng.coin());
    }
    auto text = join_masked(tokens, mask);
    out.push_back({std::move(mask), std::move(text)});
  }
  return out;
}

std::vector<Perturbation> all_masks(const std::vector<std::string>& tokens) {
  const std::size_t k = tokens.size();
  if (k == 0 || k > 20) throw DataError("all_masks: token count must be in [1, 20]");
  const std::uint64_t full = (std::uint64_t{1} << k) - 1;
  std::vector<Perturbation> out;
  out.reserve(full);
  for (std::uint64_t m = full; m >= 1; --m) {
    std::vector<bool> mask(k);
    for (std::size_t i = 0; i < k; ++i) mask[i] = (m >> i) & 1;
    auto text = join_masked(tokens, mask);
    out.push_back({std::move(mask), std::move(text)});
  }
  return out;
}

Explanation lime_explain(const Classifier& model, std::string_view text, const std::string& cls,
                         const ExplainConfig& config) {
  config.validate();
  const auto& classes = model.classes();
  const auto cls_it = std::find(classes.begin(), classes.end(), cls);
  if (cls_it == classes.end()) throw UsageError("explain: class '" + cls + "' is not produced by the model");
  const auto cls_index = static_cast<std::size_t>(cls_it - classes.begin());

  const auto normalized = normalize(text, config.normalizer ? *config.normalizer : NormalizerConfig::defaults());
  const auto tokens = text::split_whitespace(normalized);
  if (tokens.empty()) throw DataError("explain: text is empty after normalization");
  const std::size_t k = tokens.size();

  const bool exhaustive = config.mode == MaskMode::exhaustive ||
                          (config.mode == MaskMode::automatic && k <= config.exhaustive_max_tokens);
  if (exhaustive && k > 20) throw UsageError("explain: exhaustive mode supports at most 20 tokens");
  const auto samples = exhaustive ? all_masks(tokens) : perturb(tokens, config.n_samples, config.seed);
  const std::size_t n = samples.size();

  std::vector<double> y(n);
  std::vector<std::string> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t s = next++; s < n; s = next++) {
      try {
        const auto p = model.predict_proba(samples[s].text);
        if (p.size() != classes.size()) throw ModelError("explain: model returned the wrong number of probabilities");
        y[s] = p[cls_index];
      } catch (const std::exception& e) {
        errors[s] = e.what();
      }
    }
  };
  const std::size_t n_threads = std::min(config.max_parallel, n);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (!e.empty()) throw ModelError("explain: model query failed: " + e);

  const double width = config.kernel_width.value_or(0.75 * std::sqrt(static_cast<double>(k)));
  Eigen::MatrixXd X(n, k);
  Eigen::VectorXd Y(n), w(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t kept = 0;
    for (std::size_t i = 0; i < k; ++i) {
      X(s, i) = samples[s].mask[i] ? 1.0 : 0.0;
      kept += samples[s].mask[i];
    }
    // Cosine distance to the all-ones mask.
    const double d = 1.0 - std::sqrt(static_cast<double>(kept) / static_cast<double>(k));
    w(s) = std::exp(-d * d / (width * width));
    Y(s) = y[s];
  }

  // Unpenalized intercept via weighted centering.
  const double wsum = w.sum();
  const Eigen::RowVectorXd x_mean = (w.transpose() * X) / wsum;
  const double y_mean = w.dot(Y) / wsum;
  const Eigen::MatrixXd Xc = X.rowwise() - x_mean;
  const Eigen::VectorXd Yc = Y.array() - y_mean;
  Eigen::MatrixXd A = Xc.transpose() * w.asDiagonal() * Xc;
  A.diagonal().array() += config.ridge_lambda;
  const Eigen::VectorXd b = Xc.transpose() * (w.asDiagonal() * Yc);
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) throw ModelError("explain: surrogate system is singular");
  const Eigen::VectorXd beta = ldlt.solve(b);
  if (!beta.allFinite()) throw ModelError("explain: surrogate solution is not finite");

  Explanation out;
  out.target_class = cls;
  out.text = normalized;
  out.intercept = y_mean - x_mean.dot(beta);
  out.local_prediction = out.intercept + beta.sum();
  out.model_probability = y[0];
  out.n_samples = n;
  out.exhaustive = exhaustive;
  std::vector<TokenWeight> all;
  for (std::size_t i = 0; i < k; ++i) all.push_back({tokens[i], i, beta(static_cast<Eigen::Index>(i))});
  std::stable_sort(all.begin(), all.end(),
                   [](const TokenWeight& a, const TokenWeight& b) { return std::abs(a.weight) > std::abs(b.weight); });
  all.resize(std::min(all.size(), config.n_features));
  out.token_weights = std::move(all);
  return out;
}

nlohmann::json Explanation::to_json() const {
  nlohmann::json tw = nlohmann::json::array();
  for (const auto& t : token_weights) tw.push_back({{"token", t.token}, {"position", t.position}, {"weight", t.weight}});
  return {{"target_class", target_class},
          {"text", text},
          {"token_weights", tw},
          {"intercept", intercept},
          {"local_prediction", local_prediction},
          {"model_probability", model_probability},
          {"n_samples", n_samples},
          {"mode", exhaustive ? "exhaustive" : "sampled"}};
}

std::string Explanation::to_html() const {
  const auto tokens = text::split_whitespace(text);
  std::vector<std::optional<double>> weight(tokens.size());
  double max_abs = 0.0;
  for (const auto& t : token_weights) {
    if (t.position < weight.size()) weight[t.position] = t.weight;
    max_abs = std::max(max_abs, std::abs(t.weight));
  }
  std::string out = "<div class=\"lime-explanation\" data-class=\"" + html_escape(target_class) + "\">\n<p>";
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    if (!weight[i] || max_abs == 0.0) {
      out += html_escape(tokens[i]);
      continue;
    }
    const double alpha = std::abs(*weight[i]) / max_abs;
    char style[96];
    std::snprintf(style, sizeof style, "background-color: rgba(%s, %.3f)",
                  *weight[i] > 0 ? "220, 50, 50" : "50, 90, 220", alpha);
    char title[48];
    std::snprintf(title, sizeof title, "%+.4f", *weight[i]);
    out += std::string("<span class=\"") + (*weight[i] > 0 ? "pos" : "neg") + "\" style=\"" + style + "\" title=\"" +
           title + "\">" + html_escape(tokens[i]) + "</span>";
  }
  out += "</p>\n</div>\n";
  return out;
}

}  // namespace hatepipe
