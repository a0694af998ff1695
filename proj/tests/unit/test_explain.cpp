#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>

#include "hatepipe/error.hpp"
#include "hatepipe/explain.hpp"
#include "hatepipe/rng.hpp"
#include "hatepipe/text.hpp"
#include "support/lime_oracle.hpp"

using namespace hatepipe;

namespace {

class KeywordModel final : public Classifier {
 public:
  explicit KeywordModel(std::string keyword) : keyword_(std::move(keyword)) {}
  const std::vector<std::string>& classes() const override { return classes_; }
  std::vector<double> predict_proba(std::string_view t) const override {
    ++calls;
    const auto tokens = text::split_whitespace(t);
    const bool hit = std::find(tokens.begin(), tokens.end(), keyword_) != tokens.end();
    return hit ? std::vector<double>{0.1, 0.9} : std::vector<double>{0.9, 0.1};
  }
  mutable std::atomic<std::size_t> calls{0};

 private:
  std::string keyword_;
  std::vector<std::string> classes_{"Other", "Jewish"};
};

class ConstantModel final : public Classifier {
 public:
  const std::vector<std::string>& classes() const override { return classes_; }
  std::vector<double> predict_proba(std::string_view) const override { return {0.3, 0.7}; }

 private:
  std::vector<std::string> classes_{"normal", "hate"};
};

const std::vector<std::string> kFiller{"alpha", "bravo", "charlie", "delta", "echo", "foxtrot",
                                       "golf", "hotel", "india", "juliet", "kilo", "lima"};

// Text of 2..10 tokens with "jews" at a random position and no other copy.
// One token admits a single non-empty mask, which leaves its weight unidentified.
std::string keyword_text(Rng& rng) {
  const std::size_t k = 2 + rng.index(9);
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < k; ++i) tokens.push_back(kFiller[rng.index(kFiller.size())]);
  tokens[rng.index(k)] = "jews";
  return text::join(tokens, " ");
}

}  // namespace

TEST_CASE("perturb") {
  const std::vector<std::string> one{"x"};
  for (const auto& p : perturb(one, 20, 1)) CHECK(p.mask == std::vector<bool>{true});
  const std::vector<std::string> toks{"a", "b", "c", "d", "e"};
  const auto ps = perturb(toks, 200, 7);
  CHECK(ps.size() == 200);
  CHECK(ps[0].text == "a b c d e");
  CHECK(ps[0].mask == std::vector<bool>(5, true));
  for (const auto& p : ps) {
    CHECK(std::count(p.mask.begin(), p.mask.end(), true) >= 1);
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < toks.size(); ++i)
      if (p.mask[i]) kept.push_back(toks[i]);
    CHECK(p.text == text::join(kept, " "));
  }
  const auto again = perturb(toks, 200, 7);
  for (std::size_t i = 0; i < ps.size(); ++i) CHECK(again[i].mask == ps[i].mask);
  CHECK_THROWS_AS(perturb({}, 5, 1), DataError);

  const auto all = all_masks(toks);
  CHECK(all.size() == 31);
  CHECK(all[0].mask == std::vector<bool>(5, true));
  std::set<std::vector<bool>> distinct;
  for (const auto& p : all) distinct.insert(p.mask);
  CHECK(distinct.size() == 31);
}

TEST_CASE("constant model gives zero weights") {
  ExplainConfig cfg;
  for (auto mode : {MaskMode::sampled, MaskMode::exhaustive}) {
    cfg.mode = mode;
    const auto e = lime_explain(ConstantModel(), "they are all the same to me", "hate", cfg);
    CHECK(e.token_weights.size() == 6);
    for (const auto& t : e.token_weights) CHECK(std::abs(t.weight) <= 1e-6);
    CHECK(e.intercept == doctest::Approx(0.7).epsilon(1e-12));
  }
}

TEST_CASE("exhaustive mode matches an independent ridge solve") {
  Rng rng(11);
  const KeywordModel model("jews");
  ExplainConfig cfg;
  cfg.mode = MaskMode::exhaustive;
  cfg.n_features = 100;
  for (int trial = 0; trial < 10; ++trial) {
    const auto text = keyword_text(rng);
    const auto tokens = text::split_whitespace(text);
    const auto e = lime_explain(model, text, "Jewish", cfg);
    const double k = static_cast<double>(tokens.size());
    const double width = 0.75 * std::sqrt(k);
    std::vector<std::vector<double>> x;
    std::vector<double> y, w;
    for (const auto& p : all_masks(tokens)) {
      std::vector<double> row(p.mask.begin(), p.mask.end());
      const double kept = static_cast<double>(std::count(p.mask.begin(), p.mask.end(), true));
      const double d = 1.0 - kept / std::sqrt(kept * k);
      x.push_back(row);
      w.push_back(std::exp(-d * d / (width * width)));
      y.push_back(model.predict_proba(p.text)[1]);
    }
    const auto [intercept, beta] = testing::ridge_oracle(x, y, w, 1.0);
    CHECK(e.intercept == doctest::Approx(intercept).epsilon(1e-9));
    REQUIRE(e.token_weights.size() == tokens.size());
    for (const auto& t : e.token_weights) {
      CHECK(t.token == tokens[t.position]);
      CHECK(t.weight == doctest::Approx(beta[t.position]).epsilon(1e-9));
    }
  }
}

TEST_CASE("keyword model ranks the keyword first") {
  Rng rng(12);
  const KeywordModel model("jews");
  std::size_t exhaustive_hits = 0, sampled_hits = 0;
  double worst_gap = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto text = keyword_text(rng);
    ExplainConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(trial);
    cfg.mode = MaskMode::exhaustive;
    const auto ex = lime_explain(model, text, "Jewish", cfg);
    exhaustive_hits += ex.token_weights[0].token == "jews" && ex.token_weights[0].weight > 0;
    cfg.mode = MaskMode::sampled;
    const auto sm = lime_explain(model, text, "Jewish", cfg);
    sampled_hits += sm.token_weights[0].token == "jews" && sm.token_weights[0].weight > 0;
    // Full-text surrogate vs model.
    worst_gap = std::max(worst_gap, std::abs(sm.local_prediction - sm.model_probability));
    CHECK(sm.model_probability == 0.9);
    for (const auto& t : sm.token_weights) CHECK(text.find(t.token) != std::string::npos);
  }
  CHECK(exhaustive_hits == 50);
  CHECK(sampled_hits >= 48);
  CHECK(worst_gap <= 0.15);

  ExplainConfig cfg;
  cfg.mode = MaskMode::exhaustive;
  const auto single = lime_explain(model, "jews", "Jewish", cfg);
  CHECK(single.token_weights.size() == 1);
  CHECK(single.token_weights[0].weight == 0.0);
  CHECK(single.intercept == doctest::Approx(0.9));
}

TEST_CASE("determinism, ordering and parallel queries") {
  const KeywordModel model("jews");
  ExplainConfig cfg;
  cfg.seed = 5;
  const std::string text = "Jews have a monopoly on evil and more words here to pad it out";
  const auto a = lime_explain(model, text, "Jewish", cfg);
  const auto b = lime_explain(model, text, "Jewish", cfg);
  CHECK(a.token_weights == b.token_weights);
  CHECK(a.intercept == b.intercept);
  CHECK(a.token_weights[0].token == "jews");
  CHECK(a.token_weights.size() == 6);
  for (std::size_t i = 1; i < a.token_weights.size(); ++i)
    CHECK(std::abs(a.token_weights[i - 1].weight) >= std::abs(a.token_weights[i].weight));
  cfg.max_parallel = 4;
  const auto c = lime_explain(model, text, "Jewish", cfg);
  CHECK(c.token_weights == a.token_weights);
  CHECK(c.intercept == a.intercept);
  cfg.mode = MaskMode::automatic;
  CHECK_FALSE(lime_explain(model, text, "Jewish", cfg).exhaustive);
  CHECK(lime_explain(model, "jews are here", "Jewish", cfg).exhaustive);
}

TEST_CASE("explain errors and rendering") {
  const KeywordModel model("jews");
  CHECK_THROWS_AS(lime_explain(model, "jews", "Islam"), UsageError);
  CHECK_THROWS_AS(lime_explain(model, "   ", "Jewish"), DataError);
  ExplainConfig bad;
  bad.n_samples = 5;
  CHECK_THROWS_AS(lime_explain(model, "jews", "Jewish", bad), UsageError);
  bad = {};
  bad.ridge_lambda = 0.0;
  CHECK_THROWS_AS(bad.validate(), UsageError);

  const auto e = lime_explain(model, "the jews <b>", "Jewish");
  const auto j = e.to_json();
  CHECK(j["target_class"] == "Jewish");
  CHECK(j["token_weights"][0]["token"] == "jews");
  const auto html = e.to_html();
  CHECK(html.find("class=\"pos\"") != std::string::npos);
  CHECK(html.find("<b>") == std::string::npos);
}
