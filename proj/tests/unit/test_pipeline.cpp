#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <memory>

#include "hatepipe/error.hpp"
#include "hatepipe/pipeline.hpp"
#include "hatepipe/rng.hpp"
#include "support/planted.hpp"

using namespace hatepipe;
using testing::MarkerStub;

namespace {

template <class T>
std::shared_ptr<const T> share(T& stub) {
  return std::shared_ptr<const T>(&stub, [](const T*) {});
}

}  // namespace

TEST_CASE("classify_post short-circuits normal posts") {
  MarkerStub normal({"normal", "hate"}, {}, 0);
  MarkerStub target({"African", "Islam", "Jewish", "LGBT", "Other"}, {}, 2);
  const Pipeline p(share(normal), share(target));
  for (const char* t : {"they are all here", "hatemark jews", ""}) CHECK(p.classify_post(t).status == PostResult::Status::normal);
  CHECK(normal.calls == 3);
  CHECK(target.calls == 0);

  MarkerStub hate({"normal", "hate"}, {}, 1);
  const Pipeline q(share(hate), share(target));
  for (const char* t : {"they are all here", "x"}) CHECK(q.classify_post(t) == PostResult{PostResult::Status::hate, "Jewish", {}});
  CHECK(target.calls == 2);
}

TEST_CASE("classify_post maps unknown target labels to Other") {
  MarkerStub hate({"normal", "hate"}, {}, 1);
  MarkerStub tap({"African", "Politician", "Other"}, {"africanmark"}, 1);
  const Pipeline p(share(hate), share(tap));
  CHECK(p.classify_post("the politician one").target == "Other");
  CHECK(p.classify_post("the africanmark one").target == "African");
  MarkerStub wrong({"neg", "pos"}, {}, 0);
  CHECK_THROWS_AS(Pipeline(share(wrong), share(tap)), ModelError);
}

TEST_CASE("topic concatenation feeds the target model") {
  class Recorder final : public Classifier {
   public:
    const std::vector<std::string>& classes() const override { return classes_; }
    std::vector<double> predict_proba(std::string_view t) const override {
      last = std::string(t);
      return {0.0, 1.0};
    }
    mutable std::string last;

   private:
    std::vector<std::string> classes_{"African", "Islam"};
  };
  std::vector<std::string> docs;
  const std::vector<std::vector<std::string>> vocab{{"mosque", "quran", "imam", "sharia"}, {"torah", "rabbi", "kosher", "hebrew"}};
  Rng rng(3);
  for (const auto& v : vocab)
    for (int i = 0; i < 60; ++i) {
      std::string doc = "the";
      for (int w = 0; w < 5; ++w) doc += " " + v[rng.index(v.size())];
      docs.push_back(doc);
    }
  auto topics = std::make_shared<TopicModel>(
      fit_topics(docs, std::make_shared<TfidfProjectionEmbedder>(), make_grid(std::vector<std::size_t>{10}, std::vector<std::size_t>{3})));
  REQUIRE(topics->n_topics() >= 1);
  MarkerStub hate({"normal", "hate"}, {}, 1);
  Recorder target;
  const Pipeline with(share(hate), share(target), topics);
  CHECK(with.classify_post("The mosque quran imam sharia").target == "Islam");
  const int id = topics->assign("the mosque quran imam sharia");
  CHECK(target.last == concat_topic("the mosque quran imam sharia", *topics, id));
  CHECK(target.last.find(kTopicMarker) != std::string::npos);
  const Pipeline without(share(hate), share(target));
  without.classify_post("The mosque quran imam sharia");
  CHECK(target.last == "the mosque quran imam sharia");
}

TEST_CASE("run_corpus on the planted corpus") {
  const auto corpus = testing::planted_corpus(2000, 1);
  auto detector = testing::detector_stub();
  auto target = testing::target_stub();
  Pipeline p(share(detector), share(target));
  p.threshold_tag = "weighted-t3";
  VectorPostSource src(corpus.posts);
  const auto r = run_corpus(src, p, {.batch_size = 128, .workers = 1});
  const auto& d = r.distribution;
  CHECK(d.total_posts == 2000);
  CHECK(d.hateful_posts == corpus.hateful);
  CHECK(d.hate_rate() == 0.3);
  CHECK(d.counts.at("African") == corpus.african);
  CHECK(d.counts.at("Islam") == corpus.islam);
  CHECK(d.counts.at("Other") == corpus.other);
  CHECK(d.fractions().at("African") == 0.5);
  CHECK(d.fractions().at("Islam") == 0.3);
  CHECK(d.fractions().at("Other") == 0.2);
  CHECK(target.calls == corpus.hateful);
  CHECK(d.detector_tag == "weighted-t3");

  for (std::size_t workers : {2, 8})
    for (std::size_t batch : {1, 7, 5000}) {
      VectorPostSource again(corpus.posts);
      CHECK(run_corpus(again, p, {.batch_size = batch, .workers = workers}).distribution == d);
    }
}

TEST_CASE("run_corpus counting of excluded and failed posts") {
  auto detector = testing::detector_stub();
  auto target = testing::target_stub();
  const Pipeline p(share(detector), share(target));
  const auto path = std::filesystem::temp_directory_path() / "hatepipe_run.jsonl";
  {
    std::ofstream out(path);
    out << R"({"text": "they are hatemark about the africanmark"})" << "\n"
        << "\n"
        << R"({"text": "der hund ist nicht sehr groß und schön"})" << "\n"
        << "{not json\n"
        << R"({"id": 5})" << "\n"
        << R"({"body": "they are calmmark and that is all"})" << "\n";
  }
  FilePostSource src(path);
  std::size_t progress = 0;
  const auto r = run_corpus(src, p, {.batch_size = 2, .workers = 1, .on_progress = [&](std::size_t n) { progress = n; }});
  const auto& d = r.distribution;
  CHECK(d.total_posts == 5);
  CHECK(d.hateful_posts == 1);
  CHECK(d.normal_posts == 1);
  CHECK(d.excluded_posts == 1);
  CHECK(d.failed_posts == 2);
  CHECK(d.total_posts == d.normal_posts + d.hateful_posts + d.excluded_posts + d.failed_posts);
  CHECK(r.first_errors.size() == 2);
  CHECK(r.first_errors[0].find("row 4") != std::string::npos);
  CHECK(progress == 5);
  CHECK_THROWS_AS(FilePostSource("/nonexistent/x.jsonl"), DataError);

  VectorPostSource empty({});
  const auto e = run_corpus(empty, p).distribution;
  CHECK(e.total_posts == 0);
  CHECK(e.hate_rate() == 0.0);
  for (const auto& [name, f] : e.fractions()) CHECK(f == 0.0);
}

TEST_CASE("reports") {
  TargetDistribution d;
  d.total_posts = 40;
  d.normal_posts = 30;
  d.hateful_posts = 10;
  d.counts["Islam"] = 3;
  d.counts["African"] = 5;
  d.counts["Other"] = 2;
  d.detector_tag = "t3";
  CHECK(report_csv(d) ==
        "target,count,fraction\nAfrican,5,0.500000\nIslam,3,0.300000\nOther,2,0.200000\n"
        "Jewish,0,0.000000\nLGBT,0,0.000000\n");
  const auto chart = report_chart(d, 10);
  CHECK(chart.find("African | ########## ") != std::string::npos);
  CHECK(chart.find("Islam   | ######     ") != std::string::npos);

  CHECK(TargetDistribution::from_json(nlohmann::json::parse(d.to_json().dump())) == d);
  double sum = 0.0;
  for (const auto& [n, f] : d.fractions()) sum += f;
  CHECK(std::abs(sum - 1.0) <= 1e-9);

  TargetDistribution zero;
  zero.total_posts = zero.normal_posts = 4;
  CHECK(report_chart(zero).find("no hateful posts") != std::string::npos);
  CHECK(report_csv(zero).find("African,0,0.000000") != std::string::npos);

  auto bad = d.to_json();
  bad["hateful_posts"] = 11;
  CHECK_THROWS_AS(TargetDistribution::from_json(bad), DataError);
  CHECK_THROWS_AS(TargetDistribution::from_json(nlohmann::json::array()), DataError);

  const auto path = std::filesystem::temp_directory_path() / "hatepipe_dist.csv";
  write_report(d, ReportFormat::csv, path);
  std::ifstream in(path);
  CHECK(std::string(std::istreambuf_iterator<char>(in), {}) == report_csv(d));
  CHECK_THROWS_AS(write_report(d, ReportFormat::json, "/nonexistent/dir/x.json"), DataError);
  CHECK(parse_report_format("text-chart") == ReportFormat::chart);
  CHECK_FALSE(parse_report_format("png"));
}

TEST_CASE("Pipeline::load errors") {
  PipelineConfig cfg;
  cfg.detector_path = "/nonexistent/det.bin";
  cfg.target_model_path = "/nonexistent/tgt.bin";
  CHECK_THROWS_AS(Pipeline::load(cfg), ModelError);
  cfg.batch_size = 0;
  CHECK_THROWS_AS(Pipeline::load(cfg), UsageError);
}
