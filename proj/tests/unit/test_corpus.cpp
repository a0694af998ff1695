#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "hatepipe/corpus.hpp"

using namespace hatepipe;

namespace {
const std::string kData = HATEPIPE_TEST_DATA;

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / ("hatepipe_test_" + name);
  std::ofstream(path) << content;
  return path;
}

Post post_with(double mean) { return Post{"x", "Some Text", mean, std::nullopt, std::nullopt}; }
}  // namespace

TEST_CASE("parler loader reports bad rows with line numbers") {
  auto r = load_parler(kData + "/parler_small.jsonl");
  CHECK(r.rows_read == 11);
  CHECK(r.items.size() == 10);
  REQUIRE(r.errors.size() == 1);
  CHECK(r.errors[0].row == 4);
  CHECK(r.errors[0].message.find("outside [1, 5]") != std::string::npos);
  CHECK(r.items[1].label_mean == 3.0);
  CHECK(r.items[1].disputable == true);
  CHECK(r.items[1].user_id == "u2");
  CHECK(r.items[3].label_mean == 3.5);  // numeric string
  CHECK(r.items[3].disputable == false);
}

TEST_CASE("parler loader can drop non-English posts") {
  LoadOptions opt;
  opt.english_only = true;
  auto r = load_parler(kData + "/parler_small.jsonl", opt);
  CHECK(r.excluded_non_english == 1);
  CHECK(r.items.size() == 9);
}

TEST_CASE("csv input with quoting; too many bad rows aborts") {
  CHECK_THROWS_AS(load_parler(kData + "/parler_small.csv"), DataError);
  LoadOptions lenient;
  lenient.max_error_fraction = 0.5;
  auto r = load_parler(kData + "/parler_small.csv", lenient);
  REQUIRE(r.items.size() == 3);
  CHECK(r.items[0].text == "Hello, world");
  CHECK(r.items[1].text == "multi\nline \"quoted\" text");
  REQUIRE(r.errors.size() == 1);
  CHECK(r.errors[0].row == 5);
}

TEST_CASE("empty and missing files") {
  auto r = load_parler(temp_file("empty.jsonl", ""));
  CHECK(r.items.empty());
  CHECK(r.warnings.size() == 1);
  CHECK_THROWS_AS(load_parler("/nonexistent/parler.jsonl"), DataError);
}

TEST_CASE("binarize") {
  CHECK(binarize(post_with(3.0), 3).label == HateLabel::hate);
  CHECK(binarize(post_with(2.9), 3).label == HateLabel::normal);
  CHECK(binarize(post_with(3.5), 4).label == HateLabel::normal);
  CHECK(binarize(post_with(3.0), 3, /*inclusive=*/false).label == HateLabel::normal);
  CHECK(binarize(post_with(3.0), 3).text == "some text");
  Post unlabeled{"u", "text", std::nullopt, std::nullopt, std::nullopt};
  CHECK_THROWS_AS(binarize(unlabeled, 3), DataError);
}

TEST_CASE("property: binarize is monotone in the threshold") {
  for (double mean = 1.0; mean <= 5.0; mean += 0.1)
    for (double t = 1.0; t <= 5.0; t += 0.25)
      if (binarize(post_with(mean), t).label == HateLabel::hate)
        for (double lower = 1.0; lower <= t; lower += 0.25) REQUIRE(binarize(post_with(mean), lower).label == HateLabel::hate);
}

TEST_CASE("majority vote") {
  std::vector<std::string> a{"Jewish", "Jewish", "Other"};
  CHECK(majority_vote(a) == "Jewish");
  std::vector<std::string> tie{"Jewish", "Islam", "African"};
  CHECK_FALSE(majority_vote(tie).has_value());
  std::vector<std::string> two{"Jewish", "Jewish"};
  CHECK_THROWS_AS(majority_vote(two), DataError);
  // Permutation invariance over every ordering of a few annotation triples.
  for (auto triple : {std::vector<std::string>{"a", "b", "a"}, std::vector<std::string>{"a", "b", "c"},
                      std::vector<std::string>{"x", "x", "x"}}) {
    std::sort(triple.begin(), triple.end());
    const auto expected = majority_vote(triple);
    do {
      CHECK(majority_vote(triple) == expected);
    } while (std::next_permutation(triple.begin(), triple.end()));
  }
}

TEST_CASE("hatexplain loader") {
  auto r = load_hatexplain(kData + "/hatexplain_small.jsonl");
  CHECK(r.rows_read == 11);
  CHECK(r.dropped == 1);
  REQUIRE(r.errors.size() == 1);
  CHECK(r.errors[0].row == 5);
  std::vector<TargetClass> got;
  for (const auto& e : r.items) got.push_back(e.label);
  CHECK(got == std::vector<TargetClass>{TargetClass::Jewish, TargetClass::Other, TargetClass::LGBT,
                                        TargetClass::Islam, TargetClass::African, TargetClass::Other,
                                        TargetClass::Other, TargetClass::Other, TargetClass::Jewish});
  CHECK(r.items[2].text == "gay people are bad");
}

TEST_CASE("dialoconan loader keeps hater turns") {
  auto r = load_dialoconan(kData + "/dialoconan_small.jsonl");
  CHECK(r.rows_read == 28);
  CHECK(r.items.size() == 14);
  CHECK(r.unknown_targets == 2);
  std::vector<TargetClass> per_dialogue;
  for (std::size_t i = 0; i < r.items.size(); i += 2) per_dialogue.push_back(r.items[i].label);
  CHECK(per_dialogue == std::vector<TargetClass>{TargetClass::Jewish, TargetClass::LGBT, TargetClass::Islam,
                                                 TargetClass::African, TargetClass::Other, TargetClass::Other,
                                                 TargetClass::Other});
}

TEST_CASE("toxigen small filter on the 20-row fixture") {
  // Rows with toxicity >= 4 and agreement, worked out by hand from the fixture.
  const std::set<int> expected_rows{1, 2, 6, 8, 11, 12, 14, 17, 18};
  auto r = load_toxigen(kData + "/toxigen_small_20.jsonl", ToxigenVariant::small);
  CHECK(r.errors.empty());
  CHECK(r.dropped == 11);
  REQUIRE(r.items.size() == expected_rows.size());
  std::size_t k = 0;
  for (int row : expected_rows) {
    CHECK(r.items[k].text == "the statement number " + std::to_string(row) + " is about these people");
    ++k;
  }
  // Group mapping: row 1 black, row 6 jewish, row 8 lgbtq, row 14 black.
  CHECK(r.items[0].label == TargetClass::African);
  CHECK(r.items[2].label == TargetClass::Jewish);
  CHECK(r.items[3].label == TargetClass::LGBT);
  CHECK(r.items[6].label == TargetClass::African);
  CHECK(r.items[1].label == TargetClass::Other);
}

TEST_CASE("toxigen small requires toxicity; large keeps everything") {
  auto bad = temp_file("tox_bad.jsonl", R"({"text":"a b c","target_group":"black","agreement":true})"
                                        "\n");
  LoadOptions lenient;
  lenient.max_error_fraction = 1.0;
  auto r = load_toxigen(bad, ToxigenVariant::small, lenient);
  REQUIRE(r.errors.size() == 1);
  CHECK(r.errors[0].message == "missing toxicity");

  auto large = load_toxigen(kData + "/toxigen_large_5.jsonl", ToxigenVariant::large);
  REQUIRE(large.items.size() == 5);
  CHECK(large.items[0].label == TargetClass::African);
  CHECK(large.items[1].label == TargetClass::Islam);
  CHECK(large.items[4].label == TargetClass::Other);
}

TEST_CASE("tap loader") {
  auto folded = load_tap(kData + "/tap_small.csv", true);
  REQUIRE(folded.items.size() == 7);
  CHECK(folded.items[2].label == TargetClass::LGBT);
  CHECK(folded.items[4].label == TargetClass::Other);
  CHECK(folded.items[6].label == TargetClass::Islam);
  auto raw = load_tap(kData + "/tap_small.csv", false);
  CHECK(raw.items[4].label == TargetClass::Politician);
  CHECK_THROWS_AS(load_tap(kData + "/tap_bad.csv", true), DataError);
}

TEST_CASE("all loader outputs stay inside the model class space") {
  std::vector<TargetExample> all;
  for (auto& r : {load_hatexplain(kData + "/hatexplain_small.jsonl"), load_dialoconan(kData + "/dialoconan_small.jsonl"),
                  load_toxigen(kData + "/toxigen_small_20.jsonl", ToxigenVariant::small),
                  load_tap(kData + "/tap_small.csv", true)})
    all.insert(all.end(), r.items.begin(), r.items.end());
  for (const auto& e : all)
    CHECK(std::find(kModelTargets.begin(), kModelTargets.end(), e.label) != kModelTargets.end());
}

TEST_CASE("sample files round trip") {
  std::vector<Sample> s{{"a b", "hate", "parler", false}, {"c \"d\"", "Other", "tap", true}};
  auto path = std::filesystem::temp_directory_path() / "hatepipe_samples.jsonl";
  write_samples(path, s);
  CHECK(read_samples(path) == s);
}

TEST_CASE("split: exact stratified counts") {
  std::vector<Sample> data;
  for (int i = 0; i < 10; ++i) data.push_back({"t" + std::to_string(i), i < 5 ? "a" : "b", "", false});
  auto r = split(data, SplitConfig{0.8, 1, true});
  CHECK(r.train.size() == 8);
  CHECK(r.test.size() == 2);
  CHECK(std::count_if(r.test.begin(), r.test.end(), [](auto& e) { return e.label == "a"; }) == 1);
  auto again = split(data, SplitConfig{0.8, 1, true});
  CHECK(again.train == r.train);
  CHECK(again.test == r.test);
}

TEST_CASE("split: round-half-up on the Parler size") {
  CHECK(train_size(10121, 0.8) == 8097);
  CHECK(train_size(10, 0.8) == 8);
  CHECK(train_size(5, 0.5) == 3);
}

TEST_CASE("split: rejects augmented input and tiny classes go to train") {
  std::vector<Sample> data{{"a", "x", "", false}, {"b", "x", "", false}, {"c", "y", "", false}};
  auto r = split(data, SplitConfig{0.5, 3, true});
  CHECK(r.warnings.size() == 1);
  CHECK(std::count_if(r.train.begin(), r.train.end(), [](auto& e) { return e.label == "y"; }) == 1);
  data.push_back({"d", "x", "", true});
  CHECK_THROWS_AS(split(data, SplitConfig{}), DataError);
  CHECK_THROWS_AS(split(std::vector<Sample>{}, SplitConfig{}), DataError);
}

TEST_CASE("property: split partitions and respects stratification bounds") {
  Rng gen(99);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = 2 + gen.index(300);
    const auto classes = 1 + gen.index(5);
    const double fraction = 0.05 + 0.9 * gen.uniform();
    std::vector<Sample> data;
    for (std::uint64_t i = 0; i < n; ++i)
      data.push_back({"doc" + std::to_string(i), "c" + std::to_string(gen.index(classes)), "", false});
    const bool stratified = trial % 4 != 0;
    auto r = split(data, SplitConfig{fraction, gen.next(), stratified});

    std::multiset<std::string> in, out;
    for (auto& e : data) in.insert(e.text);
    for (auto& e : r.train) out.insert(e.text);
    for (auto& e : r.test) out.insert(e.text);
    REQUIRE(in == out);  // exhaustive and disjoint (texts are unique)

    if (stratified) {
      std::map<std::string, std::pair<double, double>> counts;
      for (auto& e : data) counts[e.label].first += 1;
      for (auto& e : r.train) counts[e.label].second += 1;
      for (auto& [label, c] : counts) {
        if (c.first < 2) continue;
        CHECK(std::abs(c.second - fraction * c.first) <= 1.0);
      }
    }
  }
}
