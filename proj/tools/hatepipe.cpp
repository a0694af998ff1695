#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hatepipe/augment.hpp"
#include "hatepipe/corpus.hpp"
#include "hatepipe/error.hpp"
#include "hatepipe/eval.hpp"
#include "hatepipe/explain.hpp"
#include "hatepipe/model.hpp"
#include "hatepipe/normalize.hpp"
#include "hatepipe/pipeline.hpp"
#include "hatepipe/topics.hpp"

namespace fs = std::filesystem;
using namespace hatepipe;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitModel = 3;

void write_text(const std::optional<fs::path>& path, const std::string& content) {
  if (!path) {
    std::cout << content;
    return;
  }
  std::ofstream out(*path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path->string());
  out << content;
  if (!out) throw DataError("write failed for " + path->string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), {}};
}

template <class T>
void report_load(const LoadResult<T>& r, const fs::path& path) {
  for (const auto& e : r.errors) std::cerr << path.string() << ": row " << e.row << ": " << e.message << "\n";
  for (const auto& w : r.warnings) std::cerr << path.string() << ": warning: " << w << "\n";
  std::cerr << "read " << r.rows_read << " rows, kept " << r.items.size() << ", dropped " << r.dropped
            << ", non-English " << r.excluded_non_english << ", errors " << r.errors.size() << "\n";
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

// ---- ingest -----------------------------------------------------------------

struct IngestArgs {
  std::string dataset;
  fs::path input, out;
  double threshold = 3.0;
  bool exclusive = false;
  bool fold_politician = false;
  bool english_only = false;
  std::optional<double> split_fraction;
  std::uint64_t seed = 0;
};

void write_split(const std::vector<Sample>& samples, const IngestArgs& a) {
  if (!a.split_fraction) {
    write_samples(a.out, samples);
    return;
  }
  const auto parts = split(std::span<const Sample>(samples), SplitConfig{*a.split_fraction, a.seed, true});
  for (const auto& w : parts.warnings) std::cerr << "warning: " << w << "\n";
  auto stem = a.out;
  stem.replace_extension();
  write_samples(fs::path(stem.string() + ".train.jsonl"), parts.train);
  write_samples(fs::path(stem.string() + ".test.jsonl"), parts.test);
  std::cerr << "train " << parts.train.size() << ", test " << parts.test.size() << "\n";
}

void run_ingest(const IngestArgs& a) {
  LoadOptions opts;
  opts.english_only = a.english_only;
  std::vector<Sample> samples;
  if (a.dataset == "parler") {
    const auto r = load_parler(a.input, opts);
    report_load(r, a.input);
    for (const auto& p : r.items) samples.push_back(to_sample(binarize(p, a.threshold, !a.exclusive)));
  } else {
    LoadResult<TargetExample> r;
    if (a.dataset == "hatexplain")
      r = load_hatexplain(a.input, opts);
    else if (a.dataset == "dialoconan")
      r = load_dialoconan(a.input, opts);
    else if (a.dataset == "toxigen-small")
      r = load_toxigen(a.input, ToxigenVariant::small, opts);
    else if (a.dataset == "toxigen-large")
      r = load_toxigen(a.input, ToxigenVariant::large, opts);
    else if (a.dataset == "tap")
      r = load_tap(a.input, a.fold_politician, opts);
    else
      throw UsageError("unknown dataset '" + a.dataset + "'");
    report_load(r, a.input);
    samples = to_samples(std::span<const TargetExample>(r.items));
  }
  write_split(samples, a);
}

// ---- normalize --------------------------------------------------------------

struct NormalizeArgs {
  std::optional<std::string> text;
  std::optional<fs::path> input, out;
};

void run_normalize(const NormalizeArgs& a) {
  if (a.text.has_value() == a.input.has_value()) throw UsageError("normalize: give exactly one of --text or --input");
  if (a.text) {
    write_text(a.out, normalize(*a.text) + "\n");
    return;
  }
  std::ifstream in(*a.input);
  if (!in) throw DataError("cannot open " + a.input->string());
  std::string result, line;
  while (std::getline(in, line)) result += normalize(line) + "\n";
  write_text(a.out, result);
}

// ---- translation clients ------------------------------------------------------

struct TranslatorArgs {
  std::optional<std::string> url;
  std::optional<fs::path> script;
  double timeout = 30.0;
  std::string languages = "es,de,fr";
  std::size_t max_parallel = 4;
};

std::unique_ptr<TranslationClient> make_client(const TranslatorArgs& t) {
  if (t.url.has_value() == t.script.has_value())
    throw UsageError("back translation needs exactly one of --translator-url or --translation-script");
  if (t.url) return std::make_unique<HttpTranslationClient>(*t.url, t.timeout);
  return std::make_unique<ScriptedClient>(ScriptedClient::from_tsv(*t.script));
}

AugmentConfig augment_config(const TranslatorArgs& t) {
  AugmentConfig cfg;
  cfg.languages = split_list(t.languages);
  cfg.max_parallel = t.max_parallel;
  return cfg;
}

void print_augment_stats(const std::map<std::string, LanguageStats>& stats) {
  for (const auto& [lang, s] : stats) {
    std::cerr << lang << ": attempted " << s.attempted << ", accepted " << s.accepted << ", rejected " << s.rejected
              << ", client failures " << s.client_failures;
    if (!s.first_error.empty()) std::cerr << " (first error: " << s.first_error << ")";
    std::cerr << "\n";
  }
}

// ---- augment ----------------------------------------------------------------

struct AugmentArgs {
  fs::path input, out;
  TranslatorArgs translator;
};

void run_augment(const AugmentArgs& a) {
  const auto data = read_samples(a.input);
  const auto client = make_client(a.translator);
  const auto r = augment_dataset(data, augment_config(a.translator), *client);
  print_augment_stats(r.stats);
  write_samples(a.out, r.examples);
  std::cerr << "wrote " << r.examples.size() << " examples (" << data.size() << " original)\n";
}

// ---- topics -----------------------------------------------------------------

struct TopicsFitArgs {
  fs::path input, out;
  std::size_t min_samples_floor = 1;
  std::size_t dim = 64;
  std::uint64_t seed = 0;
  std::optional<std::string> label;
};

TopicModel fit_topic_model(const std::vector<std::string>& texts, std::size_t floor, std::size_t dim,
                           std::uint64_t seed) {
  const auto grid = default_grid(floor);
  return fit_topics(texts, std::make_shared<TfidfProjectionEmbedder>(dim, seed), grid);
}

void print_topics(const TopicModel& m) {
  std::map<int, std::size_t> size;
  for (int l : m.labels) ++size[l];
  std::cerr << "topics " << m.n_topics() << " (min_cluster_size " << m.params.min_cluster_size << ", min_samples "
            << m.params.min_samples << "), outliers " << size[kOutlier] << "\n";
  for (const auto& [id, name] : m.names) std::cerr << "  " << name.name << "  (" << size[id] << " docs)\n";
}

void run_topics_fit(const TopicsFitArgs& a) {
  std::vector<std::string> texts;
  for (const auto& s : read_samples(a.input))
    if (!a.label || s.label == *a.label) texts.push_back(s.text);
  const auto m = fit_topic_model(texts, a.min_samples_floor, a.dim, a.seed);
  print_topics(m);
  m.save(a.out);
}

struct TopicsAssignArgs {
  fs::path model, input;
  std::optional<fs::path> out;
  bool concat = false;
};

void run_topics_assign(const TopicsAssignArgs& a) {
  const auto m = TopicModel::load(a.model);
  auto data = read_samples(a.input);
  std::vector<std::string> texts;
  for (const auto& s : data) texts.push_back(s.text);
  const auto labels = m.assign(texts);
  if (a.concat) {
    if (!a.out) throw UsageError("topics assign --concat needs --out");
    for (std::size_t i = 0; i < data.size(); ++i) data[i].text = concat_topic(data[i].text, m, labels[i]);
    write_samples(*a.out, data);
    return;
  }
  std::string result;
  for (std::size_t i = 0; i < data.size(); ++i) result += std::to_string(labels[i]) + "\t" + m.names.at(labels[i]).name + "\n";
  write_text(a.out, result);
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
  std::string task;
  fs::path input, out;
  std::optional<fs::path> val;
  std::optional<double> threshold;
  bool weighted = false;
  bool backtranslate = false;
  bool topic = false;
  std::optional<fs::path> topic_model;
  TranslatorArgs translator;
  Hyperparams hp;
  std::string optimizer = "adam";
  std::uint32_t hash_bits = 18;
  double val_fraction = 0.1;
};

void run_train(TrainArgs a) {
  if (a.task != "detect" && a.task != "target") throw UsageError("--task must be detect or target");
  if (a.threshold && a.task != "detect") throw UsageError("--threshold applies to --task detect");
  if (a.optimizer == "adam")
    a.hp.optimizer = Optimizer::adam;
  else if (a.optimizer == "sgd")
    a.hp.optimizer = Optimizer::sgd;
  else
    throw UsageError("--optimizer must be adam or sgd");
  a.hp.weighted_loss = a.weighted;

  std::vector<Sample> data;
  if (a.threshold) {
    const auto r = load_parler(a.input);
    report_load(r, a.input);
    for (const auto& p : r.items) data.push_back(to_sample(binarize(p, *a.threshold)));
  } else {
    data = read_samples(a.input);
  }

  std::vector<Sample> train_set, val_set;
  if (a.val) {
    train_set = std::move(data);
    val_set = read_samples(*a.val);
  } else {
    auto parts = split(std::span<const Sample>(data), SplitConfig{1.0 - a.val_fraction, a.hp.seed, true});
    train_set = std::move(parts.train);
    val_set = std::move(parts.test);
  }

  std::vector<std::string> classes;
  for (const auto& s : train_set)
    if (std::find(classes.begin(), classes.end(), s.label) == classes.end()) classes.push_back(s.label);
  std::sort(classes.begin(), classes.end());

  if (a.backtranslate) {
    const auto client = make_client(a.translator);
    auto r = augment_dataset(train_set, augment_config(a.translator), *client);
    print_augment_stats(r.stats);
    train_set = std::move(r.examples);
  }

  std::optional<TopicModel> topics;
  if (a.topic) {
    if (a.topic_model) {
      topics = TopicModel::load(*a.topic_model);
    } else {
      std::vector<std::string> texts;
      for (const auto& s : train_set) texts.push_back(s.text);
      topics = fit_topic_model(texts, 1, 64, a.hp.seed);
      auto path = a.out;
      path += ".topics.json";
      topics->save(path);
      std::cerr << "topic model saved to " << path.string() << "\n";
    }
    print_topics(*topics);
    for (auto* set : {&train_set, &val_set})
      for (auto& s : *set) s.text = concat_topic(s.text, *topics, topics->assign(s.text));
  }

  FeatureConfig fc;
  fc.hash_dim = 1u << a.hash_bits;
  TrainOptions opts;
  opts.classes = classes;
  opts.on_epoch = [](const EpochLog& e, const TrainedClassifier&) {
    if (std::isnan(e.val_loss))
      std::fprintf(stderr, "epoch %u: train loss %.4f acc %.4f, no validation\n", e.epoch, e.train_loss,
                   e.train_accuracy);
    else
      std::fprintf(stderr, "epoch %u: train loss %.4f acc %.4f, val loss %.4f acc %.4f\n", e.epoch, e.train_loss,
                   e.train_accuracy, e.val_loss, e.val_accuracy);
  };
  auto model = train(train_set, val_set, a.hp, fc, opts);
  model.metadata["task"] = a.task;
  if (a.threshold) model.metadata["threshold"] = std::to_string(static_cast<int>(*a.threshold));
  model.metadata["backtranslate"] = a.backtranslate ? "true" : "false";
  model.metadata["topic"] = a.topic ? "true" : "false";
  save(model, a.out);
  std::cerr << "model saved to " << a.out.string() << " (" << train_set.size() << " train, " << val_set.size()
            << " validation)\n";
}

// ---- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
  fs::path model, data;
  std::optional<fs::path> topic_model, json_out;
  std::optional<std::string> positive;
  bool macro = false;
  std::string name;
  std::string dataset;
};

void run_evaluate(const EvaluateArgs& a) {
  const auto model = load_model(a.model);
  const auto data = read_samples(a.data);
  std::optional<TopicModel> topics;
  if (a.topic_model) topics = TopicModel::load(*a.topic_model);
  EvaluateOptions opts;
  opts.topic_model = topics ? &*topics : nullptr;
  const auto& cls = model.classes();
  if (a.positive)
    opts.positive = a.positive;
  else if (!a.macro && cls.size() == 2 && std::find(cls.begin(), cls.end(), "hate") != cls.end())
    opts.positive = "hate";
  opts.dataset = a.dataset.empty() ? a.data.stem().string() : a.dataset;
  opts.model = a.name.empty() ? a.model.stem().string() : a.name;
  opts.back_translation = model.metadata.contains("backtranslate") && model.metadata.at("backtranslate") == "true";
  const auto r = evaluate(model, data, opts);
  for (const auto& d : r.degenerate) std::cerr << "warning: " << d << " has a zero denominator\n";
  std::cout << render_table({{opts.model, r}}) << "\n" << table_row(opts.model, r) << "\n" << table2_row(r) << "\n";
  if (a.json_out) write_text(*a.json_out, r.to_json().dump(2) + "\n");
}

// ---- run --------------------------------------------------------------------

struct RunArgs {
  PipelineConfig pipeline;
  fs::path corpus, out;
  std::optional<std::string> topic_model;
  bool keep_non_english = false;
};

void run_run(RunArgs a) {
  if (a.topic_model) a.pipeline.topic_model_path = *a.topic_model;
  const auto p = Pipeline::load(a.pipeline);
  FilePostSource src(a.corpus);
  RunOptions opts;
  opts.batch_size = a.pipeline.batch_size;
  opts.workers = a.pipeline.workers;
  opts.exclude_non_english = !a.keep_non_english;
  opts.on_progress = [](std::size_t n) { std::cerr << "\rprocessed " << n << std::flush; };
  const auto r = run_corpus(src, p, opts);
  std::cerr << "\n";
  for (const auto& e : r.first_errors) std::cerr << "failed: " << e << "\n";
  std::fprintf(stderr, "read %.2fs, classify %.2fs\n", std::chrono::duration<double>(r.times.read).count(),
               std::chrono::duration<double>(r.times.classify).count());
  write_report(r.distribution, ReportFormat::json, a.out);
  std::cout << report_chart(r.distribution);
}

// ---- explain ----------------------------------------------------------------

struct ExplainArgs {
  fs::path model;
  std::string text, cls;
  std::optional<fs::path> out, html;
  ExplainConfig config;
  std::string mode = "sampled";
};

void run_explain(ExplainArgs a) {
  if (a.mode == "sampled")
    a.config.mode = MaskMode::sampled;
  else if (a.mode == "exhaustive")
    a.config.mode = MaskMode::exhaustive;
  else if (a.mode == "auto")
    a.config.mode = MaskMode::automatic;
  else
    throw UsageError("--mode must be sampled, exhaustive or auto");
  const auto model = load_model(a.model);
  const auto e = lime_explain(model, a.text, a.cls, a.config);
  write_text(a.out, e.to_json().dump(2) + "\n");
  if (a.html) write_text(*a.html, e.to_html());
}

// ---- report -----------------------------------------------------------------

struct ReportArgs {
  fs::path input;
  std::string format = "chart";
  std::optional<fs::path> out;
};

void run_report(const ReportArgs& a) {
  const auto fmt = parse_report_format(a.format);
  if (!fmt) throw UsageError("--format must be json, csv or chart");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(a.input));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(a.input.string() + ": " + e.what());
  }
  write_text(a.out, report(TargetDistribution::from_json(j), *fmt));
}

void add_translator_options(CLI::App* cmd, TranslatorArgs& t) {
  cmd->add_option("--translator-url", t.url, "HTTP translation endpoint");
  cmd->add_option("--translation-script", t.script, "TSV of scripted round trips (input, lang, output)");
  cmd->add_option("--languages", t.languages, "Comma-separated pivot languages")->capture_default_str();
  cmd->add_option("--max-parallel", t.max_parallel, "Concurrent translation requests")->capture_default_str();
  cmd->add_option("--translator-timeout", t.timeout, "Seconds per request")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hate speech detection and target classification toolkit", "hatepipe"};
  app.set_config("--config", "", "key=value configuration file; command-line flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Load a raw dataset and write normalized samples");
  c_ingest->add_option("--dataset", ingest.dataset, "parler, hatexplain, dialoconan, toxigen-small, toxigen-large, tap")
      ->required();
  c_ingest->add_option("--input", ingest.input)->required();
  c_ingest->add_option("--out", ingest.out)->required();
  c_ingest->add_option("--threshold", ingest.threshold, "Parler label-mean cut")->capture_default_str();
  c_ingest->add_flag("--exclusive", ingest.exclusive, "Parler: label hate only above the threshold");
  c_ingest->add_flag("--fold-politician", ingest.fold_politician, "TAP: map Politician to Other");
  c_ingest->add_flag("--english-only", ingest.english_only);
  c_ingest->add_option("--split", ingest.split_fraction, "Write stratified .train/.test files with this train share");
  c_ingest->add_option("--seed", ingest.seed)->capture_default_str();

  NormalizeArgs norm;
  auto* c_norm = app.add_subcommand("normalize", "Normalize a text or a file of lines");
  c_norm->add_option("--text", norm.text);
  c_norm->add_option("--input", norm.input);
  c_norm->add_option("--out", norm.out);

  AugmentArgs aug;
  auto* c_aug = app.add_subcommand("augment", "Back-translate a sample file");
  c_aug->add_option("--input", aug.input)->required();
  c_aug->add_option("--out", aug.out)->required();
  add_translator_options(c_aug, aug.translator);

  auto* c_topics = app.add_subcommand("topics", "Fit or apply a topic model");
  c_topics->require_subcommand(1);
  TopicsFitArgs tfit;
  auto* c_tfit = c_topics->add_subcommand("fit", "Fit topics on sample texts");
  c_tfit->add_option("--input", tfit.input)->required();
  c_tfit->add_option("--out", tfit.out)->required();
  c_tfit->add_option("--label", tfit.label, "Only texts with this label");
  c_tfit->add_option("--min-samples-floor", tfit.min_samples_floor)->capture_default_str();
  c_tfit->add_option("--dim", tfit.dim)->capture_default_str();
  c_tfit->add_option("--seed", tfit.seed)->capture_default_str();
  TopicsAssignArgs tassign;
  auto* c_tassign = c_topics->add_subcommand("assign", "Assign topics to sample texts");
  c_tassign->add_option("--model", tassign.model)->required();
  c_tassign->add_option("--input", tassign.input)->required();
  c_tassign->add_option("--out", tassign.out);
  c_tassign->add_flag("--concat", tassign.concat, "Write samples with the topic appended");

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train a detector or target classifier");
  c_train->add_option("--task", tr.task, "detect or target")->required();
  c_train->add_option("--input", tr.input, "Sample file, or a Parler corpus when --threshold is given")->required();
  c_train->add_option("--out", tr.out)->required();
  c_train->add_option("--val", tr.val, "Validation samples; otherwise carved from the input");
  c_train->add_option("--val-fraction", tr.val_fraction)->capture_default_str();
  c_train->add_option("--threshold", tr.threshold, "Binarize a Parler corpus at 3 or 4");
  c_train->add_flag("--weighted", tr.weighted, "Class-weighted loss");
  c_train->add_flag("--backtranslate", tr.backtranslate, "Augment the training split by back translation");
  c_train->add_flag("--topic", tr.topic, "Append topic words to every input");
  c_train->add_option("--topic-model", tr.topic_model, "Existing topic model for --topic");
  add_translator_options(c_train, tr.translator);
  c_train->add_option("--epochs", tr.hp.max_epochs)->capture_default_str();
  c_train->add_option("--batch-size", tr.hp.batch_size)->capture_default_str();
  c_train->add_option("--lr", tr.hp.learning_rate)->capture_default_str();
  c_train->add_option("--patience", tr.hp.early_stop_patience)->capture_default_str();
  c_train->add_option("--seed", tr.hp.seed)->capture_default_str();
  c_train->add_option("--optimizer", tr.optimizer)->capture_default_str();
  c_train->add_option("--hash-bits", tr.hash_bits)->capture_default_str();

  EvaluateArgs ev;
  auto* c_eval = app.add_subcommand("evaluate", "Score a model on a labeled sample file");
  c_eval->add_option("--model", ev.model)->required();
  c_eval->add_option("--data", ev.data)->required();
  c_eval->add_option("--topic-model", ev.topic_model);
  c_eval->add_option("--positive", ev.positive, "Positive class for binary metrics");
  c_eval->add_flag("--macro", ev.macro, "Macro-average even for a binary hate model");
  c_eval->add_option("--name", ev.name, "Model name in the table row");
  c_eval->add_option("--dataset", ev.dataset, "Dataset name in the table row");
  c_eval->add_option("--json", ev.json_out, "Write the full report as JSON");

  RunArgs run;
  auto* c_run = app.add_subcommand("run", "Classify a raw corpus and write the target distribution");
  c_run->add_option("--detector", run.pipeline.detector_path)->required();
  c_run->add_option("--target", run.pipeline.target_model_path)->required();
  c_run->add_option("--topic-model", run.topic_model);
  c_run->add_option("--corpus", run.corpus)->required();
  c_run->add_option("--out", run.out)->required();
  c_run->add_option("--tag", run.pipeline.threshold_tag, "Detector tag recorded in the report");
  c_run->add_option("--hate-label", run.pipeline.hate_label)->capture_default_str();
  c_run->add_option("--batch-size", run.pipeline.batch_size)->capture_default_str();
  c_run->add_option("--workers", run.pipeline.workers)->capture_default_str();
  c_run->add_flag("--keep-non-english", run.keep_non_english);

  ExplainArgs ex;
  auto* c_ex = app.add_subcommand("explain", "Explain one prediction with LIME");
  c_ex->add_option("--model", ex.model)->required();
  c_ex->add_option("--text", ex.text)->required();
  c_ex->add_option("--class", ex.cls)->required();
  c_ex->add_option("--out", ex.out);
  c_ex->add_option("--html", ex.html, "Write an HTML fragment");
  c_ex->add_option("--samples", ex.config.n_samples)->capture_default_str();
  c_ex->add_option("--features", ex.config.n_features)->capture_default_str();
  c_ex->add_option("--seed", ex.config.seed)->capture_default_str();
  c_ex->add_option("--mode", ex.mode, "sampled, exhaustive or auto")->capture_default_str();
  c_ex->add_option("--workers", ex.config.max_parallel)->capture_default_str();

  ReportArgs rep;
  auto* c_rep = app.add_subcommand("report", "Render a target distribution");
  c_rep->add_option("--input", rep.input)->required();
  c_rep->add_option("--format", rep.format, "json, csv or chart")->capture_default_str();
  c_rep->add_option("--out", rep.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (c_ingest->parsed()) run_ingest(ingest);
    if (c_norm->parsed()) run_normalize(norm);
    if (c_aug->parsed()) run_augment(aug);
    if (c_tfit->parsed()) run_topics_fit(tfit);
    if (c_tassign->parsed()) run_topics_assign(tassign);
    if (c_train->parsed()) run_train(tr);
    if (c_eval->parsed()) run_evaluate(ev);
    if (c_run->parsed()) run_run(run);
    if (c_ex->parsed()) run_explain(ex);
    if (c_rep->parsed()) run_report(rep);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return kExitModel;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const TranslationError& e) {
    std::cerr << "translation error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
