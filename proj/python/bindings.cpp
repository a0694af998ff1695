#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "hatepipe/augment.hpp"
#include "hatepipe/corpus.hpp"
#include "hatepipe/error.hpp"
#include "hatepipe/eval.hpp"
#include "hatepipe/explain.hpp"
#include "hatepipe/model.hpp"
#include "hatepipe/normalize.hpp"
#include "hatepipe/pipeline.hpp"
#include "hatepipe/topics.hpp"

namespace py = pybind11;
using namespace hatepipe;

namespace {

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

// Wraps a Python callable text -> sequence of probabilities.
class PyClassifier final : public Classifier {
 public:
  PyClassifier(std::vector<std::string> classes, py::function fn) : classes_(std::move(classes)), fn_(std::move(fn)) {}
  ~PyClassifier() override {
    py::gil_scoped_acquire gil;
    fn_ = py::function();
  }

  const std::vector<std::string>& classes() const override { return classes_; }
  std::vector<double> predict_proba(std::string_view text) const override {
    py::gil_scoped_acquire gil;
    auto probs = fn_(std::string(text)).cast<std::vector<double>>();
    if (probs.size() != classes_.size()) throw ModelError("python classifier returned the wrong number of probabilities");
    return probs;
  }

 private:
  std::vector<std::string> classes_;
  py::function fn_;
};

std::vector<Sample> to_samples_list(const std::vector<std::pair<std::string, std::string>>& rows) {
  std::vector<Sample> out;
  out.reserve(rows.size());
  for (const auto& [text, label] : rows) out.push_back({text, label, "", false});
  return out;
}

py::list samples_to_py(const std::vector<Sample>& samples) {
  py::list out;
  for (const auto& s : samples) {
    py::dict d;
    d["text"] = s.text;
    d["label"] = s.label;
    d["origin"] = s.origin;
    d["augmented"] = s.augmented;
    out.append(d);
  }
  return out;
}

template <class T>
py::list errors_to_py(const LoadResult<T>& r) {
  py::list errs;
  for (const auto& e : r.errors) errs.append(py::make_tuple(e.row, e.message));
  return errs;
}

py::dict load_dataset(const std::string& name, const std::filesystem::path& path, double threshold,
                      bool fold_politician, bool english_only) {
  LoadOptions opts;
  opts.english_only = english_only;
  py::dict out;
  std::vector<Sample> samples;
  if (name == "parler") {
    const auto r = load_parler(path, opts);
    for (const auto& p : r.items) samples.push_back(to_sample(binarize(p, threshold)));
    out["errors"] = errors_to_py(r);
    out["dropped"] = r.dropped;
  } else {
    LoadResult<TargetExample> r;
    if (name == "hatexplain")
      r = load_hatexplain(path, opts);
    else if (name == "dialoconan")
      r = load_dialoconan(path, opts);
    else if (name == "toxigen-small")
      r = load_toxigen(path, ToxigenVariant::small, opts);
    else if (name == "toxigen-large")
      r = load_toxigen(path, ToxigenVariant::large, opts);
    else if (name == "tap")
      r = load_tap(path, fold_politician, opts);
    else
      throw UsageError("unknown dataset '" + name + "'");
    samples = to_samples(std::span<const TargetExample>(r.items));
    out["errors"] = errors_to_py(r);
    out["dropped"] = r.dropped;
  }
  out["samples"] = samples_to_py(samples);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the hatepipe toolkit";

  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  auto model_error = py::register_exception<ModelError>(m, "ModelError", PyExc_RuntimeError);
  py::register_exception<FormatError>(m, "FormatError", model_error.ptr());
  py::register_exception<TranslationError>(m, "TranslationError", PyExc_RuntimeError);

  m.def("normalize", [](const std::string& text) { return normalize(text); }, py::arg("text"));
  m.def("is_english", [](const std::string& text) { return is_english(text); }, py::arg("text"));

  m.def("load_dataset", &load_dataset, py::arg("name"), py::arg("path"), py::arg("threshold") = 3.0,
        py::arg("fold_politician") = false, py::arg("english_only") = false,
        "Load a raw dataset; returns {'samples': [...], 'errors': [(row, message)], 'dropped': n}.");

  m.def("class_weights", &class_weights, py::arg("counts"));
  m.def(
      "weighted_ce_loss",
      [](const std::vector<double>& logits, std::size_t label, double weight) {
        auto r = weighted_ce_loss(logits, label, weight);
        return py::make_tuple(r.loss, r.grad);
      },
      py::arg("logits"), py::arg("label"), py::arg("weight") = 1.0);

  py::class_<Classifier, std::shared_ptr<Classifier>>(m, "Classifier")
      .def_property_readonly("classes", &Classifier::classes)
      .def("predict_proba", [](const Classifier& c, const std::string& t) { return c.predict_proba(t); })
      .def("predict", [](const Classifier& c, const std::string& t) { return c.predict(t).label; });

  py::class_<PyClassifier, Classifier, std::shared_ptr<PyClassifier>>(m, "FunctionClassifier")
      .def(py::init<std::vector<std::string>, py::function>(), py::arg("classes"), py::arg("fn"));

  py::class_<TrainedClassifier, Classifier, std::shared_ptr<TrainedClassifier>>(m, "Model")
      .def_property_readonly("metadata", [](const TrainedClassifier& c) { return c.metadata; })
      .def_property_readonly("training_log",
                             [](const TrainedClassifier& c) {
                               py::list out;
                               for (const auto& e : c.training_log)
                                 out.append(py::dict(py::arg("epoch") = e.epoch, py::arg("train_loss") = e.train_loss,
                                                     py::arg("train_accuracy") = e.train_accuracy,
                                                     py::arg("val_loss") = e.val_loss,
                                                     py::arg("val_accuracy") = e.val_accuracy));
                               return out;
                             })
      .def("to_bytes",
           [](const TrainedClassifier& c) {
             const auto b = to_bytes(c);
             return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
           })
      .def_static("from_bytes",
                  [](const py::bytes& b) {
                    const std::string s = b;
                    return std::make_shared<TrainedClassifier>(
                        from_bytes(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size())));
                  })
      .def("save", [](const TrainedClassifier& c, const std::filesystem::path& p) { save(c, p); })
      .def_static("load", [](const std::filesystem::path& p) { return std::make_shared<TrainedClassifier>(load_model(p)); });

  m.def(
      "train",
      [](const std::vector<std::pair<std::string, std::string>>& train_rows,
         const std::vector<std::pair<std::string, std::string>>& val_rows, bool weighted, std::size_t epochs,
         std::size_t batch_size, double lr, std::uint64_t seed, std::uint32_t hash_bits,
         const std::vector<std::string>& classes) {
        Hyperparams hp;
        hp.weighted_loss = weighted;
        hp.max_epochs = epochs;
        hp.batch_size = batch_size;
        hp.learning_rate = lr;
        hp.seed = seed;
        FeatureConfig fc;
        fc.hash_dim = 1u << hash_bits;
        TrainOptions opts;
        opts.classes = classes;
        const auto tr = to_samples_list(train_rows);
        const auto va = to_samples_list(val_rows);
        py::gil_scoped_release release;
        return std::make_shared<TrainedClassifier>(train(tr, va, hp, fc, opts));
      },
      py::arg("train"), py::arg("val") = std::vector<std::pair<std::string, std::string>>{},
      py::arg("weighted") = false, py::arg("epochs") = 10, py::arg("batch_size") = 8, py::arg("lr") = 1e-3,
      py::arg("seed") = 0, py::arg("hash_bits") = 18, py::arg("classes") = std::vector<std::string>{},
      "Train on (text, label) pairs of already normalized text.");

  m.def(
      "metrics",
      [](const std::vector<std::string>& preds, const std::vector<std::string>& golds,
         const std::vector<std::string>& classes, std::optional<std::string> positive) {
        return to_py(metrics(confusion(preds, golds, classes), positive).to_json());
      },
      py::arg("preds"), py::arg("golds"), py::arg("classes"), py::arg("positive") = py::none());
  m.def(
      "table_row",
      [](const std::string& name, std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
        return table_row(name, metrics(ConfusionMatrix{{"hate", "normal"}, {{tp, fn}, {fp, tn}}}, std::string("hate")));
      },
      py::arg("name"), py::arg("tp"), py::arg("fp"), py::arg("fn"), py::arg("tn"));

  m.def(
      "augment",
      [](const std::vector<std::pair<std::string, std::string>>& rows, std::optional<std::filesystem::path> script,
         std::optional<py::function> translate, const std::vector<std::string>& languages, std::size_t max_parallel) {
        if (script.has_value() == translate.has_value()) throw UsageError("augment: give exactly one of script or translate");
        std::unique_ptr<TranslationClient> client;
        if (script) {
          client = std::make_unique<ScriptedClient>(ScriptedClient::from_tsv(*script));
        } else {
          py::function fn = *translate;
          client = std::make_unique<FunctionClient>([fn](std::string_view t, std::string_view s, std::string_view g) {
            py::gil_scoped_acquire gil;
            return fn(std::string(t), std::string(s), std::string(g)).cast<std::string>();
          });
        }
        AugmentConfig cfg;
        cfg.languages = languages;
        cfg.max_parallel = max_parallel;
        const auto data = to_samples_list(rows);
        AugmentResult<std::string> r;
        {
          py::gil_scoped_release release;
          r = augment_dataset(data, cfg, *client);
        }
        py::dict stats;
        for (const auto& [lang, s] : r.stats)
          stats[py::str(lang)] = py::dict(py::arg("attempted") = s.attempted, py::arg("accepted") = s.accepted,
                                          py::arg("rejected") = s.rejected,
                                          py::arg("client_failures") = s.client_failures);
        return py::make_tuple(samples_to_py(r.examples), stats);
      },
      py::arg("samples"), py::arg("script") = py::none(), py::arg("translate") = py::none(),
      py::arg("languages") = std::vector<std::string>{"es", "de", "fr"}, py::arg("max_parallel") = 1);

  py::class_<TopicModel, std::shared_ptr<TopicModel>>(m, "TopicModel")
      .def_property_readonly("n_topics", &TopicModel::n_topics)
      .def_readonly("labels", &TopicModel::labels)
      .def_property_readonly("names",
                             [](const TopicModel& t) {
                               std::map<int, std::string> out;
                               for (const auto& [id, n] : t.names) out[id] = n.name;
                               return out;
                             })
      .def("assign", [](const TopicModel& t, const std::string& text) { return t.assign(text); })
      .def("concat", [](const TopicModel& t, const std::string& text) { return concat_topic(text, t, t.assign(text)); })
      .def("serialize", &TopicModel::serialize)
      .def_static("deserialize", [](const std::string& s) { return std::make_shared<TopicModel>(TopicModel::deserialize(s)); })
      .def("save", &TopicModel::save)
      .def_static("load", [](const std::filesystem::path& p) { return std::make_shared<TopicModel>(TopicModel::load(p)); });

  m.def(
      "fit_topics",
      [](const std::vector<std::string>& texts, const std::vector<std::size_t>& min_cluster_sizes,
         const std::vector<std::size_t>& min_samples, std::size_t dim, std::uint64_t seed) {
        const auto grid = min_cluster_sizes.empty() ? default_grid() : make_grid(min_cluster_sizes, min_samples);
        py::gil_scoped_release release;
        return std::make_shared<TopicModel>(fit_topics(texts, std::make_shared<TfidfProjectionEmbedder>(dim, seed), grid));
      },
      py::arg("texts"), py::arg("min_cluster_sizes") = std::vector<std::size_t>{},
      py::arg("min_samples") = std::vector<std::size_t>{}, py::arg("dim") = 64, py::arg("seed") = 0);

  m.def(
      "explain",
      [](std::shared_ptr<Classifier> model, const std::string& text, const std::string& cls, std::size_t n_samples,
         std::size_t n_features, std::uint64_t seed, const std::string& mode, bool html) {
        ExplainConfig cfg;
        cfg.n_samples = n_samples;
        cfg.n_features = n_features;
        cfg.seed = seed;
        if (mode == "sampled")
          cfg.mode = MaskMode::sampled;
        else if (mode == "exhaustive")
          cfg.mode = MaskMode::exhaustive;
        else if (mode == "auto")
          cfg.mode = MaskMode::automatic;
        else
          throw UsageError("mode must be sampled, exhaustive or auto");
        Explanation e;
        {
          py::gil_scoped_release release;
          e = lime_explain(*model, text, cls, cfg);
        }
        py::object out = to_py(e.to_json());
        if (html) out["html"] = e.to_html();
        return out;
      },
      py::arg("model"), py::arg("text"), py::arg("cls"), py::arg("n_samples") = 1000, py::arg("n_features") = 6,
      py::arg("seed") = 0, py::arg("mode") = "sampled", py::arg("html") = false);

  m.def(
      "run_corpus",
      [](std::shared_ptr<Classifier> detector, std::shared_ptr<Classifier> target, std::vector<std::string> posts,
         std::shared_ptr<TopicModel> topics, std::size_t workers, std::size_t batch_size, bool exclude_non_english,
         const std::string& hate_label) {
        const Pipeline p(detector, target, topics, hate_label);
        VectorPostSource src(std::move(posts));
        RunOptions opts;
        opts.workers = workers;
        opts.batch_size = batch_size;
        opts.exclude_non_english = exclude_non_english;
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run_corpus(src, p, opts);
        }
        return to_py(r.distribution.to_json());
      },
      py::arg("detector"), py::arg("target"), py::arg("posts"), py::arg("topics") = nullptr, py::arg("workers") = 1,
      py::arg("batch_size") = 1024, py::arg("exclude_non_english") = true, py::arg("hate_label") = "hate");

  m.def(
      "report",
      [](const py::object& distribution, const std::string& format) {
        const auto fmt = parse_report_format(format);
        if (!fmt) throw UsageError("format must be json, csv or chart");
        const std::string dumped = py::module_::import("json").attr("dumps")(distribution).cast<std::string>();
        return report(TargetDistribution::from_json(nlohmann::json::parse(dumped)), *fmt);
      },
      py::arg("distribution"), py::arg("format") = "chart");
}
