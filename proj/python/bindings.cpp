// Python bindings for the probing harness: corpus handling, task
// generation, the built-in encoders, probe training, and the analyses.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tweetprobe/analysis.hpp"
#include "tweetprobe/encoders.hpp"
#include "tweetprobe/error.hpp"
#include "tweetprobe/pipeline.hpp"
#include "tweetprobe/probe.hpp"
#include "tweetprobe/synthetic.hpp"
#include "tweetprobe/taskgen.hpp"

namespace py = pybind11;
using namespace tweetprobe;

namespace {

std::vector<std::pair<std::size_t, std::size_t>> spans_as_pairs(
    const std::vector<TokenSpan>& spans) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const TokenSpan& span : spans) out.emplace_back(span.start, span.end);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "tweet representation probing harness";

  py::register_local_exception<Error>(m, "HarnessError", PyExc_RuntimeError);

  // corpus
  py::class_<Tweet>(m, "Tweet")
      .def_readonly("id", &Tweet::id)
      .def_readonly("raw_text", &Tweet::raw_text)
      .def_readonly("tokens", &Tweet::tokens)
      .def_readonly("hashtag_indices", &Tweet::hashtag_indices)
      .def_property_readonly(
          "ne_spans",
          [](const Tweet& t) { return spans_as_pairs(t.ne_spans); })
      .def_property_readonly("slang_pairs",
                             [](const Tweet& t) {
                               std::vector<std::tuple<std::size_t, std::size_t,
                                                      std::string>>
                                   out;
                               for (const SlangPair& pair : t.slang_pairs) {
                                 out.emplace_back(pair.span.start,
                                                  pair.span.end,
                                                  pair.standard);
                               }
                               return out;
                             })
      .def_readonly("reply_to", &Tweet::reply_to)
      .def_readonly("first_reply_minutes", &Tweet::first_reply_minutes);

  py::class_<Corpus>(m, "Corpus")
      .def("__len__", &Corpus::size)
      .def("tweet",
           [](const Corpus& c, std::size_t i) -> const Tweet& {
             if (i >= c.size()) throw py::index_error();
             return c.tweets()[i];
           },
           py::return_value_policy::reference_internal)
      .def("by_id", &Corpus::by_id, py::return_value_policy::reference_internal)
      .def("contains", &Corpus::contains)
      .def_property_readonly("dropped_empty", &Corpus::dropped_empty);

  m.def("tokenize", [](const std::string& text) { return tokenize(text); });
  m.def("load_corpus", &load_corpus);
  m.def("save_corpus", &save_corpus);
  m.def("word_count", &word_count);

  // task generation
  py::enum_<TaskKind>(m, "TaskKind")
      .value("LENGTH", TaskKind::Length)
      .value("CONTENT", TaskKind::Content)
      .value("WORD_ORDER", TaskKind::WordOrder)
      .value("SLANG", TaskKind::Slang)
      .value("HASHTAG", TaskKind::Hashtag)
      .value("NAMED_ENTITY", TaskKind::NamedEntity)
      .value("IS_REPLY", TaskKind::IsReply)
      .value("REPLY_TIME", TaskKind::ReplyTime);
  py::enum_<Split>(m, "Split")
      .value("TRAIN", Split::Train)
      .value("DEV", Split::Dev)
      .value("TEST", Split::Test);

  py::class_<TaskParams>(m, "TaskParams")
      .def(py::init<>())
      .def_readwrite("length_bin_size", &TaskParams::length_bin_size)
      .def_readwrite("reply_bin_minutes", &TaskParams::reply_bin_minutes)
      .def_readwrite("reply_max_minutes", &TaskParams::reply_max_minutes)
      .def_readwrite("min_instances", &TaskParams::min_instances);

  py::class_<TaskInstance>(m, "TaskInstance")
      .def_readonly("tweet_id", &TaskInstance::tweet_id)
      .def_readonly("aux_texts", &TaskInstance::aux_texts)
      .def_readonly("label", &TaskInstance::label)
      .def_property_readonly("provenance", [](const TaskInstance& i) {
        return std::string(to_string(i.provenance));
      });

  py::class_<TaskDataset>(m, "TaskDataset")
      .def_readonly("kind", &TaskDataset::kind)
      .def_readonly("class_count", &TaskDataset::class_count)
      .def_readonly("class_labels", &TaskDataset::class_labels)
      .def_readonly("train", &TaskDataset::train)
      .def_readonly("dev", &TaskDataset::dev)
      .def_readonly("test", &TaskDataset::test)
      .def("total_instances", &TaskDataset::total_instances);

  m.def("aux_arity", &aux_arity);
  m.def("bin_length", &bin_length, py::arg("length"), py::arg("bin_size") = 4);
  m.def("bin_reply_time", &bin_reply_time, py::arg("minutes"),
        py::arg("bin_size") = 2.0, py::arg("max_minutes") = 20.0);
  m.def("build_task", &build_task, py::arg("corpus"), py::arg("kind"),
        py::arg("params") = TaskParams{}, py::arg("seed") = 0);
  m.def("collect_aux_requests",
        [](const std::vector<TaskDataset>& datasets, const Corpus& corpus) {
          std::vector<std::pair<std::string, std::string>> out;
          for (const AuxRequest& r : collect_aux_requests(datasets, corpus)) {
            out.emplace_back(r.key, r.text);
          }
          return out;
        });

  // encoders
  py::class_<RepVector>(m, "RepVector")
      .def_property_readonly("dim", &RepVector::dim)
      .def_property_readonly("is_sparse", &RepVector::is_sparse)
      .def("to_list", &RepVector::to_dense)
      .def("at", &RepVector::at);

  py::class_<BowVocabulary>(m, "BowVocabulary")
      .def_property_readonly(
          "size", [](const BowVocabulary& v) { return v.terms.size(); })
      .def_readonly("terms", &BowVocabulary::terms);
  m.def("build_bow_vocab", &build_bow_vocab, py::arg("corpus"),
        py::arg("max_terms") = 50000, py::arg("n_max") = 5);
  m.def("encode_bow", [](const std::string& text, const BowVocabulary& vocab) {
    return encode_bow(text, vocab);
  });

  py::class_<WordTable>(m, "WordTable")
      .def_readonly("dim", &WordTable::dim)
      .def("__len__",
           [](const WordTable& t) { return t.vectors.size(); });
  m.def("load_word_vectors", &load_word_vectors);
  m.def("save_word_vectors", &save_word_vectors);
  m.def("encode_bom", [](const std::string& text, const WordTable& table) {
    return encode_bom(text, table);
  });

  py::class_<LdaModel>(m, "LdaModel")
      .def_readonly("topic_count", &LdaModel::topic_count)
      .def_readonly("alpha", &LdaModel::alpha)
      .def_readonly("beta", &LdaModel::beta);
  m.def("train_lda", &train_lda, py::arg("corpus"), py::arg("topic_count") = 200,
        py::arg("alpha") = -1.0, py::arg("beta") = 0.01,
        py::arg("iterations") = 1000, py::arg("seed") = 0);
  m.def("encode_lda",
        [](const std::string& text, const LdaModel& model,
           std::size_t infer_iterations, std::uint64_t seed) {
          return encode_lda(text, model, infer_iterations, seed);
        },
        py::arg("text"), py::arg("model"), py::arg("infer_iterations") = 100,
        py::arg("seed") = 0);
  m.def("permute_tokens", &permute_tokens);

  // probe
  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("max_epochs", &TrainConfig::max_epochs)
      .def_readwrite("l2", &TrainConfig::l2)
      .def_readwrite("patience", &TrainConfig::patience)
      .def_readwrite("seed", &TrainConfig::seed);

  py::class_<Metrics>(m, "Metrics")
      .def_readonly("macro_f1", &Metrics::macro_f1)
      .def_readonly("precision", &Metrics::precision)
      .def_readonly("recall", &Metrics::recall)
      .def_readonly("f1", &Metrics::f1)
      .def_readonly("confusion", &Metrics::confusion)
      .def_readonly("count", &Metrics::count);

  py::class_<ProbeModel>(m, "ProbeModel")
      .def_readonly("class_count", &ProbeModel::class_count)
      .def_readonly("feature_dim", &ProbeModel::feature_dim)
      .def_readonly("provider_name", &ProbeModel::provider_name)
      .def_readonly("class_labels", &ProbeModel::class_labels);

  m.def("macro_f1", &macro_f1);
  m.def("compute_metrics", &compute_metrics);
  m.def("spearman", &spearman);

  // built-in providers exposed behind a uniform handle
  py::class_<EmbeddingProvider, std::shared_ptr<EmbeddingProvider>>(
      m, "EmbeddingProvider")
      .def_property_readonly("name",
                             [](const EmbeddingProvider& p) { return p.name(); })
      .def_property_readonly("dim", &EmbeddingProvider::dim)
      .def("encode", [](const EmbeddingProvider& p, const std::string& text) {
        return p.encode({aux_key_for(text), text});
      });
  m.def("bow_provider",
        [](const std::string& name, const BowVocabulary& vocab) {
          return std::shared_ptr<EmbeddingProvider>(
              new BowProvider(name, vocab));
        });
  m.def("bom_provider", [](const std::string& name, const WordTable& table) {
    return std::shared_ptr<EmbeddingProvider>(new BomProvider(name, table));
  });
  m.def("lda_provider",
        [](const std::string& name, const LdaModel& model,
           std::size_t infer_iterations, std::uint64_t seed) {
          return std::shared_ptr<EmbeddingProvider>(
              new LdaProvider(name, model, infer_iterations, seed));
        },
        py::arg("name"), py::arg("model"), py::arg("infer_iterations") = 100,
        py::arg("seed") = 0);
  m.def("external_provider",
        [](const std::string& name, const std::string& vectors_path,
           const std::vector<std::string>& required_keys) {
          return std::shared_ptr<EmbeddingProvider>(new ExternalProvider(
              ExternalProvider::load(name, vectors_path, required_keys)));
        });

  m.def("assemble_features",
        [](const TaskInstance& instance,
           const std::shared_ptr<EmbeddingProvider>& provider,
           const Corpus& corpus) {
          return assemble_features(instance, *provider, corpus);
        });
  m.def("train_probe",
        [](const TaskDataset& dataset,
           const std::shared_ptr<EmbeddingProvider>& provider,
           const Corpus& corpus, const TrainConfig& config) {
          return train_probe(dataset, *provider, corpus, config);
        },
        py::arg("dataset"), py::arg("provider"), py::arg("corpus"),
        py::arg("config") = TrainConfig{});
  m.def("predict", &predict);
  m.def("predict_class", &predict_class);
  m.def("evaluate_split",
        [](const ProbeModel& model, const TaskDataset& dataset, Split split,
           const std::shared_ptr<EmbeddingProvider>& provider,
           const Corpus& corpus) {
          return evaluate_split(model, dataset, split, *provider, corpus);
        });

  // analysis
  py::class_<AnalysisParams>(m, "AnalysisParams")
      .def(py::init<>())
      .def_readwrite("length_bin_size", &AnalysisParams::length_bin_size)
      .def_readwrite("min_bin_count", &AnalysisParams::min_bin_count)
      .def_readwrite("rho_threshold", &AnalysisParams::rho_threshold)
      .def_readwrite("invariant_max_points",
                     &AnalysisParams::invariant_max_points)
      .def_readwrite("deviant_min_points", &AnalysisParams::deviant_min_points);

  py::class_<LengthProfile>(m, "LengthProfile")
      .def_property_readonly("bins",
                             [](const LengthProfile& profile) {
                               std::vector<std::tuple<std::size_t, std::size_t,
                                                      double>>
                                   out;
                               for (const LengthBin& bin : profile.bins) {
                                 out.emplace_back(bin.bin, bin.count,
                                                  bin.macro_f1);
                               }
                               return out;
                             })
      .def_readonly("rho_defined", &LengthProfile::rho_defined)
      .def_readonly("rho", &LengthProfile::rho)
      .def_property_readonly("category", [](const LengthProfile& profile) {
        return std::string(to_string(profile.category));
      });

  py::class_<SensitivityResult>(m, "SensitivityResult")
      .def_readonly("f1_original", &SensitivityResult::f1_original)
      .def_readonly("f1_permuted", &SensitivityResult::f1_permuted)
      .def_readonly("delta_points", &SensitivityResult::delta_points)
      .def_property_readonly("category", [](const SensitivityResult& result) {
        return std::string(to_string(result.category));
      });

  m.def("f1_by_length",
        [](const ProbeModel& model, const TaskDataset& dataset, Split split,
           const std::shared_ptr<EmbeddingProvider>& provider,
           const Corpus& corpus, const AnalysisParams& params) {
          return f1_by_length(model, dataset, split, *provider, corpus, params);
        },
        py::arg("model"), py::arg("dataset"), py::arg("split"),
        py::arg("provider"), py::arg("corpus"),
        py::arg("params") = AnalysisParams{});
  m.def("permutation_sensitivity",
        [](const ProbeModel& model, const TaskDataset& dataset, Split split,
           const std::shared_ptr<EmbeddingProvider>& provider,
           const Corpus& corpus, std::uint64_t seed,
           const AnalysisParams& params) {
          return permutation_sensitivity(model, dataset, split, *provider,
                                         corpus, seed, params);
        },
        py::arg("model"), py::arg("dataset"), py::arg("split"),
        py::arg("provider"), py::arg("corpus"), py::arg("seed"),
        py::arg("params") = AnalysisParams{});

  // synthetic data + pipeline
  py::class_<SyntheticSpec>(m, "SyntheticSpec")
      .def(py::init<>())
      .def_readwrite("tweet_count", &SyntheticSpec::tweet_count)
      .def_readwrite("seed", &SyntheticSpec::seed)
      .def_readwrite("content_vocab", &SyntheticSpec::content_vocab)
      .def_readwrite("zipf_exponent", &SyntheticSpec::zipf_exponent)
      .def_readwrite("reply_prob", &SyntheticSpec::reply_prob);
  m.def("make_synthetic_corpus", &make_synthetic_corpus);
  m.def("make_synthetic_word_table", &make_synthetic_word_table);

  py::class_<AnalysisReport>(m, "AnalysisReport")
      .def_readonly("providers", &AnalysisReport::providers)
      .def_readonly("config_digest", &AnalysisReport::config_digest)
      .def("f1_matrix",
           [](const AnalysisReport& report) {
             std::vector<std::vector<py::object>> rows;
             for (const auto& row : report.f1) {
               std::vector<py::object> cells;
               for (const ReportCell& cell : row) {
                 cells.push_back(cell.present ? py::cast(cell.macro_f1)
                                              : py::none());
               }
               rows.push_back(std::move(cells));
             }
             return rows;
           });

  py::class_<RunConfig>(m, "RunConfig")
      .def_readwrite("output_dir", &RunConfig::output_dir)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("threads", &RunConfig::threads);
  m.def("load_run_config", &load_run_config);
  m.def("run_pipeline", [](const RunConfig& config) {
    PipelineResult result = run_pipeline(config);
    return py::make_tuple(result.exit_code,
                          result.report ? py::cast(*result.report)
                                        : py::none(),
                          result.missing_vector_providers);
  });

  m.attr("TASK_NAMES") = [] {
    std::vector<std::string> names;
    for (TaskKind kind : kAllTasks) names.emplace_back(to_string(kind));
    return names;
  }();
}
