#include "tweetprobe/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "text_util.hpp"
#include "tweetprobe/error.hpp"
#include "tweetprobe/rng.hpp"

namespace tweetprobe {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

const char* to_string(ProviderKind k) {
  switch (k) {
    case ProviderKind::Bow: return "bow";
    case ProviderKind::Bom: return "bom";
    case ProviderKind::Lda: return "lda";
    case ProviderKind::External: return "external";
  }
  return "unknown";
}

std::vector<TaskKind> RunConfig::effective_tasks() const {
  if (!tasks.empty()) return tasks;
  return std::vector<TaskKind>(kAllTasks.begin(), kAllTasks.end());
}

namespace {

struct Paths {
  fs::path out;
  explicit Paths(const RunConfig& config) : out(config.output_dir) {}

  std::string corpus() const { return (out / "corpus.jsonl").string(); }
  std::string corpus_digest() const {
    return (out / "corpus.jsonl.digest").string();
  }
  std::string dataset(TaskKind kind) const {
    return (out / "datasets" / (std::string(to_string(kind)) + ".tsv"))
        .string();
  }
  std::string aux_texts() const {
    return (out / "datasets" / "aux_texts.tsv").string();
  }
  std::string requests() const {
    return (out / "requests" / "requests.tsv").string();
  }
  std::string perm_requests() const {
    return (out / "requests" / "perm_requests.tsv").string();
  }
  std::string requests_digest() const {
    return (out / "requests" / "requests.digest").string();
  }
  std::string provider_file(const ProviderSpec& spec) const {
    const char* ext = "marker";
    switch (spec.kind) {
      case ProviderKind::Bow: ext = "bow.tsv"; break;
      case ProviderKind::Lda: ext = "lda.txt"; break;
      case ProviderKind::Bom: ext = "bom.marker"; break;
      case ProviderKind::External: ext = "ext.marker"; break;
    }
    return (out / "providers" / (spec.name + "." + ext)).string();
  }
  std::string pair_file(const char* dir, const std::string& provider,
                        TaskKind task, const char* ext) const {
    return (out / dir / (provider + "__" + to_string(task) + ext)).string();
  }
  std::string probe(const std::string& provider, TaskKind task) const {
    return pair_file("probes", provider, task, ".probe");
  }
  std::string metrics(const std::string& provider, TaskKind task) const {
    return pair_file("metrics", provider, task, ".json");
  }
  std::string analysis(const std::string& provider, TaskKind task) const {
    return pair_file("analysis", provider, task, ".json");
  }
  std::string report_json() const {
    return (out / "report" / "report.json").string();
  }
  std::string report_tsv() const {
    return (out / "report" / "f1_matrix.tsv").string();
  }
  std::string report_summary() const {
    return (out / "report" / "summary.txt").string();
  }
};

std::uint64_t permutation_seed(const RunConfig& config) {
  return mix_seed(config.seed, "perm");
}

std::uint64_t pair_seed(const RunConfig& config, const std::string& provider,
                        TaskKind task) {
  return mix_seed(config.seed,
                  "train:" + provider + ":" + to_string(task));
}

void require_file(const std::string& path, const std::string& produced_by) {
  if (!detail::file_exists(path)) {
    fail(ErrorKind::IoError,
         "missing " + path + "; run '" + produced_by + "' first");
  }
}

void check_digest(const std::string& found, const std::string& expected,
                  const std::string& path) {
  if (found != expected) {
    fail(ErrorKind::StaleArtifact,
         path + " was produced by a different run (digest " + found +
             " != " + expected + ")");
  }
}

std::string read_digest_sidecar(const std::string& path) {
  std::string content = detail::read_file(path);
  while (!content.empty() && (content.back() == '\n' || content.back() == '\r')) {
    content.pop_back();
  }
  return content;
}

// Digest recorded in the first header line of our own text formats.
std::string peek_header_digest(const std::string& path) {
  std::string content = detail::read_file(path);
  std::size_t eol = content.find('\n');
  std::string_view header(content.data(),
                          eol == std::string::npos ? content.size() : eol);
  for (std::string_view field : detail::split_view(header, '\t')) {
    if (field.substr(0, 7) == "digest=") {
      return std::string(field.substr(7));
    }
  }
  return "";
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  json doc;
  try {
    doc = json::parse(detail::read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorKind::ConfigError, path + ": " + e.what());
  }
  if (!doc.is_object()) fail(ErrorKind::ConfigError, path + ": not an object");

  RunConfig config;
  try {
    config.corpus_path = doc.at("corpus").get<std::string>();
    config.output_dir = doc.value("output_dir", std::string());
    config.seed = doc.value("seed", 0ULL);
    config.threads = doc.value("threads", 1ULL);
    if (doc.contains("tasks")) {
      for (const auto& name : doc.at("tasks")) {
        config.tasks.push_back(task_kind_from_string(name.get<std::string>()));
      }
    }
    if (doc.contains("task_params")) {
      const json& p = doc.at("task_params");
      config.task_params.length_bin_size =
          p.value("length_bin_size", config.task_params.length_bin_size);
      config.task_params.reply_bin_minutes =
          p.value("reply_bin_minutes", config.task_params.reply_bin_minutes);
      config.task_params.reply_max_minutes =
          p.value("reply_max_minutes", config.task_params.reply_max_minutes);
      config.task_params.min_instances =
          p.value("min_instances", config.task_params.min_instances);
    }
    if (!doc.contains("providers") || !doc.at("providers").is_array()) {
      fail(ErrorKind::ConfigError, path + ": 'providers' list is required");
    }
    for (const auto& entry : doc.at("providers")) {
      ProviderSpec spec;
      spec.name = entry.at("name").get<std::string>();
      std::string kind = entry.at("kind").get<std::string>();
      if (kind == "bow") {
        spec.kind = ProviderKind::Bow;
        spec.bow_max_terms = entry.value("max_terms", spec.bow_max_terms);
        spec.bow_n_max = entry.value("n_max", spec.bow_n_max);
      } else if (kind == "bom") {
        spec.kind = ProviderKind::Bom;
        spec.word_vectors_path = entry.value("word_vectors", std::string());
      } else if (kind == "lda") {
        spec.kind = ProviderKind::Lda;
        spec.lda_topics = entry.value("topics", spec.lda_topics);
        spec.lda_alpha = entry.value("alpha", spec.lda_alpha);
        spec.lda_beta = entry.value("beta", spec.lda_beta);
        spec.lda_iterations = entry.value("iterations", spec.lda_iterations);
        spec.lda_infer_iterations =
            entry.value("infer_iterations", spec.lda_infer_iterations);
      } else if (kind == "external") {
        spec.kind = ProviderKind::External;
        spec.vectors_path = entry.value("vectors", std::string());
      } else {
        fail(ErrorKind::ConfigError,
             path + ": unknown provider kind '" + kind + "'");
      }
      spec.supervised = entry.value("supervised", false);
      config.providers.push_back(std::move(spec));
    }
    if (doc.contains("train")) {
      const json& t = doc.at("train");
      config.train.learning_rate =
          t.value("learning_rate", config.train.learning_rate);
      config.train.batch_size = t.value("batch_size", config.train.batch_size);
      config.train.max_epochs = t.value("max_epochs", config.train.max_epochs);
      config.train.l2 = t.value("l2", config.train.l2);
      config.train.patience = t.value("patience", config.train.patience);
      std::string standardize = t.value("standardize", std::string("auto"));
      if (standardize == "auto") {
        config.train.standardize = Standardize::Auto;
      } else if (standardize == "on") {
        config.train.standardize = Standardize::On;
      } else if (standardize == "off") {
        config.train.standardize = Standardize::Off;
      } else {
        fail(ErrorKind::ConfigError,
             path + ": standardize must be auto/on/off");
      }
    }
    if (doc.contains("analysis")) {
      const json& a = doc.at("analysis");
      config.analysis.length_bin_size =
          a.value("length_bin_size", config.analysis.length_bin_size);
      config.analysis.min_bin_count =
          a.value("min_bin_count", config.analysis.min_bin_count);
      config.analysis.rho_threshold =
          a.value("rho_threshold", config.analysis.rho_threshold);
      config.analysis.invariant_max_points =
          a.value("invariant_max_points", config.analysis.invariant_max_points);
      config.analysis.deviant_min_points =
          a.value("deviant_min_points", config.analysis.deviant_min_points);
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::ConfigError, path + ": " + e.what());
  }

  if (const char* out = std::getenv("TWEETPROBE_OUTPUT")) {
    if (*out) config.output_dir = out;
  }
  if (const char* threads = std::getenv("TWEETPROBE_THREADS")) {
    if (*threads) {
      config.threads = detail::parse_u64(threads, "TWEETPROBE_THREADS");
    }
  }
  return config;
}

void validate_config(const RunConfig& config) {
  if (config.corpus_path.empty() || !detail::file_exists(config.corpus_path)) {
    fail(ErrorKind::ConfigError,
         "corpus file not found: " + config.corpus_path);
  }
  if (config.output_dir.empty()) {
    fail(ErrorKind::ConfigError, "output_dir is required");
  }
  if (config.providers.empty()) {
    fail(ErrorKind::ConfigError, "at least one provider is required");
  }
  std::set<std::string> names;
  for (const ProviderSpec& spec : config.providers) {
    if (spec.name.empty() ||
        spec.name.find_first_of(" \t/\\") != std::string::npos) {
      fail(ErrorKind::ConfigError, "bad provider name '" + spec.name + "'");
    }
    if (!names.insert(spec.name).second) {
      fail(ErrorKind::ConfigError, "duplicate provider name " + spec.name);
    }
    switch (spec.kind) {
      case ProviderKind::Bow:
        if (spec.bow_max_terms == 0 || spec.bow_n_max == 0 ||
            spec.bow_n_max > kMaxNgramOrder) {
          fail(ErrorKind::ConfigError, spec.name + ": bad bow parameters");
        }
        break;
      case ProviderKind::Bom:
        if (spec.word_vectors_path.empty() ||
            !detail::file_exists(spec.word_vectors_path)) {
          fail(ErrorKind::ConfigError,
               spec.name + ": word_vectors file not found: " +
                   spec.word_vectors_path);
        }
        break;
      case ProviderKind::Lda:
        if (spec.lda_topics < 2 || spec.lda_iterations == 0 ||
            spec.lda_infer_iterations == 0 || !(spec.lda_beta > 0.0)) {
          fail(ErrorKind::ConfigError, spec.name + ": bad lda parameters");
        }
        break;
      case ProviderKind::External:
        // The vectors file may not exist yet: that is the two-phase flow.
        if (spec.vectors_path.empty()) {
          fail(ErrorKind::ConfigError,
               spec.name + ": external provider needs a vectors path");
        }
        break;
    }
  }
  if (config.task_params.length_bin_size == 0 ||
      config.task_params.min_instances == 0) {
    fail(ErrorKind::ConfigError, "bad task parameters");
  }
  reply_time_class_count(config.task_params.reply_bin_minutes,
                         config.task_params.reply_max_minutes);
  if (config.train.learning_rate <= 0.0 || config.train.batch_size == 0 ||
      config.train.max_epochs == 0 ||
      config.train.patience > config.train.max_epochs) {
    fail(ErrorKind::ConfigError, "bad train parameters");
  }
  if (config.analysis.length_bin_size == 0 ||
      config.analysis.rho_threshold <= 0.0 ||
      config.analysis.invariant_max_points < 0.0 ||
      config.analysis.deviant_min_points <
          config.analysis.invariant_max_points) {
    fail(ErrorKind::ConfigError, "bad analysis parameters");
  }
  if (config.threads == 0) {
    fail(ErrorKind::ConfigError, "threads must be >= 1");
  }
}

std::string config_digest(const RunConfig& config) {
  // Semantic fields only: output_dir and threads must not change results.
  json canon;
  canon["seed"] = config.seed;
  json tasks = json::array();
  for (TaskKind kind : config.effective_tasks()) tasks.push_back(to_string(kind));
  canon["tasks"] = std::move(tasks);
  canon["task_params"] = {
      {"length_bin_size", config.task_params.length_bin_size},
      {"reply_bin_minutes", config.task_params.reply_bin_minutes},
      {"reply_max_minutes", config.task_params.reply_max_minutes},
      {"min_instances", config.task_params.min_instances}};
  json providers = json::array();
  for (const ProviderSpec& spec : config.providers) {
    json p;
    p["name"] = spec.name;
    p["kind"] = to_string(spec.kind);
    p["supervised"] = spec.supervised;
    switch (spec.kind) {
      case ProviderKind::Bow:
        p["max_terms"] = spec.bow_max_terms;
        p["n_max"] = spec.bow_n_max;
        break;
      case ProviderKind::Bom:
        p["word_vectors"] = spec.word_vectors_path;
        break;
      case ProviderKind::Lda:
        p["topics"] = spec.lda_topics;
        p["alpha"] = spec.lda_alpha;
        p["beta"] = spec.lda_beta;
        p["iterations"] = spec.lda_iterations;
        p["infer_iterations"] = spec.lda_infer_iterations;
        break;
      case ProviderKind::External:
        p["vectors"] = spec.vectors_path;
        break;
    }
    providers.push_back(std::move(p));
  }
  canon["providers"] = std::move(providers);
  canon["train"] = {{"learning_rate", config.train.learning_rate},
                    {"batch_size", config.train.batch_size},
                    {"max_epochs", config.train.max_epochs},
                    {"l2", config.train.l2},
                    {"patience", config.train.patience},
                    {"standardize",
                     static_cast<int>(config.train.standardize)}};
  canon["analysis"] = {
      {"length_bin_size", config.analysis.length_bin_size},
      {"min_bin_count", config.analysis.min_bin_count},
      {"rho_threshold", config.analysis.rho_threshold},
      {"invariant_max_points", config.analysis.invariant_max_points},
      {"deviant_min_points", config.analysis.deviant_min_points}};

  std::string corpus_bytes = detail::read_file(config.corpus_path);
  std::uint64_t digest = fnv1a64(canon.dump());
  digest = splitmix64(digest ^ fnv1a64(corpus_bytes));
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(digest));
  return buffer;
}

namespace {

Corpus load_ingested_corpus(const RunConfig& config,
                            const std::string& digest) {
  Paths paths(config);
  require_file(paths.corpus(), "ingest");
  require_file(paths.corpus_digest(), "ingest");
  check_digest(read_digest_sidecar(paths.corpus_digest()), digest,
               paths.corpus());
  return load_corpus(paths.corpus());
}

std::vector<TaskDataset> load_built_datasets(const RunConfig& config,
                                             const std::string& digest) {
  Paths paths(config);
  require_file(paths.aux_texts(), "build-tasks");
  std::unordered_map<std::string, std::string> key_to_text;
  for (const AuxRequest& request : load_requests(paths.aux_texts())) {
    key_to_text.emplace(request.key, request.text);
  }
  std::vector<TaskDataset> datasets;
  for (TaskKind kind : config.effective_tasks()) {
    const std::string path = paths.dataset(kind);
    require_file(path, "build-tasks");
    std::string found;
    datasets.push_back(load_dataset(path, key_to_text, &found));
    check_digest(found, digest, path);
  }
  return datasets;
}

std::vector<std::string> external_required_keys(const Paths& paths) {
  std::vector<std::string> keys;
  for (const AuxRequest& request : load_requests(paths.requests())) {
    keys.push_back(request.key);
  }
  for (const AuxRequest& request : load_requests(paths.perm_requests())) {
    keys.push_back(request.key);
  }
  return keys;
}

std::unique_ptr<EmbeddingProvider> load_provider(const RunConfig& config,
                                                 const ProviderSpec& spec,
                                                 const std::string& digest) {
  Paths paths(config);
  const std::string artifact = paths.provider_file(spec);
  require_file(artifact, "encode");
  switch (spec.kind) {
    case ProviderKind::Bow: {
      std::string found;
      BowVocabulary vocab = load_bow_vocab(artifact, &found);
      check_digest(found, digest, artifact);
      return std::make_unique<BowProvider>(spec.name, std::move(vocab));
    }
    case ProviderKind::Lda: {
      std::string found;
      LdaModel model = load_lda_model(artifact, &found);
      check_digest(found, digest, artifact);
      return std::make_unique<LdaProvider>(
          spec.name, std::move(model), spec.lda_infer_iterations,
          mix_seed(config.seed, "lda-encode:" + spec.name));
    }
    case ProviderKind::Bom: {
      check_digest(peek_header_digest(artifact), digest, artifact);
      return std::make_unique<BomProvider>(
          spec.name, load_word_vectors(spec.word_vectors_path));
    }
    case ProviderKind::External: {
      check_digest(peek_header_digest(artifact), digest, artifact);
      auto provider = std::make_unique<ExternalProvider>(ExternalProvider::load(
          spec.name, spec.vectors_path, external_required_keys(paths)));
      return provider;
    }
  }
  fail(ErrorKind::ConfigError, "unreachable provider kind");
}

struct Pair {
  const ProviderSpec* spec;
  std::size_t dataset_index;
};

std::vector<Pair> sorted_pairs(const RunConfig& config,
                               const std::vector<TaskDataset>& datasets) {
  std::vector<const ProviderSpec*> specs;
  for (const ProviderSpec& spec : config.providers) specs.push_back(&spec);
  std::sort(specs.begin(), specs.end(),
            [](const ProviderSpec* a, const ProviderSpec* b) {
              return a->name < b->name;
            });
  std::vector<Pair> pairs;
  for (const ProviderSpec* spec : specs) {
    for (std::size_t d = 0; d < datasets.size(); ++d) {
      pairs.push_back({spec, d});
    }
  }
  return pairs;
}

// Deterministic parallel map: each worker takes the next index; outputs are
// keyed by index so thread interleaving cannot reorder results.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t n = std::min(threads, count);
  pool.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

ordered_json metrics_to_json(const Metrics& metrics) {
  ordered_json out;
  out["macro_f1"] = metrics.macro_f1;
  out["count"] = metrics.count;
  out["precision"] = metrics.precision;
  out["recall"] = metrics.recall;
  out["f1"] = metrics.f1;
  out["confusion"] = metrics.confusion;
  return out;
}

Metrics metrics_from_json(const json& doc) {
  Metrics metrics;
  metrics.macro_f1 = doc.at("macro_f1").get<double>();
  metrics.count = doc.at("count").get<std::size_t>();
  metrics.precision = doc.at("precision").get<std::vector<double>>();
  metrics.recall = doc.at("recall").get<std::vector<double>>();
  metrics.f1 = doc.at("f1").get<std::vector<double>>();
  metrics.confusion =
      doc.at("confusion").get<std::vector<std::vector<std::size_t>>>();
  return metrics;
}

}  // namespace

void stage_ingest(const RunConfig& config) {
  validate_config(config);
  const std::string digest = config_digest(config);
  Paths paths(config);
  Corpus corpus = load_corpus(config.corpus_path);
  save_corpus(corpus, paths.corpus());
  detail::write_file(paths.corpus_digest(), digest + "\n");
}

void stage_build_tasks(const RunConfig& config) {
  validate_config(config);
  const std::string digest = config_digest(config);
  Paths paths(config);
  Corpus corpus = load_ingested_corpus(config, digest);
  // build_task is pure, so regenerating in memory is byte-identical; files
  // are only rewritten when their digest shows a different run produced them.
  std::vector<TaskDataset> built;
  for (TaskKind kind : config.effective_tasks()) {
    const std::string path = paths.dataset(kind);
    TaskDataset dataset =
        build_task(corpus, kind, config.task_params, config.seed);
    if (!detail::file_exists(path) || peek_header_digest(path) != digest) {
      save_dataset(dataset, path, digest);
    }
    built.push_back(std::move(dataset));
  }
  save_requests(collect_aux_requests(built, corpus), paths.aux_texts());
}

void stage_requests(const RunConfig& config) {
  validate_config(config);
  const std::string digest = config_digest(config);
  Paths paths(config);
  Corpus corpus = load_ingested_corpus(config, digest);
  std::vector<TaskDataset> datasets = load_built_datasets(config, digest);
  save_requests(collect_aux_requests(datasets, corpus), paths.requests());

  // Permuted-tweet requests let external vector files serve the word-order
  // sensitivity analysis; built-in providers ignore them.
  std::set<std::string> test_ids;
  for (const TaskDataset& dataset : datasets) {
    for (const TaskInstance& instance : dataset.test) {
      test_ids.insert(instance.tweet_id);
    }
  }
  std::vector<AuxRequest> perm;
  const std::uint64_t seed = permutation_seed(config);
  for (const std::string& id : test_ids) {
    perm.push_back(
        {"perm:" + id, permute_tokens(corpus.by_id(id), seed)});
  }
  save_requests(perm, paths.perm_requests());
  detail::write_file(paths.requests_digest(), digest + "\n");
}

std::vector<std::string> stage_encode(const RunConfig& config) {
  validate_config(config);
  const std::string digest = config_digest(config);
  Paths paths(config);
  require_file(paths.requests(), "requests");
  require_file(paths.requests_digest(), "requests");
  check_digest(read_digest_sidecar(paths.requests_digest()), digest,
               paths.requests());
  Corpus corpus = load_ingested_corpus(config, digest);

  std::vector<std::string> missing;
  for (const ProviderSpec& spec : config.providers) {
    const std::string artifact = paths.provider_file(spec);
    if (detail::file_exists(artifact) &&
        peek_header_digest(artifact) == digest) {
      continue;
    }
    switch (spec.kind) {
      case ProviderKind::Bow: {
        save_bow_vocab(
            build_bow_vocab(corpus, spec.bow_max_terms, spec.bow_n_max),
            artifact, digest);
        break;
      }
      case ProviderKind::Lda: {
        LdaModel model = train_lda(corpus, spec.lda_topics, spec.lda_alpha,
                                   spec.lda_beta, spec.lda_iterations,
                                   mix_seed(config.seed, "lda:" + spec.name));
        save_lda_model(model, artifact, digest);
        break;
      }
      case ProviderKind::Bom: {
        WordTable table = load_word_vectors(spec.word_vectors_path);
        detail::write_file(artifact, "#bom\tword_vectors=" +
                                         spec.word_vectors_path + "\tdim=" +
                                         std::to_string(table.dim) +
                                         "\tdigest=" + digest + "\n");
        break;
      }
      case ProviderKind::External: {
        if (!detail::file_exists(spec.vectors_path)) {
          missing.push_back(spec.name);
          break;
        }
        try {
          ExternalProvider::load(spec.name, spec.vectors_path,
                                 external_required_keys(paths));
        } catch (const Error& e) {
          if (e.kind() == ErrorKind::MissingKey) {
            missing.push_back(spec.name);
            break;
          }
          throw;
        }
        detail::write_file(artifact, "#external\tvectors=" +
                                         spec.vectors_path + "\tdigest=" +
                                         digest + "\n");
        break;
      }
    }
  }
  return missing;
}

void stage_train(const RunConfig& config) {
  validate_config(config);
  const std::string digest = config_digest(config);
  Paths paths(config);
  Corpus corpus = load_ingested_corpus(config, digest);
  std::vector<TaskDataset> datasets = load_built_datasets(config, digest);

  std::unordered_map<std::string, std::unique_ptr<EmbeddingProvider>> providers;
  for (const ProviderSpec& spec : config.providers) {
    providers.emplace(spec.name, load_provider(config, spec, digest));
  }
  std::vector<Pair> pairs = sorted_pairs(config, datasets);
  parallel_for(pairs.size(), config.threads, [&](std::size_t i) {
    const Pair& pair = pairs[i];
    const TaskDataset& dataset = datasets[pair.dataset_index];
    const EmbeddingProvider& provider = *providers.at(pair.spec->name);
    TrainConfig train = config.train;
    train.seed = pair_seed(config, pair.spec->name, dataset.kind);
    ProbeModel model = train_probe(dataset, provider, corpus, train);
    save_probe(model, paths.probe(pair.spec->name, dataset.kind), digest);
    Metrics metrics =
        evaluate_split(model, dataset, Split::Test, provider, corpus);
    ordered_json out;
    out["provider"] = pair.spec->name;
    out["supervised"] = pair.spec->supervised;
    out["task"] = to_string(dataset.kind);
    out["split"] = "test";
    out["metrics"] = metrics_to_json(metrics);
    out["config_digest"] = digest;
    detail::write_file(paths.metrics(pair.spec->name, dataset.kind),
                       out.dump(2) + "\n");
  });
}

void stage_analyze(const RunConfig& config) {
  validate_config(config);
  const std::string digest = config_digest(config);
  Paths paths(config);
  Corpus corpus = load_ingested_corpus(config, digest);
  std::vector<TaskDataset> datasets = load_built_datasets(config, digest);

  std::unordered_map<std::string, std::unique_ptr<EmbeddingProvider>> providers;
  for (const ProviderSpec& spec : config.providers) {
    providers.emplace(spec.name, load_provider(config, spec, digest));
  }
  std::vector<Pair> pairs = sorted_pairs(config, datasets);
  parallel_for(pairs.size(), config.threads, [&](std::size_t i) {
    const Pair& pair = pairs[i];
    const TaskDataset& dataset = datasets[pair.dataset_index];
    const EmbeddingProvider& provider = *providers.at(pair.spec->name);
    const std::string probe_path = paths.probe(pair.spec->name, dataset.kind);
    require_file(probe_path, "train");
    std::string found;
    ProbeModel model = load_probe(probe_path, &found);
    check_digest(found, digest, probe_path);
    LengthProfile profile = f1_by_length(model, dataset, Split::Test, provider,
                                         corpus, config.analysis);
    SensitivityResult sensitivity =
        permutation_sensitivity(model, dataset, Split::Test, provider, corpus,
                                permutation_seed(config), config.analysis);
    ordered_json out;
    out["provider"] = pair.spec->name;
    out["task"] = to_string(dataset.kind);
    ordered_json bins = ordered_json::array();
    for (const LengthBin& bin : profile.bins) {
      bins.push_back(
          {{"bin", bin.bin}, {"count", bin.count}, {"macro_f1", bin.macro_f1}});
    }
    out["length_profile"] = {{"bins", std::move(bins)},
                             {"rho_defined", profile.rho_defined},
                             {"rho", profile.rho},
                             {"category", to_string(profile.category)}};
    out["sensitivity"] = {{"f1_original", sensitivity.f1_original},
                          {"f1_permuted", sensitivity.f1_permuted},
                          {"delta_points", sensitivity.delta_points},
                          {"category", to_string(sensitivity.category)},
                          {"seed", sensitivity.seed}};
    out["config_digest"] = digest;
    detail::write_file(paths.analysis(pair.spec->name, dataset.kind),
                       out.dump(2) + "\n");
  });
}

AnalysisReport stage_report(const RunConfig& config) {
  validate_config(config);
  const std::string digest = config_digest(config);
  Paths paths(config);
  std::vector<RunResult> runs;
  for (const ProviderSpec& spec : config.providers) {
    for (TaskKind kind : config.effective_tasks()) {
      const std::string metrics_path = paths.metrics(spec.name, kind);
      const std::string analysis_path = paths.analysis(spec.name, kind);
      require_file(metrics_path, "train");
      require_file(analysis_path, "analyze");
      json metrics_doc = json::parse(detail::read_file(metrics_path));
      json analysis_doc = json::parse(detail::read_file(analysis_path));
      check_digest(metrics_doc.at("config_digest").get<std::string>(), digest,
                   metrics_path);
      check_digest(analysis_doc.at("config_digest").get<std::string>(), digest,
                   analysis_path);
      RunResult run;
      run.provider = spec.name;
      run.supervised = spec.supervised;
      run.task = kind;
      run.metrics = metrics_from_json(metrics_doc.at("metrics"));
      const json& profile = analysis_doc.at("length_profile");
      for (const json& bin : profile.at("bins")) {
        run.length_profile.bins.push_back(
            LengthBin{bin.at("bin").get<std::size_t>(),
                      bin.at("count").get<std::size_t>(),
                      bin.at("macro_f1").get<double>()});
      }
      run.length_profile.rho_defined = profile.at("rho_defined").get<bool>();
      run.length_profile.rho = profile.at("rho").get<double>();
      const std::string category = profile.at("category").get<std::string>();
      run.length_profile.category =
          category == "positively-correlated"
              ? LengthCategory::PositivelyCorrelated
              : category == "negatively-correlated"
                    ? LengthCategory::NegativelyCorrelated
                    : LengthCategory::None;
      const json& sensitivity = analysis_doc.at("sensitivity");
      run.sensitivity.f1_original = sensitivity.at("f1_original").get<double>();
      run.sensitivity.f1_permuted = sensitivity.at("f1_permuted").get<double>();
      run.sensitivity.delta_points =
          sensitivity.at("delta_points").get<double>();
      run.sensitivity.seed = sensitivity.at("seed").get<std::uint64_t>();
      const std::string sensitivity_category =
          sensitivity.at("category").get<std::string>();
      run.sensitivity.category =
          sensitivity_category == "invariant"
              ? SensitivityCategory::Invariant
              : sensitivity_category == "significantly-deviant"
                    ? SensitivityCategory::SignificantlyDeviant
                    : SensitivityCategory::Intermediate;
      runs.push_back(std::move(run));
    }
  }
  AnalysisReport report = build_report(runs, config.seed, digest);
  write_report_json(report, paths.report_json());
  write_f1_matrix_tsv(report, paths.report_tsv());
  write_summary_text(report, paths.report_summary());
  return report;
}

PipelineResult run_pipeline(const RunConfig& config) {
  validate_config(config);
  stage_ingest(config);
  stage_build_tasks(config);
  stage_requests(config);
  std::vector<std::string> missing = stage_encode(config);
  if (!missing.empty()) {
    PipelineResult result;
    result.exit_code = 4;
    result.missing_vector_providers = std::move(missing);
    return result;
  }
  stage_train(config);
  stage_analyze(config);
  PipelineResult result;
  result.report = stage_report(config);
  return result;
}

}  // namespace tweetprobe
