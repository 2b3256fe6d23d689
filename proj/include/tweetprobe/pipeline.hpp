// End-to-end orchestration: config parsing/validation, staged artifact flow
// with digest checks, and the full ingest-to-report pipeline.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tweetprobe/analysis.hpp"
#include "tweetprobe/probe.hpp"
#include "tweetprobe/taskgen.hpp"

namespace tweetprobe {

enum class ProviderKind { Bow, Bom, Lda, External };
const char* to_string(ProviderKind k);

struct ProviderSpec {
  std::string name;
  ProviderKind kind = ProviderKind::Bow;
  bool supervised = false;
  // bow
  std::size_t bow_max_terms = 50000;
  std::size_t bow_n_max = 5;
  // bom
  std::string word_vectors_path;
  // lda
  std::size_t lda_topics = 200;
  double lda_alpha = -1.0;  // < 0 -> 50/K
  double lda_beta = 0.01;
  std::size_t lda_iterations = 1000;
  std::size_t lda_infer_iterations = 100;
  // external
  std::string vectors_path;
};

struct RunConfig {
  std::string corpus_path;
  std::string output_dir;
  std::vector<TaskKind> tasks;  // empty -> all 8
  TaskParams task_params;
  std::vector<ProviderSpec> providers;
  TrainConfig train;
  AnalysisParams analysis;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  std::vector<TaskKind> effective_tasks() const;
};

// JSON config document; environment overrides TWEETPROBE_OUTPUT and
// TWEETPROBE_THREADS are applied here.
RunConfig load_run_config(const std::string& path);
// ConfigError on missing paths, duplicate provider names, bad parameters.
void validate_config(const RunConfig& config);

// Digest over the semantic config and the corpus bytes; stamped into every
// derived artifact and checked when stages consume each other's outputs.
std::string config_digest(const RunConfig& config);

struct PipelineResult {
  int exit_code = 0;  // 0 ok, 4 missing external vectors
  std::optional<AnalysisReport> report;
  std::vector<std::string> missing_vector_providers;
};

// Stage entry points (each validates its inputs' digests).
void stage_ingest(const RunConfig& config);
void stage_build_tasks(const RunConfig& config);
void stage_requests(const RunConfig& config);
// Returns provider names whose external vector files are absent/incomplete.
std::vector<std::string> stage_encode(const RunConfig& config);
void stage_train(const RunConfig& config);
void stage_analyze(const RunConfig& config);
AnalysisReport stage_report(const RunConfig& config);

// All stages in order. Stops with exit_code 4 after writing request lists
// when an external provider has no complete vector file.
PipelineResult run_pipeline(const RunConfig& config);

}  // namespace tweetprobe
