// The three evaluation perspectives: F1 comparison with best-of markers,
// accuracy versus tweet length, and word-order permutation sensitivity.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tweetprobe/probe.hpp"

namespace tweetprobe {

// Pearson correlation of mean-ranked values (ties get average ranks).
// Throws TooFewPoints (< 3) and ZeroVariance (constant input).
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

enum class LengthCategory { PositivelyCorrelated, NegativelyCorrelated, None };
const char* to_string(LengthCategory c);

struct LengthBin {
  std::size_t bin = 0;
  std::size_t count = 0;
  double macro_f1 = 0.0;
  bool operator==(const LengthBin&) const = default;
};

struct LengthProfile {
  std::vector<LengthBin> bins;  // ascending bin index, nonempty bins only
  bool rho_defined = false;
  double rho = 0.0;
  LengthCategory category = LengthCategory::None;
};

struct AnalysisParams {
  std::size_t length_bin_size = 4;
  std::size_t min_bin_count = 50;   // bins below this don't enter the trend
  double rho_threshold = 0.5;
  double invariant_max_points = 1.0;
  double deviant_min_points = 5.0;
};

// Trend categorization shared by f1_by_length and its tests.
LengthProfile profile_from_bins(std::vector<LengthBin> bins,
                                const AnalysisParams& params);

LengthProfile f1_by_length(const ProbeModel& model, const TaskDataset& dataset,
                           Split split, const EmbeddingProvider& provider,
                           const Corpus& corpus,
                           const AnalysisParams& params = {});

enum class SensitivityCategory { Invariant, SignificantlyDeviant, Intermediate };
const char* to_string(SensitivityCategory c);

SensitivityCategory sensitivity_category(double delta_points,
                                         const AnalysisParams& params);

struct SensitivityResult {
  double f1_original = 0.0;
  double f1_permuted = 0.0;
  double delta_points = 0.0;  // (original - permuted) * 100
  SensitivityCategory category = SensitivityCategory::Invariant;
  std::uint64_t seed = 0;
};

// Re-encodes each test tweet from its permuted token order (aux texts and
// labels unchanged) and compares macro F1. External providers resolve the
// permuted encoding through the key "perm:<tweet_id>".
SensitivityResult permutation_sensitivity(const ProbeModel& model,
                                          const TaskDataset& dataset,
                                          Split split,
                                          const EmbeddingProvider& provider,
                                          const Corpus& corpus,
                                          std::uint64_t seed,
                                          const AnalysisParams& params = {});

struct RunResult {
  std::string provider;
  bool supervised = false;
  TaskKind task = TaskKind::Length;
  Metrics metrics;
  LengthProfile length_profile;
  SensitivityResult sensitivity;
};

struct ReportCell {
  bool present = false;
  double macro_f1 = 0.0;
};

struct AnalysisReport {
  std::vector<std::string> providers;  // sorted by name
  std::vector<bool> supervised;        // parallel to providers
  std::vector<std::array<ReportCell, 8>> f1;  // row per provider, col per task
  std::array<std::vector<std::string>, 8> best_overall;
  std::array<std::vector<std::string>, 8> best_unsupervised;
  std::array<std::vector<std::string>, 8> best_supervised;
  std::vector<RunResult> runs;
  std::uint64_t seed = 0;
  std::string config_digest;
};

AnalysisReport build_report(const std::vector<RunResult>& runs,
                            std::uint64_t seed = 0,
                            const std::string& config_digest = "");

void write_report_json(const AnalysisReport& report, const std::string& path);
void write_f1_matrix_tsv(const AnalysisReport& report, const std::string& path);
void write_summary_text(const AnalysisReport& report, const std::string& path);

}  // namespace tweetprobe
