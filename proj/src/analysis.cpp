#include "tweetprobe/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

#include "text_util.hpp"
#include "tweetprobe/error.hpp"
#include "tweetprobe/rng.hpp"

namespace tweetprobe {

namespace {

std::vector<double> mean_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // Tied run occupies ranks i+1 .. j+1; everyone gets the average.
    double rank = static_cast<double>(i + j + 2) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mean_x += xs[i];
    mean_y += ys[i];
  }
  mean_x /= n;
  mean_y /= n;
  double cov = 0.0, var_x = 0.0, var_y = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double dx = xs[i] - mean_x;
    double dy = ys[i] - mean_y;
    cov += dx * dy;
    var_x += dx * dx;
    var_y += dy * dy;
  }
  if (var_x == 0.0 || var_y == 0.0) {
    fail(ErrorKind::ZeroVariance, "constant input has no rank correlation");
  }
  return cov / std::sqrt(var_x * var_y);
}

}  // namespace

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) {
    fail(ErrorKind::LengthMismatch,
         std::to_string(xs.size()) + " xs vs " + std::to_string(ys.size()) +
             " ys");
  }
  if (xs.size() < 3) {
    fail(ErrorKind::TooFewPoints, "need at least 3 points");
  }
  return pearson(mean_ranks(xs), mean_ranks(ys));
}

const char* to_string(LengthCategory c) {
  switch (c) {
    case LengthCategory::PositivelyCorrelated: return "positively-correlated";
    case LengthCategory::NegativelyCorrelated: return "negatively-correlated";
    case LengthCategory::None: return "none";
  }
  return "none";
}

const char* to_string(SensitivityCategory c) {
  switch (c) {
    case SensitivityCategory::Invariant: return "invariant";
    case SensitivityCategory::SignificantlyDeviant:
      return "significantly-deviant";
    case SensitivityCategory::Intermediate: return "intermediate";
  }
  return "intermediate";
}

LengthProfile profile_from_bins(std::vector<LengthBin> bins,
                                const AnalysisParams& params) {
  std::sort(bins.begin(), bins.end(),
            [](const LengthBin& a, const LengthBin& b) { return a.bin < b.bin; });
  LengthProfile profile;
  profile.bins = std::move(bins);
  std::vector<double> xs, ys;
  for (const LengthBin& bin : profile.bins) {
    if (bin.count >= params.min_bin_count) {
      xs.push_back(static_cast<double>(bin.bin));
      ys.push_back(bin.macro_f1);
    }
  }
  if (xs.size() < 3) return profile;  // category none, rho undefined
  try {
    profile.rho = spearman(xs, ys);
    profile.rho_defined = true;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ZeroVariance) throw;
    return profile;
  }
  if (profile.rho >= params.rho_threshold) {
    profile.category = LengthCategory::PositivelyCorrelated;
  } else if (profile.rho <= -params.rho_threshold) {
    profile.category = LengthCategory::NegativelyCorrelated;
  }
  return profile;
}

LengthProfile f1_by_length(const ProbeModel& model, const TaskDataset& dataset,
                           Split split, const EmbeddingProvider& provider,
                           const Corpus& corpus, const AnalysisParams& params) {
  const std::vector<TaskInstance>& instances = dataset.split(split);
  if (instances.empty()) {
    fail(ErrorKind::EmptySplit,
         std::string(to_string(split)) + " split is empty");
  }
  std::map<std::size_t, std::pair<std::vector<std::size_t>,
                                  std::vector<std::size_t>>>
      by_bin;  // bin -> (predictions, golds)
  for (const TaskInstance& instance : instances) {
    const Tweet& tweet = corpus.by_id(instance.tweet_id);
    std::size_t bin = bin_length(word_count(tweet), params.length_bin_size);
    std::size_t predicted =
        predict_class(model, assemble_features(instance, provider, corpus));
    by_bin[bin].first.push_back(predicted);
    by_bin[bin].second.push_back(instance.label);
  }
  std::vector<LengthBin> bins;
  for (const auto& [bin, labels] : by_bin) {
    bins.push_back(LengthBin{
        bin, labels.first.size(),
        macro_f1(labels.first, labels.second, model.class_count)});
  }
  return profile_from_bins(std::move(bins), params);
}

SensitivityCategory sensitivity_category(double delta_points,
                                         const AnalysisParams& params) {
  if (std::abs(delta_points) < params.invariant_max_points) {
    return SensitivityCategory::Invariant;
  }
  if (delta_points >= params.deviant_min_points) {
    return SensitivityCategory::SignificantlyDeviant;
  }
  return SensitivityCategory::Intermediate;
}

SensitivityResult permutation_sensitivity(const ProbeModel& model,
                                          const TaskDataset& dataset,
                                          Split split,
                                          const EmbeddingProvider& provider,
                                          const Corpus& corpus,
                                          std::uint64_t seed,
                                          const AnalysisParams& params) {
  const std::vector<TaskInstance>& instances = dataset.split(split);
  if (instances.empty()) {
    fail(ErrorKind::EmptySplit,
         std::string(to_string(split)) + " split is empty");
  }
  std::vector<std::size_t> original, permuted, golds;
  original.reserve(instances.size());
  permuted.reserve(instances.size());
  golds.reserve(instances.size());
  for (const TaskInstance& instance : instances) {
    const Tweet& tweet = corpus.by_id(instance.tweet_id);
    golds.push_back(instance.label);
    original.push_back(
        predict_class(model, assemble_features(instance, provider, corpus)));
    // Labels stay derived from the original tweet; only the tweet encoding
    // sees the shuffled order. Aux inputs are unchanged.
    std::vector<RepVector> parts;
    parts.push_back(provider.encode(
        {"perm:" + tweet.id, permute_tokens(tweet, seed)}));
    for (const std::string& aux : instance.aux_texts) {
      parts.push_back(provider.encode({aux_key_for(aux), aux}));
    }
    permuted.push_back(predict_class(model, concat(parts)));
  }
  SensitivityResult result;
  result.seed = seed;
  result.f1_original = macro_f1(original, golds, model.class_count);
  result.f1_permuted = macro_f1(permuted, golds, model.class_count);
  result.delta_points = (result.f1_original - result.f1_permuted) * 100.0;
  result.category = sensitivity_category(result.delta_points, params);
  return result;
}

namespace {

std::size_t task_column(TaskKind kind) {
  for (std::size_t i = 0; i < kAllTasks.size(); ++i) {
    if (kAllTasks[i] == kind) return i;
  }
  return 0;
}

std::vector<std::string> argmax_providers(
    const AnalysisReport& report, std::size_t column,
    const std::vector<bool>& eligible) {
  double best = -1.0;
  for (std::size_t row = 0; row < report.providers.size(); ++row) {
    if (!eligible[row] || !report.f1[row][column].present) continue;
    best = std::max(best, report.f1[row][column].macro_f1);
  }
  std::vector<std::string> winners;
  if (best < 0.0) return winners;
  for (std::size_t row = 0; row < report.providers.size(); ++row) {
    if (eligible[row] && report.f1[row][column].present &&
        report.f1[row][column].macro_f1 == best) {
      winners.push_back(report.providers[row]);
    }
  }
  return winners;
}

}  // namespace

AnalysisReport build_report(const std::vector<RunResult>& runs,
                            std::uint64_t seed,
                            const std::string& config_digest) {
  AnalysisReport report;
  report.seed = seed;
  report.config_digest = config_digest;
  report.runs = runs;

  std::set<std::pair<std::string, std::size_t>> seen;
  std::map<std::string, bool> providers;
  for (const RunResult& run : runs) {
    auto key = std::make_pair(run.provider, task_column(run.task));
    if (!seen.insert(key).second) {
      fail(ErrorKind::DuplicateRun,
           run.provider + " / " + to_string(run.task) + " reported twice");
    }
    auto [it, inserted] = providers.emplace(run.provider, run.supervised);
    if (!inserted && it->second != run.supervised) {
      fail(ErrorKind::DuplicateRun,
           run.provider + " is both supervised and unsupervised");
    }
  }
  for (const auto& [name, supervised] : providers) {
    report.providers.push_back(name);
    report.supervised.push_back(supervised);
  }
  report.f1.assign(report.providers.size(), {});
  for (const RunResult& run : runs) {
    std::size_t row = static_cast<std::size_t>(
        std::lower_bound(report.providers.begin(), report.providers.end(),
                         run.provider) -
        report.providers.begin());
    report.f1[row][task_column(run.task)] = {true, run.metrics.macro_f1};
  }

  std::vector<bool> all(report.providers.size(), true);
  std::vector<bool> unsupervised(report.providers.size());
  std::vector<bool> supervised(report.providers.size());
  for (std::size_t row = 0; row < report.providers.size(); ++row) {
    unsupervised[row] = !report.supervised[row];
    supervised[row] = report.supervised[row];
  }
  for (std::size_t column = 0; column < kAllTasks.size(); ++column) {
    report.best_overall[column] = argmax_providers(report, column, all);
    report.best_unsupervised[column] =
        argmax_providers(report, column, unsupervised);
    report.best_supervised[column] =
        argmax_providers(report, column, supervised);
  }
  return report;
}

namespace {

using nlohmann::ordered_json;

ordered_json profile_to_json(const LengthProfile& profile) {
  ordered_json bins = ordered_json::array();
  for (const LengthBin& bin : profile.bins) {
    bins.push_back({{"bin", bin.bin},
                    {"count", bin.count},
                    {"macro_f1", bin.macro_f1}});
  }
  ordered_json out;
  out["bins"] = std::move(bins);
  out["rho_defined"] = profile.rho_defined;
  if (profile.rho_defined) out["rho"] = profile.rho;
  out["category"] = to_string(profile.category);
  return out;
}

ordered_json sensitivity_to_json(const SensitivityResult& result) {
  ordered_json out;
  out["f1_original"] = result.f1_original;
  out["f1_permuted"] = result.f1_permuted;
  out["delta_points"] = result.delta_points;
  out["category"] = to_string(result.category);
  out["seed"] = result.seed;
  return out;
}

std::string percent(double f1) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f", f1 * 100.0);
  return buffer;
}

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ", ";
    out += names[i];
  }
  return out.empty() ? "none" : out;
}

}  // namespace

void write_report_json(const AnalysisReport& report, const std::string& path) {
  ordered_json out;
  out["seed"] = report.seed;
  out["config_digest"] = report.config_digest;
  ordered_json tasks = ordered_json::array();
  for (TaskKind kind : kAllTasks) tasks.push_back(to_string(kind));
  out["tasks"] = std::move(tasks);

  ordered_json rows = ordered_json::array();
  for (std::size_t row = 0; row < report.providers.size(); ++row) {
    ordered_json entry;
    entry["provider"] = report.providers[row];
    entry["supervised"] = static_cast<bool>(report.supervised[row]);
    ordered_json cells = ordered_json::array();
    for (std::size_t column = 0; column < kAllTasks.size(); ++column) {
      const ReportCell& cell = report.f1[row][column];
      cells.push_back(cell.present ? ordered_json(cell.macro_f1)
                                   : ordered_json(nullptr));
    }
    entry["macro_f1"] = std::move(cells);
    rows.push_back(std::move(entry));
  }
  out["f1_matrix"] = std::move(rows);

  auto markers = [&](const std::array<std::vector<std::string>, 8>& best) {
    ordered_json cols = ordered_json::array();
    for (const auto& names : best) cols.push_back(names);
    return cols;
  };
  out["best_overall"] = markers(report.best_overall);
  out["best_unsupervised"] = markers(report.best_unsupervised);
  out["best_supervised"] = markers(report.best_supervised);

  ordered_json runs = ordered_json::array();
  for (const RunResult& run : report.runs) {
    ordered_json entry;
    entry["provider"] = run.provider;
    entry["supervised"] = run.supervised;
    entry["task"] = to_string(run.task);
    entry["macro_f1"] = run.metrics.macro_f1;
    entry["instances"] = run.metrics.count;
    entry["length_profile"] = profile_to_json(run.length_profile);
    entry["sensitivity"] = sensitivity_to_json(run.sensitivity);
    runs.push_back(std::move(entry));
  }
  out["runs"] = std::move(runs);
  detail::write_file(path, out.dump(2) + "\n");
}

void write_f1_matrix_tsv(const AnalysisReport& report,
                         const std::string& path) {
  std::string out = "model";
  for (TaskKind kind : kAllTasks) {
    out.push_back('\t');
    out += to_string(kind);
  }
  out.push_back('\n');
  for (std::size_t row = 0; row < report.providers.size(); ++row) {
    out += report.providers[row];
    for (std::size_t column = 0; column < kAllTasks.size(); ++column) {
      out.push_back('\t');
      const ReportCell& cell = report.f1[row][column];
      out += cell.present ? percent(cell.macro_f1) : "-";
    }
    out.push_back('\n');
  }
  detail::write_file(path, out);
}

void write_summary_text(const AnalysisReport& report, const std::string& path) {
  std::string out;
  for (std::size_t row = 0; row < report.providers.size(); ++row) {
    const std::string& name = report.providers[row];
    out += "== " + name +
           (report.supervised[row] ? " (supervised)" : " (unsupervised)") +
           " ==\n";
    auto collect = [&](const std::array<std::vector<std::string>, 8>& best) {
      std::vector<std::string> tasks;
      for (std::size_t column = 0; column < kAllTasks.size(); ++column) {
        if (std::find(best[column].begin(), best[column].end(), name) !=
            best[column].end()) {
          tasks.emplace_back(to_string(kAllTasks[column]));
        }
      }
      return tasks;
    };
    out += "best of all in: " + join_names(collect(report.best_overall)) + "\n";
    if (report.supervised[row]) {
      out += "best of supervised in: " +
             join_names(collect(report.best_supervised)) + "\n";
    } else {
      out += "best of unsupervised in: " +
             join_names(collect(report.best_unsupervised)) + "\n";
    }
    std::vector<std::string> positive, negative, invariant, deviant;
    for (const RunResult& run : report.runs) {
      if (run.provider != name) continue;
      const char* task = to_string(run.task);
      switch (run.length_profile.category) {
        case LengthCategory::PositivelyCorrelated:
          positive.emplace_back(task);
          break;
        case LengthCategory::NegativelyCorrelated:
          negative.emplace_back(task);
          break;
        case LengthCategory::None: break;
      }
      switch (run.sensitivity.category) {
        case SensitivityCategory::Invariant:
          invariant.emplace_back(task);
          break;
        case SensitivityCategory::SignificantlyDeviant:
          deviant.emplace_back(task);
          break;
        case SensitivityCategory::Intermediate: break;
      }
    }
    out += "length positively correlated: " + join_names(positive) + "\n";
    out += "length negatively correlated: " + join_names(negative) + "\n";
    out += "order invariant: " + join_names(invariant) + "\n";
    out += "order significantly deviant: " + join_names(deviant) + "\n";
    out.push_back('\n');
  }
  detail::write_file(path, out);
}

}  // namespace tweetprobe
