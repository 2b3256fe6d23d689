// The property probe: a softmax layer over frozen concatenated
// representations, trained by deterministic mini-batch gradient descent.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tweetprobe/corpus.hpp"
#include "tweetprobe/encoders.hpp"
#include "tweetprobe/taskgen.hpp"
#include "tweetprobe/vector.hpp"

namespace tweetprobe {

enum class Standardize { Auto, On, Off };

struct TrainConfig {
  double learning_rate = 0.01;
  std::size_t batch_size = 64;
  std::size_t max_epochs = 100;
  double l2 = 1e-4;
  std::size_t patience = 5;  // epochs without dev macro-F1 improvement
  std::uint64_t seed = 0;
  Standardize standardize = Standardize::Auto;  // Auto: on for dense features
};

struct Standardization {
  bool enabled = false;
  std::vector<double> mean;
  std::vector<double> scale;  // 1 for zero-variance dimensions
};

struct EpochLog {
  double train_loss = 0.0;
  double dev_macro_f1 = 0.0;
};

struct ProbeModel {
  std::size_t class_count = 0;
  std::size_t feature_dim = 0;
  std::vector<double> weights;  // class_count x feature_dim, row-major
  std::vector<double> bias;     // class_count
  Standardization standardization;

  TaskKind task = TaskKind::Length;
  std::string provider_name;
  std::vector<std::string> class_labels;
  TrainConfig config;

  double initial_loss = 0.0;
  std::vector<EpochLog> log;
};

struct Metrics {
  double macro_f1 = 0.0;
  std::vector<double> precision, recall, f1;
  std::vector<std::vector<std::size_t>> confusion;  // rows gold, cols predicted
  std::size_t count = 0;
};

// [encode(tweet); encode(aux_1); ...]; dim = provider.dim * (1 + arity).
RepVector assemble_features(const TaskInstance& instance,
                            const EmbeddingProvider& provider,
                            const Corpus& corpus);

ProbeModel train_probe(const TaskDataset& dataset,
                       const EmbeddingProvider& provider, const Corpus& corpus,
                       const TrainConfig& config = {});

// softmax(W x + b); probabilities sum to 1.
std::vector<double> predict(const ProbeModel& model, const RepVector& features);
// argmax with lowest-index tie-break.
std::size_t predict_class(const ProbeModel& model, const RepVector& features);

double macro_f1(const std::vector<std::size_t>& predictions,
                const std::vector<std::size_t>& golds,
                std::size_t class_count);
Metrics compute_metrics(const std::vector<std::size_t>& predictions,
                        const std::vector<std::size_t>& golds,
                        std::size_t class_count);

Metrics evaluate_split(const ProbeModel& model, const TaskDataset& dataset,
                       Split split, const EmbeddingProvider& provider,
                       const Corpus& corpus);

using LabeledBatch = std::vector<std::pair<RepVector, std::size_t>>;

struct ProbeGradient {
  std::vector<double> weights;  // same layout as ProbeModel::weights
  std::vector<double> bias;
  double loss = 0.0;  // mean cross-entropy + 0.5 * l2 * ||W||^2
};

// Analytic gradient of the regularized cross-entropy at the model's
// current parameters over the batch (standardization applied).
ProbeGradient probe_gradient(const ProbeModel& model, const LabeledBatch& batch,
                             double l2);

// Central finite differences on a random parameter subset (>= 50 when the
// model has that many); returns the max relative error.
double grad_check(const ProbeModel& model, const LabeledBatch& batch,
                  double epsilon = 1e-5);

void save_probe(const ProbeModel& model, const std::string& path,
                const std::string& digest = "");
ProbeModel load_probe(const std::string& path,
                      std::string* digest_out = nullptr);

}  // namespace tweetprobe
