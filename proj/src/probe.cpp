#include "tweetprobe/probe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "text_util.hpp"
#include "tweetprobe/error.hpp"
#include "tweetprobe/rng.hpp"

namespace tweetprobe {

namespace {

std::vector<double> standardized_dense(const Standardization& stats,
                                       const RepVector& features) {
  std::vector<double> x = features.to_dense();
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = (x[i] - stats.mean[i]) / stats.scale[i];
  }
  return x;
}

// z = W x + b with the model's standardization applied.
std::vector<double> logits_for(const ProbeModel& model,
                               const RepVector& features) {
  if (features.dim() != model.feature_dim) {
    fail(ErrorKind::DimensionMismatch,
         "feature dim " + std::to_string(features.dim()) + " != model dim " +
             std::to_string(model.feature_dim));
  }
  const std::size_t C = model.class_count;
  const std::size_t D = model.feature_dim;
  std::vector<double> z = model.bias;
  if (model.standardization.enabled) {
    std::vector<double> x = standardized_dense(model.standardization, features);
    for (std::size_t c = 0; c < C; ++c) {
      const double* row = model.weights.data() + c * D;
      double dot = 0.0;
      for (std::size_t i = 0; i < D; ++i) dot += row[i] * x[i];
      z[c] += dot;
    }
  } else if (features.is_sparse()) {
    for (std::size_t c = 0; c < C; ++c) {
      const double* row = model.weights.data() + c * D;
      double dot = 0.0;
      for (const auto& [index, value] : features.sparse_entries()) {
        dot += row[index] * value;
      }
      z[c] += dot;
    }
  } else {
    const std::vector<double>& x = features.dense_values();
    for (std::size_t c = 0; c < C; ++c) {
      const double* row = model.weights.data() + c * D;
      double dot = 0.0;
      for (std::size_t i = 0; i < D; ++i) dot += row[i] * x[i];
      z[c] += dot;
    }
  }
  return z;
}

std::vector<double> softmax(std::vector<double> z) {
  double zmax = -std::numeric_limits<double>::infinity();
  for (double v : z) zmax = std::max(zmax, v);
  double total = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    total += v;
  }
  for (double& v : z) v /= total;
  return z;
}

double weight_norm_sq(const ProbeModel& model) {
  double total = 0.0;
  for (double w : model.weights) total += w * w;
  return total;
}

}  // namespace

RepVector assemble_features(const TaskInstance& instance,
                            const EmbeddingProvider& provider,
                            const Corpus& corpus) {
  const Tweet& tweet = corpus.by_id(instance.tweet_id);
  std::vector<RepVector> parts;
  parts.reserve(1 + instance.aux_texts.size());
  parts.push_back(provider.encode({tweet.id, tweet.raw_text}));
  for (const std::string& aux : instance.aux_texts) {
    parts.push_back(provider.encode({aux_key_for(aux), aux}));
  }
  for (const RepVector& part : parts) {
    if (part.dim() != provider.dim()) {
      fail(ErrorKind::DimensionMismatch,
           "provider " + provider.name() + " emitted dim " +
               std::to_string(part.dim()) + " != " +
               std::to_string(provider.dim()));
    }
  }
  return concat(parts);
}

std::vector<double> predict(const ProbeModel& model,
                            const RepVector& features) {
  return softmax(logits_for(model, features));
}

std::size_t predict_class(const ProbeModel& model, const RepVector& features) {
  std::vector<double> p = predict(model, features);
  std::size_t best = 0;
  for (std::size_t c = 1; c < p.size(); ++c) {
    if (p[c] > p[best]) best = c;  // lowest index wins ties
  }
  return best;
}

Metrics compute_metrics(const std::vector<std::size_t>& predictions,
                        const std::vector<std::size_t>& golds,
                        std::size_t class_count) {
  if (predictions.empty() && golds.empty()) {
    fail(ErrorKind::EmptyInput, "no labels to score");
  }
  if (predictions.size() != golds.size()) {
    fail(ErrorKind::LengthMismatch,
         std::to_string(predictions.size()) + " predictions vs " +
             std::to_string(golds.size()) + " golds");
  }
  if (class_count < 1) fail(ErrorKind::EmptyInput, "class_count must be >= 1");
  Metrics metrics;
  metrics.count = golds.size();
  metrics.confusion.assign(class_count,
                           std::vector<std::size_t>(class_count, 0));
  for (std::size_t i = 0; i < golds.size(); ++i) {
    if (golds[i] >= class_count || predictions[i] >= class_count) {
      fail(ErrorKind::DimensionMismatch, "label out of class range");
    }
    ++metrics.confusion[golds[i]][predictions[i]];
  }
  metrics.precision.assign(class_count, 0.0);
  metrics.recall.assign(class_count, 0.0);
  metrics.f1.assign(class_count, 0.0);
  double f1_total = 0.0;
  for (std::size_t c = 0; c < class_count; ++c) {
    std::size_t tp = metrics.confusion[c][c];
    std::size_t gold_c = 0, pred_c = 0;
    for (std::size_t j = 0; j < class_count; ++j) {
      gold_c += metrics.confusion[c][j];
      pred_c += metrics.confusion[j][c];
    }
    double precision =
        pred_c > 0 ? static_cast<double>(tp) / static_cast<double>(pred_c) : 0.0;
    double recall =
        gold_c > 0 ? static_cast<double>(tp) / static_cast<double>(gold_c) : 0.0;
    metrics.precision[c] = precision;
    metrics.recall[c] = recall;
    // A class absent from both predictions and gold counts as F1 = 0.
    metrics.f1[c] = (precision + recall) > 0.0
                        ? 2.0 * precision * recall / (precision + recall)
                        : 0.0;
    f1_total += metrics.f1[c];
  }
  metrics.macro_f1 = f1_total / static_cast<double>(class_count);
  return metrics;
}

double macro_f1(const std::vector<std::size_t>& predictions,
                const std::vector<std::size_t>& golds,
                std::size_t class_count) {
  return compute_metrics(predictions, golds, class_count).macro_f1;
}

ProbeGradient probe_gradient(const ProbeModel& model, const LabeledBatch& batch,
                             double l2) {
  if (batch.empty()) fail(ErrorKind::EmptyInput, "empty gradient batch");
  const std::size_t C = model.class_count;
  const std::size_t D = model.feature_dim;
  ProbeGradient grad;
  grad.weights.assign(C * D, 0.0);
  grad.bias.assign(C, 0.0);
  double loss = 0.0;
  for (const auto& [features, label] : batch) {
    if (label >= C) fail(ErrorKind::DimensionMismatch, "label out of range");
    std::vector<double> p = softmax(logits_for(model, features));
    loss += -std::log(std::max(p[label], 1e-300));
    p[label] -= 1.0;
    for (std::size_t c = 0; c < C; ++c) grad.bias[c] += p[c];
    if (model.standardization.enabled) {
      std::vector<double> x =
          standardized_dense(model.standardization, features);
      for (std::size_t c = 0; c < C; ++c) {
        double* row = grad.weights.data() + c * D;
        for (std::size_t i = 0; i < D; ++i) row[i] += p[c] * x[i];
      }
    } else if (features.is_sparse()) {
      for (std::size_t c = 0; c < C; ++c) {
        double* row = grad.weights.data() + c * D;
        for (const auto& [index, value] : features.sparse_entries()) {
          row[index] += p[c] * value;
        }
      }
    } else {
      const std::vector<double>& x = features.dense_values();
      for (std::size_t c = 0; c < C; ++c) {
        double* row = grad.weights.data() + c * D;
        for (std::size_t i = 0; i < D; ++i) row[i] += p[c] * x[i];
      }
    }
  }
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (double& g : grad.weights) g *= inv_b;
  for (double& g : grad.bias) g *= inv_b;
  for (std::size_t i = 0; i < grad.weights.size(); ++i) {
    grad.weights[i] += l2 * model.weights[i];
  }
  grad.loss = loss * inv_b + 0.5 * l2 * weight_norm_sq(model);
  return grad;
}

namespace {

double probe_objective(const ProbeModel& model, const LabeledBatch& batch,
                       double l2) {
  double loss = 0.0;
  for (const auto& [features, label] : batch) {
    std::vector<double> p = softmax(logits_for(model, features));
    loss += -std::log(std::max(p[label], 1e-300));
  }
  return loss / static_cast<double>(batch.size()) +
         0.5 * l2 * weight_norm_sq(model);
}

Standardization fit_standardization(const std::vector<RepVector>& features,
                                    std::size_t dim) {
  Standardization stats;
  stats.enabled = true;
  stats.mean.assign(dim, 0.0);
  stats.scale.assign(dim, 1.0);
  const double n = static_cast<double>(features.size());
  for (const RepVector& f : features) {
    std::vector<double> x = f.to_dense();
    for (std::size_t i = 0; i < dim; ++i) stats.mean[i] += x[i];
  }
  for (double& m : stats.mean) m /= n;
  std::vector<double> var(dim, 0.0);
  for (const RepVector& f : features) {
    std::vector<double> x = f.to_dense();
    for (std::size_t i = 0; i < dim; ++i) {
      double d = x[i] - stats.mean[i];
      var[i] += d * d;
    }
  }
  for (std::size_t i = 0; i < dim; ++i) {
    double stddev = std::sqrt(var[i] / n);
    // Zero-variance dimensions pass through unscaled.
    stats.scale[i] = stddev > 0.0 ? stddev : 1.0;
  }
  return stats;
}

std::vector<std::size_t> split_labels(const std::vector<TaskInstance>& split) {
  std::vector<std::size_t> labels;
  labels.reserve(split.size());
  for (const TaskInstance& instance : split) labels.push_back(instance.label);
  return labels;
}

}  // namespace

ProbeModel train_probe(const TaskDataset& dataset,
                       const EmbeddingProvider& provider, const Corpus& corpus,
                       const TrainConfig& config) {
  if (dataset.train.empty()) {
    fail(ErrorKind::EmptySplit, "train split is empty");
  }
  if (dataset.dev.empty()) fail(ErrorKind::EmptySplit, "dev split is empty");
  if (config.learning_rate <= 0.0 || config.batch_size == 0 ||
      config.max_epochs == 0 || config.l2 < 0.0 ||
      config.patience > config.max_epochs) {
    fail(ErrorKind::ConfigError, "bad training configuration");
  }

  std::vector<RepVector> train_features, dev_features;
  train_features.reserve(dataset.train.size());
  for (const TaskInstance& instance : dataset.train) {
    train_features.push_back(assemble_features(instance, provider, corpus));
  }
  dev_features.reserve(dataset.dev.size());
  for (const TaskInstance& instance : dataset.dev) {
    dev_features.push_back(assemble_features(instance, provider, corpus));
  }
  std::vector<std::size_t> train_labels = split_labels(dataset.train);
  std::vector<std::size_t> dev_labels = split_labels(dataset.dev);

  ProbeModel model;
  model.class_count = dataset.class_count;
  model.feature_dim = provider.dim() * (1 + aux_arity(dataset.kind));
  model.weights.assign(model.class_count * model.feature_dim, 0.0);
  model.bias.assign(model.class_count, 0.0);
  model.task = dataset.kind;
  model.provider_name = provider.name();
  model.class_labels = dataset.class_labels;
  model.config = config;

  const bool dense_features = !train_features.front().is_sparse();
  const bool standardize = config.standardize == Standardize::On ||
                           (config.standardize == Standardize::Auto &&
                            dense_features);
  if (standardize) {
    model.standardization =
        fit_standardization(train_features, model.feature_dim);
  }

  {
    LabeledBatch all;
    all.reserve(train_features.size());
    for (std::size_t i = 0; i < train_features.size(); ++i) {
      all.emplace_back(train_features[i], train_labels[i]);
    }
    model.initial_loss = probe_objective(model, all, config.l2);
  }

  Rng rng(config.seed);
  std::vector<std::size_t> order(train_features.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  double best_dev_f1 = -1.0;
  std::vector<double> best_weights = model.weights;
  std::vector<double> best_bias = model.bias;
  std::size_t epochs_since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t begin = 0; begin < order.size();
         begin += config.batch_size) {
      const std::size_t end =
          std::min(order.size(), begin + config.batch_size);
      LabeledBatch batch;
      batch.reserve(end - begin);
      for (std::size_t i = begin; i < end; ++i) {
        batch.emplace_back(train_features[order[i]], train_labels[order[i]]);
      }
      ProbeGradient grad = probe_gradient(model, batch, config.l2);
      if (!std::isfinite(grad.loss)) {
        fail(ErrorKind::NonFiniteLoss,
             "epoch " + std::to_string(epoch) + " batch " +
                 std::to_string(begin / config.batch_size));
      }
      epoch_loss += grad.loss * static_cast<double>(batch.size());
      seen += batch.size();
      for (std::size_t i = 0; i < model.weights.size(); ++i) {
        model.weights[i] -= config.learning_rate * grad.weights[i];
      }
      for (std::size_t c = 0; c < model.class_count; ++c) {
        model.bias[c] -= config.learning_rate * grad.bias[c];
      }
    }
    epoch_loss /= static_cast<double>(seen);

    std::vector<std::size_t> dev_predictions;
    dev_predictions.reserve(dev_features.size());
    for (const RepVector& f : dev_features) {
      dev_predictions.push_back(predict_class(model, f));
    }
    double dev_f1 = macro_f1(dev_predictions, dev_labels, model.class_count);
    model.log.push_back({epoch_loss, dev_f1});

    if (dev_f1 > best_dev_f1) {
      best_dev_f1 = dev_f1;
      best_weights = model.weights;
      best_bias = model.bias;
      epochs_since_best = 0;
    } else if (++epochs_since_best >= config.patience) {
      break;
    }
  }
  model.weights = std::move(best_weights);
  model.bias = std::move(best_bias);
  return model;
}

Metrics evaluate_split(const ProbeModel& model, const TaskDataset& dataset,
                       Split split, const EmbeddingProvider& provider,
                       const Corpus& corpus) {
  const std::vector<TaskInstance>& instances = dataset.split(split);
  if (instances.empty()) {
    fail(ErrorKind::EmptySplit,
         std::string(to_string(split)) + " split is empty");
  }
  std::vector<std::size_t> predictions, golds;
  predictions.reserve(instances.size());
  golds.reserve(instances.size());
  for (const TaskInstance& instance : instances) {
    predictions.push_back(
        predict_class(model, assemble_features(instance, provider, corpus)));
    golds.push_back(instance.label);
  }
  return compute_metrics(predictions, golds, model.class_count);
}

double grad_check(const ProbeModel& model, const LabeledBatch& batch,
                  double epsilon) {
  if (batch.empty()) fail(ErrorKind::EmptyInput, "empty gradient batch");
  if (!(epsilon > 0.0)) fail(ErrorKind::ConfigError, "epsilon must be > 0");
  ProbeGradient analytic = probe_gradient(model, batch, model.config.l2);
  const std::size_t w_count = model.weights.size();
  const std::size_t total = w_count + model.bias.size();
  std::vector<std::size_t> picks;
  if (total <= 50) {
    picks.resize(total);
    for (std::size_t i = 0; i < total; ++i) picks[i] = i;
  } else {
    Rng rng(0x5eedc0ffeeULL);
    std::vector<std::size_t> all(total);
    for (std::size_t i = 0; i < total; ++i) all[i] = i;
    rng.shuffle(all);
    picks.assign(all.begin(), all.begin() + 50);
  }
  ProbeModel probe = model;
  double max_rel_error = 0.0;
  for (std::size_t pick : picks) {
    double* param = pick < w_count ? &probe.weights[pick]
                                   : &probe.bias[pick - w_count];
    const double saved = *param;
    *param = saved + epsilon;
    double plus = probe_objective(probe, batch, model.config.l2);
    *param = saved - epsilon;
    double minus = probe_objective(probe, batch, model.config.l2);
    *param = saved;
    double fd = (plus - minus) / (2.0 * epsilon);
    double a = pick < w_count ? analytic.weights[pick]
                              : analytic.bias[pick - w_count];
    if (!std::isfinite(fd) || !std::isfinite(a)) {
      fail(ErrorKind::NonFiniteValue, "non-finite gradient during check");
    }
    double rel = std::abs(a - fd) /
                 std::max({std::abs(a), std::abs(fd), 1e-8});
    max_rel_error = std::max(max_rel_error, rel);
  }
  return max_rel_error;
}

namespace {

std::string doubles_to_line(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out.push_back(' ');
    out += detail::format_double(values[i]);
  }
  return out;
}

std::vector<double> doubles_from_line(std::string_view line,
                                      const std::string& context) {
  std::vector<double> values;
  for (std::string_view field : detail::split_view(line, ' ')) {
    if (field.empty()) continue;
    values.push_back(detail::parse_double(field, context));
  }
  return values;
}

}  // namespace

void save_probe(const ProbeModel& model, const std::string& path,
                const std::string& digest) {
  std::string out = "#probe";
  out += "\ttask=";
  out += to_string(model.task);
  out += "\tprovider=" + model.provider_name;
  out += "\tclasses=" + std::to_string(model.class_count);
  out += "\tfeature_dim=" + std::to_string(model.feature_dim);
  out += "\tlabels=";
  for (std::size_t i = 0; i < model.class_labels.size(); ++i) {
    if (i) out.push_back(',');
    out += model.class_labels[i];
  }
  out += "\tseed=" + std::to_string(model.config.seed);
  out += "\tlr=" + detail::format_double(model.config.learning_rate);
  out += "\tbatch=" + std::to_string(model.config.batch_size);
  out += "\tepochs=" + std::to_string(model.config.max_epochs);
  out += "\tl2=" + detail::format_double(model.config.l2);
  out += "\tpatience=" + std::to_string(model.config.patience);
  out += "\tstandardized=" +
         std::to_string(model.standardization.enabled ? 1 : 0);
  if (!digest.empty()) out += "\tdigest=" + digest;
  out.push_back('\n');
  if (model.standardization.enabled) {
    out += doubles_to_line(model.standardization.mean);
    out.push_back('\n');
    out += doubles_to_line(model.standardization.scale);
    out.push_back('\n');
  }
  for (std::size_t c = 0; c < model.class_count; ++c) {
    std::vector<double> row(
        model.weights.begin() + static_cast<std::ptrdiff_t>(c * model.feature_dim),
        model.weights.begin() +
            static_cast<std::ptrdiff_t>((c + 1) * model.feature_dim));
    out += doubles_to_line(row);
    out.push_back('\n');
  }
  out += doubles_to_line(model.bias);
  out.push_back('\n');
  detail::write_file(path, out);
}

ProbeModel load_probe(const std::string& path, std::string* digest_out) {
  std::string content = detail::read_file(path);
  auto lines = detail::split_view(content, '\n');
  if (lines.empty()) fail(ErrorKind::MalformedLine, path + ": empty probe");
  ProbeModel model;
  {
    auto fields = detail::split_view(lines[0], '\t');
    if (fields.empty() || fields[0] != "#probe") {
      fail(ErrorKind::MalformedLine, path + ": missing probe header");
    }
    for (std::size_t i = 1; i < fields.size(); ++i) {
      auto kv = detail::split_view(fields[i], '=');
      if (kv.size() < 2) fail(ErrorKind::MalformedLine, path + ": bad header");
      std::string_view value = fields[i].substr(kv[0].size() + 1);
      if (kv[0] == "task") {
        model.task = task_kind_from_string(std::string(value));
      } else if (kv[0] == "provider") {
        model.provider_name = std::string(value);
      } else if (kv[0] == "classes") {
        model.class_count = detail::parse_u64(value, path);
      } else if (kv[0] == "feature_dim") {
        model.feature_dim = detail::parse_u64(value, path);
      } else if (kv[0] == "labels") {
        for (std::string_view label : detail::split_view(value, ',')) {
          model.class_labels.emplace_back(label);
        }
      } else if (kv[0] == "seed") {
        model.config.seed = detail::parse_u64(value, path);
      } else if (kv[0] == "lr") {
        model.config.learning_rate = detail::parse_double(value, path);
      } else if (kv[0] == "batch") {
        model.config.batch_size = detail::parse_u64(value, path);
      } else if (kv[0] == "epochs") {
        model.config.max_epochs = detail::parse_u64(value, path);
      } else if (kv[0] == "l2") {
        model.config.l2 = detail::parse_double(value, path);
      } else if (kv[0] == "patience") {
        model.config.patience = detail::parse_u64(value, path);
      } else if (kv[0] == "standardized") {
        model.standardization.enabled = value == "1";
      } else if (kv[0] == "digest") {
        if (digest_out) *digest_out = std::string(value);
      }
    }
  }
  std::size_t next = 1;
  auto take_line = [&]() -> std::string_view {
    while (next < lines.size() && lines[next].empty()) ++next;
    if (next >= lines.size()) {
      fail(ErrorKind::MalformedLine, path + ": truncated probe file");
    }
    return lines[next++];
  };
  if (model.standardization.enabled) {
    model.standardization.mean = doubles_from_line(take_line(), path);
    model.standardization.scale = doubles_from_line(take_line(), path);
    if (model.standardization.mean.size() != model.feature_dim ||
        model.standardization.scale.size() != model.feature_dim) {
      fail(ErrorKind::DimensionMismatch, path + ": standardization size");
    }
  }
  model.weights.reserve(model.class_count * model.feature_dim);
  for (std::size_t c = 0; c < model.class_count; ++c) {
    std::vector<double> row = doubles_from_line(take_line(), path);
    if (row.size() != model.feature_dim) {
      fail(ErrorKind::DimensionMismatch, path + ": weight row size");
    }
    model.weights.insert(model.weights.end(), row.begin(), row.end());
  }
  model.bias = doubles_from_line(take_line(), path);
  if (model.bias.size() != model.class_count) {
    fail(ErrorKind::DimensionMismatch, path + ": bias size");
  }
  return model;
}

}  // namespace tweetprobe
