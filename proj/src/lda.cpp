// Collapsed Gibbs sampler for LDA training and the frozen-topic inference
// used to encode texts as topic distributions.
#include <cmath>
#include <numeric>

#include "text_util.hpp"
#include "tweetprobe/encoders.hpp"
#include "tweetprobe/error.hpp"
#include "tweetprobe/rng.hpp"

namespace tweetprobe {

namespace {

std::vector<std::uint32_t> doc_word_ids(
    const std::vector<std::string>& tokens,
    const std::unordered_map<std::string, std::uint32_t>& word_ids) {
  std::vector<std::uint32_t> ids;
  ids.reserve(tokens.size());
  for (const std::string& token : tokens) {
    auto it = word_ids.find(token);
    if (it != word_ids.end()) ids.push_back(it->second);
  }
  return ids;
}

// Draw from the unnormalized weights by inverse CDF.
std::size_t sample_weights(const std::vector<double>& weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = rng.uniform01() * total;
  double cumulative = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    cumulative += weights[k];
    if (u < cumulative) return k;
  }
  return weights.size() - 1;
}

}  // namespace

std::vector<std::vector<double>> LdaModel::topic_word_distributions() const {
  const std::size_t V = vocab.size();
  std::vector<std::vector<double>> rows(topic_count,
                                        std::vector<double>(V, 0.0));
  for (std::size_t k = 0; k < topic_count; ++k) {
    double denom = static_cast<double>(topic_totals[k]) +
                   static_cast<double>(V) * beta;
    for (std::size_t v = 0; v < V; ++v) {
      rows[k][v] = (static_cast<double>(topic_word_counts[k][v]) + beta) / denom;
    }
  }
  return rows;
}

LdaModel train_lda(const Corpus& corpus, std::size_t topic_count, double alpha,
                   double beta, std::size_t iterations, std::uint64_t seed) {
  if (corpus.size() == 0) fail(ErrorKind::EmptyCorpus, "corpus has no tweets");
  if (topic_count < 2) fail(ErrorKind::ConfigError, "topic_count must be >= 2");
  if (iterations == 0) fail(ErrorKind::ConfigError, "iterations must be >= 1");
  if (alpha < 0.0) alpha = 50.0 / static_cast<double>(topic_count);
  if (!(beta > 0.0)) fail(ErrorKind::ConfigError, "beta must be positive");

  LdaModel model;
  model.topic_count = topic_count;
  model.alpha = alpha;
  model.beta = beta;
  model.seed = seed;
  model.iterations = iterations;
  model.vocab = corpus.sorted_ngrams(1);
  for (std::uint32_t v = 0; v < model.vocab.size(); ++v) {
    model.word_ids.emplace(model.vocab[v], v);
  }
  const std::size_t K = topic_count;
  const std::size_t V = model.vocab.size();

  std::vector<std::vector<std::uint32_t>> docs;
  docs.reserve(corpus.size());
  for (const Tweet& tweet : corpus.tweets()) {
    docs.push_back(doc_word_ids(tweet.tokens, model.word_ids));
  }

  model.topic_word_counts.assign(K, std::vector<std::uint32_t>(V, 0));
  model.topic_totals.assign(K, 0);
  std::vector<std::vector<std::uint32_t>> doc_topic(
      docs.size(), std::vector<std::uint32_t>(K, 0));
  std::vector<std::vector<std::uint32_t>> assignments(docs.size());

  Rng rng(seed);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    assignments[d].resize(docs[d].size());
    for (std::size_t i = 0; i < docs[d].size(); ++i) {
      auto k = static_cast<std::uint32_t>(rng.uniform_index(K));
      assignments[d][i] = k;
      ++doc_topic[d][k];
      ++model.topic_word_counts[k][docs[d][i]];
      ++model.topic_totals[k];
    }
  }

  const double v_beta = static_cast<double>(V) * beta;
  std::vector<double> weights(K);
  for (std::size_t sweep = 0; sweep < iterations; ++sweep) {
    for (std::size_t d = 0; d < docs.size(); ++d) {
      for (std::size_t i = 0; i < docs[d].size(); ++i) {
        const std::uint32_t w = docs[d][i];
        const std::uint32_t old_k = assignments[d][i];
        --doc_topic[d][old_k];
        --model.topic_word_counts[old_k][w];
        --model.topic_totals[old_k];
        for (std::size_t k = 0; k < K; ++k) {
          weights[k] =
              (static_cast<double>(doc_topic[d][k]) + alpha) *
              (static_cast<double>(model.topic_word_counts[k][w]) + beta) /
              (static_cast<double>(model.topic_totals[k]) + v_beta);
        }
        auto new_k = static_cast<std::uint32_t>(sample_weights(weights, rng));
        assignments[d][i] = new_k;
        ++doc_topic[d][new_k];
        ++model.topic_word_counts[new_k][w];
        ++model.topic_totals[new_k];
      }
    }
  }
  return model;
}

RepVector encode_lda(std::string_view text, const LdaModel& model,
                     std::size_t infer_iterations, std::uint64_t seed) {
  const std::size_t K = model.topic_count;
  if (infer_iterations == 0) {
    fail(ErrorKind::ConfigError, "infer_iterations must be >= 1");
  }
  std::vector<std::uint32_t> ids =
      doc_word_ids(tokenize(text), model.word_ids);
  if (ids.empty()) {
    return RepVector::dense(
        std::vector<double>(K, 1.0 / static_cast<double>(K)));
  }
  // Pure function of (text, seed): the sweep generator is derived from both.
  Rng rng(splitmix64(seed ^ fnv1a64(text)));
  std::vector<std::uint32_t> doc_topic(K, 0);
  std::vector<std::uint32_t> assignments(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto k = static_cast<std::uint32_t>(rng.uniform_index(K));
    assignments[i] = k;
    ++doc_topic[k];
  }
  const double v_beta = static_cast<double>(model.vocab.size()) * model.beta;
  const double k_alpha = static_cast<double>(K) * model.alpha;
  const double denom = static_cast<double>(ids.size()) + k_alpha;
  std::vector<double> weights(K);
  std::vector<double> theta(K, 0.0);
  const std::size_t burn_in = infer_iterations / 2;
  std::size_t accumulated = 0;
  for (std::size_t sweep = 0; sweep < infer_iterations; ++sweep) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const std::uint32_t w = ids[i];
      const std::uint32_t old_k = assignments[i];
      --doc_topic[old_k];
      for (std::size_t k = 0; k < K; ++k) {
        weights[k] =
            (static_cast<double>(doc_topic[k]) + model.alpha) *
            (static_cast<double>(model.topic_word_counts[k][w]) + model.beta) /
            (static_cast<double>(model.topic_totals[k]) + v_beta);
      }
      auto new_k = static_cast<std::uint32_t>(sample_weights(weights, rng));
      assignments[i] = new_k;
      ++doc_topic[new_k];
    }
    if (sweep >= burn_in) {
      for (std::size_t k = 0; k < K; ++k) {
        theta[k] += (static_cast<double>(doc_topic[k]) + model.alpha) / denom;
      }
      ++accumulated;
    }
  }
  for (double& t : theta) t /= static_cast<double>(accumulated);
  return RepVector::dense(std::move(theta));
}

void save_lda_model(const LdaModel& model, const std::string& path,
                    const std::string& digest) {
  std::string out = "#lda";
  out += "\ttopics=" + std::to_string(model.topic_count);
  out += "\talpha=" + detail::format_double(model.alpha);
  out += "\tbeta=" + detail::format_double(model.beta);
  out += "\tseed=" + std::to_string(model.seed);
  out += "\titerations=" + std::to_string(model.iterations);
  out += "\tvocab=" + std::to_string(model.vocab.size());
  if (!digest.empty()) out += "\tdigest=" + digest;
  out.push_back('\n');
  for (const std::string& word : model.vocab) {
    out += word;
    out.push_back('\n');
  }
  for (std::size_t k = 0; k < model.topic_count; ++k) {
    for (std::size_t v = 0; v < model.vocab.size(); ++v) {
      if (v) out.push_back(' ');
      out += std::to_string(model.topic_word_counts[k][v]);
    }
    out.push_back('\n');
  }
  for (std::size_t k = 0; k < model.topic_count; ++k) {
    if (k) out.push_back(' ');
    out += std::to_string(model.topic_totals[k]);
  }
  out.push_back('\n');
  detail::write_file(path, out);
}

LdaModel load_lda_model(const std::string& path, std::string* digest_out) {
  std::string content = detail::read_file(path);
  auto lines = detail::split_view(content, '\n');
  if (lines.empty()) fail(ErrorKind::MalformedLine, path + ": empty model");
  LdaModel model;
  std::size_t vocab_size = 0;
  {
    auto fields = detail::split_view(lines[0], '\t');
    if (fields.empty() || fields[0] != "#lda") {
      fail(ErrorKind::MalformedLine, path + ": missing lda header");
    }
    for (std::size_t i = 1; i < fields.size(); ++i) {
      auto kv = detail::split_view(fields[i], '=');
      if (kv.size() != 2) fail(ErrorKind::MalformedLine, path + ": bad header");
      if (kv[0] == "topics") {
        model.topic_count = detail::parse_u64(kv[1], path);
      } else if (kv[0] == "alpha") {
        model.alpha = detail::parse_double(kv[1], path);
      } else if (kv[0] == "beta") {
        model.beta = detail::parse_double(kv[1], path);
      } else if (kv[0] == "seed") {
        model.seed = detail::parse_u64(kv[1], path);
      } else if (kv[0] == "iterations") {
        model.iterations = detail::parse_u64(kv[1], path);
      } else if (kv[0] == "vocab") {
        vocab_size = detail::parse_u64(kv[1], path);
      } else if (kv[0] == "digest") {
        if (digest_out) *digest_out = std::string(kv[1]);
      }
    }
  }
  const std::size_t expected_lines = 1 + vocab_size + model.topic_count + 1;
  if (lines.size() < expected_lines) {
    fail(ErrorKind::MalformedLine, path + ": truncated lda model");
  }
  for (std::size_t v = 0; v < vocab_size; ++v) {
    model.vocab.emplace_back(lines[1 + v]);
    model.word_ids.emplace(model.vocab.back(),
                           static_cast<std::uint32_t>(v));
  }
  model.topic_word_counts.assign(model.topic_count,
                                 std::vector<std::uint32_t>(vocab_size, 0));
  for (std::size_t k = 0; k < model.topic_count; ++k) {
    auto fields = detail::split_view(lines[1 + vocab_size + k], ' ');
    if (fields.size() != vocab_size) {
      fail(ErrorKind::MalformedLine, path + ": topic row size mismatch");
    }
    for (std::size_t v = 0; v < vocab_size; ++v) {
      model.topic_word_counts[k][v] =
          static_cast<std::uint32_t>(detail::parse_u64(fields[v], path));
    }
  }
  {
    auto fields =
        detail::split_view(lines[1 + vocab_size + model.topic_count], ' ');
    if (fields.size() != model.topic_count) {
      fail(ErrorKind::MalformedLine, path + ": topic totals size mismatch");
    }
    model.topic_totals.resize(model.topic_count);
    for (std::size_t k = 0; k < model.topic_count; ++k) {
      model.topic_totals[k] = detail::parse_u64(fields[k], path);
    }
  }
  return model;
}

LdaProvider::LdaProvider(std::string name, LdaModel model,
                         std::size_t infer_iterations, std::uint64_t seed)
    : name_(std::move(name)),
      model_(std::move(model)),
      infer_iterations_(infer_iterations),
      seed_(seed) {}

RepVector LdaProvider::encode(const EncodeRequest& request) const {
  return encode_lda(request.text, model_, infer_iterations_, seed_);
}

}  // namespace tweetprobe
