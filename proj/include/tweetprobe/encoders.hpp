// Representation providers: TF-IDF bag of n-grams, word-vector averaging,
// LDA topic distributions, and the strict external-vector loader.
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tweetprobe/corpus.hpp"
#include "tweetprobe/vector.hpp"

namespace tweetprobe {

// Built-in providers encode the text; the external provider resolves the key.
struct EncodeRequest {
  std::string key;
  std::string text;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual const std::string& name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual bool sparse_output() const { return false; }
  virtual RepVector encode(const EncodeRequest& request) const = 0;
};

// ---- BOW ----

struct BowVocabulary {
  std::vector<std::string> terms;  // rank order: count desc, term asc
  std::unordered_map<std::string, std::uint32_t> index;
  std::vector<std::uint64_t> doc_freq;  // parallel to terms
  std::uint64_t corpus_size = 0;        // N, number of tweets
  std::size_t n_max = 5;
};

BowVocabulary build_bow_vocab(const Corpus& corpus,
                              std::size_t max_terms = 50000,
                              std::size_t n_max = 5);

// value(t) = tf(t, text) * (ln(N / (1 + df(t))) + 1), then L2-normalized.
// Text with no vocabulary n-gram encodes to the zero vector.
RepVector encode_bow(std::string_view text, const BowVocabulary& vocab);

void save_bow_vocab(const BowVocabulary& vocab, const std::string& path,
                    const std::string& digest = "");
BowVocabulary load_bow_vocab(const std::string& path,
                             std::string* digest_out = nullptr);

class BowProvider : public EmbeddingProvider {
 public:
  BowProvider(std::string name, BowVocabulary vocab);
  const std::string& name() const override { return name_; }
  std::size_t dim() const override { return vocab_.terms.size(); }
  bool sparse_output() const override { return true; }
  RepVector encode(const EncodeRequest& request) const override;
  const BowVocabulary& vocabulary() const { return vocab_; }

 private:
  std::string name_;
  BowVocabulary vocab_;
};

// ---- BOM ----

struct WordTable {
  std::size_t dim = 0;
  std::unordered_map<std::string, std::vector<double>> vectors;
  std::size_t duplicate_count = 0;  // later occurrences won, warned
};

// Text format: first line "<count> <dim>", then "<word> <v1> ... <v_dim>".
WordTable load_word_vectors(const std::string& path);
void save_word_vectors(const WordTable& table, const std::string& path);

// Average of in-vocabulary token vectors, summed in lexicographic token
// order so any permutation of the tokens is bit-identical. All-OOV or empty
// text encodes to the zero vector.
RepVector encode_bom(std::string_view text, const WordTable& table);

class BomProvider : public EmbeddingProvider {
 public:
  BomProvider(std::string name, WordTable table);
  const std::string& name() const override { return name_; }
  std::size_t dim() const override { return table_.dim; }
  RepVector encode(const EncodeRequest& request) const override;
  const WordTable& table() const { return table_; }

 private:
  std::string name_;
  WordTable table_;
};

// ---- LDA ----

struct LdaModel {
  std::size_t topic_count = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  std::vector<std::string> vocab;  // word id -> token
  std::unordered_map<std::string, std::uint32_t> word_ids;
  std::vector<std::vector<std::uint32_t>> topic_word_counts;  // K x V
  std::vector<std::uint64_t> topic_totals;                    // K

  // Row-normalized topic-word distribution (each row sums to 1).
  std::vector<std::vector<double>> topic_word_distributions() const;
};

// Collapsed Gibbs sampling over token-topic assignments; alpha < 0 selects
// the 50/K default. Deterministic under seed.
LdaModel train_lda(const Corpus& corpus, std::size_t topic_count = 200,
                   double alpha = -1.0, double beta = 0.01,
                   std::size_t iterations = 1000, std::uint64_t seed = 0);

// Topics frozen; theta averaged over the trailing half of the inference
// sweeps. The sweep generator is derived from (seed, text) so encoding is a
// pure function of its arguments. Empty or all-OOV text -> uniform.
RepVector encode_lda(std::string_view text, const LdaModel& model,
                     std::size_t infer_iterations = 100,
                     std::uint64_t seed = 0);

void save_lda_model(const LdaModel& model, const std::string& path,
                    const std::string& digest = "");
LdaModel load_lda_model(const std::string& path,
                        std::string* digest_out = nullptr);

class LdaProvider : public EmbeddingProvider {
 public:
  LdaProvider(std::string name, LdaModel model,
              std::size_t infer_iterations = 100, std::uint64_t seed = 0);
  const std::string& name() const override { return name_; }
  std::size_t dim() const override { return model_.topic_count; }
  RepVector encode(const EncodeRequest& request) const override;
  const LdaModel& model() const { return model_; }

 private:
  std::string name_;
  LdaModel model_;
  std::size_t infer_iterations_;
  std::uint64_t seed_;
};

// ---- external vectors ----

class ExternalProvider : public EmbeddingProvider {
 public:
  // Strict: every requested key must be present exactly once.
  static ExternalProvider load(const std::string& name,
                               const std::string& vectors_path,
                               const std::vector<std::string>& required_keys);

  const std::string& name() const override { return name_; }
  std::size_t dim() const override { return dim_; }
  RepVector encode(const EncodeRequest& request) const override;

 private:
  std::string name_;
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

// Convenience loader validating a vector file against a request list file:
// every key in the requests file must be resolvable.
ExternalProvider load_external(const std::string& vectors_path,
                               const std::string& requests_path,
                               const std::string& name = "external");

// Uniform random permutation of the tweet's tokens re-joined by spaces,
// deterministic per (tweet id, seed).
std::string permute_tokens(const Tweet& tweet, std::uint64_t seed);

}  // namespace tweetprobe
