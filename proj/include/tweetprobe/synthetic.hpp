// Seeded generator of annotated demo corpora: Zipf-distributed content
// words, hashtags, named-entity spans, slang pairs, and a reply graph with
// reply times. Used by tests and the `synth` CLI utility.
#pragma once

#include <cstdint>
#include <string>

#include "tweetprobe/corpus.hpp"
#include "tweetprobe/encoders.hpp"

namespace tweetprobe {

// Content words follow a two-tier frequency model like real text: a small
// recurring head vocabulary plus a long tail of near-singleton words.
struct SyntheticSpec {
  std::size_t tweet_count = 1000;
  std::uint64_t seed = 0;
  std::size_t content_vocab = 12;  // head pool, Zipf-weighted
  double zipf_exponent = 0.8;
  std::size_t rare_vocab = 6000;  // tail pool, drawn uniformly
  double rare_prob = 0.08;        // P(content token comes from the tail)
  std::size_t min_length = 3;
  std::size_t max_length = 24;  // content words before annotations
  double hashtag_prob = 0.6;
  std::size_t hashtag_vocab = 5;
  double ne_prob = 0.5;
  std::size_t ne_vocab = 6;
  double slang_prob = 0.5;
  std::size_t slang_vocab = 5;
  std::size_t mention_vocab = 3;
  double reply_prob = 0.4;
  double reply_minutes_max = 40.0;
};

Corpus make_synthetic_corpus(const SyntheticSpec& spec);

// Random dense vectors for every distinct token of the corpus, written in
// the word-vector text format. Deterministic under seed.
WordTable make_synthetic_word_table(const Corpus& corpus, std::size_t dim,
                                    std::uint64_t seed);

}  // namespace tweetprobe
