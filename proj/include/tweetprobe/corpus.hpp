// Annotated tweet corpus: tokenization, JSONL ingestion with validation, and
// the n-gram frequency tables the encoders and samplers draw from.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tweetprobe {

// [start, end) over token positions.
struct TokenSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  bool operator==(const TokenSpan&) const = default;
};

struct SlangPair {
  TokenSpan span;
  std::string standard;  // standardized form of the in-tweet n-gram
  bool operator==(const SlangPair&) const = default;
};

struct Tweet {
  std::string id;
  std::string raw_text;
  std::vector<std::string> tokens;
  std::vector<std::size_t> hashtag_indices;  // sorted; token begins with '#'
  std::vector<TokenSpan> ne_spans;           // sorted by start, non-overlapping
  std::vector<SlangPair> slang_pairs;
  std::optional<std::string> reply_to;
  std::optional<double> first_reply_minutes;
  bool operator==(const Tweet&) const = default;
};

// Whitespace split, ASCII lowercase, leading '#'/'@' kept, other leading and
// all trailing punctuation stripped, empty tokens dropped.
std::vector<std::string> tokenize(std::string_view raw_text);

constexpr std::size_t kMaxNgramOrder = 5;

struct NgramStat {
  std::uint64_t count = 0;     // total occurrences
  std::uint64_t doc_freq = 0;  // tweets containing the n-gram
  bool operator==(const NgramStat&) const = default;
};

class VocabStats {
 public:
  // tables()[n-1] maps space-joined n-grams to their statistics.
  const std::array<std::unordered_map<std::string, NgramStat>, kMaxNgramOrder>&
  tables() const {
    return tables_;
  }
  const std::unordered_map<std::string, NgramStat>& table(std::size_t n) const;
  std::uint64_t total_count(std::size_t n) const;

  void add_document(const std::vector<std::string>& tokens);
  bool operator==(const VocabStats&) const = default;

 private:
  std::array<std::unordered_map<std::string, NgramStat>, kMaxNgramOrder> tables_;
};

class Corpus {
 public:
  Corpus() = default;

  // Validates every invariant (unique ids, spans in range, non-overlapping NE
  // spans, reply_to != id, minutes >= 0), drops zero-token tweets counting
  // them, and populates vocab_stats.
  static Corpus from_tweets(std::vector<Tweet> tweets);

  const std::vector<Tweet>& tweets() const { return tweets_; }
  std::size_t size() const { return tweets_.size(); }
  bool contains(const std::string& id) const;
  const Tweet& by_id(const std::string& id) const;
  const std::unordered_map<std::string, std::size_t>& id_index() const {
    return id_index_;
  }
  const VocabStats& vocab_stats() const { return vocab_stats_; }
  std::size_t dropped_empty() const { return dropped_empty_; }

  // reply_to ids that do not resolve inside the corpus (external parents).
  std::size_t external_reply_count() const { return external_replies_; }

  // Sorted distinct n-grams of a given order, the sampling pools.
  std::vector<std::string> sorted_ngrams(std::size_t n) const;

 private:
  std::vector<Tweet> tweets_;
  std::unordered_map<std::string, std::size_t> id_index_;
  VocabStats vocab_stats_;
  std::size_t dropped_empty_ = 0;
  std::size_t external_replies_ = 0;
};

// JSONL interchange: one object per line with keys id, text and optional
// reply_to, first_reply_minutes, ne_spans, slang. Tokens are recomputed.
Corpus load_corpus(const std::string& path);
void save_corpus(const Corpus& corpus, const std::string& path);

// len(tokens); ZeroLength on an untokenized/empty tweet.
std::size_t word_count(const Tweet& tweet);

// Space-joined tokens[start..end).
std::string join_tokens(const std::vector<std::string>& tokens,
                        std::size_t start, std::size_t end);

}  // namespace tweetprobe
