// The eight elementary property prediction datasets: binning rules, negative
// samplers, leak-free splitting, and the on-disk dataset/request formats.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tweetprobe/corpus.hpp"
#include "tweetprobe/rng.hpp"

namespace tweetprobe {

enum class TaskKind {
  Length,
  Content,
  WordOrder,
  Slang,
  Hashtag,
  NamedEntity,
  IsReply,
  ReplyTime,
};

constexpr std::array<TaskKind, 8> kAllTasks = {
    TaskKind::Length,   TaskKind::Content,     TaskKind::WordOrder,
    TaskKind::Slang,    TaskKind::Hashtag,     TaskKind::NamedEntity,
    TaskKind::IsReply,  TaskKind::ReplyTime,
};

std::size_t aux_arity(TaskKind kind);
const char* to_string(TaskKind kind);
TaskKind task_kind_from_string(const std::string& name);

enum class Provenance { Positive, NegativeSampled };
const char* to_string(Provenance p);

struct TaskInstance {
  std::string tweet_id;
  std::vector<std::string> aux_texts;  // length == aux_arity(kind)
  std::size_t label = 0;
  Provenance provenance = Provenance::Positive;
  bool operator==(const TaskInstance&) const = default;
};

struct TaskParams {
  std::size_t length_bin_size = 4;
  double reply_bin_minutes = 2.0;
  double reply_max_minutes = 20.0;
  std::size_t min_instances = 100;
  bool operator==(const TaskParams&) const = default;
};

enum class Split { Train, Dev, Test };
constexpr std::array<Split, 3> kAllSplits = {Split::Train, Split::Dev,
                                             Split::Test};
const char* to_string(Split split);

struct TaskDataset {
  TaskKind kind = TaskKind::Length;
  std::size_t class_count = 0;
  std::vector<std::string> class_labels;
  std::vector<TaskInstance> train, dev, test;
  std::uint64_t generation_seed = 0;
  TaskParams params;

  const std::vector<TaskInstance>& split(Split s) const;
  std::size_t total_instances() const;
  bool operator==(const TaskDataset&) const = default;
};

// floor((length - 1) / bin_size): bins [1..4], [5..8], ...
std::size_t bin_length(std::size_t length, std::size_t bin_size = 4);

// floor(minutes / bin_size), capped at the overflow class max/bin.
// max_minutes must be a positive integer multiple of bin_size.
std::size_t bin_reply_time(double minutes, double bin_size = 2.0,
                           double max_minutes = 20.0);
std::size_t reply_time_class_count(double bin_size = 2.0,
                                   double max_minutes = 20.0);

// Negative samplers (Table-1 rules). Each draw is uniform over the eligible
// candidates and deterministic under the supplied generator.
std::string sample_content_negative(const Tweet& tweet,
                                    const std::vector<std::string>& vocab,
                                    Rng& rng);

struct OrderPair {
  std::string first;
  std::string second;
};
// Uniform over position pairs i < j whose tokens each occur exactly once.
std::optional<OrderPair> sample_order_pair(const Tweet& tweet, Rng& rng);

std::string sample_hashtag_negative(const Tweet& tweet, Rng& rng);
// Uniform hashtag token with the leading '#' run stripped.
std::string sample_hashtag_positive(const Tweet& tweet, Rng& rng);

std::string sample_ne_negative(const Tweet& tweet, std::size_t span_len,
                               Rng& rng);

std::string sample_slang_negative(const Corpus& corpus, std::size_t n,
                                  const std::string& gold, Rng& rng);

TaskDataset build_task(const Corpus& corpus, TaskKind kind,
                       const TaskParams& params = {}, std::uint64_t seed = 0);

struct AuxRequest {
  std::string key;
  std::string text;
  bool operator==(const AuxRequest&) const = default;
};

// Stable key for an auxiliary text ("aux:" + fnv1a64 hex).
std::string aux_key_for(const std::string& text);

// Deduplicated, key-sorted list of every text needing a vector: tweet
// raw_texts keyed by id plus hashed aux texts.
std::vector<AuxRequest> collect_aux_requests(
    const std::vector<TaskDataset>& datasets, const Corpus& corpus);

// Tab-separated (key, text) with backslash escapes in the text column.
void save_requests(const std::vector<AuxRequest>& requests,
                   const std::string& path);
std::vector<AuxRequest> load_requests(const std::string& path);

// Line-oriented dataset format: one header line (kind, class_count,
// class_labels, seed, params, optional digest) then one record per instance
// (kind, split, tweet_id, aux_keys, label, provenance).
void save_dataset(const TaskDataset& dataset, const std::string& path,
                  const std::string& digest = "");
TaskDataset load_dataset(
    const std::string& path,
    const std::unordered_map<std::string, std::string>& key_to_text,
    std::string* digest_out = nullptr);

}  // namespace tweetprobe
