#include "tweetprobe/taskgen.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include "text_util.hpp"
#include "tweetprobe/error.hpp"

namespace tweetprobe {

std::size_t aux_arity(TaskKind kind) {
  switch (kind) {
    case TaskKind::Length: return 0;
    case TaskKind::Content: return 1;
    case TaskKind::WordOrder: return 2;
    case TaskKind::Slang: return 2;
    case TaskKind::Hashtag: return 1;
    case TaskKind::NamedEntity: return 1;
    case TaskKind::IsReply: return 0;
    case TaskKind::ReplyTime: return 0;
  }
  return 0;
}

const char* to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::Length: return "length";
    case TaskKind::Content: return "content";
    case TaskKind::WordOrder: return "word_order";
    case TaskKind::Slang: return "slang";
    case TaskKind::Hashtag: return "hashtag";
    case TaskKind::NamedEntity: return "named_entity";
    case TaskKind::IsReply: return "is_reply";
    case TaskKind::ReplyTime: return "reply_time";
  }
  return "unknown";
}

TaskKind task_kind_from_string(const std::string& name) {
  for (TaskKind kind : kAllTasks) {
    if (name == to_string(kind)) return kind;
  }
  fail(ErrorKind::ConfigError, "unknown task kind '" + name + "'");
}

const char* to_string(Provenance p) {
  return p == Provenance::Positive ? "positive" : "negative-sampled";
}

const char* to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
  }
  return "unknown";
}

const std::vector<TaskInstance>& TaskDataset::split(Split s) const {
  switch (s) {
    case Split::Train: return train;
    case Split::Dev: return dev;
    case Split::Test: return test;
  }
  return train;
}

std::size_t TaskDataset::total_instances() const {
  return train.size() + dev.size() + test.size();
}

std::size_t bin_length(std::size_t length, std::size_t bin_size) {
  if (bin_size == 0) fail(ErrorKind::InvalidBinSize, "bin_size must be >= 1");
  if (length == 0) fail(ErrorKind::ZeroLength, "length must be >= 1");
  return (length - 1) / bin_size;
}

namespace {

// Overflow class index; max_minutes must be a positive multiple of bin_size.
std::size_t reply_overflow_index(double bin_size, double max_minutes) {
  if (!(bin_size > 0.0)) {
    fail(ErrorKind::InvalidBinSize, "reply bin size must be positive");
  }
  if (!(max_minutes > 0.0)) {
    fail(ErrorKind::InvalidBinSize, "reply max minutes must be positive");
  }
  double ratio = max_minutes / bin_size;
  auto rounded = static_cast<std::size_t>(std::llround(ratio));
  if (rounded < 1 || std::abs(ratio - static_cast<double>(rounded)) > 1e-9) {
    fail(ErrorKind::InvalidBinSize,
         "reply max minutes must be an integer multiple of the bin size");
  }
  return rounded;
}

}  // namespace

std::size_t bin_reply_time(double minutes, double bin_size,
                           double max_minutes) {
  std::size_t overflow = reply_overflow_index(bin_size, max_minutes);
  if (minutes < 0.0) {
    fail(ErrorKind::MalformedRecord, "reply minutes must be non-negative");
  }
  if (minutes >= max_minutes) return overflow;
  return static_cast<std::size_t>(std::floor(minutes / bin_size));
}

std::size_t reply_time_class_count(double bin_size, double max_minutes) {
  return reply_overflow_index(bin_size, max_minutes) + 1;
}

std::string sample_content_negative(const Tweet& tweet,
                                    const std::vector<std::string>& vocab,
                                    Rng& rng) {
  if (vocab.empty()) {
    fail(ErrorKind::NoNegativeCandidate, "empty vocabulary");
  }
  std::unordered_set<std::string_view> in_tweet(tweet.tokens.begin(),
                                                tweet.tokens.end());
  std::size_t overlap = 0;
  for (std::string_view token : in_tweet) {
    if (std::binary_search(vocab.begin(), vocab.end(), token)) ++overlap;
  }
  if (overlap >= vocab.size()) {
    fail(ErrorKind::NoNegativeCandidate,
         "tweet " + tweet.id + " covers the whole vocabulary");
  }
  for (;;) {
    const std::string& candidate = vocab[rng.uniform_index(vocab.size())];
    if (!in_tweet.count(candidate)) return candidate;
  }
}

std::optional<OrderPair> sample_order_pair(const Tweet& tweet, Rng& rng) {
  std::unordered_map<std::string_view, std::size_t> occurrences;
  for (const std::string& token : tweet.tokens) ++occurrences[token];
  std::vector<std::size_t> unique_positions;
  for (std::size_t i = 0; i < tweet.tokens.size(); ++i) {
    if (occurrences[tweet.tokens[i]] == 1) unique_positions.push_back(i);
  }
  const std::size_t m = unique_positions.size();
  if (m < 2) return std::nullopt;
  std::size_t pick = rng.uniform_index(m * (m - 1) / 2);
  std::size_t a = 0;
  while (pick >= m - 1 - a) {
    pick -= m - 1 - a;
    ++a;
  }
  std::size_t b = a + 1 + pick;
  return OrderPair{tweet.tokens[unique_positions[a]],
                   tweet.tokens[unique_positions[b]]};
}

std::string sample_hashtag_negative(const Tweet& tweet, Rng& rng) {
  if (tweet.hashtag_indices.empty()) {
    fail(ErrorKind::MissingAnnotation, "tweet " + tweet.id + " has no hashtag");
  }
  std::vector<std::size_t> plain;
  std::unordered_set<std::size_t> tagged(tweet.hashtag_indices.begin(),
                                         tweet.hashtag_indices.end());
  for (std::size_t i = 0; i < tweet.tokens.size(); ++i) {
    if (!tagged.count(i)) plain.push_back(i);
  }
  if (plain.empty()) {
    fail(ErrorKind::NoNegativeCandidate,
         "tweet " + tweet.id + " is all hashtags");
  }
  return tweet.tokens[plain[rng.uniform_index(plain.size())]];
}

std::string sample_hashtag_positive(const Tweet& tweet, Rng& rng) {
  if (tweet.hashtag_indices.empty()) {
    fail(ErrorKind::MissingAnnotation, "tweet " + tweet.id + " has no hashtag");
  }
  const std::string& token =
      tweet.tokens[tweet.hashtag_indices[rng.uniform_index(
          tweet.hashtag_indices.size())]];
  std::size_t begin = 0;
  while (begin < token.size() && token[begin] == '#') ++begin;
  return token.substr(begin);
}

std::string sample_ne_negative(const Tweet& tweet, std::size_t span_len,
                               Rng& rng) {
  if (tweet.ne_spans.empty()) {
    fail(ErrorKind::MissingAnnotation, "tweet " + tweet.id + " has no ne span");
  }
  const std::size_t len = tweet.tokens.size();
  std::vector<std::size_t> starts;
  if (span_len >= 1 && span_len <= len) {
    for (std::size_t s = 0; s + span_len <= len; ++s) {
      bool overlaps = false;
      for (const TokenSpan& span : tweet.ne_spans) {
        if (std::max(s, span.start) < std::min(s + span_len, span.end)) {
          overlaps = true;
          break;
        }
      }
      if (!overlaps) starts.push_back(s);
    }
  }
  if (starts.empty()) {
    fail(ErrorKind::NoNegativeCandidate,
         "tweet " + tweet.id + " has no entity-free window of length " +
             std::to_string(span_len));
  }
  std::size_t s = starts[rng.uniform_index(starts.size())];
  return join_tokens(tweet.tokens, s, s + span_len);
}

namespace {

std::string sample_from_pool(const std::vector<std::string>& pool,
                             const std::string& gold, Rng& rng) {
  if (pool.empty() || (pool.size() == 1 && pool.front() == gold)) {
    fail(ErrorKind::NoNegativeCandidate,
         "n-gram pool has no candidate besides '" + gold + "'");
  }
  for (;;) {
    const std::string& candidate = pool[rng.uniform_index(pool.size())];
    if (candidate != gold) return candidate;
  }
}

}  // namespace

std::string sample_slang_negative(const Corpus& corpus, std::size_t n,
                                  const std::string& gold, Rng& rng) {
  if (n == 0 || n > kMaxNgramOrder) {
    fail(ErrorKind::NoNegativeCandidate,
         "no n-gram pool of order " + std::to_string(n));
  }
  return sample_from_pool(corpus.sorted_ngrams(n), gold, rng);
}

namespace {

struct GeneratedTweet {
  std::string id;
  std::vector<TaskInstance> instances;
};

TaskInstance make_instance(const std::string& id,
                           std::vector<std::string> aux, std::size_t label,
                           Provenance provenance) {
  return TaskInstance{id, std::move(aux), label, provenance};
}

struct SplitCounts {
  std::size_t train = 0, dev = 0;
};

// 70/10/20 by item count; the remainder lands in test.
SplitCounts split_counts(std::size_t n) {
  SplitCounts counts;
  counts.train = n * 7 / 10;
  counts.dev = n / 10;
  return counts;
}

void assign_splits(std::vector<GeneratedTweet>& generated, Rng& rng,
                   TaskDataset& dataset) {
  std::vector<std::size_t> order(generated.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  SplitCounts counts = split_counts(order.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    auto& bucket = rank < counts.train
                       ? dataset.train
                       : rank < counts.train + counts.dev ? dataset.dev
                                                          : dataset.test;
    for (TaskInstance& instance : generated[order[rank]].instances) {
      bucket.push_back(std::move(instance));
    }
  }
}

std::vector<std::string> length_class_labels(std::size_t class_count,
                                             std::size_t bin_size) {
  std::vector<std::string> labels;
  for (std::size_t b = 0; b < class_count; ++b) {
    labels.push_back("len " + std::to_string(b * bin_size + 1) + "-" +
                     std::to_string((b + 1) * bin_size));
  }
  return labels;
}

std::vector<std::string> reply_time_class_labels(std::size_t class_count,
                                                 double bin_size) {
  std::vector<std::string> labels;
  for (std::size_t b = 0; b + 1 < class_count; ++b) {
    labels.push_back("min " + detail::format_double(b * bin_size) + "-" +
                     detail::format_double((b + 1) * bin_size));
  }
  labels.push_back("min " +
                   detail::format_double((class_count - 1) * bin_size) + "+");
  return labels;
}

}  // namespace

TaskDataset build_task(const Corpus& corpus, TaskKind kind,
                       const TaskParams& params, std::uint64_t seed) {
  if (params.length_bin_size == 0) {
    fail(ErrorKind::InvalidBinSize, "length bin size must be >= 1");
  }
  reply_overflow_index(params.reply_bin_minutes, params.reply_max_minutes);

  TaskDataset dataset;
  dataset.kind = kind;
  dataset.generation_seed = seed;
  dataset.params = params;

  Rng rng(mix_seed(seed, to_string(kind)));
  std::vector<GeneratedTweet> generated;
  std::size_t annotated = 0;  // tweets carrying the annotation the task needs

  auto finish_binary = [&](std::vector<std::string> labels) {
    dataset.class_count = 2;
    dataset.class_labels = std::move(labels);
  };

  switch (kind) {
    case TaskKind::Length: {
      annotated = corpus.size();
      std::size_t max_bin = 0;
      for (const Tweet& tweet : corpus.tweets()) {
        std::size_t label =
            bin_length(word_count(tweet), params.length_bin_size);
        max_bin = std::max(max_bin, label);
        generated.push_back(
            {tweet.id,
             {make_instance(tweet.id, {}, label, Provenance::Positive)}});
      }
      dataset.class_count = max_bin + 1;
      if (dataset.class_count < 2) {
        fail(ErrorKind::InsufficientData,
             "all tweets fall into one length bin");
      }
      dataset.class_labels =
          length_class_labels(dataset.class_count, params.length_bin_size);
      break;
    }
    case TaskKind::Content: {
      annotated = corpus.size();
      const std::vector<std::string> vocab = corpus.sorted_ngrams(1);
      for (const Tweet& tweet : corpus.tweets()) {
        // Uniform over token positions: occurrence-weighted, so the word
        // frequency profile of positives matches the corpus.
        const std::string& positive =
            tweet.tokens[rng.uniform_index(tweet.tokens.size())];
        std::string negative;
        try {
          negative = sample_content_negative(tweet, vocab, rng);
        } catch (const Error& e) {
          if (e.kind() == ErrorKind::NoNegativeCandidate) continue;
          throw;
        }
        generated.push_back(
            {tweet.id,
             {make_instance(tweet.id, {positive}, 1, Provenance::Positive),
              make_instance(tweet.id, {negative}, 0,
                            Provenance::NegativeSampled)}});
      }
      finish_binary({"absent", "present"});
      break;
    }
    case TaskKind::WordOrder: {
      annotated = corpus.size();
      for (const Tweet& tweet : corpus.tweets()) {
        auto pair = sample_order_pair(tweet, rng);
        if (!pair) continue;
        generated.push_back(
            {tweet.id,
             {make_instance(tweet.id, {pair->first, pair->second}, 1,
                            Provenance::Positive),
              make_instance(tweet.id, {pair->second, pair->first}, 0,
                            Provenance::NegativeSampled)}});
      }
      finish_binary({"flipped", "in-order"});
      break;
    }
    case TaskKind::Slang: {
      std::array<std::vector<std::string>, kMaxNgramOrder> pools;
      for (const Tweet& tweet : corpus.tweets()) {
        if (tweet.slang_pairs.empty()) continue;
        ++annotated;
        const SlangPair& pair =
            tweet.slang_pairs[rng.uniform_index(tweet.slang_pairs.size())];
        std::string observed =
            join_tokens(tweet.tokens, pair.span.start, pair.span.end);
        std::vector<std::string> gold_tokens = tokenize(pair.standard);
        std::size_t n = gold_tokens.size();
        if (n == 0 || n > kMaxNgramOrder) continue;
        std::string gold = join_tokens(gold_tokens, 0, gold_tokens.size());
        if (pools[n - 1].empty()) pools[n - 1] = corpus.sorted_ngrams(n);
        std::string negative;
        try {
          negative = sample_from_pool(pools[n - 1], gold, rng);
        } catch (const Error& e) {
          if (e.kind() == ErrorKind::NoNegativeCandidate) continue;
          throw;
        }
        generated.push_back(
            {tweet.id,
             {make_instance(tweet.id, {observed, gold}, 1,
                            Provenance::Positive),
              make_instance(tweet.id, {observed, negative}, 0,
                            Provenance::NegativeSampled)}});
      }
      finish_binary({"random-ngram", "standard-form"});
      break;
    }
    case TaskKind::Hashtag: {
      for (const Tweet& tweet : corpus.tweets()) {
        if (tweet.hashtag_indices.empty()) continue;
        ++annotated;
        std::string positive = sample_hashtag_positive(tweet, rng);
        std::string negative;
        try {
          negative = sample_hashtag_negative(tweet, rng);
        } catch (const Error& e) {
          if (e.kind() == ErrorKind::NoNegativeCandidate) continue;
          throw;
        }
        generated.push_back(
            {tweet.id,
             {make_instance(tweet.id, {positive}, 1, Provenance::Positive),
              make_instance(tweet.id, {negative}, 0,
                            Provenance::NegativeSampled)}});
      }
      finish_binary({"not-hashtag", "hashtag"});
      break;
    }
    case TaskKind::NamedEntity: {
      for (const Tweet& tweet : corpus.tweets()) {
        if (tweet.ne_spans.empty()) continue;
        ++annotated;
        const TokenSpan& span =
            tweet.ne_spans[rng.uniform_index(tweet.ne_spans.size())];
        std::string positive =
            join_tokens(tweet.tokens, span.start, span.end);
        std::string negative;
        try {
          negative = sample_ne_negative(tweet, span.end - span.start, rng);
        } catch (const Error& e) {
          if (e.kind() == ErrorKind::NoNegativeCandidate) continue;
          throw;
        }
        generated.push_back(
            {tweet.id,
             {make_instance(tweet.id, {positive}, 1, Provenance::Positive),
              make_instance(tweet.id, {negative}, 0,
                            Provenance::NegativeSampled)}});
      }
      finish_binary({"not-entity", "entity"});
      break;
    }
    case TaskKind::IsReply: {
      std::unordered_set<std::string> replied_to;
      for (const Tweet& tweet : corpus.tweets()) {
        if (tweet.reply_to && corpus.contains(*tweet.reply_to)) {
          replied_to.insert(*tweet.reply_to);
        }
      }
      const bool graph_available = !replied_to.empty();
      std::vector<std::string> replies, starters;
      for (const Tweet& tweet : corpus.tweets()) {
        if (tweet.reply_to) {
          replies.push_back(tweet.id);
        } else if (!graph_available || replied_to.count(tweet.id)) {
          starters.push_back(tweet.id);
        }
      }
      if (replies.empty()) {
        fail(ErrorKind::MissingAnnotation, "corpus has no reply tweets");
      }
      if (starters.empty()) {
        fail(ErrorKind::MissingAnnotation,
             "corpus has no conversation starters");
      }
      rng.shuffle(replies);
      rng.shuffle(starters);
      std::size_t m = std::min(replies.size(), starters.size());
      annotated = 2 * m;
      if (annotated < params.min_instances) {
        fail(ErrorKind::InsufficientData,
             std::string(to_string(kind)) + ": eligible " +
                 std::to_string(annotated) + " < min_instances " +
                 std::to_string(params.min_instances));
      }
      finish_binary({"starter", "reply"});
      dataset.generation_seed = seed;
      // Stratified 70/10/20 keeps both splits and classes balanced.
      SplitCounts counts = split_counts(m);
      auto place = [&](const std::vector<std::string>& ids, std::size_t label,
                       Provenance provenance) {
        for (std::size_t rank = 0; rank < m; ++rank) {
          auto& bucket =
              rank < counts.train
                  ? dataset.train
                  : rank < counts.train + counts.dev ? dataset.dev
                                                     : dataset.test;
          bucket.push_back(
              make_instance(ids[rank], {}, label, provenance));
        }
      };
      place(replies, 1, Provenance::Positive);
      place(starters, 0, Provenance::NegativeSampled);
      return dataset;
    }
    case TaskKind::ReplyTime: {
      for (const Tweet& tweet : corpus.tweets()) {
        if (!tweet.first_reply_minutes) continue;
        ++annotated;
        std::size_t label =
            bin_reply_time(*tweet.first_reply_minutes,
                           params.reply_bin_minutes, params.reply_max_minutes);
        generated.push_back(
            {tweet.id,
             {make_instance(tweet.id, {}, label, Provenance::Positive)}});
      }
      if (annotated == 0) {
        fail(ErrorKind::MissingAnnotation, "corpus has no reply times");
      }
      dataset.class_count = reply_time_class_count(params.reply_bin_minutes,
                                                   params.reply_max_minutes);
      dataset.class_labels = reply_time_class_labels(
          dataset.class_count, params.reply_bin_minutes);
      break;
    }
  }

  if (annotated == 0 &&
      (kind == TaskKind::Hashtag || kind == TaskKind::NamedEntity ||
       kind == TaskKind::Slang)) {
    fail(ErrorKind::MissingAnnotation,
         std::string("corpus has no annotations for task ") + to_string(kind));
  }
  if (generated.size() < params.min_instances) {
    fail(ErrorKind::InsufficientData,
         std::string(to_string(kind)) + ": eligible " +
             std::to_string(generated.size()) + " < min_instances " +
             std::to_string(params.min_instances));
  }
  assign_splits(generated, rng, dataset);
  return dataset;
}

std::string aux_key_for(const std::string& text) {
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(fnv1a64(text)));
  return std::string("aux:") + buffer;
}

std::vector<AuxRequest> collect_aux_requests(
    const std::vector<TaskDataset>& datasets, const Corpus& corpus) {
  std::unordered_map<std::string, std::string> requests;
  auto add = [&](const std::string& key, const std::string& text) {
    auto [it, inserted] = requests.emplace(key, text);
    if (!inserted && it->second != text) {
      fail(ErrorKind::DuplicateKey,
           "request key '" + key + "' maps to two different texts");
    }
  };
  for (const TaskDataset& dataset : datasets) {
    for (Split split : kAllSplits) {
      for (const TaskInstance& instance : dataset.split(split)) {
        const Tweet& tweet = corpus.by_id(instance.tweet_id);
        add(tweet.id, tweet.raw_text);
        for (const std::string& aux : instance.aux_texts) {
          add(aux_key_for(aux), aux);
        }
      }
    }
  }
  std::vector<AuxRequest> out;
  out.reserve(requests.size());
  for (auto& [key, text] : requests) out.push_back({key, text});
  std::sort(out.begin(), out.end(),
            [](const AuxRequest& a, const AuxRequest& b) {
              return a.key < b.key;
            });
  return out;
}

void save_requests(const std::vector<AuxRequest>& requests,
                   const std::string& path) {
  std::string out;
  for (const AuxRequest& request : requests) {
    out += request.key;
    out.push_back('\t');
    out += detail::escape_field(request.text);
    out.push_back('\n');
  }
  detail::write_file(path, out);
}

std::vector<AuxRequest> load_requests(const std::string& path) {
  std::string content = detail::read_file(path);
  std::vector<AuxRequest> out;
  std::size_t line_number = 0;
  for (std::string_view line : detail::split_view(content, '\n')) {
    ++line_number;
    if (line.empty()) continue;
    auto fields = detail::split_view(line, '\t');
    if (fields.size() != 2) {
      fail(ErrorKind::MalformedLine,
           path + " line " + std::to_string(line_number) +
               ": expected key<TAB>text");
    }
    out.push_back({std::string(fields[0]),
                   detail::unescape_field(fields[1], path)});
  }
  return out;
}

namespace {

std::string params_to_text(const TaskParams& params) {
  std::string out;
  out += "length_bin_size=" + std::to_string(params.length_bin_size);
  out += ";reply_bin_minutes=" + detail::format_double(params.reply_bin_minutes);
  out += ";reply_max_minutes=" + detail::format_double(params.reply_max_minutes);
  out += ";min_instances=" + std::to_string(params.min_instances);
  return out;
}

TaskParams params_from_text(std::string_view text, const std::string& context) {
  TaskParams params;
  for (std::string_view field : detail::split_view(text, ';')) {
    if (field.empty()) continue;
    auto kv = detail::split_view(field, '=');
    if (kv.size() != 2) fail(ErrorKind::MalformedLine, context + ": bad params");
    if (kv[0] == "length_bin_size") {
      params.length_bin_size = detail::parse_u64(kv[1], context);
    } else if (kv[0] == "reply_bin_minutes") {
      params.reply_bin_minutes = detail::parse_double(kv[1], context);
    } else if (kv[0] == "reply_max_minutes") {
      params.reply_max_minutes = detail::parse_double(kv[1], context);
    } else if (kv[0] == "min_instances") {
      params.min_instances = detail::parse_u64(kv[1], context);
    } else {
      fail(ErrorKind::MalformedLine,
           context + ": unknown param '" + std::string(kv[0]) + "'");
    }
  }
  return params;
}

Provenance provenance_from_text(std::string_view text,
                                const std::string& context) {
  if (text == "positive") return Provenance::Positive;
  if (text == "negative-sampled") return Provenance::NegativeSampled;
  fail(ErrorKind::MalformedLine, context + ": unknown provenance");
}

}  // namespace

void save_dataset(const TaskDataset& dataset, const std::string& path,
                  const std::string& digest) {
  std::string out = "#dataset";
  out += "\tkind=";
  out += to_string(dataset.kind);
  out += "\tclass_count=" + std::to_string(dataset.class_count);
  out += "\tclass_labels=";
  for (std::size_t i = 0; i < dataset.class_labels.size(); ++i) {
    if (i) out.push_back(',');
    out += dataset.class_labels[i];
  }
  out += "\tseed=" + std::to_string(dataset.generation_seed);
  out += "\tparams=" + params_to_text(dataset.params);
  if (!digest.empty()) out += "\tdigest=" + digest;
  out.push_back('\n');
  for (Split split : kAllSplits) {
    for (const TaskInstance& instance : dataset.split(split)) {
      out += to_string(dataset.kind);
      out.push_back('\t');
      out += to_string(split);
      out.push_back('\t');
      out += instance.tweet_id;
      out.push_back('\t');
      if (instance.aux_texts.empty()) {
        out.push_back('-');
      } else {
        for (std::size_t i = 0; i < instance.aux_texts.size(); ++i) {
          if (i) out.push_back(',');
          out += aux_key_for(instance.aux_texts[i]);
        }
      }
      out.push_back('\t');
      out += std::to_string(instance.label);
      out.push_back('\t');
      out += to_string(instance.provenance);
      out.push_back('\n');
    }
  }
  detail::write_file(path, out);
}

TaskDataset load_dataset(
    const std::string& path,
    const std::unordered_map<std::string, std::string>& key_to_text,
    std::string* digest_out) {
  std::string content = detail::read_file(path);
  TaskDataset dataset;
  bool saw_header = false;
  std::size_t line_number = 0;
  for (std::string_view line : detail::split_view(content, '\n')) {
    ++line_number;
    if (line.empty()) continue;
    const std::string context = path + " line " + std::to_string(line_number);
    auto fields = detail::split_view(line, '\t');
    if (!saw_header) {
      if (fields.empty() || fields[0] != "#dataset") {
        fail(ErrorKind::MalformedLine, context + ": missing dataset header");
      }
      for (std::size_t i = 1; i < fields.size(); ++i) {
        auto kv = detail::split_view(fields[i], '=');
        if (kv.size() < 2) {
          fail(ErrorKind::MalformedLine, context + ": bad header field");
        }
        std::string_view value = fields[i].substr(kv[0].size() + 1);
        if (kv[0] == "kind") {
          dataset.kind = task_kind_from_string(std::string(value));
        } else if (kv[0] == "class_count") {
          dataset.class_count = detail::parse_u64(value, context);
        } else if (kv[0] == "class_labels") {
          for (std::string_view label : detail::split_view(value, ',')) {
            dataset.class_labels.emplace_back(label);
          }
        } else if (kv[0] == "seed") {
          dataset.generation_seed = detail::parse_u64(value, context);
        } else if (kv[0] == "params") {
          dataset.params = params_from_text(value, context);
        } else if (kv[0] == "digest") {
          if (digest_out) *digest_out = std::string(value);
        } else {
          fail(ErrorKind::MalformedLine, context + ": unknown header field");
        }
      }
      saw_header = true;
      continue;
    }
    if (fields.size() != 6) {
      fail(ErrorKind::MalformedLine, context + ": expected 6 fields");
    }
    TaskInstance instance;
    if (task_kind_from_string(std::string(fields[0])) != dataset.kind) {
      fail(ErrorKind::MalformedLine, context + ": record kind != header kind");
    }
    instance.tweet_id = std::string(fields[2]);
    if (fields[3] != "-") {
      for (std::string_view key : detail::split_view(fields[3], ',')) {
        auto it = key_to_text.find(std::string(key));
        if (it == key_to_text.end()) {
          fail(ErrorKind::MissingKey,
               context + ": aux key '" + std::string(key) +
                   "' not in request map");
        }
        instance.aux_texts.push_back(it->second);
      }
    }
    instance.label = detail::parse_u64(fields[4], context);
    instance.provenance = provenance_from_text(fields[5], context);
    if (fields[1] == "train") {
      dataset.train.push_back(std::move(instance));
    } else if (fields[1] == "dev") {
      dataset.dev.push_back(std::move(instance));
    } else if (fields[1] == "test") {
      dataset.test.push_back(std::move(instance));
    } else {
      fail(ErrorKind::MalformedLine, context + ": unknown split");
    }
  }
  if (!saw_header) {
    fail(ErrorKind::MalformedLine, path + ": empty dataset file");
  }
  return dataset;
}

}  // namespace tweetprobe
