#include "tweetprobe/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <unordered_set>

#include <json.hpp>

#include "text_util.hpp"
#include "tweetprobe/error.hpp"

namespace tweetprobe {

namespace {

bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + ('a' - 'A')) : c;
}

// Strip trailing punctuation, then leading punctuation other than the
// '#'/'@' markers; lowercase ASCII letters. Multibyte UTF-8 passes through.
std::string clean_piece(std::string_view piece) {
  std::size_t begin = 0;
  std::size_t end = piece.size();
  while (end > begin && is_punct(piece[end - 1])) --end;
  while (begin < end && is_punct(piece[begin]) && piece[begin] != '#' &&
         piece[begin] != '@') {
    ++begin;
  }
  std::string token;
  token.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) token.push_back(ascii_lower(piece[i]));
  return token;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view raw_text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const std::size_t n = raw_text.size();
  while (i < n) {
    while (i < n && is_space(raw_text[i])) ++i;
    std::size_t j = i;
    while (j < n && !is_space(raw_text[j])) ++j;
    if (j > i) {
      std::string token = clean_piece(raw_text.substr(i, j - i));
      if (!token.empty()) tokens.push_back(std::move(token));
    }
    i = j;
  }
  return tokens;
}

const std::unordered_map<std::string, NgramStat>& VocabStats::table(
    std::size_t n) const {
  if (n == 0 || n > kMaxNgramOrder) {
    fail(ErrorKind::DimensionMismatch, "n-gram order out of range");
  }
  return tables_[n - 1];
}

std::uint64_t VocabStats::total_count(std::size_t n) const {
  std::uint64_t total = 0;
  for (const auto& [ngram, stat] : table(n)) total += stat.count;
  return total;
}

void VocabStats::add_document(const std::vector<std::string>& tokens) {
  for (std::size_t n = 1; n <= kMaxNgramOrder; ++n) {
    if (tokens.size() < n) break;
    auto& table = tables_[n - 1];
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string gram = join_tokens(tokens, i, i + n);
      auto& stat = table[gram];
      ++stat.count;
      if (seen.insert(std::move(gram)).second) ++stat.doc_freq;
    }
  }
}

std::string join_tokens(const std::vector<std::string>& tokens,
                        std::size_t start, std::size_t end) {
  std::string out;
  for (std::size_t i = start; i < end; ++i) {
    if (i > start) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

namespace {

void validate_tweet(const Tweet& tweet) {
  const std::string& id = tweet.id;
  if (id.empty()) fail(ErrorKind::MalformedRecord, "empty tweet id");
  for (char c : id) {
    if (is_space(c)) {
      fail(ErrorKind::MalformedRecord, "tweet id contains whitespace: " + id);
    }
  }
  if (tweet.reply_to && *tweet.reply_to == id) {
    fail(ErrorKind::MalformedRecord, "tweet " + id + " replies to itself");
  }
  if (tweet.first_reply_minutes && *tweet.first_reply_minutes < 0.0) {
    fail(ErrorKind::MalformedRecord,
         "tweet " + id + " has negative first_reply_minutes");
  }
  const std::size_t len = tweet.tokens.size();
  for (const TokenSpan& span : tweet.ne_spans) {
    if (span.start >= span.end || span.end > len) {
      fail(ErrorKind::DanglingAnnotation,
           "tweet " + id + ": ne span [" + std::to_string(span.start) + "," +
               std::to_string(span.end) + ") outside " + std::to_string(len) +
               " tokens");
    }
  }
  for (std::size_t i = 1; i < tweet.ne_spans.size(); ++i) {
    if (tweet.ne_spans[i - 1].end > tweet.ne_spans[i].start) {
      fail(ErrorKind::MalformedRecord, "tweet " + id + ": overlapping ne spans");
    }
  }
  for (const SlangPair& pair : tweet.slang_pairs) {
    if (pair.span.start >= pair.span.end || pair.span.end > len) {
      fail(ErrorKind::DanglingAnnotation,
           "tweet " + id + ": slang span outside token range");
    }
    if (tokenize(pair.standard).empty()) {
      fail(ErrorKind::MalformedRecord,
           "tweet " + id + ": slang standard form has no tokens");
    }
  }
}

}  // namespace

Corpus Corpus::from_tweets(std::vector<Tweet> tweets) {
  Corpus corpus;
  corpus.tweets_.reserve(tweets.size());
  for (Tweet& tweet : tweets) {
    tweet.tokens = tokenize(tweet.raw_text);
    tweet.hashtag_indices.clear();
    for (std::size_t i = 0; i < tweet.tokens.size(); ++i) {
      if (tweet.tokens[i].front() == '#') tweet.hashtag_indices.push_back(i);
    }
    std::sort(tweet.ne_spans.begin(), tweet.ne_spans.end(),
              [](const TokenSpan& a, const TokenSpan& b) {
                return a.start < b.start;
              });
    if (tweet.tokens.empty()) {
      ++corpus.dropped_empty_;
      continue;
    }
    validate_tweet(tweet);
    if (corpus.id_index_.count(tweet.id)) {
      fail(ErrorKind::DuplicateId, "duplicate tweet id " + tweet.id);
    }
    corpus.id_index_.emplace(tweet.id, corpus.tweets_.size());
    corpus.vocab_stats_.add_document(tweet.tokens);
    corpus.tweets_.push_back(std::move(tweet));
  }
  for (const Tweet& tweet : corpus.tweets_) {
    if (tweet.reply_to && !corpus.id_index_.count(*tweet.reply_to)) {
      ++corpus.external_replies_;
    }
  }
  return corpus;
}

bool Corpus::contains(const std::string& id) const {
  return id_index_.count(id) != 0;
}

const Tweet& Corpus::by_id(const std::string& id) const {
  auto it = id_index_.find(id);
  if (it == id_index_.end()) {
    fail(ErrorKind::MissingKey, "no tweet with id " + id);
  }
  return tweets_[it->second];
}

std::vector<std::string> Corpus::sorted_ngrams(std::size_t n) const {
  const auto& table = vocab_stats_.table(n);
  std::vector<std::string> grams;
  grams.reserve(table.size());
  for (const auto& [gram, stat] : table) grams.push_back(gram);
  std::sort(grams.begin(), grams.end());
  return grams;
}

namespace {

using nlohmann::json;

std::string line_context(std::size_t line_number) {
  return "line " + std::to_string(line_number);
}

Tweet tweet_from_json(const json& record, std::size_t line_number) {
  const std::string context = line_context(line_number);
  if (!record.is_object()) {
    fail(ErrorKind::MalformedRecord, context + ": record is not an object");
  }
  Tweet tweet;
  if (!record.contains("id") || !record["id"].is_string()) {
    fail(ErrorKind::MalformedRecord, context + ": missing string key 'id'");
  }
  tweet.id = record["id"].get<std::string>();
  if (!record.contains("text") || !record["text"].is_string()) {
    fail(ErrorKind::MalformedRecord, context + ": missing string key 'text'");
  }
  tweet.raw_text = record["text"].get<std::string>();
  if (record.contains("reply_to")) {
    if (!record["reply_to"].is_string()) {
      fail(ErrorKind::MalformedRecord, context + ": 'reply_to' must be a string");
    }
    tweet.reply_to = record["reply_to"].get<std::string>();
  }
  if (record.contains("first_reply_minutes")) {
    if (!record["first_reply_minutes"].is_number()) {
      fail(ErrorKind::MalformedRecord,
           context + ": 'first_reply_minutes' must be a number");
    }
    tweet.first_reply_minutes = record["first_reply_minutes"].get<double>();
  }
  if (record.contains("ne_spans")) {
    if (!record["ne_spans"].is_array()) {
      fail(ErrorKind::MalformedRecord, context + ": 'ne_spans' must be a list");
    }
    for (const auto& span : record["ne_spans"]) {
      if (!span.is_array() || span.size() != 2 || !span[0].is_number_unsigned() ||
          !span[1].is_number_unsigned()) {
        fail(ErrorKind::MalformedRecord,
             context + ": ne span must be [start, end]");
      }
      tweet.ne_spans.push_back(
          TokenSpan{span[0].get<std::size_t>(), span[1].get<std::size_t>()});
    }
  }
  if (record.contains("slang")) {
    if (!record["slang"].is_array()) {
      fail(ErrorKind::MalformedRecord, context + ": 'slang' must be a list");
    }
    for (const auto& entry : record["slang"]) {
      if (!entry.is_object() || !entry.contains("span") ||
          !entry.contains("standard") || !entry["span"].is_array() ||
          entry["span"].size() != 2 || !entry["standard"].is_string()) {
        fail(ErrorKind::MalformedRecord,
             context + ": slang entry must be {span:[s,e], standard:...}");
      }
      SlangPair pair;
      pair.span.start = entry["span"][0].get<std::size_t>();
      pair.span.end = entry["span"][1].get<std::size_t>();
      pair.standard = entry["standard"].get<std::string>();
      tweet.slang_pairs.push_back(std::move(pair));
    }
  }
  return tweet;
}

}  // namespace

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open corpus file " + path);
  std::vector<Tweet> tweets;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      fail(ErrorKind::MalformedRecord,
           line_context(line_number) + ": " + e.what());
    }
    tweets.push_back(tweet_from_json(record, line_number));
  }
  Corpus corpus = Corpus::from_tweets(std::move(tweets));
  if (corpus.dropped_empty() > 0) {
    std::cerr << "warning: dropped " << corpus.dropped_empty()
              << " zero-token tweets from " << path << "\n";
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::string out;
  for (const Tweet& tweet : corpus.tweets()) {
    nlohmann::ordered_json record;
    record["id"] = tweet.id;
    record["text"] = tweet.raw_text;
    if (tweet.reply_to) record["reply_to"] = *tweet.reply_to;
    if (tweet.first_reply_minutes) {
      record["first_reply_minutes"] = *tweet.first_reply_minutes;
    }
    if (!tweet.ne_spans.empty()) {
      auto spans = nlohmann::ordered_json::array();
      for (const TokenSpan& span : tweet.ne_spans) {
        spans.push_back({span.start, span.end});
      }
      record["ne_spans"] = std::move(spans);
    }
    if (!tweet.slang_pairs.empty()) {
      auto slang = nlohmann::ordered_json::array();
      for (const SlangPair& pair : tweet.slang_pairs) {
        nlohmann::ordered_json entry;
        entry["span"] = {pair.span.start, pair.span.end};
        entry["standard"] = pair.standard;
        slang.push_back(std::move(entry));
      }
      record["slang"] = std::move(slang);
    }
    out += record.dump();
    out.push_back('\n');
  }
  detail::write_file(path, out);
}

std::size_t word_count(const Tweet& tweet) {
  if (tweet.tokens.empty()) {
    fail(ErrorKind::ZeroLength, "tweet " + tweet.id + " has no tokens");
  }
  return tweet.tokens.size();
}

}  // namespace tweetprobe
