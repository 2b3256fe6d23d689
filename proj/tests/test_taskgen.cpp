#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <unordered_set>

#include "test_util.hpp"
#include "tweetprobe/error.hpp"
#include "tweetprobe/synthetic.hpp"
#include "tweetprobe/taskgen.hpp"

using namespace tweetprobe;

namespace {

// Independent linear-scan oracle: the smallest bin whose upper edge covers
// the length.
std::size_t bin_length_oracle(std::size_t length, std::size_t bin_size) {
  std::size_t bin = 0;
  while (length > bin_size * (bin + 1)) ++bin;
  return bin;
}

std::size_t bin_reply_oracle(double minutes, double bin_size,
                             double max_minutes) {
  if (minutes >= max_minutes) {
    return static_cast<std::size_t>(max_minutes / bin_size + 0.5);
  }
  std::size_t bin = 0;
  while (minutes >= bin_size * static_cast<double>(bin + 1)) ++bin;
  return bin;
}

Corpus hashtag_corpus(std::size_t n) {
  std::vector<Tweet> tweets;
  for (std::size_t i = 0; i < n; ++i) {
    tweets.push_back(testutil::tweet(
        "t" + std::to_string(i),
        "plain" + std::to_string(i % 7) + " #tag" + std::to_string(i % 5)));
  }
  return Corpus::from_tweets(std::move(tweets));
}

}  // namespace

TEST_CASE("task arities follow the task definitions") {
  CHECK(aux_arity(TaskKind::Length) == 0);
  CHECK(aux_arity(TaskKind::Content) == 1);
  CHECK(aux_arity(TaskKind::WordOrder) == 2);
  CHECK(aux_arity(TaskKind::Slang) == 2);
  CHECK(aux_arity(TaskKind::Hashtag) == 1);
  CHECK(aux_arity(TaskKind::NamedEntity) == 1);
  CHECK(aux_arity(TaskKind::IsReply) == 0);
  CHECK(aux_arity(TaskKind::ReplyTime) == 0);
}

TEST_CASE("bin_length examples") {
  CHECK(bin_length(1) == 0);
  CHECK(bin_length(4) == 0);
  CHECK(bin_length(5) == 1);
  CHECK(bin_length(13) == 3);
  try {
    bin_length(3, 0);
    FAIL("expected InvalidBinSize");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidBinSize);
  }
}

TEST_CASE("bin_length agrees with the brute-force scan for 1..200") {
  for (std::size_t length = 1; length <= 200; ++length) {
    CHECK(bin_length(length, 4) == bin_length_oracle(length, 4));
  }
}

TEST_CASE("bin_reply_time examples") {
  CHECK(bin_reply_time(0.0) == 0);
  CHECK(bin_reply_time(1.9) == 0);
  CHECK(bin_reply_time(2.0) == 1);
  CHECK(bin_reply_time(45.0, 2.0, 20.0) == 10);
  CHECK(reply_time_class_count(2.0, 20.0) == 11);
  try {
    bin_reply_time(1.0, 0.0, 20.0);
    FAIL("expected InvalidBinSize");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidBinSize);
  }
  // cap must be a multiple of the bin size
  CHECK_THROWS_AS(bin_reply_time(1.0, 2.0, 21.0), Error);
}

TEST_CASE("bin_reply_time agrees with the brute-force scan on 0..60") {
  for (int i = 0; i <= 600; ++i) {
    double minutes = static_cast<double>(i) * 0.1;
    CHECK(bin_reply_time(minutes, 2.0, 20.0) ==
          bin_reply_oracle(minutes, 2.0, 20.0));
  }
}

TEST_CASE("sample_content_negative basic cases") {
  Rng rng(1);
  Tweet tweet = testutil::tweet("t", "a b");
  std::vector<std::string> vocab = {"a", "b", "c"};
  CHECK(sample_content_negative(tweet, vocab, rng) == "c");

  Tweet covers = testutil::tweet("t", "a b c");
  try {
    sample_content_negative(covers, vocab, rng);
    FAIL("expected NoNegativeCandidate");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoNegativeCandidate);
  }
}

TEST_CASE("content negatives never land in the tweet (10k draws)") {
  Rng rng(2);
  Tweet tweet = testutil::tweet("t", "a b");
  std::vector<std::string> vocab;
  for (int i = 0; i < 98; ++i) vocab.push_back("v" + std::to_string(i));
  vocab.push_back("a");
  vocab.push_back("b");
  std::sort(vocab.begin(), vocab.end());
  for (int i = 0; i < 10000; ++i) {
    std::string w = sample_content_negative(tweet, vocab, rng);
    CHECK(w != "a");
    CHECK(w != "b");
  }
}

TEST_CASE("sample_order_pair") {
  Rng rng(3);
  Tweet tweet = testutil::tweet("t", "a b c");
  auto pair = sample_order_pair(tweet, rng);
  REQUIRE(pair.has_value());
  // the pair respects original order: first appears before second
  auto pos = [&](const std::string& w) {
    return std::find(tweet.tokens.begin(), tweet.tokens.end(), w) -
           tweet.tokens.begin();
  };
  CHECK(pos(pair->first) < pos(pair->second));

  CHECK_FALSE(sample_order_pair(testutil::tweet("t", "a a b"), rng).has_value());
  CHECK_FALSE(sample_order_pair(testutil::tweet("t", "a"), rng).has_value());
}

TEST_CASE("order pairs cover all unique-position pairs uniformly enough") {
  Rng rng(4);
  Tweet tweet = testutil::tweet("t", "a b c d");
  std::set<std::pair<std::string, std::string>> seen;
  for (int i = 0; i < 2000; ++i) {
    auto pair = sample_order_pair(tweet, rng);
    REQUIRE(pair.has_value());
    seen.insert({pair->first, pair->second});
  }
  CHECK(seen.size() == 6);  // C(4,2)
}

TEST_CASE("sample_hashtag_negative and positive") {
  Rng rng(5);
  Tweet tweet = testutil::tweet("t", "go #nlp");
  CHECK(sample_hashtag_negative(tweet, rng) == "go");
  CHECK(sample_hashtag_positive(tweet, rng) == "nlp");

  Tweet all_tags = testutil::tweet("t", "#a #b");
  try {
    sample_hashtag_negative(all_tags, rng);
    FAIL("expected NoNegativeCandidate");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoNegativeCandidate);
  }
}

TEST_CASE("hashtag negatives never carry the marker (10k draws)") {
  Rng rng(6);
  Tweet tweet = testutil::tweet("t", "#a one #b two three #c");
  std::unordered_set<std::size_t> tagged(tweet.hashtag_indices.begin(),
                                         tweet.hashtag_indices.end());
  for (int i = 0; i < 10000; ++i) {
    std::string w = sample_hashtag_negative(tweet, rng);
    CHECK(w.front() != '#');
  }
}

TEST_CASE("sample_ne_negative") {
  Rng rng(7);
  Tweet tweet = testutil::tweet("t", "obama visits new york");
  tweet.ne_spans = {TokenSpan{2, 4}};
  CHECK(sample_ne_negative(tweet, 2, rng) == "obama visits");

  Tweet whole = testutil::tweet("t", "new york");
  whole.ne_spans = {TokenSpan{0, 2}};
  try {
    sample_ne_negative(whole, 2, rng);
    FAIL("expected NoNegativeCandidate");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoNegativeCandidate);
  }
}

TEST_CASE("ne negatives never overlap a span (10k draws)") {
  Rng rng(8);
  Tweet tweet = testutil::tweet("t", "a b c d e f g h i j");
  tweet.ne_spans = {TokenSpan{2, 4}, TokenSpan{7, 9}};
  for (int i = 0; i < 10000; ++i) {
    std::string gram = sample_ne_negative(tweet, 2, rng);
    // reconstruct the window and check overlap directly
    std::vector<std::string> window = tokenize(gram);
    bool found = false;
    for (std::size_t s = 0; s + 2 <= tweet.tokens.size(); ++s) {
      if (tweet.tokens[s] == window[0] && tweet.tokens[s + 1] == window[1]) {
        bool overlaps = false;
        for (const TokenSpan& span : tweet.ne_spans) {
          if (std::max(s, span.start) < std::min(s + 2, span.end)) {
            overlaps = true;
          }
        }
        if (!overlaps) found = true;
      }
    }
    CHECK(found);
  }
}

TEST_CASE("sample_slang_negative") {
  Rng rng(9);
  std::vector<Tweet> tweets;
  tweets.push_back(testutil::tweet("t1", "great"));
  tweets.push_back(testutil::tweet("t2", "fine"));
  tweets.push_back(testutil::tweet("t3", "ok"));
  Corpus corpus = Corpus::from_tweets(std::move(tweets));
  for (int i = 0; i < 100; ++i) {
    std::string w = sample_slang_negative(corpus, 1, "great", rng);
    CHECK((w == "fine" || w == "ok"));
  }
  std::vector<Tweet> single;
  single.push_back(testutil::tweet("t1", "great"));
  Corpus tiny = Corpus::from_tweets(std::move(single));
  try {
    sample_slang_negative(tiny, 1, "great", rng);
    FAIL("expected NoNegativeCandidate");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoNegativeCandidate);
  }
}

TEST_CASE("build_task hashtag: one positive and one negative per tweet") {
  Corpus corpus = hashtag_corpus(100);
  TaskParams params;
  TaskDataset dataset = build_task(corpus, TaskKind::Hashtag, params, 7);
  CHECK(dataset.total_instances() == 200);
  CHECK(dataset.class_count == 2);
  std::size_t positives = 0;
  for (Split split : kAllSplits) {
    std::size_t pos = 0, neg = 0;
    for (const TaskInstance& instance : dataset.split(split)) {
      (instance.label == 1 ? pos : neg) += 1;
    }
    CHECK(pos == neg);  // paired instances share the tweet and the split
    positives += pos;
  }
  CHECK(positives == 100);
}

TEST_CASE("build_task fails cleanly without the needed annotation") {
  std::vector<Tweet> tweets;
  for (int i = 0; i < 120; ++i) {
    tweets.push_back(
        testutil::tweet("t" + std::to_string(i), "just plain words here"));
  }
  Corpus corpus = Corpus::from_tweets(std::move(tweets));
  try {
    build_task(corpus, TaskKind::NamedEntity, {}, 1);
    FAIL("expected MissingAnnotation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingAnnotation);
  }
}

TEST_CASE("build_task reports insufficient data with the eligible count") {
  Corpus corpus = hashtag_corpus(30);
  try {
    build_task(corpus, TaskKind::Hashtag, {}, 1);  // default min 100
    FAIL("expected InsufficientData");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InsufficientData);
    CHECK(std::string(e.what()).find("30") != std::string::npos);
  }
}

TEST_CASE("build_task is deterministic: same corpus and seed, same bytes") {
  testutil::TempDir dir;
  SyntheticSpec spec;
  spec.tweet_count = 150;
  spec.seed = 5;
  Corpus corpus = make_synthetic_corpus(spec);
  TaskParams params;
  params.min_instances = 40;
  for (TaskKind kind : kAllTasks) {
    TaskDataset a = build_task(corpus, kind, params, 99);
    TaskDataset b = build_task(corpus, kind, params, 99);
    CHECK(a == b);
    const std::string pa = dir.file(std::string(to_string(kind)) + "_a.tsv");
    const std::string pb = dir.file(std::string(to_string(kind)) + "_b.tsv");
    save_dataset(a, pa);
    save_dataset(b, pb);
    CHECK(testutil::read_text(pa) == testutil::read_text(pb));

    // and the file round-trips given the request map
    std::unordered_map<std::string, std::string> key_to_text;
    for (const AuxRequest& request : collect_aux_requests({a}, corpus)) {
      key_to_text.emplace(request.key, request.text);
    }
    CHECK(load_dataset(pa, key_to_text) == a);
  }
}

TEST_CASE("no tweet id straddles two splits") {
  SyntheticSpec spec;
  spec.tweet_count = 200;
  spec.seed = 8;
  Corpus corpus = make_synthetic_corpus(spec);
  TaskParams params;
  params.min_instances = 40;
  for (TaskKind kind : kAllTasks) {
    TaskDataset dataset = build_task(corpus, kind, params, 3);
    std::unordered_map<std::string, const char*> where;
    for (Split split : kAllSplits) {
      for (const TaskInstance& instance : dataset.split(split)) {
        auto [it, inserted] =
            where.emplace(instance.tweet_id, to_string(split));
        if (!inserted) CHECK(std::string(it->second) == to_string(split));
      }
    }
  }
}

TEST_CASE("binary datasets are balanced within each split") {
  SyntheticSpec spec;
  spec.tweet_count = 300;
  spec.seed = 21;
  Corpus corpus = make_synthetic_corpus(spec);
  TaskParams params;
  params.min_instances = 40;
  for (TaskKind kind : {TaskKind::Content, TaskKind::WordOrder, TaskKind::Slang,
                        TaskKind::Hashtag, TaskKind::NamedEntity,
                        TaskKind::IsReply}) {
    TaskDataset dataset = build_task(corpus, kind, params, 17);
    for (Split split : kAllSplits) {
      long pos = 0, neg = 0;
      for (const TaskInstance& instance : dataset.split(split)) {
        (instance.label == 1 ? pos : neg) += 1;
      }
      CHECK(std::abs(pos - neg) <= 1);
    }
  }
}

TEST_CASE("is_reply negatives are conversation starters") {
  SyntheticSpec spec;
  spec.tweet_count = 300;
  spec.seed = 13;
  Corpus corpus = make_synthetic_corpus(spec);
  TaskParams params;
  params.min_instances = 40;
  TaskDataset dataset = build_task(corpus, TaskKind::IsReply, params, 2);
  std::unordered_set<std::string> replied_to;
  for (const Tweet& tweet : corpus.tweets()) {
    if (tweet.reply_to && corpus.contains(*tweet.reply_to)) {
      replied_to.insert(*tweet.reply_to);
    }
  }
  for (Split split : kAllSplits) {
    for (const TaskInstance& instance : dataset.split(split)) {
      const Tweet& tweet = corpus.by_id(instance.tweet_id);
      if (instance.label == 1) {
        CHECK(tweet.reply_to.has_value());
      } else {
        CHECK_FALSE(tweet.reply_to.has_value());
        CHECK(replied_to.count(tweet.id) == 1);
      }
    }
  }
}

TEST_CASE("reply_time uses only tweets with a recorded time") {
  SyntheticSpec spec;
  spec.tweet_count = 300;
  spec.seed = 29;
  Corpus corpus = make_synthetic_corpus(spec);
  TaskParams params;
  params.min_instances = 40;
  TaskDataset dataset = build_task(corpus, TaskKind::ReplyTime, params, 2);
  CHECK(dataset.class_count == reply_time_class_count(2.0, 20.0));
  for (Split split : kAllSplits) {
    for (const TaskInstance& instance : dataset.split(split)) {
      const Tweet& tweet = corpus.by_id(instance.tweet_id);
      REQUIRE(tweet.first_reply_minutes.has_value());
      CHECK(instance.label ==
            bin_reply_time(*tweet.first_reply_minutes, 2.0, 20.0));
    }
  }
}

TEST_CASE("every negative fails its defining predicate re-check") {
  SyntheticSpec spec;
  spec.tweet_count = 600;
  spec.seed = 31;
  Corpus corpus = make_synthetic_corpus(spec);
  TaskParams params;
  params.min_instances = 50;

  auto tokens_of = [&](const std::string& id) {
    return corpus.by_id(id).tokens;
  };

  TaskDataset content = build_task(corpus, TaskKind::Content, params, 41);
  for (Split split : kAllSplits) {
    for (const TaskInstance& instance : content.split(split)) {
      auto toks = tokens_of(instance.tweet_id);
      bool inside = std::find(toks.begin(), toks.end(),
                              instance.aux_texts[0]) != toks.end();
      CHECK(inside == (instance.label == 1));
    }
  }

  TaskDataset order = build_task(corpus, TaskKind::WordOrder, params, 42);
  for (Split split : kAllSplits) {
    for (const TaskInstance& instance : order.split(split)) {
      auto toks = tokens_of(instance.tweet_id);
      auto first = std::find(toks.begin(), toks.end(), instance.aux_texts[0]);
      auto second = std::find(toks.begin(), toks.end(), instance.aux_texts[1]);
      REQUIRE(first != toks.end());
      REQUIRE(second != toks.end());
      CHECK((first < second) == (instance.label == 1));
    }
  }

  TaskDataset hashtag = build_task(corpus, TaskKind::Hashtag, params, 43);
  for (Split split : kAllSplits) {
    for (const TaskInstance& instance : hashtag.split(split)) {
      auto toks = tokens_of(instance.tweet_id);
      if (instance.label == 0) {
        auto it = std::find(toks.begin(), toks.end(), instance.aux_texts[0]);
        REQUIRE(it != toks.end());
        CHECK((*it)[0] != '#');
      } else {
        CHECK(std::find(toks.begin(), toks.end(), "#" + instance.aux_texts[0]) !=
              toks.end());
      }
    }
  }

  TaskDataset entity = build_task(corpus, TaskKind::NamedEntity, params, 44);
  for (Split split : kAllSplits) {
    for (const TaskInstance& instance : entity.split(split)) {
      const Tweet& tweet = corpus.by_id(instance.tweet_id);
      std::vector<std::string> window = tokenize(instance.aux_texts[0]);
      bool overlap_free_position = false;
      bool exact_span = false;
      for (std::size_t s = 0; s + window.size() <= tweet.tokens.size(); ++s) {
        bool match = true;
        for (std::size_t i = 0; i < window.size(); ++i) {
          if (tweet.tokens[s + i] != window[i]) match = false;
        }
        if (!match) continue;
        bool overlaps = false;
        for (const TokenSpan& span : tweet.ne_spans) {
          if (std::max(s, span.start) < std::min(s + window.size(), span.end)) {
            overlaps = true;
          }
          if (span.start == s && span.end == s + window.size()) {
            exact_span = true;
          }
        }
        if (!overlaps) overlap_free_position = true;
      }
      if (instance.label == 0) {
        CHECK(overlap_free_position);
      } else {
        CHECK(exact_span);
      }
    }
  }

  TaskDataset slang = build_task(corpus, TaskKind::Slang, params, 45);
  for (Split split : kAllSplits) {
    for (const TaskInstance& instance : slang.split(split)) {
      const Tweet& tweet = corpus.by_id(instance.tweet_id);
      if (instance.label == 0) {
        bool is_gold = false;
        for (const SlangPair& pair : tweet.slang_pairs) {
          if (join_tokens(tweet.tokens, pair.span.start, pair.span.end) ==
              instance.aux_texts[0]) {
            std::vector<std::string> gold = tokenize(pair.standard);
            if (join_tokens(gold, 0, gold.size()) == instance.aux_texts[1]) {
              is_gold = true;
            }
          }
        }
        CHECK_FALSE(is_gold);
      }
    }
  }
}

TEST_CASE("collect_aux_requests counts and determinism") {
  SyntheticSpec spec;
  spec.tweet_count = 150;
  spec.seed = 12;
  Corpus corpus = make_synthetic_corpus(spec);
  TaskParams params;
  params.min_instances = 40;

  TaskDataset length = build_task(corpus, TaskKind::Length, params, 1);
  auto only_length = collect_aux_requests({length}, corpus);
  std::size_t length_tweets = length.total_instances();
  CHECK(only_length.size() == length_tweets);  // arity 0: one text per tweet

  TaskDataset content = build_task(corpus, TaskKind::Content, params, 1);
  auto with_content = collect_aux_requests({content}, corpus);
  std::size_t content_tweets = content.total_instances() / 2;
  CHECK(with_content.size() >= content_tweets);
  CHECK(with_content.size() <= content_tweets * 3);  // + up to 2 words each

  auto again = collect_aux_requests({content}, corpus);
  CHECK(with_content == again);
  for (std::size_t i = 1; i < with_content.size(); ++i) {
    CHECK(with_content[i - 1].key < with_content[i].key);
  }
}

TEST_CASE("datasets round-trip through files given the request map") {
  testutil::TempDir dir;
  SyntheticSpec spec;
  spec.tweet_count = 150;
  spec.seed = 3;
  Corpus corpus = make_synthetic_corpus(spec);
  TaskParams params;
  params.min_instances = 40;
  TaskDataset dataset = build_task(corpus, TaskKind::Slang, params, 77);

  auto requests = collect_aux_requests({dataset}, corpus);
  std::unordered_map<std::string, std::string> key_to_text;
  for (const AuxRequest& request : requests) {
    key_to_text.emplace(request.key, request.text);
  }
  const std::string path = dir.file("slang.tsv");
  save_dataset(dataset, path, "cafef00ddeadbeef");
  std::string digest;
  TaskDataset loaded = load_dataset(path, key_to_text, &digest);
  CHECK(digest == "cafef00ddeadbeef");
  CHECK(loaded == dataset);
}

TEST_CASE("requests files round-trip with escaped texts") {
  testutil::TempDir dir;
  std::vector<AuxRequest> requests = {
      {"aux:0001", "plain words"},
      {"k2", "tab\there and \\slash\nnewline"},
  };
  const std::string path = dir.file("req.tsv");
  save_requests(requests, path);
  CHECK(load_requests(path) == requests);
}
