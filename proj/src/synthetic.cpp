#include "tweetprobe/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "tweetprobe/error.hpp"
#include "tweetprobe/rng.hpp"

namespace tweetprobe {

namespace {

// Zipf-distributed draws over ranks 0..n-1 via the cumulative weights.
class ZipfSampler {
 public:
  ZipfSampler(std::size_t n, double exponent) : cumulative_(n, 0.0) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      total += 1.0 / std::pow(static_cast<double>(i + 1), exponent);
      cumulative_[i] = total;
    }
  }
  std::size_t draw(Rng& rng) const {
    double u = rng.uniform01() * cumulative_.back();
    return static_cast<std::size_t>(
        std::lower_bound(cumulative_.begin(), cumulative_.end(), u) -
        cumulative_.begin());
  }

 private:
  std::vector<double> cumulative_;
};

std::string padded_id(std::size_t index) {
  char buffer[16];
  std::snprintf(buffer, sizeof(buffer), "t%06zu", index);
  return buffer;
}

// Decorations the tokenizer strips back out: case, trailing punctuation,
// wrapping parens. Keeps the generated annotations aligned with the tokens
// the loader recomputes.
std::string decorate(const std::string& token, Rng& rng) {
  std::string out = token;
  double roll = rng.uniform01();
  if (roll < 0.15) {
    for (char& c : out) {
      if (c >= 'a' && c <= 'z') {
        c = static_cast<char>(c - ('a' - 'A'));
        break;
      }
    }
  } else if (roll < 0.20) {
    out = "(" + out + ")";
  }
  double tail = rng.uniform01();
  if (tail < 0.10) {
    out += "!";
  } else if (tail < 0.15) {
    out += ",";
  }
  return out;
}

}  // namespace

Corpus make_synthetic_corpus(const SyntheticSpec& spec) {
  if (spec.tweet_count == 0 || spec.content_vocab == 0 ||
      spec.min_length == 0 || spec.max_length < spec.min_length) {
    fail(ErrorKind::ConfigError, "bad synthetic corpus spec");
  }
  Rng rng(mix_seed(spec.seed, "synthetic-corpus"));
  ZipfSampler zipf(spec.content_vocab, spec.zipf_exponent);

  std::vector<std::vector<std::string>> entities;
  for (std::size_t e = 0; e < spec.ne_vocab; ++e) {
    std::vector<std::string> tokens;
    std::size_t len = 1 + e % 3;
    for (std::size_t j = 0; j < len; ++j) {
      tokens.push_back("ent" + std::to_string(e) + "p" + std::to_string(j));
    }
    entities.push_back(std::move(tokens));
  }
  std::vector<std::pair<std::string, std::string>> slang;  // token, standard
  for (std::size_t s = 0; s < spec.slang_vocab; ++s) {
    std::string standard = "w" + std::to_string(s % spec.content_vocab);
    if (s % 2 == 1) {
      standard += " w" + std::to_string((s * 7 + 1) % spec.content_vocab);
    }
    slang.emplace_back("slng" + std::to_string(s), std::move(standard));
  }

  std::vector<Tweet> tweets;
  tweets.reserve(spec.tweet_count);
  for (std::size_t t = 0; t < spec.tweet_count; ++t) {
    Tweet tweet;
    tweet.id = padded_id(t);
    std::size_t content_len =
        spec.min_length +
        rng.uniform_index(spec.max_length - spec.min_length + 1);
    std::vector<std::string> tokens;
    tokens.reserve(content_len + 6);
    for (std::size_t i = 0; i < content_len; ++i) {
      if (spec.rare_vocab > 0 && rng.uniform01() < spec.rare_prob) {
        tokens.push_back("r" +
                         std::to_string(rng.uniform_index(spec.rare_vocab)));
      } else {
        tokens.push_back("w" + std::to_string(zipf.draw(rng)));
      }
    }

    if (spec.ne_vocab > 0 && rng.uniform01() < spec.ne_prob) {
      const auto& entity = entities[rng.uniform_index(entities.size())];
      std::size_t at = rng.uniform_index(tokens.size() + 1);
      tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(at),
                    entity.begin(), entity.end());
      tweet.ne_spans.push_back(TokenSpan{at, at + entity.size()});
    }
    if (spec.slang_vocab > 0 && rng.uniform01() < spec.slang_prob) {
      const auto& [token, standard] = slang[rng.uniform_index(slang.size())];
      // Insert outside the entity span so annotations stay non-overlapping.
      std::vector<std::size_t> positions;
      for (std::size_t p = 0; p <= tokens.size(); ++p) {
        bool inside = false;
        for (const TokenSpan& span : tweet.ne_spans) {
          if (p > span.start && p < span.end) inside = true;
        }
        if (!inside) positions.push_back(p);
      }
      std::size_t at = positions[rng.uniform_index(positions.size())];
      tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(at), token);
      for (TokenSpan& span : tweet.ne_spans) {
        if (span.start >= at) {
          ++span.start;
          ++span.end;
        }
      }
      tweet.slang_pairs.push_back(SlangPair{{at, at + 1}, standard});
    }
    if (spec.hashtag_vocab > 0 && rng.uniform01() < spec.hashtag_prob) {
      std::size_t count = 1 + (rng.uniform01() < 0.3 ? 1 : 0);
      for (std::size_t h = 0; h < count; ++h) {
        tokens.push_back("#tag" +
                         std::to_string(rng.uniform_index(spec.hashtag_vocab)));
      }
    }
    if (spec.mention_vocab > 0 && rng.uniform01() < 0.2) {
      tokens.push_back("@user" +
                       std::to_string(rng.uniform_index(spec.mention_vocab)));
    }
    if (t > 0 && rng.uniform01() < spec.reply_prob) {
      tweet.reply_to = padded_id(rng.uniform_index(t));
    }

    std::string text;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i) text.push_back(' ');
      text += decorate(tokens[i], rng);
    }
    tweet.raw_text = std::move(text);
    tweets.push_back(std::move(tweet));
  }

  // The tweets that received a reply get a first-reply time.
  std::vector<std::size_t> replied(spec.tweet_count, 0);
  for (const Tweet& tweet : tweets) {
    if (tweet.reply_to) {
      std::size_t parent =
          static_cast<std::size_t>(std::stoul(tweet.reply_to->substr(1)));
      replied[parent] = 1;
    }
  }
  for (std::size_t t = 0; t < spec.tweet_count; ++t) {
    if (replied[t]) {
      tweets[t].first_reply_minutes = rng.uniform01() * spec.reply_minutes_max;
    }
  }
  return Corpus::from_tweets(std::move(tweets));
}

WordTable make_synthetic_word_table(const Corpus& corpus, std::size_t dim,
                                    std::uint64_t seed) {
  if (dim == 0) fail(ErrorKind::ConfigError, "word vector dim must be >= 1");
  WordTable table;
  table.dim = dim;
  for (const std::string& word : corpus.sorted_ngrams(1)) {
    Rng rng(mix_seed(seed, word));
    std::vector<double> values(dim);
    for (double& v : values) v = rng.uniform01() - 0.5;
    table.vectors.emplace(word, std::move(values));
  }
  return table;
}

}  // namespace tweetprobe
