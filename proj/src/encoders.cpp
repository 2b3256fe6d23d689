#include "tweetprobe/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>

#include "text_util.hpp"
#include "tweetprobe/error.hpp"
#include "tweetprobe/rng.hpp"
#include "tweetprobe/taskgen.hpp"

namespace tweetprobe {

// ---- BOW ----

BowVocabulary build_bow_vocab(const Corpus& corpus, std::size_t max_terms,
                              std::size_t n_max) {
  if (corpus.size() == 0) fail(ErrorKind::EmptyCorpus, "corpus has no tweets");
  if (n_max == 0 || n_max > kMaxNgramOrder) {
    fail(ErrorKind::ConfigError, "bow n_max must be in [1, 5]");
  }
  struct Candidate {
    const std::string* term;
    const NgramStat* stat;
  };
  std::vector<Candidate> candidates;
  for (std::size_t n = 1; n <= n_max; ++n) {
    for (const auto& [term, stat] : corpus.vocab_stats().table(n)) {
      candidates.push_back({&term, &stat});
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.stat->count != b.stat->count) {
                return a.stat->count > b.stat->count;
              }
              return *a.term < *b.term;
            });
  if (candidates.size() > max_terms) candidates.resize(max_terms);

  BowVocabulary vocab;
  vocab.n_max = n_max;
  vocab.corpus_size = corpus.size();
  vocab.terms.reserve(candidates.size());
  vocab.doc_freq.reserve(candidates.size());
  for (const Candidate& candidate : candidates) {
    vocab.index.emplace(*candidate.term,
                        static_cast<std::uint32_t>(vocab.terms.size()));
    vocab.terms.push_back(*candidate.term);
    vocab.doc_freq.push_back(candidate.stat->doc_freq);
  }
  return vocab;
}

RepVector encode_bow(std::string_view text, const BowVocabulary& vocab) {
  std::vector<std::string> tokens = tokenize(text);
  std::map<std::uint32_t, std::uint64_t> term_counts;
  for (std::size_t n = 1; n <= vocab.n_max; ++n) {
    if (tokens.size() < n) break;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      auto it = vocab.index.find(join_tokens(tokens, i, i + n));
      if (it != vocab.index.end()) ++term_counts[it->second];
    }
  }
  std::vector<std::pair<std::uint32_t, double>> entries;
  entries.reserve(term_counts.size());
  double norm_sq = 0.0;
  for (const auto& [index, tf] : term_counts) {
    double idf =
        std::log(static_cast<double>(vocab.corpus_size) /
                 (1.0 + static_cast<double>(vocab.doc_freq[index]))) +
        1.0;
    double value = static_cast<double>(tf) * idf;
    entries.emplace_back(index, value);
    norm_sq += value * value;
  }
  if (norm_sq > 0.0) {
    double inv_norm = 1.0 / std::sqrt(norm_sq);
    for (auto& [index, value] : entries) value *= inv_norm;
  }
  return RepVector::sparse(vocab.terms.size(), std::move(entries));
}

void save_bow_vocab(const BowVocabulary& vocab, const std::string& path,
                    const std::string& digest) {
  std::string out = "#bow_vocab";
  out += "\tn_max=" + std::to_string(vocab.n_max);
  out += "\tcorpus_size=" + std::to_string(vocab.corpus_size);
  out += "\tterms=" + std::to_string(vocab.terms.size());
  if (!digest.empty()) out += "\tdigest=" + digest;
  out.push_back('\n');
  for (std::size_t i = 0; i < vocab.terms.size(); ++i) {
    out += vocab.terms[i];
    out.push_back('\t');
    out += std::to_string(vocab.doc_freq[i]);
    out.push_back('\n');
  }
  detail::write_file(path, out);
}

BowVocabulary load_bow_vocab(const std::string& path, std::string* digest_out) {
  std::string content = detail::read_file(path);
  BowVocabulary vocab;
  bool saw_header = false;
  std::size_t declared_terms = 0;
  std::size_t line_number = 0;
  for (std::string_view line : detail::split_view(content, '\n')) {
    ++line_number;
    if (line.empty()) continue;
    const std::string context = path + " line " + std::to_string(line_number);
    if (!saw_header) {
      auto fields = detail::split_view(line, '\t');
      if (fields.empty() || fields[0] != "#bow_vocab") {
        fail(ErrorKind::MalformedLine, context + ": missing bow header");
      }
      for (std::size_t i = 1; i < fields.size(); ++i) {
        auto kv = detail::split_view(fields[i], '=');
        if (kv.size() != 2) fail(ErrorKind::MalformedLine, context);
        if (kv[0] == "n_max") {
          vocab.n_max = detail::parse_u64(kv[1], context);
        } else if (kv[0] == "corpus_size") {
          vocab.corpus_size = detail::parse_u64(kv[1], context);
        } else if (kv[0] == "terms") {
          declared_terms = detail::parse_u64(kv[1], context);
        } else if (kv[0] == "digest") {
          if (digest_out) *digest_out = std::string(kv[1]);
        }
      }
      saw_header = true;
      continue;
    }
    auto fields = detail::split_view(line, '\t');
    if (fields.size() != 2) {
      fail(ErrorKind::MalformedLine, context + ": expected term<TAB>df");
    }
    vocab.index.emplace(std::string(fields[0]),
                        static_cast<std::uint32_t>(vocab.terms.size()));
    vocab.terms.emplace_back(fields[0]);
    vocab.doc_freq.push_back(detail::parse_u64(fields[1], context));
  }
  if (!saw_header || vocab.terms.size() != declared_terms) {
    fail(ErrorKind::MalformedLine, path + ": term count mismatch");
  }
  return vocab;
}

BowProvider::BowProvider(std::string name, BowVocabulary vocab)
    : name_(std::move(name)), vocab_(std::move(vocab)) {}

RepVector BowProvider::encode(const EncodeRequest& request) const {
  return encode_bow(request.text, vocab_);
}

// ---- BOM ----

WordTable load_word_vectors(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open word vectors " + path);
  std::string line;
  std::size_t line_number = 0;
  WordTable table;
  if (!std::getline(in, line)) {
    fail(ErrorKind::MalformedLine, path + ": empty vector file");
  }
  ++line_number;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    auto fields = detail::split_view(line, ' ');
    if (fields.size() != 2) {
      fail(ErrorKind::MalformedLine, path + " line 1: expected <count> <dim>");
    }
    detail::parse_u64(fields[0], path + " line 1");
    table.dim = detail::parse_u64(fields[1], path + " line 1");
    if (table.dim == 0) {
      fail(ErrorKind::MalformedLine, path + " line 1: dim must be positive");
    }
  }
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string context = path + " line " + std::to_string(line_number);
    auto fields = detail::split_view(line, ' ');
    if (fields.size() != table.dim + 1) {
      fail(ErrorKind::DimensionMismatch,
           context + ": expected " + std::to_string(table.dim) +
               " values, got " + std::to_string(fields.size() - 1));
    }
    std::vector<double> values(table.dim);
    for (std::size_t i = 0; i < table.dim; ++i) {
      values[i] = detail::parse_double(fields[i + 1], context);
    }
    std::string word(fields[0]);
    auto [it, inserted] = table.vectors.emplace(word, std::move(values));
    if (!inserted) {
      it->second.assign(fields.size() - 1, 0.0);
      for (std::size_t i = 0; i < table.dim; ++i) {
        it->second[i] = detail::parse_double(fields[i + 1], context);
      }
      ++table.duplicate_count;
      std::cerr << "warning: duplicate word '" << word << "' at " << context
                << ", last occurrence wins\n";
    }
  }
  return table;
}

void save_word_vectors(const WordTable& table, const std::string& path) {
  std::vector<const std::string*> words;
  words.reserve(table.vectors.size());
  for (const auto& [word, values] : table.vectors) words.push_back(&word);
  std::sort(words.begin(), words.end(),
            [](const std::string* a, const std::string* b) { return *a < *b; });
  std::string out = std::to_string(words.size()) + " " +
                    std::to_string(table.dim) + "\n";
  for (const std::string* word : words) {
    out += *word;
    for (double value : table.vectors.at(*word)) {
      out.push_back(' ');
      out += detail::format_double(value);
    }
    out.push_back('\n');
  }
  detail::write_file(path, out);
}

RepVector encode_bom(std::string_view text, const WordTable& table) {
  std::vector<std::string> tokens = tokenize(text);
  // Canonical summation order makes the average exactly permutation
  // invariant despite floating-point non-associativity.
  std::sort(tokens.begin(), tokens.end());
  std::vector<double> sum(table.dim, 0.0);
  std::size_t known = 0;
  for (const std::string& token : tokens) {
    auto it = table.vectors.find(token);
    if (it == table.vectors.end()) continue;
    ++known;
    for (std::size_t i = 0; i < table.dim; ++i) sum[i] += it->second[i];
  }
  if (known > 0) {
    for (double& v : sum) v /= static_cast<double>(known);
  }
  return RepVector::dense(std::move(sum));
}

BomProvider::BomProvider(std::string name, WordTable table)
    : name_(std::move(name)), table_(std::move(table)) {}

RepVector BomProvider::encode(const EncodeRequest& request) const {
  return encode_bom(request.text, table_);
}

// ---- external vectors ----

ExternalProvider ExternalProvider::load(
    const std::string& name, const std::string& vectors_path,
    const std::vector<std::string>& required_keys) {
  std::ifstream in(vectors_path, std::ios::binary);
  if (!in) {
    fail(ErrorKind::IoError, "cannot open vector file " + vectors_path);
  }
  ExternalProvider provider;
  provider.name_ = name;
  std::string line;
  std::size_t line_number = 0;
  if (!std::getline(in, line)) {
    fail(ErrorKind::MalformedLine, vectors_path + ": empty vector file");
  }
  ++line_number;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    auto fields = detail::split_view(line, ' ');
    if (fields.size() != 2) {
      fail(ErrorKind::MalformedLine,
           vectors_path + " line 1: expected <count> <dim>");
    }
    provider.dim_ = detail::parse_u64(fields[1], vectors_path + " line 1");
    if (provider.dim_ == 0) {
      fail(ErrorKind::MalformedLine,
           vectors_path + " line 1: dim must be positive");
    }
  }
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string context =
        vectors_path + " line " + std::to_string(line_number);
    auto fields = detail::split_view(line, ' ');
    if (fields.size() != provider.dim_ + 1) {
      fail(ErrorKind::DimensionMismatch,
           context + ": expected " + std::to_string(provider.dim_) +
               " values, got " + std::to_string(fields.size() - 1));
    }
    std::vector<double> values(provider.dim_);
    for (std::size_t i = 0; i < provider.dim_; ++i) {
      values[i] = detail::parse_double(fields[i + 1], context);
    }
    auto [it, inserted] =
        provider.vectors_.emplace(std::string(fields[0]), std::move(values));
    if (!inserted) {
      fail(ErrorKind::DuplicateKey, context + ": duplicate key '" +
                                        std::string(fields[0]) + "'");
    }
  }
  std::vector<std::string> missing;
  for (const std::string& key : required_keys) {
    if (!provider.vectors_.count(key)) missing.push_back(key);
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    std::string listed;
    const std::size_t show = std::min<std::size_t>(missing.size(), 10);
    for (std::size_t i = 0; i < show; ++i) {
      if (i) listed += ", ";
      listed += missing[i];
    }
    if (missing.size() > show) {
      listed += ", ... (" + std::to_string(missing.size()) + " total)";
    }
    fail(ErrorKind::MissingKey,
         vectors_path + " lacks " + std::to_string(missing.size()) +
             " requested keys: " + listed);
  }
  return provider;
}

RepVector ExternalProvider::encode(const EncodeRequest& request) const {
  auto it = vectors_.find(request.key);
  if (it == vectors_.end()) {
    fail(ErrorKind::MissingKey,
         "provider " + name_ + " has no vector for key '" + request.key + "'");
  }
  return RepVector::dense(it->second);
}

ExternalProvider load_external(const std::string& vectors_path,
                               const std::string& requests_path,
                               const std::string& name) {
  std::vector<std::string> keys;
  for (const AuxRequest& request : load_requests(requests_path)) {
    keys.push_back(request.key);
  }
  return ExternalProvider::load(name, vectors_path, keys);
}

std::string permute_tokens(const Tweet& tweet, std::uint64_t seed) {
  Rng rng(splitmix64(seed ^ fnv1a64(tweet.id)));
  std::vector<std::string> tokens = tweet.tokens;
  rng.shuffle(tokens);
  return join_tokens(tokens, 0, tokens.size());
}

}  // namespace tweetprobe
