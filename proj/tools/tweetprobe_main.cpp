// Command line driver: runs the whole pipeline or any single stage, plus a
// synthetic-corpus generator for demos and smoke runs.
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tweetprobe/error.hpp"
#include "tweetprobe/pipeline.hpp"
#include "tweetprobe/synthetic.hpp"

namespace {

using tweetprobe::Error;
using tweetprobe::ErrorKind;

int exit_code_for(const Error& error) {
  switch (error.kind()) {
    case ErrorKind::ConfigError:
      return 2;
    case ErrorKind::MissingKey:
      return 4;
    case ErrorKind::NonFiniteLoss:
    case ErrorKind::NonFiniteValue:
      return 5;
    default:
      return 3;
  }
}

tweetprobe::RunConfig load_config(const std::string& config_path,
                                  const std::optional<std::uint64_t>& seed,
                                  const std::string& output_override) {
  tweetprobe::RunConfig config = tweetprobe::load_run_config(config_path);
  if (seed) config.seed = *seed;
  if (!output_override.empty()) config.output_dir = output_override;
  return config;
}

int report_missing(const std::vector<std::string>& missing,
                   const tweetprobe::RunConfig& config) {
  std::cerr << "missing external vectors for:";
  for (const std::string& name : missing) std::cerr << ' ' << name;
  std::cerr << "\nrequest lists were written under " << config.output_dir
            << "/requests/; supply vector files and rerun\n";
  return 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tweet representation probing harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_override;
  std::optional<std::uint64_t> seed_override;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "run configuration (JSON)")
        ->required();
    cmd->add_option("--seed", seed_override, "override the config seed");
    cmd->add_option("--out", output_override, "override the output directory");
  };

  CLI::App* run = app.add_subcommand("run", "execute every stage in order");
  CLI::App* ingest = app.add_subcommand("ingest", "load and normalize the corpus");
  CLI::App* build = app.add_subcommand("build-tasks", "generate the task datasets");
  CLI::App* requests =
      app.add_subcommand("requests", "emit vector request lists");
  CLI::App* encode =
      app.add_subcommand("encode", "build provider models / check vectors");
  CLI::App* train = app.add_subcommand("train", "train one probe per provider and task");
  CLI::App* analyze =
      app.add_subcommand("analyze", "length and word-order analyses");
  CLI::App* report = app.add_subcommand("report", "assemble the final report");
  for (CLI::App* cmd : {run, ingest, build, requests, encode, train, analyze,
                        report}) {
    add_common(cmd);
  }

  CLI::App* synth =
      app.add_subcommand("synth", "write a synthetic annotated demo corpus");
  const tweetprobe::SyntheticSpec synth_defaults;
  std::string synth_corpus = "corpus.jsonl";
  std::string synth_vectors;
  std::size_t synth_tweets = synth_defaults.tweet_count;
  std::size_t synth_dim = 50;
  std::uint64_t synth_seed = 1;
  std::size_t synth_vocab = synth_defaults.content_vocab;
  double synth_zipf = synth_defaults.zipf_exponent;
  synth->add_option("--corpus", synth_corpus, "corpus output path");
  synth->add_option("--tweets", synth_tweets, "number of tweets");
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--vocab", synth_vocab, "content vocabulary size");
  synth->add_option("--zipf", synth_zipf, "content word Zipf exponent");
  synth->add_option("--word-vectors", synth_vectors,
                    "also write a random word-vector file here");
  synth->add_option("--dim", synth_dim, "word vector dimension");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage problems are configuration errors
  }

  try {
    if (synth->parsed()) {
      tweetprobe::SyntheticSpec spec;
      spec.tweet_count = synth_tweets;
      spec.seed = synth_seed;
      spec.content_vocab = synth_vocab;
      spec.zipf_exponent = synth_zipf;
      tweetprobe::Corpus corpus = tweetprobe::make_synthetic_corpus(spec);
      tweetprobe::save_corpus(corpus, synth_corpus);
      std::cout << "wrote " << corpus.size() << " tweets to " << synth_corpus
                << "\n";
      if (!synth_vectors.empty()) {
        tweetprobe::save_word_vectors(
            tweetprobe::make_synthetic_word_table(corpus, synth_dim,
                                                  synth_seed),
            synth_vectors);
        std::cout << "wrote word vectors to " << synth_vectors << "\n";
      }
      return 0;
    }

    tweetprobe::RunConfig config =
        load_config(config_path, seed_override, output_override);
    if (run->parsed()) {
      tweetprobe::PipelineResult result = tweetprobe::run_pipeline(config);
      if (result.exit_code == 4) {
        return report_missing(result.missing_vector_providers, config);
      }
      std::cout << "report written under " << config.output_dir
                << "/report/\n";
      return 0;
    }
    if (ingest->parsed()) tweetprobe::stage_ingest(config);
    if (build->parsed()) tweetprobe::stage_build_tasks(config);
    if (requests->parsed()) tweetprobe::stage_requests(config);
    if (encode->parsed()) {
      std::vector<std::string> missing = tweetprobe::stage_encode(config);
      if (!missing.empty()) return report_missing(missing, config);
    }
    if (train->parsed()) tweetprobe::stage_train(config);
    if (analyze->parsed()) tweetprobe::stage_analyze(config);
    if (report->parsed()) tweetprobe::stage_report(config);
    return 0;
  } catch (const Error& error) {
    std::cerr << "error: " << error.what() << "\n";
    return exit_code_for(error);
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 3;
  }
}
