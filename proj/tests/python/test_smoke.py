"""Python smoke tests for the _core extension module and the CLI."""

import json
import math
import os
import subprocess
import sys

import pytest

import tweetprobe as tp


def test_tokenize():
    assert tp.tokenize("Good day #NLP @bob") == ["good", "day", "#nlp", "@bob"]
    assert tp.tokenize("hello!!!") == ["hello"]
    assert tp.tokenize("") == []


def test_binning():
    assert tp.bin_length(1) == 0
    assert tp.bin_length(13) == 3
    assert tp.bin_reply_time(0.0) == 0
    assert tp.bin_reply_time(45.0) == 10
    with pytest.raises(RuntimeError):
        tp.bin_length(3, 0)


def test_corpus_roundtrip(tmp_path):
    path = tmp_path / "corpus.jsonl"
    path.write_text(
        '{"id":"t1","text":"Good day #NLP"}\n'
        '{"id":"t2","text":"obama visits new york","ne_spans":[[2,4]],'
        '"reply_to":"t1","first_reply_minutes":3.5}\n'
    )
    corpus = tp.load_corpus(str(path))
    assert len(corpus) == 2
    tweet = corpus.by_id("t2")
    assert tweet.ne_spans == [(2, 4)]
    assert tweet.reply_to == "t1"
    out = tmp_path / "copy.jsonl"
    tp.save_corpus(corpus, str(out))
    again = tp.load_corpus(str(out))
    assert again.by_id("t1").tokens == ["good", "day", "#nlp"]


def test_errors_surface_as_runtime_errors(tmp_path):
    path = tmp_path / "dup.jsonl"
    path.write_text('{"id":"t1","text":"a"}\n{"id":"t1","text":"b"}\n')
    with pytest.raises(RuntimeError, match="DuplicateId"):
        tp.load_corpus(str(path))


@pytest.fixture(scope="module")
def corpus():
    spec = tp.SyntheticSpec()
    spec.tweet_count = 260
    spec.seed = 7
    return tp.make_synthetic_corpus(spec)


def test_build_task(corpus):
    params = tp.TaskParams()
    params.min_instances = 40
    dataset = tp.build_task(corpus, tp.TaskKind.HASHTAG, params, 3)
    assert dataset.class_count == 2
    pos = sum(1 for i in dataset.train if i.label == 1)
    neg = sum(1 for i in dataset.train if i.label == 0)
    assert pos == neg
    requests = tp.collect_aux_requests([dataset], corpus)
    keys = [k for k, _ in requests]
    assert keys == sorted(keys)


def test_encoders(corpus):
    vocab = tp.build_bow_vocab(corpus, 2000, 2)
    vector = tp.encode_bow("w0 w1 w0", vocab)
    assert vector.is_sparse
    assert vector.dim == vocab.size

    table = tp.make_synthetic_word_table(corpus, 16, 5)
    dense = tp.encode_bom("w0 w1", table)
    assert dense.dim == 16
    tweet = corpus.tweet(0)
    permuted = tp.permute_tokens(tweet, 9)
    assert sorted(permuted.split(" ")) == sorted(tweet.tokens)
    assert tp.encode_bom(tweet.raw_text, table).to_list() == \
        tp.encode_bom(permuted, table).to_list()


def test_lda(corpus):
    model = tp.train_lda(corpus, topic_count=2, alpha=1.0, iterations=30,
                         seed=3)
    theta = tp.encode_lda("w0 w1 w2", model, infer_iterations=40, seed=5)
    values = theta.to_list()
    assert all(v >= 0 for v in values)
    assert math.isclose(sum(values), 1.0, abs_tol=1e-9)


def test_probe_and_analysis(corpus):
    params = tp.TaskParams()
    params.min_instances = 40
    dataset = tp.build_task(corpus, tp.TaskKind.CONTENT, params, 3)
    table = tp.make_synthetic_word_table(corpus, 16, 5)
    provider = tp.bom_provider("bom", table)
    config = tp.TrainConfig()
    config.max_epochs = 5
    config.patience = 3
    model = tp.train_probe(dataset, provider, corpus, config)
    metrics = tp.evaluate_split(model, dataset, tp.Split.TEST, provider, corpus)
    assert 0.0 <= metrics.macro_f1 <= 1.0
    assert metrics.count == len(dataset.test)

    sensitivity = tp.permutation_sensitivity(
        model, dataset, tp.Split.TEST, provider, corpus, 11)
    assert sensitivity.delta_points == 0.0
    assert sensitivity.category == "invariant"


def test_spearman_and_macro_f1():
    assert math.isclose(tp.spearman([1, 2, 3], [10, 20, 30]), 1.0)
    assert math.isclose(
        tp.spearman([1, 2, 2, 4], [1, 3, 2, 4]), 0.9486832980505138,
        abs_tol=1e-12)
    assert math.isclose(tp.macro_f1([1, 1, 1, 1], [1, 0, 1, 0], 2), 1.0 / 3.0)


CLI = os.environ.get("TWEETPROBE_CLI")


@pytest.mark.skipif(not CLI, reason="TWEETPROBE_CLI not set")
def test_cli_end_to_end(tmp_path):
    corpus = tmp_path / "corpus.jsonl"
    words = tmp_path / "words.txt"
    synth = subprocess.run(
        [CLI, "synth", "--corpus", str(corpus), "--tweets", "260",
         "--seed", "5", "--word-vectors", str(words), "--dim", "12"],
        capture_output=True, text=True)
    assert synth.returncode == 0, synth.stderr

    config = {
        "corpus": str(corpus),
        "output_dir": str(tmp_path / "out"),
        "seed": 42,
        "task_params": {"min_instances": 40},
        "providers": [
            {"name": "bow", "kind": "bow", "max_terms": 3000},
            {"name": "bom", "kind": "bom", "word_vectors": str(words)},
        ],
        "train": {"max_epochs": 6, "patience": 3},
        "analysis": {"min_bin_count": 10},
    }
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config))
    run = subprocess.run([CLI, "run", "-c", str(config_path)],
                         capture_output=True, text=True)
    assert run.returncode == 0, run.stderr
    matrix = (tmp_path / "out" / "report" / "f1_matrix.tsv").read_text()
    assert matrix.splitlines()[0].startswith("model\t")
    assert len(matrix.splitlines()) == 3  # header + two providers

    report = json.loads(
        (tmp_path / "out" / "report" / "report.json").read_text())
    assert [r["provider"] for r in report["f1_matrix"]] == ["bom", "bow"]


@pytest.mark.skipif(not CLI, reason="TWEETPROBE_CLI not set")
def test_cli_seed_flag_overrides_config(tmp_path):
    corpus = tmp_path / "corpus.jsonl"
    subprocess.run([CLI, "synth", "--corpus", str(corpus), "--tweets", "120",
                    "--seed", "5"], capture_output=True, text=True)
    config = {
        "corpus": str(corpus),
        "output_dir": str(tmp_path / "o1"),
        "seed": 42,
        "providers": [{"name": "bow", "kind": "bow"}],
    }
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config))
    subprocess.run([CLI, "ingest", "-c", str(config_path)], check=True)
    digest_42 = (tmp_path / "o1" / "corpus.jsonl.digest").read_text()
    subprocess.run([CLI, "ingest", "-c", str(config_path), "--seed", "777",
                    "--out", str(tmp_path / "o2")], check=True)
    digest_777 = (tmp_path / "o2" / "corpus.jsonl.digest").read_text()
    assert digest_42 != digest_777


@pytest.mark.skipif(not CLI, reason="TWEETPROBE_CLI not set")
def test_cli_exit_codes(tmp_path):
    # config error: corpus file does not exist
    config = {
        "corpus": str(tmp_path / "missing.jsonl"),
        "output_dir": str(tmp_path / "out"),
        "providers": [{"name": "bow", "kind": "bow"}],
    }
    config_path = tmp_path / "bad.json"
    config_path.write_text(json.dumps(config))
    run = subprocess.run([CLI, "run", "-c", str(config_path)],
                         capture_output=True, text=True)
    assert run.returncode == 2
    assert not (tmp_path / "out").exists()  # no partial outputs

    # missing external vectors: request lists written, exit code 4
    corpus = tmp_path / "corpus.jsonl"
    subprocess.run([CLI, "synth", "--corpus", str(corpus), "--tweets", "260",
                    "--seed", "5"], capture_output=True, text=True)
    config = {
        "corpus": str(corpus),
        "output_dir": str(tmp_path / "out4"),
        "task_params": {"min_instances": 40},
        "providers": [
            {"name": "neural", "kind": "external",
             "vectors": str(tmp_path / "neural.txt")},
        ],
        "train": {"max_epochs": 4, "patience": 2},
    }
    config_path = tmp_path / "ext.json"
    config_path.write_text(json.dumps(config))
    run = subprocess.run([CLI, "run", "-c", str(config_path)],
                         capture_output=True, text=True)
    assert run.returncode == 4
    assert (tmp_path / "out4" / "requests" / "requests.tsv").exists()
    assert (tmp_path / "out4" / "requests" / "perm_requests.tsv").exists()
