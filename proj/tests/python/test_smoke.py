import json
import math

import pytest

import urlnet


def test_tokenize_words():
    assert urlnet.tokenize_words("http://test.com/a.exe") == ["http", "test", "com", "a", "exe"]
    assert urlnet.tokenize_words("http://test.com/a.exe", True)[:4] == ["http", ":", "/", "/"]


def test_auc_matches_pair_counting():
    scores = [0.1, 0.4, 0.35, 0.8]
    labels = [-1, -1, 1, 1]
    assert urlnet.roc_auc(scores, labels) == 0.75
    assert urlnet.tpr_at_fpr(scores, labels, 0.25) == 0.5
    assert urlnet.tpr_at_fpr(scores, labels, 0.5) == 1.0


def test_synthetic_corpus_is_seeded():
    a = urlnet.synthetic_corpus(count=200, seed=3)
    assert len(a) == 200
    assert sum(1 for label, _ in a if label == 1) == 10
    assert a == urlnet.synthetic_corpus(count=200, seed=3)


def test_train_score_embed_round_trip(tmp_path):
    corpus = tmp_path / "all.tsv"
    urlnet.cli("synth", "--out", corpus, "--count", "300", "--seed", "2", "--malicious-fraction", "0.2")
    model_path = tmp_path / "m.urlnet"
    urlnet.cli("train", "--train", corpus, "--out", model_path, "--variant", "full", "--special-words",
               "--char-level-words", "--embedding-dim", "4", "--filters", "4", "--branch-fc", "8",
               "--l1", "40", "--l2", "12", "--l3", "6", "--epochs", "1", "--seed", "7")

    model = urlnet.Model.load(str(model_path))
    urls = ["http://paypal.com/login", "http://1234.evil.ru/a.exe"]
    scores = model.score(urls)
    assert len(scores) == 2 and all(math.isfinite(s) for s in scores)
    assert model.score(urls, threads=2) == scores
    assert urlnet.model_config(model)["variant"] == "full"
    assert json.loads(model.metadata_json)["seed"] == 7

    vectors = model.embed(urls)
    assert [len(v) for v in vectors] == [16, 16]

    copy = tmp_path / "copy.urlnet"
    model.save(str(copy))
    assert urlnet.Model.load(str(copy)).score(urls) == scores


def test_errors_surface_as_exceptions(tmp_path):
    with pytest.raises(urlnet.DataError):
        urlnet.Model.load(str(tmp_path / "missing.urlnet"))
    code, _, err = urlnet.run_cli(["bogus"])
    assert code == 1 and err
    with pytest.raises(urlnet.Error):
        urlnet.cli("bogus")
