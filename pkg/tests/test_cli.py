import csv
import json

import numpy as np
import pytest

from corpus import write_run
from tweetsent.cli import main
from tweetsent.config import load_config
from tweetsent.data import LABELS, TweetRecord, write_dataset
from tweetsent.pipeline import format_ablation, run_ablation
from tweetsent.synthetic import separable_corpus


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("cli")
    cfg = write_run(tmp)
    assert main(["train", "--config", str(cfg)]) == 0
    return tmp, cfg


class TestStats:
    def test_prints_table(self, tmp_path, capsys):
        write_dataset([TweetRecord("1", "ES", "x", "P"), TweetRecord("2", "UY", "y", None)],
                      tmp_path / "d.tsv")
        assert main(["stats", "--data", str(tmp_path / "d.tsv"), "--out", str(tmp_path / "o")]) == 0
        out = capsys.readouterr().out
        assert "records: 2  labeled: 1" in out
        assert (tmp_path / "o" / "stats.csv").read_text().splitlines()[1] == "ES,1,0,0,0,0,1"

    def test_bad_file(self, tmp_path, capsys):
        (tmp_path / "d.tsv").write_text("id\tdialect\tlabel\ttext\n1\tES\tPOS\tx\n")
        assert main(["stats", "--data", str(tmp_path / "d.tsv")]) == 1
        assert "line 2" in capsys.readouterr().err


class TestTrain:
    def test_artifacts(self, trained):
        tmp, _ = trained
        run = tmp / "run"
        for name in ("model.ckpt", "vocab.tsv", "feature_stats.tsv", "history.csv", "manifest.json"):
            assert (run / name).is_file(), name
        manifest = json.loads((run / "manifest.json").read_text())
        assert manifest["seed"] == 0 and manifest["labels"] == list(LABELS)
        assert manifest["config"]["seq_len"] == 8
        rows = list(csv.reader((run / "history.csv").open()))
        assert rows[0] == ["epoch", "train_loss", "val_loss", "val_acc", "seconds"]
        assert len(rows) - 1 == manifest["epochs_run"]
        stats_rows = (run / "feature_stats.tsv").read_text().splitlines()
        assert stats_rows[0] == "feature\tmean\tstd" and len(stats_rows) == 11
        name, mean, std = stats_rows[1].split("\t")
        assert name == "es_pos" and float(mean) >= 0 and float(std) > 0

    def test_missing_train_file(self, tmp_path, capsys):
        (tmp_path / "c.cfg").write_text("train_file=nope.tsv\n")
        assert main(["train", "--config", str(tmp_path / "c.cfg")]) == 1
        assert "no such file" in capsys.readouterr().err

    def test_seed_override(self, tmp_path):
        cfg = write_run(tmp_path, max_epochs=1)
        assert main(["train", "--config", str(cfg), "--seed", "7", "--out", str(tmp_path / "s7")]) == 0
        assert json.loads((tmp_path / "s7" / "manifest.json").read_text())["seed"] == 7


class TestEvalPredict:
    def test_eval(self, trained, capsys):
        tmp, _ = trained
        out = tmp / "eval"
        assert main(["eval", "--checkpoint", str(tmp / "run" / "model.ckpt"),
                     "--data", str(tmp / "train.tsv"), "--out", str(out)]) == 0
        table = capsys.readouterr().out.splitlines()
        assert [c.strip() for c in table[0].split("|")] == ["Metric", "System", "F1", "Precision", "Recall"]
        assert [line.split("|")[0].strip() for line in table[2:5]] == ["ES", "PE", "ALL"]
        rows = list(csv.reader((out / "metrics.csv").open()))
        assert rows[0] == ["dialect", "class", "precision", "recall", "f1", "support"]
        assert len(rows) == 1 + 3 * 5

    def test_eval_pooled(self, trained, capsys):
        tmp, _ = trained
        assert main(["eval", "--checkpoint", str(tmp / "run"), "--data", str(tmp / "train.tsv"),
                     "--no-group", "--out", str(tmp / "pooled")]) == 0
        assert len(capsys.readouterr().out.splitlines()) == 3

    def test_predict_text(self, trained, capsys):
        tmp, _ = trained
        assert main(["predict", "--checkpoint", str(tmp / "run"), "--text", "psig0 psig1", "--text", ""]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "id\tlabel\tp_P\tp_N\tp_NEU\tp_NONE"
        for line in lines[1:]:
            cells = line.split("\t")
            assert cells[1] in LABELS
            assert sum(map(float, cells[2:])) == pytest.approx(1.0, abs=1e-5)

    def test_predict_file(self, trained, capsys):
        tmp, _ = trained
        assert main(["predict", "--checkpoint", str(tmp / "run"), "--file", str(tmp / "train.tsv")]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 49 and lines[1].startswith("t0\t")

    def test_predict_is_repeatable(self, trained, capsys):
        tmp, _ = trained
        args = ["predict", "--checkpoint", str(tmp / "run"), "--text", "nsig2 ruido3"]
        main(args)
        first = capsys.readouterr().out
        main(args)
        assert capsys.readouterr().out == first


class TestAblate:
    def test_cli_table(self, tmp_path, capsys):
        cfg = write_run(tmp_path, max_epochs=2)
        assert main(["ablate", "--config", str(cfg)]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert [c.strip() for c in lines[0].split("|")] == ["System", "Train (%)", "Validation (%)"]
        body = [[c.strip() for c in line.split("|")] for line in lines[2:]]
        assert [r[0] for r in body] == ["Without", "With"]
        for r in body:
            assert all(0.0 <= float(v) <= 100.0 for v in r[1:])
        assert (tmp_path / "run" / "ablation.csv").is_file()

    def test_hashtag_free_corpus_identical(self, tmp_path):
        cfg = load_config(write_run(tmp_path, max_epochs=2))
        texts, labels = separable_corpus(32, seed=3)
        recs = [TweetRecord(str(i), "ES", t, lab) for i, (t, lab) in enumerate(zip(texts, labels))]
        rows = run_ablation(cfg, recs)
        np.testing.assert_allclose(rows[0][1:], rows[1][1:], atol=1e-12)

    def test_format(self):
        text = format_ablation([("Without", 0.6334, 0.4886), ("With", 0.6718, 0.5198)])
        assert [c.strip() for c in text.splitlines()[2].split("|")] == ["Without", "63.34", "48.86"]
