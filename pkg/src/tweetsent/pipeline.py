"""End-to-end train / eval / predict / ablate runs built on the estimator."""
import csv
import io
import json
import os
from dataclasses import replace

import numpy as np

from .config import RunConfig
from .data import LABELS, load_dataset
from .estimator import BiLSTMSentimentClassifier
from .exceptions import EmptyDataset
from .lexfeat import load_resources
from .traineval.metrics import evaluate, format_table, metrics_csv
from .traineval.training import sub_rng

MANIFEST_FILE = "manifest.json"
HISTORY_FILE = "history.csv"


def resources_from_config(config):
    return load_resources(config.lex_es or None, config.lex_en or None, config.bilingual or None)


def merged_training_records(config):
    """Concatenate train and dev files and shuffle them with the run seed."""
    records = load_dataset(config.train_file)
    if config.dev_file:
        records += load_dataset(config.dev_file)
    if not records:
        raise EmptyDataset("no training records")
    unlabeled = [r.id for r in records if r.label is None]
    if unlabeled:
        raise ValueError(f"training data contains unlabeled records, e.g. {unlabeled[0]!r}")
    order = sub_rng(config.seed, "merge").permutation(len(records))
    return [records[i] for i in order]


def train(config, records=None, resources=None):
    """Fit a classifier from a ``RunConfig``; returns the fitted estimator."""
    if records is None:
        records = merged_training_records(config)
    if resources is None:
        resources = resources_from_config(config)
    clf = BiLSTMSentimentClassifier(**config.estimator_params(), resources=resources,
                                    classes=list(LABELS))
    return clf.fit([r.text for r in records], [r.label for r in records])


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_train(config, verbose=False):
    config.check_paths()
    records = merged_training_records(config)
    clf = train(config, records)
    if verbose:
        for e in range(len(clf.history_)):
            print(f"epoch {e + 1}: val_loss {clf.history_.val_loss[e]:.4f} "
                  f"val_acc {clf.history_.val_acc[e]:.4f}")
    os.makedirs(config.out_dir, exist_ok=True)
    clf.save(config.out_dir)
    clf.history_.to_csv(os.path.join(config.out_dir, HISTORY_FILE), config.record_timing)
    manifest = {
        "config": config.to_dict(),
        "seed": config.seed,
        "labels": list(LABELS),
        "n_records": len(records),
        "n_train": int(len(clf.train_indices_)),
        "n_val": int(len(clf.val_indices_)),
        "vocab_size": len(clf.vocabulary_),
        "class_weights": dict(zip(LABELS, clf.class_weights_.tolist())),
        "epochs_run": len(clf.history_),
        "best_epoch": clf.history_.best_epoch,
    }
    _write_json(os.path.join(config.out_dir, MANIFEST_FILE), manifest)
    return clf


def model_dir_of(checkpoint):
    return checkpoint if os.path.isdir(checkpoint) else os.path.dirname(os.path.abspath(checkpoint))


def load_trained(checkpoint):
    """Load a model directory written by ``cmd_train`` with its lexicons."""
    directory = model_dir_of(checkpoint)
    resources = None
    manifest_path = os.path.join(directory, MANIFEST_FILE)
    if os.path.exists(manifest_path):
        with open(manifest_path, encoding="utf-8") as fh:
            cfg = RunConfig(**json.load(fh)["config"])
        resources = resources_from_config(cfg)
    return BiLSTMSentimentClassifier.load(directory, resources=resources)


def cmd_eval(checkpoint, data_paths, group_by_dialect=True, out_dir=None):
    """Score labeled datasets; writes ``metrics.csv`` and ``metrics.txt``."""
    clf = load_trained(checkpoint)
    records = [r for p in data_paths for r in load_dataset(p)]
    records = [r for r in records if r.label is not None]
    if not records:
        raise EmptyDataset("no labeled records to evaluate")
    reports = evaluate(clf, [r.text for r in records], [r.label for r in records],
                       dialects=[r.dialect for r in records], group_by_dialect=group_by_dialect)
    out_dir = out_dir or model_dir_of(checkpoint)
    os.makedirs(out_dir, exist_ok=True)
    table = format_table(reports)
    with open(os.path.join(out_dir, "metrics.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write(metrics_csv(reports))
    with open(os.path.join(out_dir, "metrics.txt"), "w", encoding="utf-8") as fh:
        fh.write(table)
    return reports, table


def cmd_predict(checkpoint, texts, ids=None):
    """Return TSV lines ``id, label, p_P, p_N, p_NEU, p_NONE``."""
    clf = load_trained(checkpoint)
    probs = clf.predict_proba(texts)
    labels = clf.classes_[np.argmax(probs, axis=1)]
    ids = ids or [str(i + 1) for i in range(len(texts))]
    buf = io.StringIO()
    w = csv.writer(buf, delimiter="\t", lineterminator="\n")
    w.writerow(["id", "label", *[f"p_{c}" for c in clf.classes_]])
    for rid, lab, row in zip(ids, labels, probs):
        w.writerow([rid, lab, *[f"{p:.6f}" for p in row]])
    return buf.getvalue()


def _split_accuracy(clf, texts, labels, rows):
    if len(rows) == 0:
        return float("nan")
    return float(clf.score([texts[i] for i in rows], [labels[i] for i in rows]))


def run_ablation(config, records=None, resources=None):
    """Train with hashtag segmentation off and on; returns accuracy rows.

    Rows are ``(system, train_accuracy, validation_accuracy)`` for
    "Without" and "With", both trained from the same seed and split.
    """
    if records is None:
        records = merged_training_records(config)
    if resources is None:
        resources = resources_from_config(config)
    texts = [r.text for r in records]
    labels = [r.label for r in records]
    rows = []
    for name, flag in (("Without", False), ("With", True)):
        clf = train(replace(config, segment_hashtags=flag), records, resources)
        rows.append((name, _split_accuracy(clf, texts, labels, clf.train_indices_),
                     _split_accuracy(clf, texts, labels, clf.val_indices_)))
    return rows


def format_ablation(rows):
    header = ("System", "Train (%)", "Validation (%)")
    body = [(name, f"{100 * tr:.2f}", f"{100 * va:.2f}") for name, tr, va in rows]
    widths = [max(len(r[i]) for r in [header, *body]) for i in range(3)]
    lines = [" | ".join(c.ljust(w) for c, w in zip(r, widths)) for r in [header, *body]]
    lines.insert(1, "-+-".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def ablation_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["system", "train_pct", "val_pct"])
    for name, tr, va in rows:
        w.writerow([name, f"{100 * tr:.4f}", f"{100 * va:.4f}"])
    return buf.getvalue()


def cmd_ablate(config):
    config.check_paths()
    rows = run_ablation(config)
    os.makedirs(config.out_dir, exist_ok=True)
    with open(os.path.join(config.out_dir, "ablation.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write(ablation_csv(rows))
    table = format_ablation(rows)
    with open(os.path.join(config.out_dir, "ablation.txt"), "w", encoding="utf-8") as fh:
        fh.write(table)
    return rows, table
