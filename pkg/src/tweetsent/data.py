"""
Tweet dataset files and label distribution tables.

Format: UTF-8 TSV with the header ``id<TAB>dialect<TAB>label<TAB>text``.
``label`` is one of P, N, NEU, NONE, or ``-`` for unlabeled rows. The text
is the remainder of the line and may itself contain tabs.
"""
import csv
import io
import warnings
from dataclasses import dataclass
from typing import Optional

from .exceptions import DuplicateId, ParseError, UnknownLabel

LABELS = ("P", "N", "NEU", "NONE")
DIALECTS = ("ES", "PE", "CR", "UY", "MX")
DIALECT_ALIASES = {"UR": "UY"}
HEADER = ("id", "dialect", "label", "text")
UNLABELED = "-"
# column order of the published distribution tables
STATS_LABEL_ORDER = ("P", "NEU", "N", "NONE")


@dataclass(frozen=True)
class TweetRecord:
    id: str
    dialect: str
    text: str
    label: Optional[str] = None


def parse_dataset(text, source="<string>"):
    lines = text.split("\n")
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines or tuple(lines[0].rstrip("\r").split("\t")) != HEADER:
        raise ParseError(1, f"{source}: header must be {'<TAB>'.join(HEADER)!r}")
    records, seen = [], set()
    for line_no, line in enumerate(lines[1:], start=2):
        parts = line.rstrip("\r").split("\t", 3)
        if len(parts) != 4:
            raise ParseError(line_no, f"expected 4 tab-separated fields, got {len(parts)}")
        rid, dialect, label, tweet = parts
        if not rid:
            raise ParseError(line_no, "empty id")
        if rid in seen:
            raise DuplicateId(line_no, f"duplicate id {rid!r}")
        seen.add(rid)
        dialect = DIALECT_ALIASES.get(dialect, dialect)
        if dialect not in DIALECTS:
            raise ParseError(line_no, f"unknown dialect {dialect!r}")
        if label == UNLABELED:
            label = None
        elif label not in LABELS:
            raise UnknownLabel(line_no, f"unknown label {label!r}; expected one of {LABELS}")
        records.append(TweetRecord(rid, dialect, tweet, label))
    if not records:
        warnings.warn(f"{source}: dataset has a header but no records", stacklevel=2)
    return records


def load_dataset(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_dataset(fh.read(), source=str(path))


def dump_dataset(records):
    out = ["\t".join(HEADER)]
    for r in records:
        if "\n" in r.text or "\r" in r.text:
            raise ValueError(f"record {r.id!r}: text must not contain line breaks")
        out.append("\t".join((r.id, r.dialect, r.label or UNLABELED, r.text)))
    return "\n".join(out) + "\n"


def write_dataset(records, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dump_dataset(records))


@dataclass
class LabelStats:
    """Label counts per dialect (rows) in the column order P, NEU, N, NONE."""

    counts: dict
    unlabeled: dict
    n_records: int

    def row(self, dialect):
        return [self.counts[dialect][lab] for lab in STATS_LABEL_ORDER]

    def total(self, label=None):
        if label is None:
            return sum(sum(c.values()) for c in self.counts.values())
        return sum(c[label] for c in self.counts.values())

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dialect", *STATS_LABEL_ORDER, "unlabeled", "total"])
        for d in DIALECTS:
            row = self.row(d)
            w.writerow([d, *row, self.unlabeled[d], sum(row) + self.unlabeled[d]])
        all_row = [self.total(lab) for lab in STATS_LABEL_ORDER]
        unl = sum(self.unlabeled.values())
        w.writerow(["All", *all_row, unl, self.n_records])
        return buf.getvalue()

    def to_text(self):
        rows = list(csv.reader(io.StringIO(self.to_csv())))
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        lines = [" | ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]
        lines.insert(1, "-+-".join("-" * w for w in widths))
        lines.append(f"records: {self.n_records}  labeled: {self.total()}")
        return "\n".join(lines) + "\n"


def stats(records):
    counts = {d: {lab: 0 for lab in LABELS} for d in DIALECTS}
    unlabeled = {d: 0 for d in DIALECTS}
    for r in records:
        if r.label is None:
            unlabeled[r.dialect] += 1
        else:
            counts[r.dialect][r.label] += 1
    return LabelStats(counts, unlabeled, len(records))
