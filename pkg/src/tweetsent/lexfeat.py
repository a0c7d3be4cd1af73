"""
Hand-crafted lexicon and punctuation features.

Ten features per tweet, in this order::

    es_pos, es_neg, es_neu, en_pos, en_neg, en_neu,
    subjectivity, q_marks, exclaims, full_stops

Polarity counts come from pluggable word lists (one for Spanish, one for
English) and a static Spanish->English word table standing in for
sentence-level machine translation. Punctuation is counted on the raw text.
"""
import io
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import LexiconParseError
from .textprep import normalize
from .validation import check_texts

POLARITIES = ("POS", "NEG", "NEU")
FEATURE_NAMES = (
    "es_pos", "es_neg", "es_neu",
    "en_pos", "en_neg", "en_neu",
    "subjectivity", "q_marks", "exclaims", "full_stops",
)
N_FEATURES = len(FEATURE_NAMES)


@dataclass(frozen=True)
class SentimentLexicon:
    entries: dict = field(default_factory=dict)
    language: str = "es"

    def __len__(self):
        return len(self.entries)

    def get(self, word):
        return self.entries.get(word)


@dataclass(frozen=True)
class BilingualTable:
    entries: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class Resources:
    """Everything the feature extractor needs besides the tweet itself."""

    lex_es: SentimentLexicon = field(default_factory=lambda: SentimentLexicon(language="es"))
    lex_en: SentimentLexicon = field(default_factory=lambda: SentimentLexicon(language="en"))
    table: BilingualTable = field(default_factory=BilingualTable)


def _iter_lines(source):
    """Yield (line_no, text) pairs from a path, bytes, str or file object."""
    if isinstance(source, bytes):
        source = io.BytesIO(source)
    elif isinstance(source, str):
        with open(source, "rb") as fh:
            yield from _iter_lines(fh)
        return
    for line_no, raw in enumerate(source, start=1):
        line = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        line = line.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        yield line_no, line


def _split_pair(line_no, line):
    parts = line.split("\t")
    if len(parts) != 2:
        raise LexiconParseError(line_no, line, "expected exactly two tab-separated fields")
    key, value = parts[0].strip(), parts[1].strip()
    if not key or any(c.isspace() for c in key):
        raise LexiconParseError(line_no, line, "word is empty or contains whitespace")
    return key, value


def load_lexicon(source, language="es"):
    """Parse ``word<TAB>polarity`` lines; later duplicates win."""
    entries = {}
    for line_no, line in _iter_lines(source):
        word, polarity = _split_pair(line_no, line)
        if polarity not in POLARITIES:
            raise LexiconParseError(line_no, line, f"polarity must be one of {POLARITIES}")
        entries[word.lower()] = polarity
    return SentimentLexicon(entries=entries, language=language)


def load_bilingual_table(source):
    entries = {}
    for line_no, line in _iter_lines(source):
        es, en = _split_pair(line_no, line)
        if not en or any(c.isspace() for c in en):
            raise LexiconParseError(line_no, line, "translation is empty or contains whitespace")
        entries[es.lower()] = en.lower()
    return BilingualTable(entries=entries)


def load_resources(lex_es=None, lex_en=None, table=None):
    """Load whichever resource files are given; missing ones are empty."""
    return Resources(
        lex_es=load_lexicon(lex_es, "es") if lex_es else SentimentLexicon(language="es"),
        lex_en=load_lexicon(lex_en, "en") if lex_en else SentimentLexicon(language="en"),
        table=load_bilingual_table(table) if table else BilingualTable(),
    )


def polarity_counts(tokens, lex):
    counts = {"POS": 0, "NEG": 0, "NEU": 0}
    for tok in tokens:
        pol = lex.get(tok)
        if pol is not None:
            counts[pol] += 1
    return counts["POS"], counts["NEG"], counts["NEU"]


def english_polarity_counts(tokens, table, lex_en):
    translated = [table.entries[t] for t in tokens if t in table.entries]
    return polarity_counts(translated, lex_en)


def subjectivity(tokens, lex_es):
    """Fraction of tokens with POS or NEG Spanish polarity (0 when empty)."""
    if not tokens:
        return 0.0
    pos, neg, _ = polarity_counts(tokens, lex_es)
    return (pos + neg) / len(tokens)


def punctuation_counts(raw):
    """Counts of question marks, exclamations and full stops in raw text.

    The opening Spanish marks count too: ``¿Qué?!`` -> (2, 1, 0).
    """
    q = raw.count("?") + raw.count("¿")
    e = raw.count("!") + raw.count("¡")
    return q, e, raw.count(".")


def extract_features(raw, tokens, resources):
    es = polarity_counts(tokens, resources.lex_es)
    en = english_polarity_counts(tokens, resources.table, resources.lex_en)
    subj = subjectivity(tokens, resources.lex_es)
    punct = punctuation_counts(raw)
    return np.array([*es, *en, subj, *punct], dtype=np.float64)


class LexiconFeaturizer(BaseEstimator, TransformerMixin):
    """Transform raw tweets into an ``(n_samples, 10)`` feature matrix.

    Parameters
    ----------
    resources : Resources or None
        Lexicons and translation table. ``None`` means empty resources, in
        which case only the punctuation columns are non-zero.
    segment_hashtags : bool
        Passed to :func:`normalize` when tokenizing.
    """

    def __init__(self, resources=None, segment_hashtags=True):
        self.resources = resources
        self.segment_hashtags = segment_hashtags

    def fit(self, X, y=None):
        return self

    def transform(self, X, tokens=None):
        texts = check_texts(X)
        res = self.resources if self.resources is not None else Resources()
        if tokens is None:
            tokens = [normalize(t, self.segment_hashtags) for t in texts]
        out = np.zeros((len(texts), N_FEATURES))
        for i, (raw, toks) in enumerate(zip(texts, tokens)):
            out[i] = extract_features(raw, toks, res)
        return out
