"""Vocabulary construction and fixed-length index encoding."""
from collections import Counter
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import EmptyCorpus, ParseError
from .validation import check_token_lists

PAD, UNK = 0, 1
PAD_TOKEN, UNK_TOKEN = "<pad>", "<unk>"


class Vocabulary:
    """Injective token -> index map with PAD=0 and UNK=1 reserved."""

    def __init__(self, tokens=()):
        self.index_to_token = [PAD_TOKEN, UNK_TOKEN, *tokens]
        self.token_to_index = {t: i for i, t in enumerate(self.index_to_token)}
        if len(self.token_to_index) != len(self.index_to_token):
            raise ValueError("duplicate tokens in vocabulary")

    def __len__(self):
        return len(self.index_to_token)

    def __contains__(self, token):
        return token in self.token_to_index

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.index_to_token == other.index_to_token

    def __getitem__(self, token):
        return self.token_to_index.get(token, UNK)

    def __repr__(self):
        return f"Vocabulary(size={len(self)})"

    def save(self, path, seq_len):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"V\t{len(self)}\n")
            fh.write(f"L\t{seq_len}\n")
            for i, tok in enumerate(self.index_to_token):
                fh.write(f"{tok}\t{i}\n")

    @classmethod
    def load(cls, path):
        """Read a vocabulary file; returns ``(vocab, seq_len)``."""
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        try:
            size = int(lines[0].split("\t")[1])
            seq_len = int(lines[1].split("\t")[1])
        except (IndexError, ValueError):
            raise ParseError(1, "vocabulary header must be 'V\\t<n>' and 'L\\t<n>'")
        tokens = []
        for line_no, line in enumerate(lines[2:], start=3):
            tok, _, idx = line.rpartition("\t")
            if not tok or int(idx) != len(tokens):
                raise ParseError(line_no, f"non-contiguous vocabulary entry {line!r}")
            tokens.append(tok)
        if tokens[:2] != [PAD_TOKEN, UNK_TOKEN] or len(tokens) != size:
            raise ParseError(3, "vocabulary does not match its header")
        return cls(tokens[2:]), seq_len


def build_vocabulary(corpus, min_freq=1, max_size=20000):
    """Rank tokens by (frequency desc, token asc) and keep the top ones.

    Tokens below ``min_freq`` are dropped and the result holds at most
    ``max_size`` entries including PAD and UNK.
    """
    if not corpus:
        raise EmptyCorpus("cannot build a vocabulary from an empty corpus")
    if min_freq < 1:
        raise ValueError("min_freq must be >= 1")
    if max_size < 2:
        raise ValueError("max_size must leave room for PAD and UNK")
    freq = Counter(t for seq in corpus for t in seq)
    freq.pop(PAD_TOKEN, None)
    freq.pop(UNK_TOKEN, None)
    ranked = sorted((t for t, c in freq.items() if c >= min_freq), key=lambda t: (-freq[t], t))
    return Vocabulary(ranked[: max_size - 2])


@dataclass(frozen=True)
class EncodedTweet:
    indices: tuple
    true_length: int


def encode(tokens, vocab, seq_len):
    if seq_len < 1:
        raise ValueError("seq_len must be >= 1")
    kept = [vocab[t] for t in tokens[:seq_len]]
    return EncodedTweet(tuple(kept + [PAD] * (seq_len - len(kept))), len(kept))


def decode(encoded, vocab):
    return [vocab.index_to_token[i] for i in encoded.indices[: encoded.true_length]]


def encode_batch(corpus, vocab, seq_len):
    """Encode many sequences; returns int arrays ``(n, L)`` and ``(n,)``."""
    idx = np.zeros((len(corpus), seq_len), dtype=np.int64)
    lengths = np.zeros(len(corpus), dtype=np.int64)
    for i, tokens in enumerate(corpus):
        enc = encode(tokens, vocab, seq_len)
        idx[i] = enc.indices
        lengths[i] = enc.true_length
    return idx, lengths


class SequenceEncoder(BaseEstimator, TransformerMixin):
    """Fit a vocabulary on token lists and emit padded index arrays."""

    def __init__(self, seq_len=50, min_freq=1, max_size=20000):
        self.seq_len = seq_len
        self.min_freq = min_freq
        self.max_size = max_size

    def fit(self, X, y=None):
        self.vocabulary_ = build_vocabulary(check_token_lists(X), self.min_freq, self.max_size)
        return self

    def transform(self, X):
        check_is_fitted(self, "vocabulary_")
        return encode_batch(check_token_lists(X), self.vocabulary_, self.seq_len)
