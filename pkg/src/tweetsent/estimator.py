"""
scikit-learn compatible classifier over raw tweet strings.

    >>> clf = BiLSTMSentimentClassifier(max_epochs=20).fit(texts, labels)
    >>> clf.predict(["que buen dia"])

``fit`` holds out a stratified validation split, learns the vocabulary and
feature standardization on the training part only, and trains with Adam and
early stopping. The fitted network lives in ``state_``.
"""
import os

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .encode import SequenceEncoder, Vocabulary
from .lexfeat import N_FEATURES, FEATURE_NAMES, LexiconFeaturizer
from .neural import ModelConfig, init_state, load_checkpoint, save_checkpoint
from .textprep import TweetNormalizer
from .traineval.optim import AdamState
from .traineval.training import (
    EncodedData,
    class_weights,
    predict_proba_batched,
    run_training,
    stratified_split,
    sub_rng,
)
from .validation import check_labels, check_texts

CHECKPOINT_FILE = "model.ckpt"
VOCAB_FILE = "vocab.tsv"
FEATURE_STATS_FILE = "feature_stats.tsv"


class BiLSTMSentimentClassifier(ClassifierMixin, BaseEstimator):
    """Stacked BiLSTM + attention tweet classifier.

    Parameters
    ----------
    seq_len : int
        Tokens kept per tweet; longer tweets are truncated, shorter padded.
    d_emb, h1, h2 : int
        Embedding width and hidden units of the two BiLSTM layers.
    dropout, recurrent_dropout : float
        Per-sequence dropout rates of the first BiLSTM layer.
    l2_attn_W, l2_attn_b : float
        L2 penalties on the attention projection and its bias.
    lr, batch_size, max_epochs : training schedule for Adam.
    train_ratio : float
        Per-class fraction of ``fit`` data used for training; the rest
        drives early stopping.
    class_weight : "balanced", None or sequence
        "balanced" weights class c by ``N / (K * n_c)`` on the training part.
    segment_hashtags : bool
        Split PascalCase hashtags into words during normalization.
    use_features : bool
        Concatenate the ten lexicon/punctuation features before the output
        layer.
    min_freq, max_size : vocabulary limits.
    resources : lexfeat.Resources or None
    classes : sequence or None
        Fixed output order of labels; defaults to ``np.unique(y)``.
    random_state : int
        Root seed; split, init, shuffle and dropout use derived streams.
    """

    def __init__(self, seq_len=50, d_emb=128, h1=128, h2=64, dropout=0.4,
                 recurrent_dropout=0.4, l2_attn_W=1e-4, l2_attn_b=1e-4, lr=0.0005,
                 batch_size=32, max_epochs=100, train_ratio=0.7, class_weight="balanced",
                 segment_hashtags=True, use_features=True, min_freq=1, max_size=20000,
                 resources=None, classes=None, random_state=0, verbose=False):
        self.seq_len = seq_len
        self.d_emb = d_emb
        self.h1 = h1
        self.h2 = h2
        self.dropout = dropout
        self.recurrent_dropout = recurrent_dropout
        self.l2_attn_W = l2_attn_W
        self.l2_attn_b = l2_attn_b
        self.lr = lr
        self.batch_size = batch_size
        self.max_epochs = max_epochs
        self.train_ratio = train_ratio
        self.class_weight = class_weight
        self.segment_hashtags = segment_hashtags
        self.use_features = use_features
        self.min_freq = min_freq
        self.max_size = max_size
        self.resources = resources
        self.classes = classes
        self.random_state = random_state
        self.verbose = verbose

    # -- preprocessing -------------------------------------------------------

    def _tokens_and_features(self, texts):
        tokens = TweetNormalizer(self.segment_hashtags).transform(texts)
        if self.use_features:
            feats = LexiconFeaturizer(self.resources, self.segment_hashtags).transform(texts, tokens)
        else:
            feats = np.zeros((len(texts), 0))
        return tokens, feats

    def _encode(self, X, y=None):
        texts = check_texts(X)
        tokens, feats = self._tokens_and_features(texts)
        idx, lengths = self.encoder_.transform(tokens)
        if y is None:
            y = np.zeros(len(texts), dtype=np.int64)
        return EncodedData(idx, lengths, feats, y)

    def _class_weights(self, y_train, n_classes):
        if self.class_weight is None:
            return np.ones(n_classes)
        if isinstance(self.class_weight, str):
            if self.class_weight != "balanced":
                raise ValueError(f"unknown class_weight {self.class_weight!r}")
            return class_weights(np.bincount(y_train, minlength=n_classes))
        w = np.asarray(self.class_weight, dtype=np.float64)
        if w.shape != (n_classes,) or np.any(w <= 0):
            raise ValueError("class_weight must hold one positive weight per class")
        return w

    # -- fit / predict -------------------------------------------------------

    def fit(self, X, y):
        texts = check_texts(X)
        y = check_labels(y, len(texts))
        self.classes_ = np.asarray(self.classes if self.classes is not None else np.unique(y))
        lookup = {c: k for k, c in enumerate(self.classes_.tolist())}
        unknown = sorted(set(y.tolist()) - set(lookup))
        if unknown:
            raise ValueError(f"labels {unknown} are not in classes {self.classes_.tolist()}")
        y_idx = np.array([lookup[v] for v in y.tolist()], dtype=np.int64)
        K = len(self.classes_)

        train_idx, val_idx = stratified_split(y_idx, self.train_ratio, self.random_state)
        tokens, feats = self._tokens_and_features(texts)
        self.encoder_ = SequenceEncoder(self.seq_len, self.min_freq, self.max_size)
        self.encoder_.fit([tokens[i] for i in train_idx])
        idx, lengths = self.encoder_.transform(tokens)
        data = EncodedData(idx, lengths, feats, y_idx)

        config = ModelConfig(
            vocab_size=len(self.encoder_.vocabulary_), seq_len=self.seq_len, d_emb=self.d_emb,
            h1=self.h1, h2=self.h2, n_feat=feats.shape[1], n_classes=K, dropout=self.dropout,
            recurrent_dropout=self.recurrent_dropout, l2_attn_W=self.l2_attn_W,
            l2_attn_b=self.l2_attn_b, seed=self.random_state)
        state = init_state(config, sub_rng(self.random_state, "init"))
        if feats.shape[1]:
            train_feats = feats[train_idx]
            std = train_feats.std(axis=0)
            state.buffers["feat.mean"] = train_feats.mean(axis=0)
            state.buffers["feat.std"] = np.where(std > 1e-12, std, 1.0)

        self.class_weights_ = self._class_weights(y_idx[train_idx], K)
        callback = self._log_epoch if self.verbose else None
        self.state_, self.history_, self.adam_ = run_training(
            state, data.take(train_idx), data.take(val_idx), self.class_weights_,
            lr=self.lr, batch_size=self.batch_size, max_epochs=self.max_epochs,
            seed=self.random_state, callback=callback)
        self.train_indices_ = train_idx
        self.val_indices_ = val_idx
        return self

    @staticmethod
    def _log_epoch(epoch, history):
        print(f"epoch {epoch:3d}  train_loss {history.train_loss[-1]:.4f}  "
              f"val_loss {history.val_loss[-1]:.4f}  val_acc {history.val_acc[-1]:.4f}")

    def predict_proba(self, X):
        check_is_fitted(self, "state_")
        return predict_proba_batched(self.state_, self._encode(X))

    def predict(self, X):
        # argmax takes the first maximum, so ties go to the lowest class index
        probs = self.predict_proba(X)
        return self.classes_[np.argmax(probs, axis=1)]

    @property
    def vocabulary_(self):
        check_is_fitted(self, "encoder_")
        return self.encoder_.vocabulary_

    # -- persistence -----------------------------------------------------------

    def save(self, directory):
        """Write checkpoint, vocabulary and feature statistics to ``directory``."""
        check_is_fitted(self, "state_")
        os.makedirs(directory, exist_ok=True)
        params = {k: v for k, v in self.get_params().items() if k != "resources"}
        extra = {
            "estimator_params": params,
            "classes": self.classes_.tolist(),
            "class_weights": self.class_weights_.tolist(),
        }
        save_checkpoint(os.path.join(directory, CHECKPOINT_FILE), self.state_, self.adam_, extra)
        self.vocabulary_.save(os.path.join(directory, VOCAB_FILE), self.seq_len)
        write_feature_stats(os.path.join(directory, FEATURE_STATS_FILE), self.state_)
        return self

    @classmethod
    def load(cls, directory, resources=None):
        state, adam, manifest = load_checkpoint(os.path.join(directory, CHECKPOINT_FILE))
        extra = manifest["extra"]
        clf = cls(**extra["estimator_params"], resources=resources)
        vocab, seq_len = Vocabulary.load(os.path.join(directory, VOCAB_FILE))
        if seq_len != state.config.seq_len or len(vocab) != state.config.vocab_size:
            raise ValueError("vocabulary file does not match the checkpoint")
        clf.encoder_ = SequenceEncoder(seq_len, clf.min_freq, clf.max_size)
        clf.encoder_.vocabulary_ = vocab
        clf.classes_ = np.asarray(extra["classes"])
        clf.class_weights_ = np.asarray(extra["class_weights"])
        clf.state_ = state
        clf.adam_ = AdamState(lr=clf.lr, m=adam["m"], v=adam["v"], t=adam["t"]) if adam else AdamState(lr=clf.lr)
        return clf


def write_feature_stats(path, state):
    mean, std = state.buffers["feat.mean"], state.buffers["feat.std"]
    names = FEATURE_NAMES if len(mean) == N_FEATURES else [f"f{i}" for i in range(len(mean))]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("feature\tmean\tstd\n")
        for name, m, s in zip(names, mean, std):
            fh.write(f"{name}\t{float(m)!r}\t{float(s)!r}\n")
