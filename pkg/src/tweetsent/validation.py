"""Input validation helpers shared by the estimators."""
import numpy as np


def check_texts(X):
    """Return ``X`` as a list of str, rejecting non-string entries."""
    if isinstance(X, str):
        raise TypeError("expected a sequence of strings, got a single string")
    if isinstance(X, np.ndarray):
        X = X.ravel().tolist()
    texts = list(X)
    for i, t in enumerate(texts):
        if not isinstance(t, str):
            raise TypeError(f"element {i} is {type(t).__name__}, expected str")
    return texts


def check_token_lists(X):
    seqs = [list(s) for s in X]
    for i, s in enumerate(seqs):
        if any(not isinstance(t, str) or not t for t in s):
            raise TypeError(f"sequence {i} contains a non-string or empty token")
    return seqs


def check_labels(y, n_samples):
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"y must be 1-D, got shape {y.shape}")
    if y.shape[0] != n_samples:
        raise ValueError(f"X has {n_samples} samples but y has {y.shape[0]}")
    return y


def check_features(F, n_samples, n_feat):
    F = np.asarray(F, dtype=np.float64)
    if F.shape != (n_samples, n_feat):
        raise ValueError(f"features must have shape {(n_samples, n_feat)}, got {F.shape}")
    if not np.all(np.isfinite(F)):
        raise ValueError("features contain non-finite values")
    return F
