"""
Deterministic synthetic corpora for sanity and ablation experiments.

Each generator returns ``(texts, labels)`` lists and depends only on its
arguments.
"""
import numpy as np

LABELS = ("P", "N", "NEU", "NONE")

_NOISE = [f"ruido{i}" for i in range(30)]
_HASHTAG_STEMS = {"P": "Feliz", "N": "Triste", "NEU": "Normal", "NONE": "Nada"}
_HASHTAG_TAILS = ["Lunes", "Martes", "Viaje", "Cena", "Partido", "Examen", "Trabajo", "Fiesta"]


def separable_corpus(n=64, seed=0, tokens_per_tweet=6):
    """Four balanced classes, each marked by two of its own three signal words."""
    rng = np.random.default_rng(seed)
    signal = {lab: [f"{lab.lower()}sig{j}" for j in range(3)] for lab in LABELS}
    texts, labels = [], []
    for i in range(n):
        lab = LABELS[i % len(LABELS)]
        words = list(rng.choice(signal[lab], size=2, replace=False))
        words += list(rng.choice(_NOISE, size=tokens_per_tweet - 2))
        rng.shuffle(words)
        texts.append(" ".join(words))
        labels.append(lab)
    return texts, labels


def skewed_binary(n=300, minority_fraction=0.1, seed=0, tokens_per_tweet=6):
    """Binary task with a 9:1 label skew and overlapping class evidence.

    Both classes draw from the same cue words, the minority class just
    favours them more, so a frequency-blind model tends to predict the
    majority label.
    """
    rng = np.random.default_rng(seed)
    cues = ["malo", "peor", "horrible"]
    n_min = int(round(n * minority_fraction))
    labels = ["N"] * n_min + ["P"] * (n - n_min)
    texts = []
    for lab in labels:
        p_cue = 0.45 if lab == "N" else 0.12
        words = [str(rng.choice(cues)) if rng.random() < p_cue else str(rng.choice(_NOISE))
                 for _ in range(tokens_per_tweet)]
        texts.append(" ".join(words))
    order = rng.permutation(n)
    return [texts[i] for i in order], [labels[i] for i in order]


def hashtag_corpus(n=96, seed=0, with_hashtags=True):
    """Four classes whose only signal sits inside a unique PascalCase hashtag.

    Every tweet gets a distinct hashtag such as ``#FelizViaje17``, so the
    whole-hashtag token never repeats; only its segmented stem does. With
    ``with_hashtags=False`` the hashtags are omitted and every text is noise.
    """
    rng = np.random.default_rng(seed)
    texts, labels = [], []
    for i in range(n):
        lab = LABELS[i % len(LABELS)]
        words = [str(w) for w in rng.choice(_NOISE, size=4)]
        if with_hashtags:
            tag = f"#{_HASHTAG_STEMS[lab]}{_HASHTAG_TAILS[rng.integers(len(_HASHTAG_TAILS))]}{i}"
            words.insert(int(rng.integers(len(words) + 1)), tag)
        texts.append(" ".join(words))
        labels.append(lab)
    return texts, labels
