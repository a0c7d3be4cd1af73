"""
Tweet normalization: mention/URL removal, whitespace contraction and
PascalCase hashtag segmentation.

All functions are pure. ``normalize`` composes the individual steps in the
order: mentions, URLs, hashtags, whitespace, lowercase, split.
"""
import re

from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import MalformedHashtag
from .validation import check_texts

MENTION_RE = re.compile(r"@\w+")
URL_RE = re.compile(r"(?:https?://|www\.)\S*", re.IGNORECASE)
HASHTAG_RE = re.compile(r"#(\w+)")
_WS_RE = re.compile(r"\s+")

MAX_TWEET_CHARS = 240
SENTENCE_END = "?!."
SENTENCE_OPEN = "¿¡"


def strip_mentions(text):
    return MENTION_RE.sub("", text)


def strip_urls(text):
    return URL_RE.sub("", text)


def contract_whitespace(text):
    return _WS_RE.sub(" ", text).strip()


def _is_boundary(prev, cur, nxt):
    if prev.islower() and cur.isupper():
        return True
    if (prev.isalpha() and cur.isdigit()) or (prev.isdigit() and cur.isalpha()):
        return True
    # "HTMLParser" -> "HTML", "Parser": split before the last capital of a run
    return prev.isupper() and cur.isupper() and nxt is not None and nxt.islower()


def segment_hashtag(tag):
    """Split a hashtag into words using case and letter/digit transitions.

    >>> segment_hashtag("#TheWallStreet")
    ['The', 'Wall', 'Street']
    >>> segment_hashtag("#COVID19Update")
    ['COVID', '19', 'Update']

    The concatenation of the returned tokens always equals the tag body.
    """
    if not tag.startswith("#") or len(tag) < 2:
        raise MalformedHashtag(f"not a hashtag: {tag!r}")
    body = tag[1:]
    words = []
    start = 0
    for i in range(1, len(body)):
        nxt = body[i + 1] if i + 1 < len(body) else None
        if _is_boundary(body[i - 1], body[i], nxt):
            words.append(body[start:i])
            start = i
    words.append(body[start:])
    return words


def _expand_hashtags(text, segment):
    def repl(match):
        body = match.group(1)
        parts = segment_hashtag("#" + body) if segment else [body]
        return " " + " ".join(parts) + " "

    return HASHTAG_RE.sub(repl, text)


def _clean_token(token):
    # sentence marks are counted on the raw text, so they are dropped here
    prev = None
    # one strip can expose another, e.g. "¿@"
    while token != prev:
        prev = token
        token = token.lstrip("@#" + SENTENCE_OPEN).rstrip(SENTENCE_END)
    if not token or URL_RE.match(token):
        return None
    return token


def normalize(raw, segment_hashtags=True):
    """Normalize a raw tweet into a list of lowercase tokens.

    Parameters
    ----------
    raw : str
        Tweet text as retrieved.
    segment_hashtags : bool
        If true, hashtag bodies are split into words; otherwise the ``#`` is
        dropped and the body is kept as a single token.

    Returns
    -------
    list of str
        Possibly empty. No token contains whitespace, begins with ``@``/``#``
        or looks like a URL. Trailing ``? ! .`` and leading ``¿ ¡`` are
        stripped from tokens; other punctuation and emoji stay attached.
    """
    text = strip_mentions(raw)
    text = strip_urls(text)
    text = _expand_hashtags(text, segment_hashtags)
    text = contract_whitespace(text).lower()
    if not text:
        return []
    tokens = (_clean_token(t) for t in text.split(" "))
    return [t for t in tokens if t is not None]


class TweetNormalizer(BaseEstimator, TransformerMixin):
    """Stateless transformer mapping raw tweets to token lists."""

    def __init__(self, segment_hashtags=True):
        self.segment_hashtags = segment_hashtags

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        return [normalize(t, self.segment_hashtags) for t in check_texts(X)]
