"""Exception types raised across the package."""


class TweetSentError(Exception):
    """Base class for all package errors."""


class MalformedHashtag(TweetSentError, ValueError):
    pass


class LexiconParseError(TweetSentError, ValueError):
    def __init__(self, line_no, content, reason="malformed line"):
        self.line_no = line_no
        self.content = content
        super().__init__(f"line {line_no}: {reason}: {content!r}")


class EmptyCorpus(TweetSentError, ValueError):
    pass


class IndexOutOfRange(TweetSentError, IndexError):
    pass


class DegenerateBatch(TweetSentError, ValueError):
    pass


class AllPositionsMasked(TweetSentError, ValueError):
    pass


class CacheMismatch(TweetSentError, ValueError):
    pass


class NonfiniteGradient(TweetSentError, FloatingPointError):
    pass


class ClassTooSmall(TweetSentError, ValueError):
    pass


class ZeroCount(TweetSentError, ValueError):
    pass


class EmptyDataset(TweetSentError, ValueError):
    pass


class CheckpointError(TweetSentError, ValueError):
    pass


class ParseError(TweetSentError, ValueError):
    def __init__(self, line_no, message):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class UnknownLabel(ParseError):
    pass


class DuplicateId(ParseError):
    pass


class ConfigError(TweetSentError, ValueError):
    pass
