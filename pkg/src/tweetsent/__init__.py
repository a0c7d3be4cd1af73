"""Tweet sentiment classification with a from-scratch BiLSTM + attention network."""
from .encode import SequenceEncoder, Vocabulary, build_vocabulary, encode
from .estimator import BiLSTMSentimentClassifier
from .lexfeat import LexiconFeaturizer, Resources, extract_features, load_resources
from .textprep import TweetNormalizer, normalize, segment_hashtag

__version__ = "0.1.0"

__all__ = [
    "BiLSTMSentimentClassifier", "LexiconFeaturizer", "Resources", "SequenceEncoder",
    "TweetNormalizer", "Vocabulary", "build_vocabulary", "encode", "extract_features",
    "load_resources", "normalize", "segment_hashtag",
]
