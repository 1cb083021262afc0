"""sentpair: sentence-pair relation modeling with char-CNN + BiLSTM matching."""

__version__ = "0.1.0"

from sentpair.estimators import EntailmentClassifier, RelatednessRegressor

__all__ = ["RelatednessRegressor", "EntailmentClassifier", "__version__"]
