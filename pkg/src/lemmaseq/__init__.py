"""Sequence-to-sequence lemmatization with morphosyntactic context."""

__version__ = "0.1.0"
MODEL_FORMAT_VERSION = 1
