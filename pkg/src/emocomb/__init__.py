"""Emoji combination prediction: dataset extraction, probability models,
combination strategies and evaluation."""

__version__ = "0.1.0"
