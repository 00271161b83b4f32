"""Premise/hypothesis NLI logit service."""

__version__ = "0.1.0"
