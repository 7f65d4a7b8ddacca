"""Toolkit for summarizing and evaluating massive product-review sets."""

__version__ = "0.1.0"
