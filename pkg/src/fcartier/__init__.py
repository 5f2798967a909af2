"""Exact Cartier-operator calculus and F-injectivity tests over prime fields."""

__version__ = "0.1.0"
