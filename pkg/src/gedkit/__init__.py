"""Graph edit distance algorithms and a learned neural GED approximator."""

__version__ = "0.1.0"
