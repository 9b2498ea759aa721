"""Connected k-median: LP relaxations, approximation pipelines, exact tree DP and oracles."""

__version__ = "0.1.0"
