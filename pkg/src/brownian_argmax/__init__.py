"""Maximizing partitions of multi-path Brownian sums and their Dirichlet law."""

__version__ = "0.1.0"
