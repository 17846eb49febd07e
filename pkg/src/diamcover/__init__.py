"""Exact minimum clique cover for unit disk and unit ball graphs.

Rational geometry, a kappa-partition with weighted tree decompositions, a
configuration DP over relevant cliques, and two hardness instance generators.
"""

__version__ = "0.1.0"
