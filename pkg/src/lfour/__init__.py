"""lfour: desk-scale numerics for four-fold products of Dirichlet L-functions."""

__version__ = "0.1.0"
