"""Quasirandomness and regularity statistics for definable subsets of finite groups."""

__version__ = "0.1.0"
