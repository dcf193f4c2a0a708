"""Finite approximation of infinite groups: sofic witnesses, exact L2 invariants, amenable actions."""

__version__ = "0.1.0"
