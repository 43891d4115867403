"""Deterministic simulator and query engine for a network of courts issuing deontic rulings."""

__version__ = "0.1.0"
