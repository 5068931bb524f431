"""Desk-scale construction and certification toolkit for coned-off
hyperbolic complexes built from Ramanujan graph covers."""

__version__ = "0.1.0"
