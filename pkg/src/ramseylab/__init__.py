"""Workbench for structural Ramsey classes and generalized indiscernibles."""

__version__ = "0.1.0"
