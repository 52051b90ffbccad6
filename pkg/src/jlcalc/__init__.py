"""Exact computations around Johnson and Johnson-Levine homomorphisms."""

__version__ = "0.1.0"
