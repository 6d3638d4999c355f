"""Inscribed polygonal pegs in smooth closed curves."""

__version__ = "0.1.0"
