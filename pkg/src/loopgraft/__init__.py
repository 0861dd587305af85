"""Protein loop-grafting pipeline: parsing, secondary structure, loop
geometry, elastic-network dynamics, grafting, and a session service."""

__version__ = "0.1.0"
