"""Coupled three-junction flux qubits: charge-basis Hamiltonians and effective spin models."""

__version__ = "0.1.0"
