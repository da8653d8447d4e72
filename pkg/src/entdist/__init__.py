"""Deterministic entanglement distribution over collective-noise channels."""
