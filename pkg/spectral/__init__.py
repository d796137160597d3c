"""Spectral layer: harmonics, quadrature rules, band-limited operators and their norms.

Depends on the domain entities only; no I/O.
"""
