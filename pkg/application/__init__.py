"""Application layer: pipelines built on the domain and spectral kernels.

Imports only domain ports, entities and the spectral package; no
infrastructure, no CLI.
"""
