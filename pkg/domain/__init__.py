"""Domain layer: value types and the algebra of measures on Isom(R^3).

No imports from infrastructure or the CLI.  numpy and scipy are allowed for
the numerical kernels; nothing here performs I/O.
"""
