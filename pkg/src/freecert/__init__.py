"""Exact-arithmetic certificates for projective dynamics, ping-pong free
subgroups, prodense-subgroup synthesis, and Bass-Serre tree actions.

Everything is computed over Q with a chosen place (archimedean or p-adic).
No floating point is used anywhere: metric comparisons happen on squared
quantities, square roots are only ever bounded or compared exactly, and
every Yes/Certified verdict carries evidence that can be re-checked.
"""

__version__ = "0.1.0"
