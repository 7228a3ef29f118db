"""Large eigenvalue gaps of CUE and GUE: exact hole probabilities, samplers and Gumbel checks."""

__version__ = "0.1.0"
