"""Fixed-energy inverse scattering reconstruction package."""

__version__ = "0.1.0"
