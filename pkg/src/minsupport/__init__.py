"""Sharp embedding constants and minimal-support certificates on radial domains."""

__version__ = "0.1.0"
