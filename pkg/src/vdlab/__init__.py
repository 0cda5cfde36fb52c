"""vdlab: numerical lab for deviations in value distribution theory."""

__version__ = "0.1.0"
