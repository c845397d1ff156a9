"""Area-law certification toolkit for one-dimensional qubit chains."""

__version__ = "0.1.0"
