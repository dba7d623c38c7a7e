"""Classical microcanonical entropy from configurational densities of states."""

__version__ = "0.1.0"
