"""Planning and simulation toolkit for multi-object large-object rearrangement."""

__version__ = "0.1.0"
