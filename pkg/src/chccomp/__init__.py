"""CHC-COMP benchmark pipeline: format, categorize, select, run, and score."""

__version__ = "0.1.0"
