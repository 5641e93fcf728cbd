"""From-scratch survival classifiers and benchmark harness for the SEER breast-cancer cohort."""

__version__ = "0.1.0"
