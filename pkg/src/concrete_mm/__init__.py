"""Multi-model concrete compressive strength prediction and NSGA-II mixture design."""

__version__ = "0.1.0"
