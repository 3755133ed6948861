"""Multi-camera picking-point localisation for spherical fruit: simulation, estimators and benchmark."""

__version__ = "0.1.0"
