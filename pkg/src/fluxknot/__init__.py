"""Riemannian geometry and kinematic-dynamo numerics for knotted magnetic flux tubes."""

__version__ = "0.1.0"
