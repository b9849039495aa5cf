"""Stationary analytic discs for quadric and perturbed-quadric generic submanifolds."""
__version__ = "0.1.0"
