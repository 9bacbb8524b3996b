"""Soliton dynamics for the nonlinear Schroedinger equation with a potential."""

__version__ = "0.1.0"
