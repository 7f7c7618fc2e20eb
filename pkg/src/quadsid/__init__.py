"""Quadrotor grey-box modelling, subspace identification and control toolkit."""

__version__ = "0.1.0"
