"""Numerical certification of ping-pong dynamics for matrix groups on projective spaces."""

__version__ = "0.1.0"
