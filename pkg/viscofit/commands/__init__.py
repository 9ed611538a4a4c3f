"""Subcommands of the viscofit CLI."""

from . import distance, identify, montecarlo, simulate

__all__ = [
    "distance",
    "identify",
    "montecarlo",
    "simulate",
]
